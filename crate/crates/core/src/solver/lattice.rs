/// Structured grid of square cells of side `h`.
///
/// Node `(i, j)` sits at `(i h, j h)` with flat index `j (nx + 1) + i`;
/// cell `(i, j)` has flat index `j nx + i` and corner nodes in the order
/// `(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
}

/// Offsets of the four corners of a cell relative to its lower-left node.
pub(crate) const CORNERS: [(usize, usize); 4] = [(0, 0), (1, 0), (1, 1), (0, 1)];

impl Lattice {
    pub fn new(nx: usize, ny: usize, h: f64) -> Self {
        Lattice { nx, ny, h }
    }

    pub fn square(n: usize, length: f64) -> Self {
        Lattice { nx: n, ny: n, h: length / n as f64 }
    }

    pub fn node_cols(&self) -> usize {
        self.nx + 1
    }

    pub fn node_count(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn width(&self) -> f64 {
        self.nx as f64 * self.h
    }

    pub fn height(&self) -> f64 {
        self.ny as f64 * self.h
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn node_ij(&self, n: usize) -> (usize, usize) {
        (n % (self.nx + 1), n / (self.nx + 1))
    }

    pub fn cell_nodes(&self, c: usize) -> [usize; 4] {
        let (i, j) = (c % self.nx, c / self.nx);
        CORNERS.map(|(di, dj)| self.node(i + di, j + dj))
    }

    /// Cells touching node `n`, paired with the node's corner slot in each.
    pub fn node_cells(&self, n: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (i, j) = self.node_ij(n);
        CORNERS.iter().enumerate().filter_map(move |(slot, &(di, dj))| {
            let ci = i.checked_sub(di)?;
            let cj = j.checked_sub(dj)?;
            (ci < self.nx && cj < self.ny).then(|| (cj * self.nx + ci, slot))
        })
    }

    /// Cell-mean of a nodal field.
    pub fn cell_mean(&self, nodal: &[f64]) -> Vec<f64> {
        (0..self.cell_count())
            .map(|c| self.cell_nodes(c).iter().map(|&n| nodal[n]).sum::<f64>() / 4.0)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacency() {
        let l = Lattice::new(3, 2, 1.0);
        assert_eq!(l.node_count(), 12);
        assert_eq!(l.cell_nodes(4), [5, 6, 10, 9]);
        let around: Vec<_> = l.node_cells(5).collect();
        assert_eq!(around, vec![(4, 0), (3, 1), (0, 2), (1, 3)]);
        assert_eq!(l.node_cells(0).count(), 1);
        assert_eq!(l.node_cells(11).collect::<Vec<_>>(), vec![(5, 2)]);
        for n in 0..l.node_count() {
            for (c, slot) in l.node_cells(n) {
                assert_eq!(l.cell_nodes(c)[slot], n);
            }
        }
    }
}
