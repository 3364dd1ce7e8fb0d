//! Cell-centred rasterization of a mesostructure and per-phase material maps.
//!
//! Cells are stored row-major with row `j` counted upward from `y = 0`, so
//! cell `(i, j)` has centroid `((i + 0.5) h, (j + 0.5) h)` and flat index
//! `j * n + i`.

mod materials;
mod pgm;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{bounding_box, Mesostructure, Point};

pub use materials::{assign_materials, MaterialFieldMaps, MaterialTable, PhaseProperties};
pub use pgm::{encode_pgm, write_pgm};

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("material table has no record for phase {0}")]
    MissingPhase(Phase),
    #[error("invalid properties for phase {phase}: {message}")]
    InvalidProperties { phase: Phase, message: String },
    #[error("material table parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub n_cells: usize,
    pub domain_length: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n_cells: 333, domain_length: 50.0 }
    }
}

impl GridSpec {
    pub fn new(n_cells: usize, domain_length: f64) -> Result<Self, RasterError> {
        let g = GridSpec { n_cells, domain_length };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), RasterError> {
        if self.n_cells < 16 {
            return Err(RasterError::InvalidGrid(format!("n_cells must be at least 16, got {}", self.n_cells)));
        }
        if !(self.domain_length > 0.0 && self.domain_length.is_finite()) {
            return Err(RasterError::InvalidGrid(format!("domain_length must be positive, got {}", self.domain_length)));
        }
        Ok(())
    }

    pub fn cell_size(&self) -> f64 {
        self.domain_length / self.n_cells as f64
    }

    pub fn cell_count(&self) -> usize {
        self.n_cells * self.n_cells
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point {
        let h = self.cell_size();
        Point::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Matrix,
    Itz,
    Aggregate,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Matrix, Phase::Itz, Phase::Aggregate];

    pub fn code(self) -> u8 {
        match self {
            Phase::Matrix => 0,
            Phase::Itz => 1,
            Phase::Aggregate => 2,
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Matrix => "matrix",
            Phase::Itz => "itz",
            Phase::Aggregate => "aggregate",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMap {
    pub n: usize,
    pub labels: Vec<Phase>,
}

impl PhaseMap {
    pub fn uniform(n: usize, phase: Phase) -> Self {
        PhaseMap { n, labels: vec![phase; n * n] }
    }

    pub fn get(&self, i: usize, j: usize) -> Phase {
        self.labels[j * self.n + i]
    }

    pub fn count(&self, phase: Phase) -> usize {
        self.labels.iter().filter(|&&p| p == phase).count()
    }
}

/// Inside or on the boundary of a convex counter-clockwise ring.
pub fn point_in_convex_polygon(p: Point, ring: &[Point]) -> bool {
    let n = ring.len();
    (0..n).all(|k| {
        let a = ring[k];
        let b = ring[(k + 1) % n];
        (b - a).cross(p - a) >= -1e-12
    })
}

pub fn rasterize(meso: &Mesostructure, grid: &GridSpec) -> PhaseMap {
    let n = grid.n_cells;
    let h = grid.cell_size();
    // Cell-index ranges covered by each outer ring's bounding box, padded by
    // one cell so the boundary tolerance of the inclusion test is honoured.
    let spans: Vec<(usize, usize, usize, usize)> = meso
        .aggregates
        .iter()
        .map(|a| {
            let (lo, hi) = bounding_box(&a.outer);
            let first = |v: f64| ((v / h - 1.5).ceil().max(0.0) as usize).min(n);
            let last = |v: f64| ((v / h + 0.5).floor() + 1.0).clamp(0.0, n as f64) as usize;
            (first(lo.x), last(hi.x), first(lo.y), last(hi.y))
        })
        .collect();

    let mut labels = vec![Phase::Matrix; n * n];
    labels.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        for (agg, &(i0, i1, j0, j1)) in meso.aggregates.iter().zip(&spans) {
            if j < j0 || j >= j1 {
                continue;
            }
            for (i, cell) in row.iter_mut().enumerate().take(i1).skip(i0) {
                let c = grid.cell_center(i, j);
                if point_in_convex_polygon(c, &agg.inner) {
                    *cell = Phase::Aggregate;
                } else if point_in_convex_polygon(c, &agg.outer) && *cell == Phase::Matrix {
                    *cell = Phase::Itz;
                }
            }
        }
    });
    PhaseMap { n, labels }
}

/// 1 where the label is ITZ, 0 elsewhere.
pub fn itz_mask(phase: &PhaseMap) -> Vec<u8> {
    phase.labels.iter().map(|&p| u8::from(p == Phase::Itz)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AggregatePolygon, GeometryConfig};

    fn unit_square() -> Vec<Point> {
        vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)]
    }

    #[test]
    fn point_in_square() {
        assert!(point_in_convex_polygon(Point::new(0.5, 0.5), &unit_square()));
        assert!(point_in_convex_polygon(Point::new(1.0, 0.5), &unit_square()));
        assert!(!point_in_convex_polygon(Point::new(2.0, 2.0), &unit_square()));
    }

    #[test]
    fn empty_is_all_matrix() {
        let meso = Mesostructure::empty(GeometryConfig::default());
        let map = rasterize(&meso, &GridSpec::default());
        assert_eq!(map.count(Phase::Matrix), 333 * 333);
        assert!(itz_mask(&map).iter().all(|&m| m == 0));
    }

    #[test]
    fn square_ring_mask() {
        // Outer [2,6]^2, inner [3,5]^2 on a 16-cell grid of side 8 (h = 0.5).
        let sq = |a: f64, b: f64| {
            vec![Point::new(a, a), Point::new(b, a), Point::new(b, b), Point::new(a, b)]
        };
        let agg = AggregatePolygon::from_rings(sq(2.0, 6.0), sq(3.0, 5.0)).unwrap();
        let cfg = GeometryConfig { domain_length: 8.0, itz_thickness: 1.0, ..Default::default() };
        let mut meso = Mesostructure::empty(cfg);
        meso.aggregates.push(agg);
        let grid = GridSpec::new(16, 8.0).unwrap();
        let map = rasterize(&meso, &grid);
        let mask = itz_mask(&map);
        for j in 0..16 {
            for i in 0..16 {
                // Centroid index range: outer covers cells 4..12, inner 6..10.
                let in_outer = (4..12).contains(&i) && (4..12).contains(&j);
                let in_inner = (6..10).contains(&i) && (6..10).contains(&j);
                assert_eq!(mask[j * 16 + i], u8::from(in_outer && !in_inner), "cell ({i},{j})");
                assert_eq!(map.get(i, j) == Phase::Aggregate, in_inner);
            }
        }
        assert_eq!(mask.iter().map(|&m| m as usize).sum::<usize>(), 64 - 16);
        assert_eq!(map.count(Phase::Itz), 48);
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(15, 50.0).is_err());
        assert!(GridSpec::new(16, 0.0).is_err());
        assert!((GridSpec::default().cell_size() - 50.0 / 333.0).abs() < 1e-15);
    }
}
