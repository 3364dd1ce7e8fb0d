use rayon::prelude::*;

use super::element::centroid_strain;
use super::lattice::CORNERS;
use super::linalg::{dot, pcg, pcg_with, CHUNK};
use super::multigrid::Multigrid;
use super::model::Medium;
use super::{Lattice, SolverError};

/// Assembled displacement stiffness in node-stencil form: for every node,
/// a 2x2 block for each of its nine neighbours (row-major, offsets
/// `(di, dj)` in `{-1, 0, 1}^2` enumerated with `di` fastest).
pub struct StiffnessOperator {
    lattice: Lattice,
    pub(crate) stencil: Vec<[f64; 36]>,
}

/// Boundary data: roller on the left and bottom edges, prescribed
/// horizontal displacement on the right edge.
#[derive(Debug, Clone)]
pub struct Constraints {
    /// 1.0 for free dofs, 0.0 for prescribed ones.
    pub free: Vec<f64>,
    pub left_nodes: Vec<usize>,
    pub right_nodes: Vec<usize>,
    pub bottom_nodes: Vec<usize>,
}

impl Constraints {
    pub fn rollers(lattice: &Lattice) -> Self {
        let left_nodes: Vec<usize> = (0..=lattice.ny).map(|j| lattice.node(0, j)).collect();
        let right_nodes: Vec<usize> = (0..=lattice.ny).map(|j| lattice.node(lattice.nx, j)).collect();
        let bottom_nodes: Vec<usize> = (0..=lattice.nx).map(|i| lattice.node(i, 0)).collect();
        let mut free = vec![1.0; 2 * lattice.node_count()];
        for &n in left_nodes.iter().chain(&right_nodes) {
            free[2 * n] = 0.0;
        }
        for &n in &bottom_nodes {
            free[2 * n + 1] = 0.0;
        }
        Constraints { free, left_nodes, right_nodes, bottom_nodes }
    }

    /// Overwrite the prescribed components of `u`.
    pub fn impose(&self, u: &mut [f64], displacement: f64) {
        for &n in &self.left_nodes {
            u[2 * n] = 0.0;
        }
        for &n in &self.bottom_nodes {
            u[2 * n + 1] = 0.0;
        }
        for &n in &self.right_nodes {
            u[2 * n] = displacement;
        }
    }
}

impl StiffnessOperator {
    /// Assemble with cell scale factors (modulus times degradation).
    pub fn assemble(medium: &Medium, cell_scale: &[f64]) -> Self {
        let lattice = medium.lattice;
        let mut stencil = vec![[0.0; 36]; lattice.node_count()];
        stencil.par_iter_mut().with_min_len(256).enumerate().for_each(|(n, coef)| {
            for (c, slot) in lattice.node_cells(n) {
                let t = &medium.templates[medium.template_of[c]];
                let f = cell_scale[c];
                let (ai, aj) = CORNERS[slot];
                for (b, &(bi, bj)) in CORNERS.iter().enumerate() {
                    let k = ((bj + 1 - aj) * 3 + (bi + 1 - ai)) * 4;
                    for r in 0..2 {
                        for s in 0..2 {
                            coef[k + 2 * r + s] += f * t[2 * slot + r][2 * b + s];
                        }
                    }
                }
            }
        });
        StiffnessOperator { lattice, stencil }
    }

    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let l = self.lattice;
        let cols = l.node_cols();
        out.par_chunks_mut(2).with_min_len(CHUNK / 2).enumerate().for_each(|(n, o)| {
            let (i, j) = (n % cols, n / cols);
            let c = &self.stencil[n];
            let (mut fx, mut fy) = (0.0, 0.0);
            for dj in 0..3 {
                if (j + dj) < 1 || j + dj > l.ny + 1 {
                    continue;
                }
                let row = (j + dj - 1) * cols;
                for di in 0..3 {
                    if (i + di) < 1 || i + di > l.nx + 1 {
                        continue;
                    }
                    let m = row + i + di - 1;
                    let k = (dj * 3 + di) * 4;
                    fx += c[k] * u[2 * m] + c[k + 1] * u[2 * m + 1];
                    fy += c[k + 2] * u[2 * m] + c[k + 3] * u[2 * m + 1];
                }
            }
            o[0] = fx;
            o[1] = fy;
        });
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.stencil.iter().flat_map(|c| [c[16], c[19]]).collect()
    }

    /// Solve for free dofs of `u`, whose prescribed entries are set first.
    /// The current free entries of `u` serve as the initial guess.
    pub fn solve(
        &self,
        constraints: &Constraints,
        u: &mut [f64],
        displacement: f64,
        rel_tol: f64,
        max_iter: usize,
    ) -> Result<usize, SolverError> {
        constraints.impose(u, displacement);
        let n = u.len();
        let free = &constraints.free;

        // Reference norm: the load vector produced by the boundary data alone.
        let mut lift = vec![0.0; n];
        constraints.impose(&mut lift, displacement);
        let mut scratch = vec![0.0; n];
        self.apply(&lift, &mut scratch);
        let reference = masked_norm(&scratch, free);
        if reference == 0.0 {
            u.par_iter_mut().zip(free.par_iter()).for_each(|(x, f)| *x *= 1.0 - f);
            return Ok(0);
        }

        self.apply(u, &mut scratch);
        let rhs: Vec<f64> = scratch.iter().zip(free).map(|(r, f)| -r * f).collect();
        let inv_diag: Vec<f64> = self.diagonal().iter().zip(free).map(|(d, f)| f / d).collect();
        let mut delta = vec![0.0; n];
        let apply = |x: &[f64], y: &mut [f64]| {
            self.apply(x, y);
            y.par_iter_mut().with_min_len(CHUNK).zip(free.par_iter()).for_each(|(v, f)| *v *= f);
        };
        let l = self.lattice;
        let outcome = match Multigrid::new(l.nx, l.ny, &self.stencil, free) {
            Some(mg) => pcg_with(apply, |r, z| mg.apply(r, z), &rhs, &mut delta, rel_tol * reference, max_iter),
            None => pcg(apply, &inv_diag, &rhs, &mut delta, rel_tol * reference, max_iter),
        }
        .map_err(|o| SolverError::LinearSolver { iterations: o.iterations, residual: o.residual / reference })?;
        u.par_iter_mut().zip(delta.par_iter()).for_each(|(x, d)| *x += d);
        Ok(outcome.iterations)
    }
}

fn masked_norm(v: &[f64], mask: &[f64]) -> f64 {
    let m: Vec<f64> = v.iter().zip(mask).map(|(a, b)| a * b).collect();
    dot(&m, &m).sqrt()
}

/// Edge reactions and stored energy of a displacement field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub reaction_left: f64,
    pub reaction_right: f64,
    pub elastic_energy: f64,
}

pub fn equilibrium(op: &StiffnessOperator, constraints: &Constraints, u: &[f64]) -> Equilibrium {
    let mut ku = vec![0.0; u.len()];
    op.apply(u, &mut ku);
    let edge = |nodes: &[usize]| nodes.iter().map(|&n| ku[2 * n]).sum::<f64>();
    Equilibrium {
        reaction_left: edge(&constraints.left_nodes),
        reaction_right: edge(&constraints.right_nodes),
        elastic_energy: 0.5 * dot(u, &ku),
    }
}

/// Centroid strains of every cell.
pub fn cell_strains(lattice: &Lattice, u: &[f64]) -> Vec<[f64; 3]> {
    (0..lattice.cell_count())
        .into_par_iter()
        .with_min_len(256)
        .map(|c| {
            let nodes = lattice.cell_nodes(c);
            let corners = nodes.map(|n| [u[2 * n], u[2 * n + 1]]);
            centroid_strain(&corners, lattice.h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::PhaseProperties;
    use crate::rng;
    use crate::solver::SolverConfig;
    use rand::Rng;

    fn medium(nx: usize, ny: usize) -> Medium {
        let props = PhaseProperties { e: 28000.0, nu: 0.2, gc: 0.06, sigma_u: 4.0 };
        let lattice = Lattice::new(nx, ny, 0.5);
        Medium::new(lattice, vec![props; nx * ny], &SolverConfig { lc: 1.0, ..Default::default() }).unwrap()
    }

    /// Reference assembly straight from element matrices into a dense matrix.
    fn dense(m: &Medium, scale: &[f64]) -> Vec<Vec<f64>> {
        let nd = 2 * m.lattice.node_count();
        let mut k = vec![vec![0.0; nd]; nd];
        for c in 0..m.lattice.cell_count() {
            let nodes = m.lattice.cell_nodes(c);
            let t = &m.templates[m.template_of[c]];
            for a in 0..8 {
                for b in 0..8 {
                    k[2 * nodes[a / 2] + a % 2][2 * nodes[b / 2] + b % 2] += scale[c] * t[a][b];
                }
            }
        }
        k
    }

    #[test]
    fn stencil_matches_dense_assembly_and_is_symmetric() {
        let m = medium(5, 3);
        let mut r = rng::seeded(5);
        let scale: Vec<f64> = (0..15).map(|_| r.gen_range(0.1..2.0)).collect();
        let op = StiffnessOperator::assemble(&m, &scale);
        let k = dense(&m, &scale);
        let nd = k.len();
        let x: Vec<f64> = (0..nd).map(|_| r.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..nd).map(|_| r.gen_range(-1.0..1.0)).collect();
        let mut kx = vec![0.0; nd];
        op.apply(&x, &mut kx);
        for row in 0..nd {
            let oracle: f64 = (0..nd).map(|c| k[row][c] * x[c]).sum();
            assert!((kx[row] - oracle).abs() < 1e-9 * oracle.abs().max(1.0));
        }
        let mut ky = vec![0.0; nd];
        op.apply(&y, &mut ky);
        let (a, b) = (dot(&kx, &y), dot(&x, &ky));
        assert!((a - b).abs() < 1e-10 * a.abs().max(b.abs()));
    }

    #[test]
    fn homogeneous_bar_is_exact() {
        let m = medium(8, 8);
        let op = StiffnessOperator::assemble(&m, &vec![28000.0; 64]);
        let bc = Constraints::rollers(&m.lattice);
        let mut u = vec![0.0; 2 * m.lattice.node_count()];
        op.solve(&bc, &mut u, 0.004, 1e-12, 1000).unwrap();
        let strain = 0.004 / m.lattice.width();
        for e in cell_strains(&m.lattice, &u) {
            assert!((e[0] - strain).abs() < 1e-10 * strain);
            assert!((e[1] + 0.2 * strain).abs() < 1e-9 * strain);
        }
        let eq = equilibrium(&op, &bc, &u);
        let analytic = 28000.0 * strain * m.lattice.height();
        assert!((eq.reaction_right - analytic).abs() < 1e-9 * analytic);
        assert!((eq.reaction_left + eq.reaction_right).abs() < 1e-9 * analytic);
    }

    #[test]
    fn zero_load_gives_zero_field() {
        let m = medium(4, 4);
        let op = StiffnessOperator::assemble(&m, &vec![1.0; 16]);
        let bc = Constraints::rollers(&m.lattice);
        let mut u = vec![0.3; 50];
        assert_eq!(op.solve(&bc, &mut u, 0.0, 1e-8, 100).unwrap(), 0);
        assert!(u.iter().all(|&x| x == 0.0));
        assert_eq!(equilibrium(&op, &bc, &u).reaction_left, 0.0);
    }
}
