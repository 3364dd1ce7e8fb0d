//! Damage sub-problem at fixed history.
//!
//! The nodal damage minimises
//!
//! ```text
//! E(phi) = 1/2 phi^T L phi + sum_n f_n(phi_n)
//! f_n(s) = sum_{cells c at n} (h^2 / 4) [omega_c(s) H_c + Gc_c alpha(s) / (c0 lc)]
//! ```
//!
//! subject to `lower <= phi <= 1`, where `L` assembles
//! `2 Gc_c lc / c0 * grad N . grad N` and the local part uses nodal
//! (lumped) quadrature. A projected Newton method with an active set
//! handles the bounds; the Hessian's local part is replaced by its absolute
//! value (bounded below) so every Newton direction is a descent direction.

use rayon::prelude::*;

use super::degradation::{alpha, alpha_prime, C0};
use super::element::q4_laplacian;
use super::lattice::CORNERS;
use super::linalg::{dot, max_abs_diff, pcg, sum, CHUNK};
use super::model::Medium;
use super::SolverError;

/// Relative size below which a gradient at the lower bound counts as zero.
const GRADIENT_NOISE: f64 = 1e-10;
const ARMIJO: f64 = 1e-4;
/// Energy differences below this fraction of the summed terms are rounding.
const ROUNDING: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Bound on the scaled projected gradient, in units of damage.
    pub tol: f64,
    pub max_iters: usize,
    pub linear_rel_tol: f64,
    pub linear_max_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSolveStats {
    pub newton_iterations: usize,
    pub linear_iterations: usize,
    pub stationarity: f64,
}

pub struct PhaseOperator<'a> {
    medium: &'a Medium,
    stencil: Vec<[f64; 9]>,
    /// Crack-surface coefficient `Gc / (c0 lc)` per cell.
    surface: Vec<f64>,
    weight: f64,
}

struct Local {
    value: f64,
    d1: f64,
    d2: f64,
    scale: f64,
    curvature_floor: f64,
}

impl<'a> PhaseOperator<'a> {
    pub fn new(medium: &'a Medium, lc: f64) -> Self {
        let lattice = medium.lattice;
        let lap = q4_laplacian();
        let mut stencil = vec![[0.0; 9]; lattice.node_count()];
        stencil.par_iter_mut().with_min_len(256).enumerate().for_each(|(n, coef)| {
            for (c, slot) in lattice.node_cells(n) {
                let kappa = 2.0 * medium.props[c].gc * lc / C0;
                let (ai, aj) = CORNERS[slot];
                for (b, &(bi, bj)) in CORNERS.iter().enumerate() {
                    coef[(bj + 1 - aj) * 3 + (bi + 1 - ai)] += kappa * lap[slot][b];
                }
            }
        });
        let surface = medium.props.iter().map(|p| p.gc / (C0 * lc)).collect();
        let weight = lattice.h * lattice.h / 4.0;
        PhaseOperator { medium, stencil, surface, weight }
    }

    pub fn apply_laplacian(&self, x: &[f64], out: &mut [f64]) {
        let l = self.medium.lattice;
        let cols = l.node_cols();
        out.par_iter_mut().with_min_len(CHUNK).enumerate().for_each(|(n, o)| {
            let (i, j) = (n % cols, n / cols);
            let c = &self.stencil[n];
            let mut acc = 0.0;
            for dj in 0..3 {
                if j + dj < 1 || j + dj > l.ny + 1 {
                    continue;
                }
                let row = (j + dj - 1) * cols;
                for di in 0..3 {
                    if i + di < 1 || i + di > l.nx + 1 {
                        continue;
                    }
                    acc += c[dj * 3 + di] * x[row + i + di - 1];
                }
            }
            *o = acc;
        });
    }

    fn local(&self, n: usize, s: f64, history: &[f64]) -> Local {
        let mut out = Local { value: 0.0, d1: 0.0, d2: 0.0, scale: 0.0, curvature_floor: 0.0 };
        let (a, da, dda) = (alpha(s), alpha_prime(s), -2.0);
        for (c, _) in self.medium.lattice.node_cells(n) {
            let (w, dw, ddw) = self.medium.coeffs[c].omega_all(s);
            let hc = history[c];
            let g = self.surface[c];
            out.value += self.weight * (w * hc + g * a);
            out.d1 += self.weight * (dw * hc + g * da);
            out.d2 += self.weight * (ddw * hc + g * dda);
            out.scale += self.weight * (dw.abs() * hc + g * da.abs());
            out.curvature_floor += self.weight * g;
        }
        out
    }

    /// `E(b) - E(a)`, evaluated node by node to limit cancellation, with
    /// the summed magnitude of the terms as a rounding scale.
    fn energy_change(&self, a: &[f64], b: &[f64], history: &[f64]) -> (f64, f64) {
        let diff: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
        let mid: Vec<f64> = b.iter().zip(a).map(|(x, y)| x + y).collect();
        let mut lmid = vec![0.0; a.len()];
        self.apply_laplacian(&mid, &mut lmid);
        let quadratic: Vec<f64> = diff.iter().zip(&lmid).map(|(d, l)| 0.5 * d * l).collect();
        let local: Vec<(f64, f64)> = (0..a.len())
            .into_par_iter()
            .with_min_len(CHUNK)
            .map(|n| {
                if diff[n] == 0.0 {
                    return (0.0, 0.0);
                }
                let (fb, fa) = (self.local(n, b[n], history).value, self.local(n, a[n], history).value);
                (fb - fa, fb.abs() + fa.abs() + quadratic[n].abs())
            })
            .collect();
        let change: Vec<f64> = local.iter().zip(&quadratic).map(|(l, q)| l.0 + q).collect();
        let magnitude: Vec<f64> = local.iter().map(|l| l.1).collect();
        (sum(&change), sum(&magnitude))
    }

    /// Minimise over `lower <= phi <= 1` starting from `phi`.
    pub fn solve(
        &self,
        phi: &mut [f64],
        lower: &[f64],
        history: &[f64],
        opts: &NewtonOptions,
    ) -> Result<PhaseSolveStats, SolverError> {
        let NewtonOptions { tol, max_iters: max_newton, linear_rel_tol, linear_max_iters: linear_max_iter } = *opts;
        let n = phi.len();
        for (p, lo) in phi.iter_mut().zip(lower) {
            *p = p.clamp(*lo, 1.0);
        }
        let mut linear_iterations = 0;
        let mut lap = vec![0.0; n];
        let mut stationarity = f64::INFINITY;

        for it in 0..max_newton {
            self.apply_laplacian(phi, &mut lap);
            let locals: Vec<Local> =
                (0..n).into_par_iter().with_min_len(CHUNK).map(|k| self.local(k, phi[k], history)).collect();
            let grad: Vec<f64> = locals.iter().zip(&lap).map(|(l, q)| l.d1 + q).collect();
            let hdiag: Vec<f64> = locals
                .iter()
                .enumerate()
                .map(|(k, l)| self.stencil[k][4] + l.d2.abs().max(l.curvature_floor))
                .collect();

            // Active set: pinned nodes, and bounds the gradient pushes against.
            let free: Vec<f64> = (0..n)
                .map(|k| {
                    let pinned = lower[k] >= 1.0;
                    let at_lower = phi[k] <= lower[k] && grad[k] >= -GRADIENT_NOISE * locals[k].scale;
                    let at_upper = phi[k] >= 1.0 && grad[k] <= 0.0;
                    if pinned || at_lower || at_upper { 0.0 } else { 1.0 }
                })
                .collect();

            stationarity = (0..n)
                .map(|k| free[k] * ((phi[k] - grad[k] / hdiag[k]).clamp(lower[k], 1.0) - phi[k]).abs())
                .fold(0.0, f64::max);
            if stationarity < tol {
                return Ok(PhaseSolveStats { newton_iterations: it, linear_iterations, stationarity });
            }

            let rhs: Vec<f64> = grad.iter().zip(&free).map(|(g, f)| -g * f).collect();
            let local_curv: Vec<f64> = locals.iter().map(|l| l.d2.abs().max(l.curvature_floor)).collect();
            let inv_diag: Vec<f64> = hdiag.iter().zip(&free).map(|(h, f)| f / h).collect();
            let mut dir = vec![0.0; n];
            let gnorm = dot(&rhs, &rhs).sqrt();
            let apply = |x: &[f64], y: &mut [f64]| {
                self.apply_laplacian(x, y);
                y.par_iter_mut()
                    .with_min_len(CHUNK)
                    .enumerate()
                    .for_each(|(k, v)| *v = free[k] * (*v + local_curv[k] * x[k]));
            };
            match pcg(apply, &inv_diag, &rhs, &mut dir, linear_rel_tol * gnorm, linear_max_iter) {
                Ok(o) => linear_iterations += o.iterations,
                Err(o) => {
                    // Keep whatever descent the partial solve produced.
                    linear_iterations += o.iterations;
                    if dot(&dir, &rhs) <= 0.0 {
                        dir = rhs.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
                    }
                }
            }

            if !self.line_search(phi, &dir, &grad, lower, history) {
                // Fall back to a diagonally scaled projected gradient step.
                let scaled: Vec<f64> = rhs.iter().zip(&hdiag).map(|(r, h)| r / h).collect();
                if !self.line_search(phi, &scaled, &grad, lower, history) {
                    return Err(SolverError::NewtonDiverged { iterations: it + 1, residual: stationarity });
                }
            }
        }
        if stationarity < tol {
            return Ok(PhaseSolveStats { newton_iterations: max_newton, linear_iterations, stationarity });
        }
        Err(SolverError::NewtonDiverged { iterations: max_newton, residual: stationarity })
    }

    /// Armijo backtracking along the projection arc. Updates `phi` on success.
    fn line_search(&self, phi: &mut [f64], dir: &[f64], grad: &[f64], lower: &[f64], history: &[f64]) -> bool {
        let mut t = 1.0;
        for _ in 0..40 {
            let trial: Vec<f64> = (0..phi.len()).map(|k| (phi[k] + t * dir[k]).clamp(lower[k], 1.0)).collect();
            let step: Vec<f64> = trial.iter().zip(phi.iter()).map(|(a, b)| a - b).collect();
            let slope = dot(grad, &step);
            if max_abs_diff(&trial, phi) == 0.0 {
                return false;
            }
            let (change, magnitude) = self.energy_change(phi, &trial, history);
            if slope < 0.0 && change <= ARMIJO * slope + ROUNDING * magnitude {
                phi.copy_from_slice(&trial);
                return true;
            }
            t *= 0.5;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::PhaseProperties;
    use crate::solver::{Lattice, SolverConfig};

    const OPTS: NewtonOptions = NewtonOptions { tol: 1e-10, max_iters: 100, linear_rel_tol: 1e-10, linear_max_iters: 1000 };

    fn strip(nx: usize, h: f64, lc: f64) -> Medium {
        let props = PhaseProperties { e: 28000.0, nu: 0.2, gc: 0.06, sigma_u: 4.0 };
        Medium::new(Lattice::new(nx, 1, h), vec![props; nx], &SolverConfig { lc, ..Default::default() }).unwrap()
    }

    #[test]
    fn floor_history_keeps_intact_material_intact() {
        let m = strip(40, 0.075, 0.3);
        let op = PhaseOperator::new(&m, 0.3);
        let mut phi = vec![0.0; m.lattice.node_count()];
        let lower = phi.clone();
        let stats = op.solve(&mut phi, &lower, &m.floor, &OPTS).unwrap();
        assert_eq!(stats.newton_iterations, 0);
        assert!(phi.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn output_respects_bounds() {
        let m = strip(40, 0.075, 0.3);
        let op = PhaseOperator::new(&m, 0.3);
        let nodes = m.lattice.node_count();
        let lower: Vec<f64> = (0..nodes).map(|k| if k % 41 == 20 { 1.0 } else { 0.01 * (k % 7) as f64 }).collect();
        let history: Vec<f64> = m.floor.iter().map(|f| 3.0 * f).collect();
        let mut phi = lower.clone();
        op.solve(&mut phi, &lower, &history, &OPTS).unwrap();
        for (p, lo) in phi.iter().zip(&lower) {
            assert!(*p >= *lo && *p <= 1.0);
        }
    }
}
