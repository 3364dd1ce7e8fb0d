//! Vector kernels and preconditioned conjugate gradients.
//!
//! Reductions split vectors into fixed-size chunks and add the partial sums
//! in chunk order, so results are bitwise identical for any thread count.

use rayon::prelude::*;

pub(crate) const CHUNK: usize = 4096;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum())
        .collect();
    partial.iter().sum()
}

pub fn sum(a: &[f64]) -> f64 {
    let partial: Vec<f64> = a.par_chunks(CHUNK).map(|x| x.iter().sum()).collect();
    partial.iter().sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.par_iter()
        .with_min_len(CHUNK)
        .zip(b.par_iter())
        .map(|(x, y)| (x - y).abs())
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgOutcome {
    pub iterations: usize,
    pub residual: f64,
}

/// Solve `A x = b` by Jacobi-preconditioned CG, starting from the given `x`.
///
/// `apply` writes `A p` into its second argument. Entries with zero
/// `inv_diag` are held fixed, so `apply` must return zero in those rows.
/// Stops when `||b - A x|| <= abs_tol`; on failure returns the iteration
/// count and last residual norm.
pub fn pcg<F>(
    apply: F,
    inv_diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    abs_tol: f64,
    max_iter: usize,
) -> Result<PcgOutcome, PcgOutcome>
where
    F: Fn(&[f64], &mut [f64]),
{
    let jacobi = |r: &[f64], z: &mut [f64]| {
        z.par_iter_mut()
            .with_min_len(CHUNK)
            .zip(r.par_iter().zip(inv_diag.par_iter()))
            .for_each(|(zi, (ri, di))| *zi = ri * di);
    };
    pcg_with(apply, jacobi, b, x, abs_tol, max_iter)
}

/// CG with an arbitrary symmetric positive preconditioner `precond`,
/// which writes `M^-1 r` into its second argument.
pub fn pcg_with<F, M>(
    apply: F,
    precond: M,
    b: &[f64],
    x: &mut [f64],
    abs_tol: f64,
    max_iter: usize,
) -> Result<PcgOutcome, PcgOutcome>
where
    F: Fn(&[f64], &mut [f64]),
    M: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    r.par_iter_mut().with_min_len(CHUNK).zip(b.par_iter()).for_each(|(ri, bi)| *ri = bi - *ri);
    let mut rnorm = dot(&r, &r).sqrt();
    if rnorm <= abs_tol {
        return Ok(PcgOutcome { iterations: 0, residual: rnorm });
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);

    for it in 1..=max_iter {
        apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(PcgOutcome { iterations: it, residual: rnorm });
        }
        let step = rz / pq;
        x.par_iter_mut()
            .with_min_len(CHUNK)
            .zip(r.par_iter_mut())
            .zip(p.par_iter().zip(q.par_iter()))
            .for_each(|((xi, ri), (pi, qi))| {
                *xi += step * pi;
                *ri -= step * qi;
            });
        rnorm = dot(&r, &r).sqrt();
        if !rnorm.is_finite() {
            return Err(PcgOutcome { iterations: it, residual: rnorm });
        }
        if rnorm <= abs_tol {
            return Ok(PcgOutcome { iterations: it, residual: rnorm });
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().with_min_len(CHUNK).zip(z.par_iter()).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    Err(PcgOutcome { iterations: max_iter, residual: rnorm })
}
