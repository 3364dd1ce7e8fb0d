use crate::raster::PhaseProperties;

use super::constitutive::{elasticity_matrix, history_floor, lame_constants};
use super::degradation::DegradationCoefficients;
use super::element::q4_stiffness;
use super::{Lattice, SolverConfig, SolverError};

/// Per-cell material data derived once per simulation.
#[derive(Debug, Clone)]
pub struct Medium {
    pub lattice: Lattice,
    pub props: Vec<PhaseProperties>,
    /// `(lambda, mu)` per cell for the configured plane assumption.
    pub lame: Vec<(f64, f64)>,
    pub coeffs: Vec<DegradationCoefficients>,
    /// Lower bound of the history variable per cell.
    pub floor: Vec<f64>,
    /// Unit-modulus element stiffness per distinct Poisson ratio.
    pub(crate) templates: Vec<[[f64; 8]; 8]>,
    pub(crate) template_of: Vec<usize>,
}

impl Medium {
    pub fn new(lattice: Lattice, props: Vec<PhaseProperties>, config: &SolverConfig) -> Result<Self, SolverError> {
        if props.len() != lattice.cell_count() {
            return Err(SolverError::GridMismatch { expected: lattice.cell_count(), found: props.len() });
        }
        let mut lame = Vec::with_capacity(props.len());
        let mut coeffs = Vec::with_capacity(props.len());
        let mut floor = Vec::with_capacity(props.len());
        let mut nus: Vec<u64> = Vec::new();
        let mut templates = Vec::new();
        let mut template_of = Vec::with_capacity(props.len());
        for p in &props {
            if !(p.gc > 0.0 && p.sigma_u > 0.0) {
                return Err(SolverError::InvalidMaterial(format!("Gc = {}, sigma_u = {}", p.gc, p.sigma_u)));
            }
            lame.push(lame_constants(p.e, p.nu, config.plane_assumption)?);
            coeffs.push(DegradationCoefficients::new(p.e, p.gc, p.sigma_u, config.lc, config.softening));
            floor.push(history_floor(p.e, p.sigma_u));
            let key = p.nu.to_bits();
            let t = match nus.iter().position(|&k| k == key) {
                Some(t) => t,
                None => {
                    let (l, mu) = lame_constants(1.0, p.nu, config.plane_assumption)?;
                    templates.push(q4_stiffness(&elasticity_matrix(l, mu)));
                    nus.push(key);
                    templates.len() - 1
                }
            };
            template_of.push(t);
        }
        Ok(Medium { lattice, props, lame, coeffs, floor, templates, template_of })
    }
}
