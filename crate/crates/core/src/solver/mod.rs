//! Quasi-static cohesive phase-field fracture on a structured grid.
//!
//! Displacements live on the nodes of bilinear square elements; damage is a
//! nodal field sharing the same mesh. Each load step alternates a linear
//! elastic solve at fixed damage with a bound-constrained damage solve at
//! fixed history until the damage update stagnates.

pub mod constitutive;
pub mod degradation;
pub mod elasticity;
mod element;
mod lattice;
pub mod linalg;
mod model;
mod multigrid;
pub mod phase;
mod simulation;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use constitutive::{
    driving_force, effective_stress, elasticity_matrix, history_floor, lame_constants, major_principal, psi0,
    DrivingForce, PlaneAssumption,
};
pub use degradation::{alpha, alpha_prime, optimal_profile_1d, DegradationCoefficients, OptimalProfile, Softening, C0};
pub use element::{centroid_strain, q4_laplacian, q4_stiffness};
pub use lattice::Lattice;
pub use model::Medium;
pub use simulation::{
    run_simulation, FieldState, Frame, SimulationFailure, SimulationResult, Simulation, StepRecord,
};

/// Relative slack on the requirement that `lc` spans two cells.
pub const RESOLUTION_SLACK: f64 = 0.01;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("expected {expected} cells, found {found}")]
    GridMismatch { expected: usize, found: usize },
    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    LinearSolver { iterations: usize, residual: f64 },
    #[error("damage solver did not converge after {iterations} iterations (stationarity {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("load schedule finished after {0} steps")]
    Finished(usize),
}

impl SolverError {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, SolverError::LinearSolver { .. } | SolverError::NewtonDiverged { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Phase-field length scale, mm.
    pub lc: f64,
    pub softening: Softening,
    pub plane_assumption: PlaneAssumption,
    pub n_load_steps: usize,
    /// Final right-edge displacement, mm.
    pub u_max: f64,
    /// Staggered passes stop once the largest nodal damage change falls below this.
    pub staggered_tol: f64,
    pub staggered_max_iters: usize,
    pub linear_solver_rel_tol: f64,
    pub linear_solver_max_iters: usize,
    pub driving_force: DrivingForce,
    /// Capture a frame every this many steps, starting at step 0.
    pub frame_interval: usize,
    /// Stiffness fraction kept by fully damaged material.
    pub residual_stiffness: f64,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lc: 0.3,
            softening: Softening::Linear,
            plane_assumption: PlaneAssumption::PlaneStress,
            n_load_steps: 400,
            u_max: 0.05,
            staggered_tol: 1e-3,
            staggered_max_iters: 50,
            linear_solver_rel_tol: 1e-8,
            linear_solver_max_iters: 200_000,
            driving_force: DrivingForce::Rankine,
            frame_interval: 4,
            residual_stiffness: 1e-6,
            newton_tol: 1e-9,
            newton_max_iters: 200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, cell_size: f64) -> Result<(), SolverError> {
        let fail = |m: String| Err(SolverError::InvalidConfig(m));
        // The 0.3 mm default sits 0.1% below two cells of the 333-cell grid.
        if !(self.lc > 0.0) || self.lc < 2.0 * cell_size * (1.0 - RESOLUTION_SLACK) {
            return fail(format!("lc = {} must be at least twice the cell size {}", self.lc, cell_size));
        }
        if !(self.u_max > 0.0 && self.u_max.is_finite()) {
            return fail(format!("u_max must be positive, got {}", self.u_max));
        }
        for (name, v) in [
            ("staggered_tol", self.staggered_tol),
            ("linear_solver_rel_tol", self.linear_solver_rel_tol),
            ("newton_tol", self.newton_tol),
        ] {
            if !(v > 0.0) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("n_load_steps", self.n_load_steps),
            ("staggered_max_iters", self.staggered_max_iters),
            ("linear_solver_max_iters", self.linear_solver_max_iters),
            ("frame_interval", self.frame_interval),
            ("newton_max_iters", self.newton_max_iters),
        ] {
            if v == 0 {
                return fail(format!("{name} must be at least 1"));
            }
        }
        if !(0.0..1.0).contains(&self.residual_stiffness) {
            return fail(format!("residual_stiffness must lie in [0, 1), got {}", self.residual_stiffness));
        }
        Ok(())
    }

    /// Steps at which a frame is captured: step 0 and every `frame_interval`-th
    /// step before the last.
    pub fn frame_steps(&self) -> impl Iterator<Item = usize> {
        (0..self.n_load_steps).step_by(self.frame_interval.max(1))
    }

    /// Prescribed right-edge displacement at `step`.
    pub fn displacement_at(&self, step: usize) -> f64 {
        self.u_max * step as f64 / self.n_load_steps as f64
    }
}
