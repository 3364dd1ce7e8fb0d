use thiserror::Error;

use crate::raster::{GridSpec, MaterialFieldMaps, PhaseProperties, RasterError};

use super::constitutive::{driving_force, effective_stress};
use super::elasticity::{cell_strains, equilibrium, Constraints, StiffnessOperator};
use super::linalg::max_abs_diff;
use super::model::Medium;
use super::phase::{NewtonOptions, PhaseOperator};
use super::{Lattice, SolverConfig, SolverError};

/// Complete solver state after a converged load step.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub step: usize,
    /// Prescribed right-edge displacement, mm.
    pub displacement: f64,
    /// Nodal displacements, interleaved `[u_x, u_y]`.
    pub u: Vec<f64>,
    /// Nodal damage.
    pub phi: Vec<f64>,
    /// Per-cell history of the crack driving force, MPa.
    pub history: Vec<f64>,
    /// Per-cell centroid strain `[eps_x, eps_y, gamma_xy]`.
    pub strain: Vec<[f64; 3]>,
    /// Per-cell centroid stress `[sig_x, sig_y, tau_xy]`, MPa.
    pub stress: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub displacement: f64,
    /// Summed horizontal internal force on the left edge, N per unit thickness.
    pub reaction_left: f64,
    pub reaction_right: f64,
    pub elastic_energy: f64,
    /// Work done by the right-edge reaction up to this step.
    pub external_work: f64,
    pub passes: usize,
    pub converged: bool,
    pub max_damage_change: f64,
    pub linear_iterations: usize,
}

/// Cell-centred snapshot of one load step.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub step: usize,
    pub strain_x: Vec<f64>,
    pub strain_y: Vec<f64>,
    pub stress_x: Vec<f64>,
    pub stress_y: Vec<f64>,
    /// Mean of the four nodal damage values.
    pub damage: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub lattice: Lattice,
    /// One record per step including the unloaded step 0.
    pub steps: Vec<StepRecord>,
    pub frames: Vec<Frame>,
}

#[derive(Debug, Error)]
#[error("simulation failed at step {step}: {error}")]
pub struct SimulationFailure {
    pub step: usize,
    #[source]
    pub error: SolverError,
    pub partial: SimulationResult,
}

pub struct Simulation {
    medium: Medium,
    config: SolverConfig,
    constraints: Constraints,
    state: FieldState,
    steps: Vec<StepRecord>,
    frames: Vec<Frame>,
}

impl Simulation {
    pub fn new(lattice: Lattice, props: Vec<PhaseProperties>, config: SolverConfig) -> Result<Self, SolverError> {
        config.validate(lattice.h)?;
        let medium = Medium::new(lattice, props, &config)?;
        let cells = lattice.cell_count();
        let state = FieldState {
            step: 0,
            displacement: 0.0,
            u: vec![0.0; 2 * lattice.node_count()],
            phi: vec![0.0; lattice.node_count()],
            history: medium.floor.clone(),
            strain: vec![[0.0; 3]; cells],
            stress: vec![[0.0; 3]; cells],
        };
        let mut sim = Simulation {
            constraints: Constraints::rollers(&lattice),
            medium,
            config,
            state,
            steps: Vec::new(),
            frames: Vec::new(),
        };
        sim.steps.push(StepRecord {
            step: 0,
            displacement: 0.0,
            reaction_left: 0.0,
            reaction_right: 0.0,
            elastic_energy: 0.0,
            external_work: 0.0,
            passes: 0,
            converged: true,
            max_damage_change: 0.0,
            linear_iterations: 0,
        });
        sim.frames.push(sim.frame());
        Ok(sim)
    }

    pub fn from_maps(maps: &MaterialFieldMaps, grid: &GridSpec, config: SolverConfig) -> Result<Self, SolverError> {
        grid.validate().map_err(|e: RasterError| SolverError::InvalidConfig(e.to_string()))?;
        if maps.n != grid.n_cells {
            return Err(SolverError::GridMismatch { expected: grid.cell_count(), found: maps.n * maps.n });
        }
        let props = (0..grid.cell_count()).map(|c| maps.properties(c)).collect();
        Simulation::new(Lattice::square(grid.n_cells, grid.domain_length), props, config)
    }

    pub fn state(&self) -> &FieldState {
        &self.state
    }

    pub fn medium(&self) -> &Medium {
        &self.medium
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.steps
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn is_finished(&self) -> bool {
        self.state.step >= self.config.n_load_steps
    }

    /// Run the next load step of the schedule.
    pub fn advance(&mut self) -> Result<&StepRecord, SolverError> {
        if self.is_finished() {
            return Err(SolverError::Finished(self.state.step));
        }
        let step = self.state.step + 1;
        let record = self.staggered_step(step, self.config.displacement_at(step))?;
        self.steps.push(record);
        if step % self.config.frame_interval == 0 && step < self.config.n_load_steps {
            self.frames.push(self.frame());
        }
        Ok(self.steps.last().expect("record pushed"))
    }

    /// Alternate displacement and damage solves at a fixed boundary
    /// displacement until the damage change drops below tolerance.
    fn staggered_step(&mut self, step: usize, displacement: f64) -> Result<StepRecord, SolverError> {
        let cfg = &self.config;
        let lattice = self.medium.lattice;
        let phase = PhaseOperator::new(&self.medium, cfg.lc);
        let newton = NewtonOptions {
            tol: cfg.newton_tol,
            max_iters: cfg.newton_max_iters,
            linear_rel_tol: cfg.linear_solver_rel_tol,
            linear_max_iters: cfg.linear_solver_max_iters,
        };

        let mut u = self.state.u.clone();
        let previous = self.state.displacement;
        if previous > 0.0 {
            let ratio = displacement / previous;
            u.iter_mut().for_each(|x| *x *= ratio);
        } else {
            let width = lattice.width();
            for n in 0..lattice.node_count() {
                let (i, _) = lattice.node_ij(n);
                u[2 * n] = displacement * (i as f64 * lattice.h) / width;
            }
        }
        let lower = self.state.phi.clone();
        let mut phi = self.state.phi.clone();
        let mut history = self.state.history.clone();
        let mut passes = 0;
        let mut linear_iterations = 0;
        let mut change;
        let mut degradation = vec![0.0; lattice.cell_count()];
        let mut operator;
        let mut strain;

        loop {
            passes += 1;
            let mean = lattice.cell_mean(&phi);
            for (c, g) in degradation.iter_mut().enumerate() {
                *g = (1.0 - cfg.residual_stiffness) * self.medium.coeffs[c].omega(mean[c]) + cfg.residual_stiffness;
            }
            let scale: Vec<f64> = degradation.iter().zip(&self.medium.props).map(|(g, p)| g * p.e).collect();
            operator = StiffnessOperator::assemble(&self.medium, &scale);
            linear_iterations += operator.solve(
                &self.constraints,
                &mut u,
                displacement,
                cfg.linear_solver_rel_tol,
                cfg.linear_solver_max_iters,
            )?;
            strain = cell_strains(&lattice, &u);
            for (c, h) in history.iter_mut().enumerate() {
                let p = &self.medium.props[c];
                let (l, mu) = self.medium.lame[c];
                let y = driving_force(strain[c], p.e, l, mu, p.sigma_u, cfg.driving_force);
                if y > *h {
                    *h = y;
                }
            }
            let before = phi.clone();
            phase.solve(&mut phi, &lower, &history, &newton)?;
            change = max_abs_diff(&phi, &before);
            if change < cfg.staggered_tol || passes >= cfg.staggered_max_iters {
                break;
            }
        }

        let eq = equilibrium(&operator, &self.constraints, &u);
        let stress = strain
            .iter()
            .enumerate()
            .map(|(c, e)| {
                let (l, mu) = self.medium.lame[c];
                effective_stress(*e, l, mu).map(|s| degradation[c] * s)
            })
            .collect();
        let last = self.steps.last().expect("step 0 recorded");
        let work = last.external_work
            + 0.5 * (last.reaction_right + eq.reaction_right) * (displacement - last.displacement);

        self.state = FieldState { step, displacement, u, phi, history, strain, stress };
        Ok(StepRecord {
            step,
            displacement,
            reaction_left: eq.reaction_left,
            reaction_right: eq.reaction_right,
            elastic_energy: eq.elastic_energy,
            external_work: work,
            passes,
            converged: change < cfg.staggered_tol,
            max_damage_change: change,
            linear_iterations,
        })
    }

    fn frame(&self) -> Frame {
        let s = &self.state;
        Frame {
            step: s.step,
            strain_x: s.strain.iter().map(|e| e[0]).collect(),
            strain_y: s.strain.iter().map(|e| e[1]).collect(),
            stress_x: s.stress.iter().map(|e| e[0]).collect(),
            stress_y: s.stress.iter().map(|e| e[1]).collect(),
            damage: self.medium.lattice.cell_mean(&s.phi),
        }
    }

    /// Hand over the frames captured so far, so long runs can stream them
    /// out instead of holding every frame.
    pub fn take_frames(&mut self) -> Vec<Frame> {
        std::mem::take(&mut self.frames)
    }

    pub fn into_result(self) -> SimulationResult {
        SimulationResult { lattice: self.medium.lattice, steps: self.steps, frames: self.frames }
    }

    /// Run the remaining schedule. On failure the steps completed so far are
    /// returned with the error.
    pub fn run(mut self) -> Result<SimulationResult, SimulationFailure> {
        while !self.is_finished() {
            if let Err(error) = self.advance() {
                let step = self.state.step + 1;
                return Err(SimulationFailure { step, error, partial: self.into_result() });
            }
        }
        Ok(self.into_result())
    }
}

pub fn run_simulation(
    maps: &MaterialFieldMaps,
    grid: &GridSpec,
    config: &SolverConfig,
) -> Result<SimulationResult, SimulationFailure> {
    let sim = Simulation::from_maps(maps, grid, config.clone()).map_err(|error| SimulationFailure {
        step: 0,
        error,
        partial: SimulationResult { lattice: Lattice::square(grid.n_cells, grid.domain_length), steps: vec![], frames: vec![] },
    })?;
    sim.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix() -> PhaseProperties {
        PhaseProperties { e: 28000.0, nu: 0.2, gc: 0.06, sigma_u: 4.0 }
    }

    #[test]
    fn elastic_steps_and_frames() {
        let lattice = Lattice::square(16, 8.0);
        let cfg = SolverConfig { lc: 1.0, n_load_steps: 12, u_max: 0.0008, ..Default::default() };
        let mut sim = Simulation::new(lattice, vec![matrix(); 256], cfg).unwrap();
        while !sim.is_finished() {
            let r = sim.advance().unwrap();
            assert_eq!(r.passes, 1);
            assert!(r.converged);
        }
        assert!(matches!(sim.advance(), Err(SolverError::Finished(12))));
        let res = sim.into_result();
        assert_eq!(res.steps.len(), 13);
        assert_eq!(res.frames.iter().map(|f| f.step).collect::<Vec<_>>(), vec![0, 4, 8]);
        for f in &res.frames {
            assert!(f.damage.iter().all(|&d| d == 0.0));
        }
        for r in &res.steps[1..] {
            let expected = 28000.0 * r.displacement / 8.0 * 8.0;
            assert!((r.reaction_right - expected).abs() < 1e-6 * expected);
            assert!((r.reaction_left + r.reaction_right).abs() < 1e-6 * expected);
            assert!(r.external_work >= r.elastic_energy * (1.0 - 1e-6));
        }
    }

    #[test]
    fn invalid_length_scale() {
        let lattice = Lattice::square(16, 8.0);
        let cfg = SolverConfig { lc: 0.5, ..Default::default() };
        assert!(matches!(Simulation::new(lattice, vec![matrix(); 256], cfg), Err(SolverError::InvalidConfig(_))));
    }

    #[test]
    fn cell_count_mismatch() {
        let lattice = Lattice::square(16, 8.0);
        let cfg = SolverConfig { lc: 1.0, ..Default::default() };
        assert!(matches!(
            Simulation::new(lattice, vec![matrix(); 10], cfg),
            Err(SolverError::GridMismatch { expected: 256, found: 10 })
        ));
    }
}
