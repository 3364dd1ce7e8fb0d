//! Linear-elastic response and crack driving forces.
//!
//! Strains and stresses are Voigt triples `[xx, yy, xy]` with engineering
//! shear strain `gamma_xy = 2 eps_xy`.

use serde::{Deserialize, Serialize};

use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PlaneAssumption {
    #[default]
    PlaneStress,
    PlaneStrain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DrivingForce {
    /// Positive part of the major principal effective stress.
    #[default]
    Rankine,
    /// Undegraded strain energy density.
    FullEnergy,
}

/// `(lambda, mu)` in MPa. Under plane stress `lambda` is the reduced value
/// `2 lambda mu / (lambda + 2 mu)`.
pub fn lame_constants(e: f64, nu: f64, plane: PlaneAssumption) -> Result<(f64, f64), SolverError> {
    if !(e > 0.0) || !(-1.0 < nu && nu < 0.5) {
        return Err(SolverError::InvalidMaterial(format!("E = {e}, nu = {nu}")));
    }
    let mu = e / (2.0 * (1.0 + nu));
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let lambda = match plane {
        PlaneAssumption::PlaneStrain => lambda,
        PlaneAssumption::PlaneStress => 2.0 * lambda * mu / (lambda + 2.0 * mu),
    };
    Ok((lambda, mu))
}

/// Voigt elasticity matrix.
pub fn elasticity_matrix(lambda: f64, mu: f64) -> [[f64; 3]; 3] {
    [[lambda + 2.0 * mu, lambda, 0.0], [lambda, lambda + 2.0 * mu, 0.0], [0.0, 0.0, mu]]
}

pub fn effective_stress(eps: [f64; 3], lambda: f64, mu: f64) -> [f64; 3] {
    let tr = eps[0] + eps[1];
    [lambda * tr + 2.0 * mu * eps[0], lambda * tr + 2.0 * mu * eps[1], mu * eps[2]]
}

/// Strain energy density of the undamaged solid.
pub fn psi0(eps: [f64; 3], lambda: f64, mu: f64) -> f64 {
    let tr = eps[0] + eps[1];
    0.5 * lambda * tr * tr + mu * (eps[0] * eps[0] + eps[1] * eps[1] + 0.5 * eps[2] * eps[2])
}

pub fn major_principal(s: [f64; 3]) -> f64 {
    0.5 * (s[0] + s[1]) + (0.5 * (s[0] - s[1])).hypot(s[2])
}

/// Onset energy density `sigma_u^2 / (2 E)`.
pub fn history_floor(e: f64, sigma_u: f64) -> f64 {
    sigma_u * sigma_u / (2.0 * e)
}

/// Crack driving force of one cell, never below the onset floor.
pub fn driving_force(eps: [f64; 3], e: f64, lambda: f64, mu: f64, sigma_u: f64, mode: DrivingForce) -> f64 {
    let y = match mode {
        DrivingForce::Rankine => {
            let s1 = major_principal(effective_stress(eps, lambda, mu)).max(0.0);
            s1 * s1 / (2.0 * e)
        }
        DrivingForce::FullEnergy => psi0(eps, lambda, mu),
    };
    y.max(history_floor(e, sigma_u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shear_modulus_of_matrix() {
        let (_, mu) = lame_constants(28000.0, 0.2, PlaneAssumption::PlaneStrain).unwrap();
        assert!((mu - 11666.666666666666).abs() < 1e-9);
    }

    #[test]
    fn zero_poisson_ratio() {
        for plane in [PlaneAssumption::PlaneStress, PlaneAssumption::PlaneStrain] {
            let (l, mu) = lame_constants(100.0, 0.0, plane).unwrap();
            assert_eq!(l, 0.0);
            assert_eq!(mu, 50.0);
        }
    }

    #[test]
    fn incompressible_rejected() {
        assert!(lame_constants(1.0, 0.5, PlaneAssumption::PlaneStrain).is_err());
    }

    #[test]
    fn plane_stress_uniaxial() {
        // eps_y = -nu eps_x must give sigma_y = 0 and sigma_x = E eps_x.
        let (e, nu) = (28000.0, 0.2);
        let (l, mu) = lame_constants(e, nu, PlaneAssumption::PlaneStress).unwrap();
        let s = effective_stress([1e-4, -nu * 1e-4, 0.0], l, mu);
        assert!((s[0] - e * 1e-4).abs() < 1e-12 * e);
        assert!(s[1].abs() < 1e-12 * e);
    }

    #[test]
    fn psi0_against_tensor_contraction() {
        // Full 2x2 tensor arithmetic: psi = 1/2 sigma:eps with
        // sigma = lambda tr(eps) I + 2 mu eps.
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..100 {
            let (l, mu) = (1000.0 * (next() + 0.6), 1000.0 * (next() + 0.6));
            let v = [next() * 1e-3, next() * 1e-3, next() * 1e-3];
            let t = [[v[0], v[2] / 2.0], [v[2] / 2.0, v[1]]];
            let tr = t[0][0] + t[1][1];
            let mut contraction = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    let sig = l * tr * if a == b { 1.0 } else { 0.0 } + 2.0 * mu * t[a][b];
                    contraction += sig * t[a][b];
                }
            }
            let oracle = 0.5 * contraction;
            let got = psi0(v, l, mu);
            assert!((got - oracle).abs() <= 1e-12 * oracle.abs(), "{got} vs {oracle}");
        }
    }

    #[test]
    fn uniaxial_energy() {
        let e = 28000.0;
        let (l, mu) = lame_constants(e, 0.0, PlaneAssumption::PlaneStress).unwrap();
        assert!((psi0([1e-4, 0.0, 0.0], l, mu) - 0.5 * e * 1e-8).abs() < 1e-20);
        assert_eq!(psi0([0.0; 3], l, mu), 0.0);
    }

    #[test]
    fn driving_force_floor_and_onset() {
        let (e, nu, su) = (28000.0, 0.0, 4.0);
        let (l, mu) = lame_constants(e, nu, PlaneAssumption::PlaneStress).unwrap();
        let floor = su * su / (2.0 * e);
        assert_eq!(driving_force([0.0; 3], e, l, mu, su, DrivingForce::Rankine), floor);
        let at_onset = driving_force([su / e, 0.0, 0.0], e, l, mu, su, DrivingForce::Rankine);
        assert!((at_onset - floor).abs() < 1e-15);
        let compression = driving_force([-1e-3, 0.0, 0.0], e, l, mu, su, DrivingForce::Rankine);
        assert_eq!(compression, floor);
        let full = driving_force([-1e-3, 0.0, 0.0], e, l, mu, su, DrivingForce::FullEnergy);
        assert!(full > floor);
    }

    #[test]
    fn principal_of_pure_shear() {
        assert!((major_principal([0.0, 0.0, 3.0]) - 3.0).abs() < 1e-15);
        assert_eq!(major_principal([2.0, -1.0, 0.0]), 2.0);
    }
}
