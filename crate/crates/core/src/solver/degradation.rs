//! Cohesive degradation function, crack geometric function and the
//! one-dimensional optimal damage profiles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Normalisation constant of the crack geometric function `2 phi - phi^2`.
pub const C0: f64 = PI;

/// Softening law; selects `(a2, a3)` of the degradation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Softening {
    #[default]
    Linear,
    Exponential,
    Cornelissen,
}

impl Softening {
    pub fn shape_parameters(self) -> (f64, f64) {
        match self {
            Softening::Linear => (-0.5, 0.0),
            Softening::Exponential => (2f64.powf(5.0 / 3.0) - 3.0, 0.0),
            Softening::Cornelissen => (1.3868, 0.6567),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegradationCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl DegradationCoefficients {
    /// `a1 = 4 l_ch / (pi lc)` with Irwin length `l_ch = E Gc / sigma_u^2`.
    pub fn new(e: f64, gc: f64, sigma_u: f64, lc: f64, softening: Softening) -> Self {
        let irwin = e * gc / (sigma_u * sigma_u);
        let (a2, a3) = softening.shape_parameters();
        DegradationCoefficients { a1: 4.0 / PI * irwin / lc, a2, a3 }
    }

    /// Value, first and second derivative of the degradation function.
    pub fn omega_all(&self, phi: f64) -> (f64, f64, f64) {
        let DegradationCoefficients { a1, a2, a3 } = *self;
        let s = 1.0 - phi;
        let (p, dp, ddp) = (s * s, -2.0 * s, 2.0);
        let q = p + a1 * phi * (1.0 + a2 * phi + a2 * a3 * phi * phi);
        let dq = dp + a1 * (1.0 + 2.0 * a2 * phi + 3.0 * a2 * a3 * phi * phi);
        let ddq = ddp + a1 * (2.0 * a2 + 6.0 * a2 * a3 * phi);
        let num = dp * q - p * dq;
        let w = p / q;
        let dw = num / (q * q);
        let ddw = (ddp * q - p * ddq) / (q * q) - 2.0 * dq * num / (q * q * q);
        (w, dw, ddw)
    }

    pub fn omega(&self, phi: f64) -> f64 {
        self.omega_all(phi).0
    }

    pub fn omega_prime(&self, phi: f64) -> f64 {
        self.omega_all(phi).1
    }
}

pub fn alpha(phi: f64) -> f64 {
    phi * (2.0 - phi)
}

pub fn alpha_prime(phi: f64) -> f64 {
    2.0 - 2.0 * phi
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimalProfile {
    /// `(|x| / (2 lc) - 1)^2` on `|x| <= 2 lc`, zero beyond.
    Quadratic,
    /// `exp(-|x| / lc)`.
    Exponential,
    /// `1 - sin(|x| / lc)` on `|x| <= pi lc / 2`, zero beyond.
    Sine,
}

pub fn optimal_profile_1d(x: f64, lc: f64, profile: OptimalProfile) -> f64 {
    let r = x.abs() / lc;
    match profile {
        OptimalProfile::Quadratic if r <= 2.0 => (r / 2.0 - 1.0).powi(2),
        OptimalProfile::Exponential => (-r).exp(),
        OptimalProfile::Sine if r <= PI / 2.0 => 1.0 - r.sin(),
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix_coeffs(softening: Softening) -> DegradationCoefficients {
        DegradationCoefficients::new(28000.0, 0.06, 4.0, 0.3, softening)
    }

    #[test]
    fn a1_for_matrix() {
        let c = matrix_coeffs(Softening::Linear);
        let expected = (4.0 / PI) * (28000.0 * 0.06 / 16.0) / 0.3;
        assert!((c.a1 - expected).abs() < 1e-12);
        assert!((c.a1 - 445.63).abs() < 5e-3);
        let half = DegradationCoefficients::new(28000.0, 0.06, 4.0, 0.15, Softening::Linear);
        assert!((half.a1 - 2.0 * c.a1).abs() < 1e-10);
    }

    #[test]
    fn endpoint_conditions() {
        for s in [Softening::Linear, Softening::Exponential, Softening::Cornelissen] {
            let c = matrix_coeffs(s);
            assert_eq!(c.omega(0.0), 1.0);
            assert_eq!(c.omega(1.0), 0.0);
            assert_eq!(c.omega_prime(1.0), 0.0);
            assert!((c.omega_prime(0.0) + c.a1).abs() < 1e-9 * c.a1);
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        let step = 1e-6;
        for s in [Softening::Linear, Softening::Exponential, Softening::Cornelissen] {
            let c = DegradationCoefficients::new(28000.0, 0.06, 4.0, 3.0, s);
            for k in 1..10 {
                let phi = k as f64 / 10.0;
                let (_, d1, d2) = c.omega_all(phi);
                let fd1 = (c.omega(phi + step) - c.omega(phi - step)) / (2.0 * step);
                let fd2 = (c.omega_prime(phi + step) - c.omega_prime(phi - step)) / (2.0 * step);
                assert!((d1 - fd1).abs() <= 1e-6 * d1.abs(), "{s:?} phi={phi}: {d1} vs {fd1}");
                assert!((d2 - fd2).abs() <= 1e-6 * d2.abs().max(1e-3), "{s:?} phi={phi}: {d2} vs {fd2}");
            }
        }
        for k in 1..10 {
            let phi = k as f64 / 10.0;
            let fd = (alpha(phi + step) - alpha(phi - step)) / (2.0 * step);
            assert!((alpha_prime(phi) - fd).abs() <= 1e-6 * alpha_prime(phi));
        }
    }

    #[test]
    fn geometric_function_endpoints() {
        assert_eq!(alpha(0.0), 0.0);
        assert_eq!(alpha(1.0), 1.0);
    }

    #[test]
    fn normalisation_constant_by_quadrature() {
        // c0 = 4 * int_0^1 sqrt(alpha(s)) ds, composite Gauss-Legendre with
        // the substitution s = 1 - cos(t) removing the endpoint singularity.
        let panels = 2000;
        let (a, b) = (0.0, PI / 2.0);
        let g = [(-0.5773502691896257, 1.0), (0.5773502691896257, 1.0)];
        let width = (b - a) / panels as f64;
        let mut sum = 0.0;
        for k in 0..panels {
            let mid = a + (k as f64 + 0.5) * width;
            for (x, w) in g {
                let t = mid + 0.5 * width * x;
                let s = 1.0 - t.cos();
                sum += w * 0.5 * width * alpha(s).sqrt() * t.sin();
            }
        }
        assert!((4.0 * sum - C0).abs() < 1e-8, "{}", 4.0 * sum);
    }

    #[test]
    fn profile_values() {
        let lc = 0.3;
        assert_eq!(optimal_profile_1d(0.0, lc, OptimalProfile::Quadratic), 1.0);
        assert_eq!(optimal_profile_1d(2.0 * lc, lc, OptimalProfile::Quadratic), 0.0);
        assert_eq!(optimal_profile_1d(-5.0, lc, OptimalProfile::Quadratic), 0.0);
        assert!((optimal_profile_1d(lc, lc, OptimalProfile::Exponential) - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(optimal_profile_1d(0.0, lc, OptimalProfile::Sine), 1.0);
        assert_eq!(optimal_profile_1d(lc * 2.0, lc, OptimalProfile::Sine), 0.0);
    }
}
