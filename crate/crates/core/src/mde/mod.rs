//! The two-species scalar Dyson equation and the limiting spectral measure
//! `mu_inf(u)` of the Kac-Rice Hessian.
//!
//! For each field point `u = (u0, u1, u2)` and each `z` in the upper
//! half-plane the pair `(m1, m2)` solves two coupled quadratics (see
//! [`DysonSystem`]); `gamma m1 + (1 - gamma) m2` is the Stieltjes transform
//! of `mu_inf(u)`. Everything else in this module is read off that transform:
//! the density by inversion near the real axis, the support edges, the
//! cumulative mass and the log-potential by integrals along vertical lines.

mod density;
mod edges;
mod solver;
mod transforms;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::ModelParams;

pub use density::{
    default_window, density, density_with, DensityOptions, DensitySidecar, SpectralDensity,
    DEFAULT_ETA_MIN, DEFAULT_RESOLUTION, MIN_RESOLUTION,
};
pub use edges::{inside_support, support_edges, EDGE_DENSITY_THRESHOLD, EDGE_ETA, EDGE_TOL};
pub use solver::{DysonSystem, ETA_FACTOR, RESIDUAL_TOL};
pub use transforms::{cumulative_mass, log_potential_at};

/// A point of the Kac-Rice dual variable: `u0` pairs with the energy, `u1`
/// and `u2` with the two radial derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldPoint {
    pub u0: f64,
    pub u1: f64,
    pub u2: f64,
}

impl FieldPoint {
    pub const fn new(u0: f64, u1: f64, u2: f64) -> Self {
        Self { u0, u1, u2 }
    }

    pub const fn origin() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.u0 * self.u0 + self.u1 * self.u1 + self.u2 * self.u2
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.u0, self.u1, self.u2]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self::new(x[0], x[1], x[2])
    }

    pub fn is_finite(&self) -> bool {
        self.u0.is_finite() && self.u1.is_finite() && self.u2.is_finite()
    }
}

impl std::ops::Neg for FieldPoint {
    type Output = Self;

    fn neg(self) -> Self {
        Self::new(-self.u0, -self.u1, -self.u2)
    }
}

/// A solved pair `(m1(u, z), m2(u, z))` with its residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StieltjesPair {
    pub z: Complex64,
    pub m1: Complex64,
    pub m2: Complex64,
    pub residual1: f64,
    pub residual2: f64,
}

/// Solves the scalar system at `z` (which must have positive imaginary part).
pub fn solve_point(
    params: &ModelParams,
    u: FieldPoint,
    z: Complex64,
    warm_start: Option<&StieltjesPair>,
) -> Result<StieltjesPair> {
    DysonSystem::new(params, u).solve(z, warm_start)
}

/// `gamma m1 + (1 - gamma) m2`.
pub fn stieltjes_transform(pair: &StieltjesPair, params: &ModelParams) -> Complex64 {
    params.gamma * pair.m1 + (1.0 - params.gamma) * pair.m2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_params, MixtureSpec};

    fn pure22() -> ModelParams {
        derive_params(&MixtureSpec::pure(2, 2).unwrap(), 0.5).unwrap()
    }

    #[test]
    fn pure_22_at_i() {
        let pair = solve_point(&pure22(), FieldPoint::origin(), Complex64::i(), None).unwrap();
        assert!((pair.m1 - Complex64::new(0.0, 0.25)).norm() < 1e-12);
        assert!((pair.m2 - Complex64::new(0.0, 0.25)).norm() < 1e-12);
        assert!(pair.residual1 <= RESIDUAL_TOL && pair.residual2 <= RESIDUAL_TOL);
    }

    #[test]
    fn pure_22_near_axis_matches_quadratic_root() {
        let z = Complex64::new(0.1, 0.01);
        let pair = solve_point(&pure22(), FieldPoint::origin(), z, None).unwrap();
        // 12 m^2 + z m + 1 = 0; pick the root in the upper half-plane.
        let disc = (z * z - 48.0).sqrt();
        let roots = [(-z + disc) / 24.0, (-z - disc) / 24.0];
        let root = roots.into_iter().find(|r| r.im > 0.0).unwrap();
        assert!(pair.m1.im > 0.0);
        assert!((pair.m1 - root).norm() < 1e-12, "{} vs {}", pair.m1, root);
        assert!((pair.m2 - root).norm() < 1e-12);
        assert!(pair.residual1 <= RESIDUAL_TOL);
    }

    #[test]
    fn pure_models_ignore_u1_u2() {
        let params = pure22();
        for z in [Complex64::new(0.3, 0.2), Complex64::new(-5.0, 1e-5)] {
            let a = solve_point(&params, FieldPoint::new(0.7, 0.0, 0.0), z, None).unwrap();
            let b = solve_point(&params, FieldPoint::new(0.7, 5.0, -7.0), z, None).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn transform_is_convex_combination() {
        let params = pure22();
        let pair = StieltjesPair {
            z: Complex64::i(),
            m1: Complex64::new(0.0, 0.25),
            m2: Complex64::new(0.0, 0.25),
            residual1: 0.0,
            residual2: 0.0,
        };
        assert_eq!(
            stieltjes_transform(&pair, &params),
            Complex64::new(0.0, 0.25)
        );

        let mut quarter = params;
        quarter.gamma = 0.25;
        let pair = StieltjesPair {
            m1: Complex64::new(0.1, 0.2),
            m2: Complex64::new(-0.3, 0.4),
            ..pair
        };
        let s = stieltjes_transform(&pair, &quarter);
        assert!((s - Complex64::new(-0.2, 0.35)).norm() < 1e-15);
    }
}
