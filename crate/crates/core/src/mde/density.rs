use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{support_edges, DysonSystem, FieldPoint};
use crate::error::{Error, Result};
use crate::model::ModelParams;

pub const DEFAULT_RESOLUTION: usize = 2048;
pub const DEFAULT_ETA_MIN: f64 = 1e-6;
pub const MIN_RESOLUTION: usize = 64;

/// Density below which the window boundary counts as outside the support.
const BOUNDARY_DENSITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityOptions {
    pub resolution: usize,
    /// Distance above the real axis at which the transform is inverted.
    pub eta_min: f64,
    /// Combine `eta_min` and `2 eta_min` to cancel the first-order smoothing
    /// error.
    pub richardson: bool,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self {
            resolution: DEFAULT_RESOLUTION,
            eta_min: DEFAULT_ETA_MIN,
            richardson: false,
        }
    }
}

/// The density of `mu_inf(u)` sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub left_edge: f64,
    pub right_edge: f64,
    /// Trapezoid integral of `values` over `grid`.
    pub mass: f64,
    pub eta_min: f64,
}

/// Metadata written next to a density CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySidecar {
    pub left_edge: f64,
    pub right_edge: f64,
    pub mass: f64,
    pub eta_min: f64,
    pub resolution: usize,
}

impl SpectralDensity {
    pub fn spacing(&self) -> f64 {
        (self.grid[self.grid.len() - 1] - self.grid[0]) / (self.grid.len() - 1) as f64
    }

    /// `lambda,rho` rows with a header line, LF terminated.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,rho\n");
        for (x, y) in self.grid.iter().zip(&self.values) {
            let _ = writeln!(out, "{x:e},{y:e}");
        }
        out
    }

    pub fn sidecar(&self) -> DensitySidecar {
        DensitySidecar {
            left_edge: self.left_edge,
            right_edge: self.right_edge,
            mass: self.mass,
            eta_min: self.eta_min,
            resolution: self.grid.len(),
        }
    }

    /// The density of the pushforward under `lambda -> -lambda`.
    pub fn reflected(&self) -> Self {
        Self {
            grid: self.grid.iter().rev().map(|x| -x).collect(),
            values: self.values.iter().rev().copied().collect(),
            left_edge: -self.right_edge,
            right_edge: -self.left_edge,
            mass: self.mass,
            eta_min: self.eta_min,
        }
    }

    /// Linear interpolation, zero outside the grid.
    pub fn value_at(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if x < self.grid[0] || x > self.grid[n - 1] {
            return 0.0;
        }
        let h = self.spacing();
        let pos = ((x - self.grid[0]) / h).min((n - 1) as f64);
        let i = (pos.floor() as usize).min(n - 2);
        let t = pos - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }
}

/// `[l - 1, r + 1]` around the a-priori support bound `[l, r]` of
/// [`DysonSystem::support_bound`].
pub fn default_window(params: &ModelParams, u: FieldPoint) -> (f64, f64) {
    let (lo, hi) = DysonSystem::new(params, u).support_bound();
    (lo - 1.0, hi + 1.0)
}

/// The density of `mu_inf(u)` on `resolution` points of `window` (the
/// default window when `None`), with default inversion settings.
pub fn density(
    params: &ModelParams,
    u: FieldPoint,
    window: Option<(f64, f64)>,
    resolution: usize,
) -> Result<SpectralDensity> {
    density_with(
        params,
        u,
        window,
        DensityOptions {
            resolution,
            ..Default::default()
        },
    )
}

/// Samples `Im s(lambda + i eta_min) / pi` on the grid. Every grid point is
/// solved by its own continuation in `eta`, so results do not depend on how
/// the grid is split across threads.
pub fn density_with(
    params: &ModelParams,
    u: FieldPoint,
    window: Option<(f64, f64)>,
    options: DensityOptions,
) -> Result<SpectralDensity> {
    if options.resolution < MIN_RESOLUTION {
        return Err(Error::InvalidArgument(format!(
            "resolution must be at least {MIN_RESOLUTION}, got {}",
            options.resolution
        )));
    }
    if !(options.eta_min > 0.0) {
        return Err(Error::InvalidArgument("eta_min must be positive".into()));
    }
    let (lo, hi) = window.unwrap_or_else(|| default_window(params, u));
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "invalid window [{lo}, {hi}]"
        )));
    }
    let sys = DysonSystem::new(params, u);
    let n = options.resolution;
    let h = (hi - lo) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + h * i as f64 })
        .collect();

    let sample = |x: f64, eta: f64| -> Result<f64> {
        let pair = sys.solve(Complex64::new(x, eta), None)?;
        Ok(sys.stieltjes(&pair).im / std::f64::consts::PI)
    };
    let values = grid
        .par_iter()
        .map(|&x| {
            let rho = sample(x, options.eta_min)?;
            if options.richardson {
                let coarse = sample(x, 2.0 * options.eta_min)?;
                Ok((2.0 * rho - coarse).max(0.0))
            } else {
                Ok(rho.max(0.0))
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let mass = trapezoid(&values, h);
    let boundary_density = values[0].max(values[n - 1]);
    if mass < 0.999 && boundary_density > BOUNDARY_DENSITY_TOL {
        return Err(Error::WindowTooSmall {
            left: lo,
            right: hi,
            mass,
            boundary_density,
        });
    }
    let (left_edge, right_edge) = support_edges(params, u)?;
    Ok(SpectralDensity {
        grid,
        values,
        left_edge,
        right_edge,
        mass,
        eta_min: options.eta_min,
    })
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_params, MixtureSpec, Term};

    fn pure(p: u32, q: u32) -> ModelParams {
        let gamma = f64::from(p) / f64::from(p + q);
        derive_params(&MixtureSpec::pure(p, q).unwrap(), gamma).unwrap()
    }

    /// Closed-form semicircle for pure models at gamma = p / (p + q).
    fn semicircle(s: f64, u0: f64, x: f64) -> f64 {
        let v = (s - 1.0) * s;
        (4.0 * v - (x + s * u0).powi(2)).max(0.0).sqrt() / (2.0 * std::f64::consts::PI * v)
    }

    fn check_semicircle(p: u32, q: u32, u0: f64) {
        let s = f64::from(p + q);
        let d = density(
            &pure(p, q),
            FieldPoint::new(u0, 0.0, 0.0),
            None,
            DEFAULT_RESOLUTION,
        )
        .unwrap();
        let radius = 2.0 * ((s - 1.0) * s).sqrt();
        let centre = -s * u0;
        for (x, rho) in d.grid.iter().zip(&d.values) {
            let dist = ((x - centre).abs() - radius).abs();
            let tol = if dist < 0.05 { 1e-2 } else { 1e-4 };
            let exact = semicircle(s, u0, *x);
            assert!((rho - exact).abs() < tol, "x = {x}: {rho} vs {exact}");
        }
        assert!((d.mass - 1.0).abs() < 1e-3, "mass {}", d.mass);
        assert!((d.left_edge - (centre - radius)).abs() < 1e-6);
        assert!((d.right_edge - (centre + radius)).abs() < 1e-6);
    }

    #[test]
    fn pure_22_semicircle() {
        check_semicircle(2, 2, 0.0);
    }

    #[test]
    fn pure_22_shifted_semicircle() {
        check_semicircle(2, 2, -2.0);
        let d = density(&pure(2, 2), FieldPoint::new(-2.0, 0.0, 0.0), None, 256).unwrap();
        assert!((d.left_edge - (8.0 - 4.0 * 3f64.sqrt())).abs() < 1e-6);
        assert!((d.right_edge - (8.0 + 4.0 * 3f64.sqrt())).abs() < 1e-6);
    }

    #[test]
    fn pure_23_semicircle() {
        check_semicircle(2, 3, 0.7);
    }

    #[test]
    fn window_too_small() {
        let r = density(&pure(2, 2), FieldPoint::origin(), Some((-3.0, 3.0)), 128);
        assert!(matches!(r, Err(Error::WindowTooSmall { .. })));
    }

    #[test]
    fn rejects_low_resolution() {
        assert!(density(&pure(2, 2), FieldPoint::origin(), None, 32).is_err());
    }

    #[test]
    fn richardson_does_not_hurt_the_bulk() {
        let options = DensityOptions {
            resolution: 256,
            eta_min: 1e-3,
            richardson: true,
        };
        let d = density_with(&pure(2, 2), FieldPoint::origin(), None, options).unwrap();
        let mid = d.value_at(0.0);
        assert!((mid - semicircle(4.0, 0.0, 0.0)).abs() < 1e-6);
    }

    #[test]
    fn reflection_symmetry_for_a_mixture() {
        let b = 0.5f64.sqrt();
        let spec = MixtureSpec::new(vec![
            Term {
                p: 2,
                q: 2,
                beta: b,
            },
            Term {
                p: 2,
                q: 3,
                beta: b,
            },
        ])
        .unwrap();
        let params = derive_params(&spec, 0.5).unwrap();
        let u = FieldPoint::new(0.3, 0.5, -0.4);
        let a = density(&params, u, None, 512).unwrap().reflected();
        let b = density(&params, -u, None, 512).unwrap();
        assert!((a.left_edge - b.left_edge).abs() < 1e-6);
        for ((xa, ra), (xb, rb)) in a
            .grid
            .iter()
            .zip(&a.values)
            .zip(b.grid.iter().zip(&b.values))
        {
            assert!((xa - xb).abs() < 1e-9);
            assert!((ra - rb).abs() < 1e-6);
        }
    }

    #[test]
    fn csv_layout() {
        let d = SpectralDensity {
            grid: vec![-1.0, 0.0, 1.0],
            values: vec![0.0, 0.5, 0.0],
            left_edge: -1.0,
            right_edge: 1.0,
            mass: 0.5,
            eta_min: 1e-6,
        };
        let csv = d.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("lambda,rho"));
        assert_eq!(csv.lines().count(), 4);
        assert!(!csv.contains('\r'));
        assert_eq!(d.sidecar().resolution, 3);
    }
}
