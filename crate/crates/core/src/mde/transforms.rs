use num_complex::Complex64;

use super::DysonSystem;
use crate::error::Result;
use crate::quadrature::{integrate, QuadratureOptions};

/// Maps `w` in `[0, 1)` to `y = (w / (1 - w))^2` and returns `(y, dy/dw)`.
///
/// The square removes the `sqrt(y)` behaviour of the transform at a
/// spectral edge; the rational part compresses `(0, inf)`.
fn vertical_map(w: f64) -> (f64, f64) {
    let r = w / (1.0 - w);
    (r * r, 2.0 * w / (1.0 - w).powi(3))
}

fn vertical_options() -> QuadratureOptions {
    QuadratureOptions {
        abs_tol: 1e-11,
        rel_tol: 1e-12,
        max_subdivisions: 600,
    }
}

/// `int log|lambda - x| dmu(lambda)` for the measure of `sys`.
///
/// Uses `log|lambda - x| = int_0^inf [y / (1 + y^2) - Im 1/(lambda - x - iy)] dy`
/// integrated against `mu`, so only the Stieltjes transform on the vertical
/// line through `x` is needed. The integrand is bounded at `y = 0`.
pub fn log_potential_at(sys: &DysonSystem, x: f64) -> Result<f64> {
    let integrand = |w: f64| -> Result<f64> {
        if w <= 0.0 {
            return Ok(0.0);
        }
        let (y, jacobian) = vertical_map(w);
        if !jacobian.is_finite() {
            return Ok(0.0);
        }
        let pair = sys.solve(Complex64::new(x, y), None)?;
        let s = sys.stieltjes(&pair);
        Ok((y / (1.0 + y * y) - s.im) * jacobian)
    };
    Ok(integrate(integrand, 0.0, 1.0, vertical_options())?.value)
}

/// `mu((-inf, lambda])`, from the boundary argument of the logarithmic
/// transform.
///
/// With `c` the mean of `mu`, `mu((lambda, inf)) = 1[c > lambda] +
/// (1/pi) int_0^inf Re[s(lambda + iy) - 1/(c - lambda - iy)] dy`; subtracting
/// the point mass at the mean makes the integrand decay like `y^-3`.
pub fn cumulative_mass(sys: &DysonSystem, lambda: f64) -> Result<f64> {
    let c = sys.mean();
    let integrand = |w: f64| -> Result<f64> {
        if w <= 0.0 {
            return Ok(0.0);
        }
        let (y, jacobian) = vertical_map(w);
        if !jacobian.is_finite() {
            return Ok(0.0);
        }
        let z = Complex64::new(lambda, y);
        let pair = sys.solve(z, None)?;
        let reference = 1.0 / (c - z);
        Ok((sys.stieltjes(&pair) - reference).re * jacobian)
    };
    let integral = integrate(integrand, 0.0, 1.0, vertical_options())?.value;
    let above = if c > lambda { 1.0 } else { 0.0 } + integral / std::f64::consts::PI;
    Ok((1.0 - above).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::omega;
    use crate::mde::FieldPoint;
    use crate::model::{derive_params, MixtureSpec};

    fn pure_system(p: u32, q: u32, u0: f64) -> DysonSystem {
        let gamma = f64::from(p) / f64::from(p + q);
        let params = derive_params(&MixtureSpec::pure(p, q).unwrap(), gamma).unwrap();
        DysonSystem::new(&params, FieldPoint::new(u0, 0.0, 0.0))
    }

    #[test]
    fn semicircle_log_potential_at_origin() {
        // Semicircle with variance 12: log sqrt(12) + Omega(0).
        let lp = log_potential_at(&pure_system(2, 2, 0.0), 0.0).unwrap();
        assert!((lp - (0.5 * 12f64.ln() - 0.5)).abs() < 1e-8, "{lp}");
    }

    #[test]
    fn shifted_semicircle_log_potential() {
        // Centre -4 u0, radius 2 sqrt(12): potential at 0 is
        // log sqrt(12) + Omega(4 u0 / sqrt(12)).
        for u0 in [-2.5, -3f64.sqrt(), -1.0, 0.4, 2.0] {
            let lp = log_potential_at(&pure_system(2, 2, u0), 0.0).unwrap();
            let expected = 0.5 * 12f64.ln() + omega(4.0 * u0 / 12f64.sqrt());
            assert!(
                (lp - expected).abs() < 1e-8,
                "u0 = {u0}: {lp} vs {expected}"
            );
        }
    }

    #[test]
    fn semicircle_cdf() {
        // Semicircle radius R = 2 sqrt(12) centred at 0.
        let sys = pure_system(2, 2, 0.0);
        let radius = 2.0 * 12f64.sqrt();
        let exact = |x: f64| {
            let t = (x / radius).clamp(-1.0, 1.0);
            0.5 + (t * (1.0 - t * t).sqrt() + t.asin()) / std::f64::consts::PI
        };
        for x in [-8.0, -6.0, -1.0, 0.5, 3.0, 6.9, 9.0] {
            let m = cumulative_mass(&sys, x).unwrap();
            assert!((m - exact(x)).abs() < 1e-8, "x = {x}: {m} vs {}", exact(x));
        }
    }
}
