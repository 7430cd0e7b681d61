//! Explicit complexity curves for pure `(p, q)` models at `gamma = p/(p+q)`.
//!
//! In that case the limiting Hessian spectrum is a rescaled semicircle and
//! every quantity depends on `p` and `q` only through `s = p + q`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The degree sum `s = p + q` of a pure model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PureSumSpec(u64);

impl PureSumSpec {
    /// `s >= 4`: pure `(2, 2)` is the smallest nondegenerate model.
    pub fn new(s: u64) -> Result<Self> {
        if s < 4 {
            return Err(Error::InvalidArgument(format!(
                "p + q must be at least 4 for a nondegenerate pure model, got {s}"
            )));
        }
        Ok(Self(s))
    }

    /// Skips the `s >= 4` check. The formulas stay well defined for `s >= 2`
    /// even though they no longer describe a covered model.
    pub fn new_unchecked(s: u64) -> Result<Self> {
        if s < 2 {
            return Err(Error::InvalidArgument(format!(
                "p + q must be at least 2, got {s}"
            )));
        }
        Ok(Self(s))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

/// `|x| (x^2 - 4)^{1/2} / 4 - log((|x| + (x^2 - 4)^{1/2}) / 2)` for `|x| > 2`,
/// written in terms of `r = (x^2 - 4)^{1/2}`.
fn outer_correction(r: f64) -> f64 {
    if r < 2e-3 {
        // Taylor expansion; the two terms cancel to O(r^3).
        let r3 = r * r * r;
        r3 / 12.0 - r3 * r * r / 160.0
    } else {
        0.25 * r * (r * r + 4.0).sqrt() - (0.5 * r).asinh()
    }
}

/// Log-potential `int log|lambda - x| dsc(lambda)` of the unit-variance
/// semicircle on `[-2, 2]`.
pub fn omega(x: f64) -> f64 {
    let a = x.abs();
    let base = 0.25 * x * x - 0.5;
    if a <= 2.0 + 1e-12 {
        return base;
    }
    let r = ((a - 2.0) * (a + 2.0)).sqrt();
    base - outer_correction(r)
}

/// `Omega'(x)`: `x/2` inside `[-2, 2]`, `x/2 - sign(x) (x^2 - 4)^{1/2} / 2`
/// outside.
pub fn omega_derivative(x: f64) -> f64 {
    let a = x.abs();
    if a <= 2.0 {
        return 0.5 * x;
    }
    0.5 * x - 0.5 * x.signum() * ((a - 2.0) * (a + 2.0)).sqrt()
}

/// Total complexity below level `t`:
/// `(1 + log(s-1))/2 + Omega(t sqrt(s/(s-1))) - t^2/2` for `t <= 0`, and
/// `log(s-1)/2` for `t >= 0`.
pub fn sigma_pq(t: f64, s: PureSumSpec) -> f64 {
    let s = s.as_f64();
    if t >= 0.0 {
        return 0.5 * (s - 1.0).ln();
    }
    0.5 * (1.0 + (s - 1.0).ln()) + omega(t * (s / (s - 1.0)).sqrt()) - 0.5 * t * t
}

/// `E_inf = 2 sqrt((s-1)/s)`; local minima concentrate below `-E_inf`.
pub fn e_inf_closed(s: PureSumSpec) -> f64 {
    let s = s.as_f64();
    2.0 * ((s - 1.0) / s).sqrt()
}

/// Complexity of local minima below level `t`; constant for `t >= -E_inf`.
pub fn sigma_pq_min(t: f64, s: PureSumSpec) -> f64 {
    sigma_pq(t.min(-e_inf_closed(s)), s)
}

/// `log(s-1)/2 + 2/s - 1`, the total complexity of local minima.
pub fn sigma_pq_min_total(s: PureSumSpec) -> f64 {
    let sf = s.as_f64();
    0.5 * (sf - 1.0).ln() + 2.0 / sf - 1.0
}

/// `-E_0(s)`, the unique zero of [`sigma_pq`] on `(-inf, 0)`, by bisection.
pub fn e0_closed(s: PureSumSpec) -> f64 {
    let mut hi = 0.0;
    let mut lo = -1.0;
    while sigma_pq(lo, s) > 0.0 {
        hi = lo;
        lo *= 2.0;
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if sigma_pq(mid, s) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn s(v: u64) -> PureSumSpec {
        PureSumSpec::new(v).unwrap()
    }

    /// Independent oracle: integrate log|2 cos(theta) - x| against the
    /// semicircle in angle variables, splitting at the log singularity.
    fn omega_by_quadrature(x: f64) -> f64 {
        let f = |theta: f64| {
            let lambda = 2.0 * theta.cos();
            Ok((lambda - x).abs().ln() * 2.0 * theta.sin().powi(2) / std::f64::consts::PI)
        };
        let opts = Default::default();
        if x.abs() < 2.0 {
            let split = (x / 2.0).acos();
            integrate(f, 0.0, split, opts).unwrap().value
                + integrate(f, split, std::f64::consts::PI, opts)
                    .unwrap()
                    .value
        } else {
            integrate(f, 0.0, std::f64::consts::PI, opts).unwrap().value
        }
    }

    #[test]
    fn omega_values() {
        assert_eq!(omega(0.0), -0.5);
        assert_eq!(omega(2.0), 0.5);
        assert!((omega(2.0 + 1e-13) - 0.5).abs() < 1e-12);
        let three = 1.75 - (0.75 * 5f64.sqrt() - ((3.0 + 5f64.sqrt()) / 2.0).ln());
        assert!((omega(3.0) - three).abs() < 1e-15);
        assert!((omega(3.0) - 1.0353727).abs() < 1e-7);
    }

    #[test]
    fn omega_matches_quadrature() {
        for x in [0.0, 1.0, -1.0, 2.0, -2.0, 3.0, -3.0] {
            let q = omega_by_quadrature(x);
            assert!((omega(x) - q).abs() < 1e-6, "x = {x}: {} vs {q}", omega(x));
        }
    }

    #[test]
    fn omega_smooth_across_junction() {
        for x in [2.0f64, -2.0] {
            let inner = omega_derivative(x - 1e-15 * x.signum());
            let outer = omega_derivative(x + 1e-15 * x.signum());
            assert!((inner - outer).abs() < 1e-6);
            // One-sided quotients differ by about (2/3) sqrt(h) from the
            // square-root term in Omega''.
            let h = 1e-7;
            let left = (omega(x) - omega(x - h * x.signum())) / h;
            let right = (omega(x + h * x.signum()) - omega(x)) / h;
            assert!((left - right).abs() < 1e-3, "{left} {right}");
        }
        for x in [-3.0, -2.1, -1.9, 0.5, 1.9, 2.1, 3.0] {
            let h = 1e-6;
            let central = (omega(x + h) - omega(x - h)) / (2.0 * h);
            assert!((central - omega_derivative(x)).abs() < 1e-6);
        }
        // The series and the direct form agree where both are accurate.
        let r: f64 = 1.9e-3;
        let direct = 0.25 * r * (r * r + 4.0).sqrt() - (0.5 * r).asinh();
        assert!((outer_correction(r) - direct).abs() < 1e-14);
        for x in [2.0 + 1e-7, 2.0 + 1e-6, 2.0 + 2e-6] {
            let diff = omega(x) - 0.5;
            assert!(diff > 0.0 && diff < 1e-5);
        }
    }

    #[test]
    fn sigma_pq_values() {
        assert!((sigma_pq(0.0, s(4)) - 0.5 * 3f64.ln()).abs() < 1e-15);
        assert!((sigma_pq(0.0, s(4)) - 0.549306).abs() < 1e-6);
        let t = -3f64.sqrt();
        assert!((sigma_pq(t, s(4)) - (0.5 * 3f64.ln() + 0.5 - 1.0)).abs() < 1e-14);
        assert!((sigma_pq(t, s(4)) - 0.049306).abs() < 1e-6);
        assert!((sigma_pq(7.0, s(6)) - 0.5 * 5f64.ln()).abs() < 1e-15);
        // Continuous at t = 0.
        assert!((sigma_pq(-1e-9, s(5)) - sigma_pq(0.0, s(5))).abs() < 1e-8);
    }

    #[test]
    fn sigma_pq_min_values() {
        let e = e_inf_closed(s(4));
        assert!((sigma_pq_min(1e6, s(4)) - sigma_pq_min_total(s(4))).abs() < 1e-14);
        assert!((sigma_pq_min_total(s(4)) - 0.049306).abs() < 1e-6);
        assert_eq!(sigma_pq_min(-10.0, s(4)), sigma_pq(-10.0, s(4)));
        assert_eq!(sigma_pq_min(-e, s(4)), sigma_pq(-e, s(4)));
    }

    #[test]
    fn junction_consistency() {
        for v in 4..40 {
            let j = sigma_pq(-e_inf_closed(s(v)), s(v));
            assert!((j - sigma_pq_min_total(s(v))).abs() < 1e-12, "s = {v}");
        }
    }

    #[test]
    fn e_inf_values() {
        assert!((e_inf_closed(s(4)) - 3f64.sqrt()).abs() < 1e-15);
        assert!((e_inf_closed(s(5)) - 1.788854).abs() < 1e-6);
        let mut previous = 0.0;
        for v in [4, 10, 100, 10_000, 1_000_000] {
            let e = e_inf_closed(s(v));
            assert!(e > previous && e < 2.0);
            previous = e;
        }
        assert!(2.0 - e_inf_closed(s(1_000_000)) < 1e-5);
    }

    #[test]
    fn ground_state_values() {
        assert!((e0_closed(s(4)) + 1.794).abs() < 5e-4);
        assert!((e0_closed(s(5)) + 1.888).abs() < 5e-4);
        assert!((e0_closed(s(6)) + 1.959).abs() < 5e-4);
        for v in [4, 5, 6, 9] {
            assert!(sigma_pq(e0_closed(s(v)), s(v)).abs() < 1e-10);
        }
    }

    #[test]
    fn ground_state_growth() {
        let ratio = |v: u64| e0_closed(s(v)) / (v as f64).ln().sqrt();
        let r = [ratio(100), ratio(1000), ratio(10_000)];
        for value in r {
            assert!(value > -1.35 && value < -1.0, "{value}");
        }
        assert!(r[0] < r[1] && r[1] < r[2]);
    }

    #[test]
    fn sigma_pq_increasing_below_zero() {
        for v in [4, 5, 6, 12] {
            assert!(sigma_pq(0.0, s(v)) > 0.0);
            let mut t = -3.0;
            while t < -0.01 {
                assert!(sigma_pq(t + 0.01, s(v)) > sigma_pq(t, s(v)));
                t += 0.01;
            }
        }
    }

    #[test]
    fn omega_is_even() {
        for x in [0.3, 1.9, 2.0, 2.5, 17.0] {
            assert_eq!(omega(x), omega(-x));
        }
    }

    #[test]
    fn small_sums_need_override() {
        assert!(PureSumSpec::new(3).is_err());
        assert!(PureSumSpec::new_unchecked(3).is_ok());
        assert!(PureSumSpec::new_unchecked(1).is_err());
    }
}
