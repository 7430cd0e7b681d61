use num_complex::Complex64;
use rayon::prelude::*;

use super::{cumulative_mass, DysonSystem, FieldPoint};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Height above the axis at which the edge predicate inverts the transform.
///
/// Outside the support `Im s(lambda + i eta)` is `O(eta)`, inside it tends to
/// `pi rho(lambda)`; at this height the two regimes separate within about
/// `1e-9` of a square-root edge.
pub const EDGE_ETA: f64 = 1e-10;
/// Density threshold separating "inside" from "outside".
pub const EDGE_DENSITY_THRESHOLD: f64 = 1e-8;
/// Final bracket width of the edge bisection.
pub const EDGE_TOL: f64 = 1e-9;

const SCAN_POINTS: usize = 512;
const OUTSIDE_MASS_TOL: f64 = 1e-6;
const MASS_PROBE_OFFSET: f64 = 1e-6;

/// Whether `lambda` lies in the support: the inverted density at height
/// [`EDGE_ETA`] reaches [`EDGE_DENSITY_THRESHOLD`].
pub fn inside_support(sys: &DysonSystem, lambda: f64) -> Result<bool> {
    let pair = sys.solve(Complex64::new(lambda, EDGE_ETA), None)?;
    Ok(sys.stieltjes(&pair).im / std::f64::consts::PI >= EDGE_DENSITY_THRESHOLD)
}

/// The extreme points `(left, right)` of the support of `mu_inf(u)`.
///
/// A 512-point scan of the a-priori support bound brackets the outermost
/// points where [`inside_support`] holds, bisection narrows each bracket to
/// [`EDGE_TOL`], and the cumulative mass beyond each edge is then checked to
/// be below `1e-6` so that no component of the measure was skipped by the
/// scan.
pub fn support_edges(params: &ModelParams, u: FieldPoint) -> Result<(f64, f64)> {
    let sys = DysonSystem::new(params, u);
    let (lo, hi) = sys.support_bound();
    let (lo, hi) = (lo - 1.0, hi + 1.0);
    let h = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|i| lo + h * i as f64).collect();
    let inside = grid
        .par_iter()
        .map(|&x| inside_support(&sys, x))
        .collect::<Result<Vec<bool>>>()?;

    let first = inside.iter().position(|&b| b);
    let last = inside.iter().rposition(|&b| b);
    let (Some(first), Some(last)) = (first, last) else {
        return Err(Error::EdgeDetection(
            "no point of the scan lies in the support".into(),
        ));
    };
    if first == 0 || last == SCAN_POINTS - 1 {
        return Err(Error::EdgeDetection(
            "support reaches the scan boundary".into(),
        ));
    }

    let left = bisect_edge(&sys, grid[first - 1], grid[first])?;
    let right = bisect_edge(&sys, grid[last + 1], grid[last])?;

    let below = cumulative_mass(&sys, left - MASS_PROBE_OFFSET)?;
    let above = 1.0 - cumulative_mass(&sys, right + MASS_PROBE_OFFSET)?;
    if below > OUTSIDE_MASS_TOL || above > OUTSIDE_MASS_TOL {
        return Err(Error::EdgeDetection(format!(
            "mass outside the detected support [{left}, {right}]: {below:.3e} below, {above:.3e} above"
        )));
    }
    Ok((left, right))
}

/// Bisection between a point `outside` and a point `inside` the support;
/// returns the midpoint of the final bracket.
fn bisect_edge(sys: &DysonSystem, mut outside: f64, mut inside: f64) -> Result<f64> {
    while (inside - outside).abs() > EDGE_TOL {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if inside_support(sys, mid)? {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(0.5 * (inside + outside))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_params, MixtureSpec};

    fn pure(p: u32, q: u32) -> ModelParams {
        let gamma = f64::from(p) / f64::from(p + q);
        derive_params(&MixtureSpec::pure(p, q).unwrap(), gamma).unwrap()
    }

    #[test]
    fn pure_22_edges() {
        let (l, r) = support_edges(&pure(2, 2), FieldPoint::origin()).unwrap();
        let edge = 4.0 * 3f64.sqrt();
        assert!((l + edge).abs() < 1e-6, "{l}");
        assert!((r - edge).abs() < 1e-6, "{r}");
    }

    #[test]
    fn pure_22_left_edge_touches_zero_at_threshold() {
        let (l, _) = support_edges(&pure(2, 2), FieldPoint::new(-3f64.sqrt(), 0.0, 0.0)).unwrap();
        assert!(l.abs() < 1e-6, "{l}");
    }

    #[test]
    fn pure_33_edges() {
        let (l, r) = support_edges(&pure(3, 3), FieldPoint::origin()).unwrap();
        let edge = 2.0 * 30f64.sqrt();
        assert!((l + edge).abs() < 1e-6);
        assert!((r - edge).abs() < 1e-6);
    }

    #[test]
    fn inside_outside_predicate() {
        let sys = DysonSystem::new(&pure(2, 2), FieldPoint::origin());
        let edge = 4.0 * 3f64.sqrt();
        assert!(inside_support(&sys, 0.0).unwrap());
        assert!(inside_support(&sys, edge - 1e-6).unwrap());
        assert!(!inside_support(&sys, edge + 1e-6).unwrap());
        assert!(!inside_support(&sys, -edge - 1e-6).unwrap());
    }
}
