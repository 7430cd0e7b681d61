//! The complexity functional `S[u] = int log|lambda| dmu_inf(u) - |u|^2 / 2`
//! and the four variational problems built from it.
//!
//! `Sigma_tot(t)` maximizes `S` over the half-space `u0 <= t`, `Sigma_min(t)`
//! additionally restricts to the set `G` of field points whose limiting
//! Hessian spectrum is nonnegative. Both add the Kac-Rice prefactor limit.
//! Pure models only depend on `u0`, so their problems are one-dimensional and
//! solved by golden-section search; mixtures use multi-start Nelder-Mead.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mde::{log_potential_at, support_edges, DysonSystem, FieldPoint, SpectralDensity};
use crate::model::{prefactor_limit, ModelParams};
use crate::optimize::{golden_section_max, nelder_mead_max, NelderMeadOptions};

/// Radius of the search box.
pub const SEARCH_RADIUS: f64 = 10.0;
/// Objective value assigned outside `G` when maximizing over minima.
pub const INFEASIBLE_PENALTY: f64 = -1e6;
/// Tolerance on the left edge when testing membership in `G`.
pub const G_TOL: f64 = 1e-9;
pub const GOLDEN_TOL: f64 = 1e-8;
pub const THRESHOLD_TOL: f64 = 1e-7;
/// Values within this of each other count as ties between starts.
pub const TIE_TOL: f64 = 1e-9;
/// A maximizer this close to a box face is reported as a boundary failure.
const BOUNDARY_MARGIN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Total,
    Minima,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start: FieldPoint,
    pub maximizer: FieldPoint,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `golden-section` for pure models, `nelder-mead` otherwise.
    pub method: String,
    pub evaluations: usize,
    /// True when the maximizer sits on `u0 = t`.
    pub threshold_active: bool,
    /// True when the maximizer sits on the boundary of `G`.
    pub positivity_active: bool,
    /// Mixtures carry no uniqueness guarantee; their optimum is the best
    /// value found over all starts.
    pub best_found: bool,
    pub starts: Vec<StartOutcome>,
}

/// An optimized complexity value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityResult {
    pub value: f64,
    pub maximizer: FieldPoint,
    pub mode: Mode,
    pub threshold_t: Option<f64>,
    /// The prefactor limit.
    pub constant_part: f64,
    /// The supremum of `S`; `value - constant_part - functional_part == 0`.
    pub functional_part: f64,
    pub diagnostics: Diagnostics,
}

/// A threshold located by bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    pub iterations: usize,
    pub tolerance: f64,
}

/// `int log|lambda| rho(lambda) d lambda` over a sampled density.
///
/// The density is taken as its piecewise-linear interpolant and each cell is
/// integrated against `log|lambda|` in closed form, so a zero inside the
/// support costs no accuracy.
pub fn log_potential(density: &SpectralDensity) -> f64 {
    // Antiderivatives of log|x| and x log|x|.
    fn f0(x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            x * x.abs().ln() - x
        }
    }
    fn f1(x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            0.5 * x * x * x.abs().ln() - 0.25 * x * x
        }
    }
    let cell = |x0: f64, x1: f64, y0: f64, y1: f64| {
        let slope = (y1 - y0) / (x1 - x0);
        let intercept = y0 - slope * x0;
        intercept * (f0(x1) - f0(x0)) + slope * (f1(x1) - f1(x0))
    };
    let mut total = 0.0;
    for (x, y) in density.grid.windows(2).zip(density.values.windows(2)) {
        if y[0] == 0.0 && y[1] == 0.0 {
            continue;
        }
        if x[0] < 0.0 && x[1] > 0.0 {
            // Split at the singularity so each piece has a one-sided log.
            let y_mid = y[0] + (y[1] - y[0]) * (-x[0]) / (x[1] - x[0]);
            total += cell(x[0], 0.0, y[0], y_mid) + cell(0.0, x[1], y_mid, y[1]);
        } else {
            total += cell(x[0], x[1], y[0], y[1]);
        }
    }
    total
}

/// `int log|lambda| dmu_inf(u)`, computed from the Stieltjes transform on the
/// imaginary axis rather than from a sampled density.
pub fn log_potential_exact(params: &ModelParams, u: FieldPoint) -> Result<f64> {
    log_potential_at(&DysonSystem::new(params, u), 0.0)
}

/// `S[u] = int log|lambda| dmu_inf(u) - |u|^2 / 2`.
pub fn s_bsg(params: &ModelParams, u: FieldPoint) -> Result<f64> {
    Ok(log_potential_exact(params, u)? - 0.5 * u.norm_sq())
}

/// Whether `mu_inf(u)` is supported in `[-tol, inf)`.
pub fn in_g(params: &ModelParams, u: FieldPoint, tol: f64) -> Result<bool> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be nonnegative, got {tol}"
        )));
    }
    Ok(support_edges(params, u)?.0 >= -tol)
}

/// `sup_{u0 <= t} S[u]` plus the prefactor limit (all of `R^3` when `t` is
/// `None`).
pub fn sigma_total(params: &ModelParams, t: Option<f64>) -> Result<ComplexityResult> {
    optimize(params, t, Mode::Total)
}

/// `sup_{u in G, u0 <= t} S[u]` plus the prefactor limit.
pub fn sigma_min(params: &ModelParams, t: Option<f64>) -> Result<ComplexityResult> {
    optimize(params, t, Mode::Minima)
}

/// `E_inf` for a pure model: `G = (-inf, -E_inf] x R^2`.
pub fn e_infinity(params: &ModelParams) -> Result<f64> {
    Ok(e_infinity_search(params)?.value)
}

/// Bisection for the `u0` at which the left edge of `mu_inf((u0, 0, 0))`
/// reaches zero. Returns `E_inf = -u0` at the feasible end of the final
/// bracket, so `(-E_inf, 0, 0)` lies in `G`.
pub fn e_infinity_search(params: &ModelParams) -> Result<Threshold> {
    if !params.is_pure() {
        return Err(Error::NotPure(
            "E_inf is only defined for pure models".into(),
        ));
    }
    let feasible = |u0: f64| in_g(params, FieldPoint::new(u0, 0.0, 0.0), 0.0);
    let sys = DysonSystem::new(params, FieldPoint::origin());
    let drift = (params.xi1_prime / params.gamma).min(params.xi2_prime / (1.0 - params.gamma));
    let mut lo = -(2.0 * sys.norm_bound().sqrt() / drift + 1.0);
    let mut hi = 0.0;
    if feasible(hi)? {
        return Err(Error::Bracketing(
            "u0 = 0 already has a nonnegative spectrum".into(),
        ));
    }
    let mut widenings = 0;
    while !feasible(lo)? {
        hi = lo;
        lo *= 2.0;
        widenings += 1;
        if widenings > 20 {
            return Err(Error::Bracketing(
                "no u0 with a nonnegative spectrum found".into(),
            ));
        }
    }
    let mut iterations = 0;
    while hi - lo > THRESHOLD_TOL {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(Threshold {
        value: -lo,
        iterations,
        tolerance: THRESHOLD_TOL,
    })
}

/// `-E_0`, the zero of `t -> Sigma_tot(t)` on `(-inf, 0)`.
pub fn ground_state_bound(params: &ModelParams) -> Result<f64> {
    Ok(ground_state_search(params)?.value)
}

pub fn ground_state_search(params: &ModelParams) -> Result<Threshold> {
    let total = |t: f64| sigma_total(params, Some(t)).map(|r| r.value);
    let mut hi = 0.0;
    let at_zero = total(hi)?;
    if !(at_zero > 0.0) {
        return Err(Error::Bracketing(format!(
            "Sigma_tot(0) = {at_zero} is not positive, so there is no zero on (-inf, 0)"
        )));
    }
    let mut lo = -1.0;
    let mut value = total(lo)?;
    while value > 0.0 {
        hi = lo;
        lo *= 2.0;
        if lo < -SEARCH_RADIUS * 8.0 {
            return Err(Error::Bracketing(format!(
                "Sigma_tot stays positive down to t = {hi} (value {value})"
            )));
        }
        value = total(lo)?;
    }
    let mut iterations = 0;
    while hi - lo > THRESHOLD_TOL {
        let mid = 0.5 * (lo + hi);
        if total(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(Threshold {
        value: 0.5 * (lo + hi),
        iterations,
        tolerance: THRESHOLD_TOL,
    })
}

/// One row of a complexity curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub sigma_total: f64,
    pub sigma_min: f64,
}

/// `Sigma_tot(t)` and `Sigma_min(t)` at each threshold, in order.
pub fn curve(params: &ModelParams, ts: &[f64]) -> Result<Vec<CurvePoint>> {
    ts.iter()
        .map(|&t| {
            Ok(CurvePoint {
                t,
                sigma_total: sigma_total(params, Some(t))?.value,
                sigma_min: sigma_min(params, Some(t))?.value,
            })
        })
        .collect()
}

/// `t,sigma_total,sigma_min` rows with a header line.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("t,sigma_total,sigma_min\n");
    for p in points {
        out.push_str(&format!(
            "{:e},{:e},{:e}\n",
            p.t, p.sigma_total, p.sigma_min
        ));
    }
    out
}

/// Search range for `u0`: the box `[-R, R]` cut at `t`, with the lower face
/// moved down when `t` itself is below `-R`.
fn u0_range(upper: Option<f64>) -> (f64, f64) {
    let hi = upper.map_or(SEARCH_RADIUS, |t| t.min(SEARCH_RADIUS));
    (f64::min(-SEARCH_RADIUS, hi - SEARCH_RADIUS), hi)
}

fn finish(
    params: &ModelParams,
    t: Option<f64>,
    mode: Mode,
    sup: f64,
    maximizer: FieldPoint,
    diagnostics: Diagnostics,
) -> ComplexityResult {
    let constant_part = prefactor_limit(params);
    let value = constant_part + sup;
    ComplexityResult {
        value,
        maximizer,
        mode,
        threshold_t: t,
        constant_part,
        functional_part: value - constant_part,
        diagnostics,
    }
}

fn optimize(params: &ModelParams, t: Option<f64>, mode: Mode) -> Result<ComplexityResult> {
    if let Some(t) = t {
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "threshold must be finite, got {t}"
            )));
        }
    }
    if params.is_pure() {
        optimize_pure(params, t, mode)
    } else {
        optimize_mixture(params, t, mode)
    }
}

fn optimize_pure(params: &ModelParams, t: Option<f64>, mode: Mode) -> Result<ComplexityResult> {
    let positivity_bound = match mode {
        Mode::Total => None,
        Mode::Minima => Some(-e_infinity(params)?),
    };
    let upper = match (t, positivity_bound) {
        (Some(t), Some(g)) => Some(t.min(g)),
        (t, g) => t.or(g),
    };
    let (lo, hi) = u0_range(upper);
    let mut evaluations = 0;
    let best = golden_section_max(
        |u0| {
            evaluations += 1;
            s_bsg(params, FieldPoint::new(u0, 0.0, 0.0))
        },
        lo,
        hi,
        GOLDEN_TOL,
    )?;
    let maximizer = FieldPoint::new(best.argmax, 0.0, 0.0);
    let upper_face_is_box = upper.is_none_or(|u| u >= SEARCH_RADIUS);
    if best.argmax - lo < BOUNDARY_MARGIN
        || (upper_face_is_box && hi - best.argmax < BOUNDARY_MARGIN)
    {
        return Err(Error::BoundaryMaximizer {
            point: maximizer.to_array(),
            radius: SEARCH_RADIUS,
        });
    }
    let on_upper = hi - best.argmax < BOUNDARY_MARGIN;
    let threshold_active = on_upper && t.is_some_and(|t| t <= hi);
    let positivity_active = on_upper && positivity_bound.is_some_and(|g| g <= hi);
    let diagnostics = Diagnostics {
        method: "golden-section".into(),
        evaluations,
        threshold_active,
        positivity_active,
        best_found: false,
        starts: Vec::new(),
    };
    Ok(finish(params, t, mode, best.value, maximizer, diagnostics))
}

/// Deterministic starting points for the mixture search.
fn start_points() -> [FieldPoint; 8] {
    [
        FieldPoint::new(0.0, 0.0, 0.0),
        FieldPoint::new(-1.0, 0.0, 0.0),
        FieldPoint::new(1.0, 0.0, 0.0),
        FieldPoint::new(-2.0, 0.0, 0.0),
        FieldPoint::new(0.0, 1.0, 1.0),
        FieldPoint::new(0.0, -1.0, -1.0),
        FieldPoint::new(-1.0, 1.0, -1.0),
        FieldPoint::new(-1.0, -1.0, 1.0),
    ]
}

fn optimize_mixture(params: &ModelParams, t: Option<f64>, mode: Mode) -> Result<ComplexityResult> {
    let (lo0, hi0) = u0_range(t);
    let project = move |x: &mut [f64]| {
        x[0] = x[0].clamp(lo0, hi0);
        x[1] = x[1].clamp(-SEARCH_RADIUS, SEARCH_RADIUS);
        x[2] = x[2].clamp(-SEARCH_RADIUS, SEARCH_RADIUS);
    };
    let objective = |x: &[f64]| -> Result<f64> {
        let u = FieldPoint::from_slice(x);
        if mode == Mode::Minima && !in_g(params, u, G_TOL)? {
            return Ok(INFEASIBLE_PENALTY);
        }
        s_bsg(params, u)
    };
    let options = NelderMeadOptions::default();

    let outcomes = start_points()
        .par_iter()
        .map(|&start| -> Result<StartOutcome> {
            let mut x = start.to_array();
            project(&mut x);
            if mode == Mode::Minima {
                x = feasible_start(params, x, lo0)?;
            }
            let found = nelder_mead_max(objective, project, &x, options)?;
            Ok(StartOutcome {
                start: FieldPoint::from_slice(&x),
                maximizer: FieldPoint::from_slice(&found.argmax),
                value: found.value,
                evaluations: found.evaluations,
                converged: found.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let top = outcomes
        .iter()
        .map(|o| o.value)
        .fold(f64::NEG_INFINITY, f64::max);
    if top <= INFEASIBLE_PENALTY {
        return Err(Error::Optimizer("no feasible point found".into()));
    }
    // Among near-ties keep the smallest |u|; earlier starts win exact ties.
    let best = outcomes
        .iter()
        .filter(|o| top - o.value <= TIE_TOL)
        .min_by(|a, b| a.maximizer.norm_sq().total_cmp(&b.maximizer.norm_sq()))
        .expect("the best start is among the ties")
        .clone();

    let m = best.maximizer;
    let on_lower = m.u0 - lo0 < BOUNDARY_MARGIN;
    let on_side = m.u1.abs() > SEARCH_RADIUS - BOUNDARY_MARGIN
        || m.u2.abs() > SEARCH_RADIUS - BOUNDARY_MARGIN;
    let on_upper = hi0 - m.u0 < BOUNDARY_MARGIN;
    if on_lower || on_side || (on_upper && t.is_none_or(|t| t >= SEARCH_RADIUS)) {
        return Err(Error::BoundaryMaximizer {
            point: m.to_array(),
            radius: SEARCH_RADIUS,
        });
    }
    let positivity_active = mode == Mode::Minima && support_edges(params, m)?.0 < 1e-4;
    let diagnostics = Diagnostics {
        method: "nelder-mead".into(),
        evaluations: outcomes.iter().map(|o| o.evaluations).sum(),
        threshold_active: on_upper && t.is_some(),
        positivity_active,
        best_found: true,
        starts: outcomes,
    };
    Ok(finish(params, t, mode, best.value, m, diagnostics))
}

/// Moves a start into `G` by lowering `u0`: decreasing `u0` shifts the whole
/// spectrum to the right.
fn feasible_start(params: &ModelParams, mut x: [f64; 3], lo0: f64) -> Result<[f64; 3]> {
    let mut step = 0.5;
    while !in_g(params, FieldPoint::from_slice(&x), G_TOL)? {
        if x[0] <= lo0 {
            return Err(Error::Optimizer(format!(
                "could not find a start in G from {x:?} within the search box"
            )));
        }
        x[0] = (x[0] - step).max(lo0);
        step *= 2.0;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{omega, sigma_pq, PureSumSpec};
    use crate::mde::density;
    use crate::model::{derive_params, MixtureSpec};

    fn pure(p: u32, q: u32) -> ModelParams {
        let gamma = f64::from(p) / f64::from(p + q);
        derive_params(&MixtureSpec::pure(p, q).unwrap(), gamma).unwrap()
    }

    #[test]
    fn grid_log_potential_unit_semicircle() {
        let n = 4001;
        let grid: Vec<f64> = (0..n)
            .map(|i| -3.0 + 6.0 * i as f64 / (n - 1) as f64)
            .collect();
        let values = grid
            .iter()
            .map(|x| (4.0 - x * x).max(0.0).sqrt() / (2.0 * std::f64::consts::PI))
            .collect();
        let d = SpectralDensity {
            grid,
            values,
            left_edge: -2.0,
            right_edge: 2.0,
            mass: 1.0,
            eta_min: 0.0,
        };
        assert!((log_potential(&d) - omega(0.0)).abs() < 1e-5);
        assert!((log_potential(&d) - log_potential(&d.reflected())).abs() < 1e-13);
    }

    #[test]
    fn grid_and_exact_log_potential_agree() {
        let params = pure(2, 2);
        let d = density(&params, FieldPoint::origin(), None, 2048).unwrap();
        let grid = log_potential(&d);
        let exact = log_potential_exact(&params, FieldPoint::origin()).unwrap();
        assert!((exact - (0.5 * 12f64.ln() - 0.5)).abs() < 1e-8);
        assert!((grid - exact).abs() < 1e-3, "{grid} vs {exact}");
    }

    #[test]
    fn s_bsg_values() {
        let params = pure(2, 2);
        let origin = s_bsg(&params, FieldPoint::origin()).unwrap();
        assert!((origin - (0.5 * 12f64.ln() - 0.5)).abs() < 1e-8);
        let far = s_bsg(&params, FieldPoint::new(0.0, 3.0, 4.0)).unwrap();
        assert!((far - (origin - 12.5)).abs() < 1e-12);
        for u0 in [-1.5, -0.5, 0.8] {
            let v = s_bsg(&params, FieldPoint::new(u0, 0.0, 0.0)).unwrap();
            let expected = 12f64.sqrt().ln() + omega(u0 * (4.0f64 / 3.0).sqrt()) - 0.5 * u0 * u0;
            assert!((v - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn membership_in_g() {
        let params = pure(2, 2);
        assert!(in_g(&params, FieldPoint::new(-2.0, 0.0, 0.0), 1e-6).unwrap());
        assert!(!in_g(&params, FieldPoint::origin(), 1e-6).unwrap());
        assert!(in_g(&params, FieldPoint::new(-3f64.sqrt(), 0.0, 0.0), 1e-4).unwrap());
        assert!(in_g(&params, FieldPoint::origin(), -1.0).is_err());
    }

    #[test]
    fn e_infinity_pure_22() {
        let e = e_infinity(&pure(2, 2)).unwrap();
        assert!((e - 3f64.sqrt()).abs() < 1e-6, "{e}");
    }

    #[test]
    fn e_infinity_needs_pure_model() {
        let spec = MixtureSpec::new(vec![
            crate::model::Term {
                p: 2,
                q: 2,
                beta: 0.5f64.sqrt(),
            },
            crate::model::Term {
                p: 3,
                q: 3,
                beta: 0.5f64.sqrt(),
            },
        ])
        .unwrap();
        let params = derive_params(&spec, 0.5).unwrap();
        assert!(matches!(e_infinity(&params), Err(Error::NotPure(_))));
    }

    #[test]
    fn sigma_total_pure_22() {
        let params = pure(2, 2);
        let r = sigma_total(&params, None).unwrap();
        assert!((r.value - 0.5 * 3f64.ln()).abs() < 1e-6, "{}", r.value);
        assert!(r.maximizer.u0.abs() < 1e-4);
        assert_eq!(r.value - r.constant_part - r.functional_part, 0.0);
        assert_eq!(r.mode, Mode::Total);

        let r = sigma_total(&params, Some(-3f64.sqrt())).unwrap();
        let s4 = PureSumSpec::new(4).unwrap();
        assert!((r.value - sigma_pq(-3f64.sqrt(), s4)).abs() < 1e-6);
        assert!(r.diagnostics.threshold_active);
        assert!(r.maximizer.u0 <= -3f64.sqrt() + 1e-9);
    }

    #[test]
    fn sigma_min_pure_22() {
        let params = pure(2, 2);
        let r = sigma_min(&params, None).unwrap();
        assert!((r.value - (0.5 * 3f64.ln() + 0.5 - 1.0)).abs() < 1e-6);
        assert!(r.diagnostics.positivity_active);
        let (left, _) = support_edges(&params, r.maximizer).unwrap();
        assert!(left >= -1e-6);

        let deep_min = sigma_min(&params, Some(-10.0)).unwrap();
        let deep_total = sigma_total(&params, Some(-10.0)).unwrap();
        assert!((deep_min.value - deep_total.value).abs() < 1e-9);

        let high = sigma_min(&params, Some(5.0)).unwrap();
        let at_threshold = sigma_min(&params, Some(-3f64.sqrt())).unwrap();
        assert!((high.value - at_threshold.value).abs() < 1e-6);
    }

    #[test]
    fn e_infinity_other_pure_models() {
        let e33 = e_infinity(&pure(3, 3)).unwrap();
        assert!((e33 - 2.0 * (5.0f64 / 6.0).sqrt()).abs() < 1e-6);
        let e23 = e_infinity(&pure(2, 3)).unwrap();
        assert!((e23 - 2.0 * 0.8f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn ground_states() {
        for (p, q, expected) in [(2, 2, -1.794), (2, 3, -1.888), (3, 3, -1.959)] {
            let g = ground_state_bound(&pure(p, q)).unwrap();
            assert!((g - expected).abs() < 5e-3, "({p},{q}): {g}");
            let s = PureSumSpec::new(u64::from(p + q)).unwrap();
            assert!((g - crate::closed_form::e0_closed(s)).abs() < 1e-5);
        }
    }

    #[test]
    fn total_is_monotone_and_stabilizes() {
        let params = pure(2, 2);
        let mut previous = f64::NEG_INFINITY;
        for i in 0..12 {
            let t = -2.4 + 0.25 * f64::from(i);
            let v = sigma_total(&params, Some(t)).unwrap().value;
            assert!(v >= previous - 1e-9, "t = {t}");
            previous = v;
        }
        let at_zero = sigma_total(&params, Some(0.0)).unwrap().value;
        for t in [1.0, 5.0] {
            assert!((sigma_total(&params, Some(t)).unwrap().value - at_zero).abs() < 1e-6);
        }
    }

    #[test]
    fn g_is_a_half_line_for_pure_models() {
        let params = pure(2, 2);
        let flags: Vec<bool> = (0..50)
            .map(|i| {
                in_g(
                    &params,
                    FieldPoint::new(-4.0 + 0.08 * f64::from(i), 0.0, 0.0),
                    0.0,
                )
                .unwrap()
            })
            .collect();
        let switch = flags.iter().position(|f| !f).unwrap();
        assert!(switch > 0);
        assert!(flags[switch..].iter().all(|f| !f));
    }

    #[test]
    fn degree_sum_collapse() {
        let a = derive_params(&MixtureSpec::pure(2, 3).unwrap(), 0.4).unwrap();
        let b = derive_params(&MixtureSpec::pure(3, 2).unwrap(), 0.6).unwrap();
        for t in [-2.2, -1.5, -0.7, 0.0, 1.0] {
            let va = sigma_total(&a, Some(t)).unwrap().value;
            let vb = sigma_total(&b, Some(t)).unwrap().value;
            assert!((va - vb).abs() < 1e-5, "t = {t}: {va} vs {vb}");
        }
    }

    #[test]
    fn mixture_optimum_is_labeled_best_found() {
        let b = 0.5f64.sqrt();
        let spec = MixtureSpec::new(vec![
            crate::model::Term {
                p: 2,
                q: 2,
                beta: b,
            },
            crate::model::Term {
                p: 3,
                q: 3,
                beta: b,
            },
        ])
        .unwrap();
        let params = derive_params(&spec, 0.5).unwrap();
        let r = sigma_total(&params, None).unwrap();
        assert!(r.diagnostics.best_found);
        assert_eq!(r.diagnostics.starts.len(), 8);
        assert!(r.value.is_finite());
        for start in &r.diagnostics.starts {
            assert!(start.value <= r.functional_part + 1e-12);
        }
        let m = sigma_min(&params, None).unwrap();
        assert!(m.value <= r.value + 1e-9);
        assert!(support_edges(&params, m.maximizer).unwrap().0 >= -1e-6);
    }

    #[test]
    fn curve_rows() {
        let points = curve(&pure(2, 2), &[-2.0, 0.0]).unwrap();
        let csv = curve_csv(&points);
        assert!(csv.starts_with("t,sigma_total,sigma_min\n"));
        assert_eq!(csv.lines().count(), 3);
        assert!(points[0].sigma_min <= points[0].sigma_total + 1e-12);
    }
}
