//! Derivative-free maximizers: golden-section search in one dimension and
//! Nelder-Mead in several.

use crate::error::Result;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy)]
pub struct LineMaximum {
    pub argmax: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// The interval endpoints are evaluated as well, so a maximum sitting on an
/// endpoint is returned exactly rather than approached.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<LineMaximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut best = LineMaximum {
        argmax: a,
        value: f(a)?,
        iterations: 0,
    };
    let fb = f(b)?;
    if fb > best.value {
        best.argmax = b;
        best.value = fb;
    }
    if b - a <= tol {
        return Ok(best);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut iterations = 0;
    while b - a > tol {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    for (x, fx) in [(c, fc), (d, fd)] {
        if fx > best.value {
            best.argmax = x;
            best.value = fx;
        }
    }
    best.iterations = iterations;
    Ok(best)
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Stop when the spread of simplex values falls below this.
    pub f_tol: f64,
    /// Stop when the simplex diameter falls below this.
    pub x_tol: f64,
    pub max_evaluations: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            f_tol: 1e-10,
            x_tol: 1e-7,
            max_evaluations: 4000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexMaximum {
    pub argmax: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder-Mead maximization of `f` starting from `start`.
///
/// `project` maps every trial point into the feasible box before it is
/// evaluated (coordinate clamping).
pub fn nelder_mead_max<F, P>(
    mut f: F,
    project: P,
    start: &[f64],
    options: NelderMeadOptions,
) -> Result<SimplexMaximum>
where
    F: FnMut(&[f64]) -> Result<f64>,
    P: Fn(&mut [f64]),
{
    let n = start.len();
    let evaluations = std::cell::Cell::new(0usize);
    let mut eval = |x: &mut Vec<f64>| -> Result<f64> {
        project(x);
        evaluations.set(evaluations.get() + 1);
        f(x)
    };

    // Vertices sorted by decreasing value; we maximize.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut x0 = start.to_vec();
    let f0 = eval(&mut x0)?;
    simplex.push((x0.clone(), f0));
    for i in 0..n {
        let mut x = x0.clone();
        x[i] += options.initial_step;
        let mut fx = eval(&mut x)?;
        if x == x0 {
            // Clamped onto the start; step the other way.
            x[i] -= 2.0 * options.initial_step;
            fx = eval(&mut x)?;
        }
        simplex.push((x, fx));
    }

    let mut converged = false;
    while evaluations.get() < options.max_evaluations {
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let spread = simplex[0].1 - simplex[n].1;
        let diameter = simplex
            .iter()
            .skip(1)
            .map(|(x, _)| distance(x, &simplex[0].0))
            .fold(0.0, f64::max);
        if diameter <= options.x_tol || (spread <= options.f_tol && diameter <= 1e3 * options.x_tol)
        {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let mut reflected = along(1.0);
        let fr = eval(&mut reflected)?;
        if fr > simplex[0].1 {
            let mut expanded = along(2.0);
            let fe = eval(&mut expanded)?;
            simplex[n] = if fe > fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr > simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (mut contracted, outside) = if fr > worst.1 {
            (along(0.5), true)
        } else {
            (along(-0.5), false)
        };
        let fc = eval(&mut contracted)?;
        if (outside && fc >= fr) || (!outside && fc > worst.1) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let mut shrunk: Vec<f64> = best
                .iter()
                .zip(&vertex.0)
                .map(|(b, x)| b + 0.5 * (x - b))
                .collect();
            let fs = eval(&mut shrunk)?;
            *vertex = (shrunk, fs);
        }
    }
    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (argmax, value) = simplex.swap_remove(0);
    Ok(SimplexMaximum {
        argmax,
        value,
        evaluations: evaluations.get(),
        converged,
    })
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_interior_and_endpoint_maxima() {
        let r = golden_section_max(|x| Ok(-(x - 0.3f64).powi(2)), -2.0, 1.0, 1e-9).unwrap();
        assert!((r.argmax - 0.3).abs() < 1e-8);
        let r = golden_section_max(Ok, -2.0, 1.0, 1e-9).unwrap();
        assert_eq!(r.argmax, 1.0);
        let r = golden_section_max(|x| Ok(-x), 4.0, 4.0, 1e-9).unwrap();
        assert_eq!(r.argmax, 4.0);
    }

    #[test]
    fn nelder_mead_concave_quadratic() {
        let f = |x: &[f64]| {
            Ok(-(x[0] - 1.0).powi(2) - 2.0 * (x[1] + 0.5).powi(2) - (x[2] - x[0]).powi(2))
        };
        let r = nelder_mead_max(f, |_| {}, &[0.0, 0.0, 0.0], Default::default()).unwrap();
        assert!(r.converged);
        assert!((r.argmax[0] - 1.0).abs() < 1e-5);
        assert!((r.argmax[1] + 0.5).abs() < 1e-5);
        assert!((r.argmax[2] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn nelder_mead_respects_projection() {
        let f = |x: &[f64]| Ok(-(x[0] - 3.0).powi(2) - x[1].powi(2));
        let clamp = |x: &mut [f64]| x[0] = x[0].min(1.0);
        let r = nelder_mead_max(f, clamp, &[0.0, 0.5], Default::default()).unwrap();
        assert!((r.argmax[0] - 1.0).abs() < 1e-6);
        assert!(r.argmax[1].abs() < 1e-5);
    }
}
