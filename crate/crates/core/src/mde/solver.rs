use num_complex::Complex64;

use super::{FieldPoint, StieltjesPair};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Residual bound every returned pair satisfies.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Geometric factor of the spectral-parameter continuation.
pub const ETA_FACTOR: f64 = 0.7;

const NEWTON_MAX_ITER: usize = 60;
const NEWTON_TARGET: f64 = 1e-14;
const FIXED_POINT_MAX_ITER: usize = 2000;
const MAX_STEP_SPLITS: usize = 24;

/// The coupled quadratics at a fixed field point `u`:
///
/// ```text
/// 1 + (z - a1 + b1 m1 + c1 m2) m1 = 0
/// 1 + (z - a2 + b2 m2 + c2 m1) m2 = 0,   Im m1, Im m2 > 0
/// ```
///
/// with `a1 = (alpha1 u1 - xi'_1 u0) / gamma`, `b1 = xi''_1 / gamma`,
/// `c1 = xi'_1 xi'_2 / gamma`, and the second species scaled by `1 - gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DysonSystem {
    pub gamma: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub c1: f64,
    pub b2: f64,
    pub c2: f64,
}

impl DysonSystem {
    pub fn new(params: &ModelParams, u: FieldPoint) -> Self {
        let g = params.gamma;
        let h = 1.0 - g;
        let cross = params.xi1_prime * params.xi2_prime;
        Self {
            gamma: g,
            a1: (params.alpha1 * u.u1 - params.xi1_prime * u.u0) / g,
            a2: (params.alpha2 * u.u2 - params.xi2_prime * u.u0) / h,
            b1: params.xi1_dprime / g,
            c1: cross / g,
            b2: params.xi2_dprime / h,
            c2: cross / h,
        }
    }

    /// Operator-norm bound of the self-energy map on block-constant matrices.
    pub fn norm_bound(&self) -> f64 {
        (self.b1 + self.c1).max(self.b2 + self.c2)
    }

    /// An interval guaranteed to contain the support: the block shifts
    /// widened by `2 sqrt(norm_bound)`.
    pub fn support_bound(&self) -> (f64, f64) {
        let spread = 2.0 * self.norm_bound().sqrt();
        (self.a1.min(self.a2) - spread, self.a1.max(self.a2) + spread)
    }

    /// First moment of the limiting spectral measure.
    pub fn mean(&self) -> f64 {
        self.gamma * self.a1 + (1.0 - self.gamma) * self.a2
    }

    pub fn residuals(&self, z: Complex64, m1: Complex64, m2: Complex64) -> (Complex64, Complex64) {
        (
            1.0 + (z - self.a1 + self.b1 * m1 + self.c1 * m2) * m1,
            1.0 + (z - self.a2 + self.b2 * m2 + self.c2 * m1) * m2,
        )
    }

    /// Stieltjes transform `gamma m1 + (1 - gamma) m2` of a solved pair.
    pub fn stieltjes(&self, pair: &StieltjesPair) -> Complex64 {
        self.gamma * pair.m1 + (1.0 - self.gamma) * pair.m2
    }

    /// Solves at `z`, starting from `warm_start` when given, otherwise by
    /// continuation from far above the real axis.
    pub fn solve(&self, z: Complex64, warm_start: Option<&StieltjesPair>) -> Result<StieltjesPair> {
        if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::InvalidSpectralParameter { re: z.re, im: z.im });
        }
        if let Some(warm) = warm_start {
            if let Some(pair) = self.newton(z, warm.m1, warm.m2) {
                return Ok(pair);
            }
        }
        self.continuation(z)
    }

    /// Height from which the plain fixed-point map contracts.
    fn top_eta(&self) -> f64 {
        2.0 * self.norm_bound().sqrt() + 1.0
    }

    fn continuation(&self, z: Complex64) -> Result<StieltjesPair> {
        let target = z.im;
        let top = self.top_eta().max(target);
        let start = Complex64::new(z.re, top);
        let guess = (-1.0 / (start - self.a1), -1.0 / (start - self.a2));
        let mut current = self
            .fixed_point(start, guess.0, guess.1)
            .ok_or_else(|| self.failure(start, guess.0, guess.1, FIXED_POINT_MAX_ITER))?;
        let mut eta = top;
        while eta > target {
            let mut step = ETA_FACTOR;
            let mut splits = 0;
            loop {
                let next_eta = (eta * step).max(target);
                let next_z = Complex64::new(z.re, next_eta);
                let attempt = self.newton(next_z, current.m1, current.m2).or_else(|| {
                    self.fixed_point(next_z, current.m1, current.m2)
                        .and_then(|p| self.newton(next_z, p.m1, p.m2))
                });
                match attempt {
                    Some(pair) => {
                        current = pair;
                        eta = next_eta;
                        break;
                    }
                    None if splits < MAX_STEP_SPLITS => {
                        step = step.sqrt();
                        splits += 1;
                    }
                    None => {
                        return Err(self.failure(next_z, current.m1, current.m2, NEWTON_MAX_ITER))
                    }
                }
            }
        }
        Ok(current)
    }

    fn failure(&self, z: Complex64, m1: Complex64, m2: Complex64, iterations: usize) -> Error {
        let (r1, r2) = self.residuals(z, m1, m2);
        Error::NonConvergence {
            re: z.re,
            im: z.im,
            iterations,
            residual1: r1.norm(),
            residual2: r2.norm(),
        }
    }

    fn accept(&self, z: Complex64, m1: Complex64, m2: Complex64) -> Option<StieltjesPair> {
        let (r1, r2) = self.residuals(z, m1, m2);
        let ok = r1.norm() <= RESIDUAL_TOL
            && r2.norm() <= RESIDUAL_TOL
            && m1.im > 0.0
            && m2.im > 0.0
            && m1.is_finite()
            && m2.is_finite();
        ok.then(|| StieltjesPair {
            z,
            m1,
            m2,
            residual1: r1.norm(),
            residual2: r2.norm(),
        })
    }

    /// Newton's method on the holomorphic residual map, with step halving
    /// whenever an iterate leaves the upper half-plane or the residual grows.
    fn newton(&self, z: Complex64, mut m1: Complex64, mut m2: Complex64) -> Option<StieltjesPair> {
        let (mut r1, mut r2) = self.residuals(z, m1, m2);
        let mut size = r1.norm().max(r2.norm());
        for _ in 0..NEWTON_MAX_ITER {
            if size <= NEWTON_TARGET {
                break;
            }
            let j11 = z - self.a1 + 2.0 * self.b1 * m1 + self.c1 * m2;
            let j12 = self.c1 * m1;
            let j21 = self.c2 * m2;
            let j22 = z - self.a2 + 2.0 * self.b2 * m2 + self.c2 * m1;
            let det = j11 * j22 - j12 * j21;
            if det.norm() == 0.0 || !det.is_finite() {
                return None;
            }
            let d1 = (j22 * r1 - j12 * r2) / det;
            let d2 = (j11 * r2 - j21 * r1) / det;
            let mut t = 1.0;
            let mut improved = false;
            for _ in 0..40 {
                let n1 = m1 - t * d1;
                let n2 = m2 - t * d2;
                if n1.im > 0.0 && n2.im > 0.0 {
                    let (s1, s2) = self.residuals(z, n1, n2);
                    let new_size = s1.norm().max(s2.norm());
                    if new_size < size {
                        m1 = n1;
                        m2 = n2;
                        r1 = s1;
                        r2 = s2;
                        size = new_size;
                        improved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
        }
        self.accept(z, m1, m2)
    }

    /// Damped self-consistent iteration `m_i <- -1 / (z - a_i + ...)`.
    fn fixed_point(
        &self,
        z: Complex64,
        mut m1: Complex64,
        mut m2: Complex64,
    ) -> Option<StieltjesPair> {
        if !(m1.im > 0.0 && m2.im > 0.0) {
            m1 = Complex64::i();
            m2 = Complex64::i();
        }
        let mut damping = 1.0;
        let size_of = |a: Complex64, b: Complex64| {
            let (r1, r2) = self.residuals(z, a, b);
            r1.norm().max(r2.norm())
        };
        let mut size = size_of(m1, m2);
        for _ in 0..FIXED_POINT_MAX_ITER {
            if size <= NEWTON_TARGET {
                break;
            }
            let f1 = -1.0 / (z - self.a1 + self.b1 * m1 + self.c1 * m2);
            let f2 = -1.0 / (z - self.a2 + self.b2 * m2 + self.c2 * m1);
            let n1 = m1 + damping * (f1 - m1);
            let n2 = m2 + damping * (f2 - m2);
            let new_size = size_of(n1, n2);
            if n1.im > 0.0 && n2.im > 0.0 && new_size.is_finite() {
                m1 = n1;
                m2 = n2;
                if new_size > size {
                    damping = (damping * 0.5).max(1e-3);
                } else {
                    damping = (damping * 1.2).min(1.0);
                }
                size = new_size;
            } else {
                damping = (damping * 0.5).max(1e-3);
            }
        }
        self.accept(z, m1, m2)
    }
}
