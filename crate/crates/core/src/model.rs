//! Mixture specifications and the scalar model parameters derived from them.
//!
//! A model is a finite mixture `xi(x, y) = sum beta_{p,q}^2 x^p y^q` normalized
//! so that `xi(1, 1) = 1`. Everything downstream only needs the first and
//! second partial derivatives of `xi` at `(1, 1)` together with the species
//! fraction `gamma`.
//!
//! # File format
//!
//! ```text
//! # comment
//! term 2 2 0.7071067811865476
//! term 2 3 0.7071067811865476
//! ```
//!
//! `pure <p> <q>` is shorthand for `term <p> <q> 1`. Statements are separated
//! by newlines or `;`, blank lines are ignored and `#` starts a comment.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed deviation of `sum beta^2` from one.
///
/// Coefficients written with ten significant digits (`0.7071067812`) are off
/// by a few parts in 1e11, so the check is slightly looser than machine
/// precision.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub p: u32,
    pub q: u32,
    pub beta: f64,
}

/// A validated, normalized coefficient table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    entries: Vec<Term>,
}

impl MixtureSpec {
    /// Validates `entries` including the normalization `xi(1,1) = 1`.
    pub fn new(entries: Vec<Term>) -> Result<Self> {
        let spec = Self::unnormalized(entries)?;
        let sum = spec.xi_at_one();
        let deviation = (sum - 1.0).abs();
        if deviation > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum, deviation });
        }
        Ok(spec)
    }

    /// Like [`MixtureSpec::new`], but rescales all coefficients by
    /// `1 / sqrt(sum beta^2)` instead of rejecting an unnormalized table.
    pub fn renormalized(entries: Vec<Term>) -> Result<Self> {
        let mut spec = Self::unnormalized(entries)?;
        let scale = spec.xi_at_one().sqrt();
        for term in &mut spec.entries {
            term.beta /= scale;
        }
        Ok(spec)
    }

    fn unnormalized(entries: Vec<Term>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for term in &entries {
            if term.p == 0 || term.q == 0 {
                return Err(Error::InvalidArgument(format!(
                    "term ({}, {}) needs p >= 1 and q >= 1",
                    term.p, term.q
                )));
            }
            if !term.beta.is_finite() {
                return Err(Error::NonFiniteCoefficient {
                    p: term.p,
                    q: term.q,
                });
            }
            if term.beta < 0.0 {
                return Err(Error::NegativeCoefficient {
                    p: term.p,
                    q: term.q,
                    beta: term.beta,
                });
            }
            if !seen.insert((term.p, term.q)) {
                return Err(Error::DuplicateTerm {
                    p: term.p,
                    q: term.q,
                });
            }
        }
        if !entries.iter().any(|t| t.beta > 0.0) {
            return Err(Error::EmptyMixture);
        }
        Ok(Self { entries })
    }

    /// The pure `(p, q)` model, `xi(x, y) = x^p y^q`.
    pub fn pure(p: u32, q: u32) -> Result<Self> {
        Self::new(vec![Term { p, q, beta: 1.0 }])
    }

    pub fn entries(&self) -> &[Term] {
        &self.entries
    }

    /// `xi(1, 1) = sum beta^2`.
    pub fn xi_at_one(&self) -> f64 {
        self.entries.iter().map(|t| t.beta * t.beta).sum()
    }

    /// `Some((p, q))` when exactly one term carries a positive coefficient.
    pub fn pure_degrees(&self) -> Option<(u32, u32)> {
        let mut active = self.entries.iter().filter(|t| t.beta > 0.0);
        let first = active.next()?;
        match active.next() {
            None => Some((first.p, first.q)),
            Some(_) => None,
        }
    }
}

impl fmt::Display for MixtureSpec {
    /// Writes the model file format with 17 significant digits per
    /// coefficient, which re-parses to identical bits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for term in &self.entries {
            writeln!(f, "term {} {} {:.16e}", term.p, term.q, term.beta)?;
        }
        Ok(())
    }
}

impl FromStr for MixtureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_mixture(s)
    }
}

/// Parses a model document and checks its normalization.
pub fn parse_mixture(text: &str) -> Result<MixtureSpec> {
    MixtureSpec::new(parse_terms(text)?)
}

/// Parses a model document and rescales it to `xi(1, 1) = 1`.
pub fn parse_mixture_renormalized(text: &str) -> Result<MixtureSpec> {
    MixtureSpec::renormalized(parse_terms(text)?)
}

fn parse_terms(text: &str) -> Result<Vec<Term>> {
    let mut terms = Vec::new();
    for (index, raw_line) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw_line.split('#').next().unwrap_or("");
        for statement in line.split(';') {
            let fields: Vec<&str> = statement.split_whitespace().collect();
            let Some((&keyword, args)) = fields.split_first() else {
                continue;
            };
            let syntax = |message: String| Error::Syntax {
                line: line_no,
                message,
            };
            let degree = |s: &str| -> Result<u32> {
                s.parse::<u32>()
                    .map_err(|_| syntax(format!("expected a positive integer degree, got `{s}`")))
            };
            match (keyword, args) {
                ("term", [p, q, beta]) => {
                    let beta = beta.parse::<f64>().map_err(|_| {
                        syntax(format!("expected a real coefficient, got `{beta}`"))
                    })?;
                    terms.push(Term {
                        p: degree(p)?,
                        q: degree(q)?,
                        beta,
                    });
                }
                ("pure", [p, q]) => terms.push(Term {
                    p: degree(p)?,
                    q: degree(q)?,
                    beta: 1.0,
                }),
                ("term", _) => return Err(syntax("usage: term <p> <q> <beta>".into())),
                ("pure", _) => return Err(syntax("usage: pure <p> <q>".into())),
                (other, _) => return Err(syntax(format!("unknown keyword `{other}`"))),
            }
        }
    }
    Ok(terms)
}

/// Scalars derived from a mixture at a given species fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub gamma: f64,
    pub xi1_prime: f64,
    pub xi2_prime: f64,
    pub xi1_dprime: f64,
    pub xi2_dprime: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Degrees of the single active term for pure models.
    pub pure: Option<(u32, u32)>,
}

/// Computes the first and second derivatives of `xi` at `(1, 1)` and the
/// field couplings `alpha_i = sqrt(xi''_i + xi'_i - xi'_i^2)`.
///
/// Models with `xi''_1 = 0` or `xi''_2 = 0` (pure `(1, q)` or `(p, 1)`) are
/// rejected: their Hessian has a degenerate block.
pub fn derive_params(spec: &MixtureSpec, gamma: f64) -> Result<ModelParams> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    let mut xi1_prime = 0.0;
    let mut xi2_prime = 0.0;
    let mut xi1_dprime = 0.0;
    let mut xi2_dprime = 0.0;
    for term in spec.entries() {
        let w = term.beta * term.beta;
        let p = f64::from(term.p);
        let q = f64::from(term.q);
        xi1_prime += p * w;
        xi2_prime += q * w;
        xi1_dprime += p * (p - 1.0) * w;
        xi2_dprime += q * (q - 1.0) * w;
    }
    if xi1_dprime <= 0.0 || xi2_dprime <= 0.0 {
        return Err(Error::UnsupportedModel(format!(
            "requires xi''_1 > 0 and xi''_2 > 0, got xi''_1 = {xi1_dprime}, xi''_2 = {xi2_dprime} \
             (pure (1, q) and (p, 1) models are degenerate)"
        )));
    }
    let pure = spec.pure_degrees();
    let (alpha1, alpha2) = if pure.is_some() {
        (0.0, 0.0)
    } else {
        // Cauchy-Schwarz makes the radicands nonnegative up to rounding.
        (
            (xi1_dprime + xi1_prime - xi1_prime * xi1_prime)
                .max(0.0)
                .sqrt(),
            (xi2_dprime + xi2_prime - xi2_prime * xi2_prime)
                .max(0.0)
                .sqrt(),
        )
    };
    Ok(ModelParams {
        gamma,
        xi1_prime,
        xi2_prime,
        xi1_dprime,
        xi2_dprime,
        alpha1,
        alpha2,
        pure,
    })
}

impl ModelParams {
    pub fn is_pure(&self) -> bool {
        self.pure.is_some()
    }

    /// True for pure `(p, q)` models at `gamma = p / (p + q)`, where the
    /// limiting spectrum is an exact semicircle and closed forms exist.
    pub fn closed_form_degree(&self) -> Option<u32> {
        let (p, q) = self.pure?;
        let ratio = f64::from(p) / f64::from(p + q);
        ((self.gamma - ratio).abs() <= 1e-12).then_some(p + q)
    }
}

/// Large-N limit of `(1/N) log f(N1, N2)`, the Kac-Rice prefactor:
/// `(1 + gamma log(gamma / xi'_1) + (1 - gamma) log((1 - gamma) / xi'_2)) / 2`.
pub fn prefactor_limit(params: &ModelParams) -> f64 {
    let g = params.gamma;
    (1.0 + g * (g / params.xi1_prime).ln() + (1.0 - g) * ((1.0 - g) / params.xi2_prime).ln()) / 2.0
}
