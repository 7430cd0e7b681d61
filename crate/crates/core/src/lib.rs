//! Annealed complexity of bipartite spherical spin glasses.
//!
//! The pipeline runs from a mixture specification ([`model`]) through the
//! scalar Dyson equation for the limiting Hessian spectrum ([`mde`]) to the
//! variational formulas for the complexity of critical points and local
//! minima ([`complexity`]). [`closed_form`] holds the explicit curves of the
//! semicircle case and [`rmt`] samples the finite-N Hessians used to check
//! the limits by Monte Carlo.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod complexity;
pub mod error;
pub mod mde;
pub mod model;
pub mod optimize;
#[allow(clippy::excessive_precision)]
pub mod quadrature;
pub mod rmt;

pub use complexity::{ComplexityResult, Mode};
pub use error::{Error, ErrorKind, Result};
pub use mde::{FieldPoint, SpectralDensity, StieltjesPair};
pub use model::{derive_params, parse_mixture, MixtureSpec, ModelParams};
pub use rmt::{BlockDims, EmpiricalSpectrum};
