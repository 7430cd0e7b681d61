use std::fs;
use std::io::Write as _;
use std::path::Path;

use bsg_core::complexity::{
    GOLDEN_TOL, G_TOL, INFEASIBLE_PENALTY, SEARCH_RADIUS, THRESHOLD_TOL, TIE_TOL,
};
use bsg_core::mde::{
    DEFAULT_ETA_MIN, DEFAULT_RESOLUTION, EDGE_DENSITY_THRESHOLD, EDGE_ETA, EDGE_TOL, ETA_FACTOR,
    MIN_RESOLUTION, RESIDUAL_TOL,
};
use bsg_core::model::NORMALIZATION_TOL;
use bsg_core::optimize::NelderMeadOptions;
use serde::Serialize;

use crate::args::{Format, OutputArgs};
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Numerical defaults, repeated in every report.
#[derive(Debug, Serialize)]
pub struct Defaults {
    pub eta_min: f64,
    pub resolution: usize,
    pub min_resolution: usize,
    pub eta_factor: f64,
    pub residual_tol: f64,
    pub edge_eta: f64,
    pub edge_density_threshold: f64,
    pub edge_tol: f64,
    pub normalization_tol: f64,
    pub search_radius: f64,
    pub golden_tol: f64,
    pub threshold_tol: f64,
    pub positivity_tol: f64,
    pub tie_tol: f64,
    pub infeasible_penalty: f64,
    pub nelder_mead_initial_step: f64,
    pub nelder_mead_f_tol: f64,
    pub nelder_mead_x_tol: f64,
    pub nelder_mead_max_evaluations: usize,
}

impl Default for Defaults {
    fn default() -> Self {
        let nm = NelderMeadOptions::default();
        Self {
            eta_min: DEFAULT_ETA_MIN,
            resolution: DEFAULT_RESOLUTION,
            min_resolution: MIN_RESOLUTION,
            eta_factor: ETA_FACTOR,
            residual_tol: RESIDUAL_TOL,
            edge_eta: EDGE_ETA,
            edge_density_threshold: EDGE_DENSITY_THRESHOLD,
            edge_tol: EDGE_TOL,
            normalization_tol: NORMALIZATION_TOL,
            search_radius: SEARCH_RADIUS,
            golden_tol: GOLDEN_TOL,
            threshold_tol: THRESHOLD_TOL,
            positivity_tol: G_TOL,
            tie_tol: TIE_TOL,
            infeasible_penalty: INFEASIBLE_PENALTY,
            nelder_mead_initial_step: nm.initial_step,
            nelder_mead_f_tol: nm.f_tol,
            nelder_mead_x_tol: nm.x_tol,
            nelder_mead_max_evaluations: nm.max_evaluations,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Metadata {
    pub version: &'static str,
    /// The model in canonical text form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub defaults: Defaults,
}

impl Metadata {
    pub fn new(model: Option<String>, gamma: Option<f64>) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            model,
            gamma,
            defaults: Defaults::default(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    pub metadata: Metadata,
    #[serde(flatten)]
    pub body: T,
}

impl<'a, T: Serialize> Report<'a, T> {
    pub fn new(command: &'a str, metadata: Metadata, body: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            metadata,
            body,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Writes `text` to the output file, or stdout when none is given.
pub fn write_output(output: &OutputArgs, text: &str) -> Result<(), CliError> {
    match &output.output {
        Some(path) => write_file(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Write {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// The requested format, rejecting formats a command does not produce.
pub fn format(
    output: &OutputArgs,
    default: Format,
    supported: &[Format],
    command: &str,
) -> Result<Format, CliError> {
    let f = output.format.unwrap_or(default);
    if supported.contains(&f) {
        Ok(f)
    } else {
        Err(CliError::Usage(
            format!("{command} does not support --format {f:?}").to_lowercase(),
        ))
    }
}
