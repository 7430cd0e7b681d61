use std::fs;
use std::path::{Path, PathBuf};

use bsg_core::closed_form::{e0_closed, e_inf_closed, sigma_pq, sigma_pq_min, PureSumSpec};
use bsg_core::complexity::{
    e_infinity_search, ground_state_search, log_potential_exact, sigma_min, sigma_total,
    ComplexityResult, Threshold,
};
use bsg_core::mde::{density_with, DensityOptions, DensitySidecar, SpectralDensity};
use bsg_core::model::{parse_mixture_renormalized, prefactor_limit};
use bsg_core::rmt::{
    admissible_dims, edge_check, finite_n_prefactor_log, mc_log_determinant, operator_norm,
    sample_h, sample_h_prime, spectrum, w1_distance,
};
use bsg_core::{derive_params, parse_mixture, FieldPoint, MixtureSpec, ModelParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{
    ClosedFormArgs, ComplexityArgs, CurveArgs, DensityArgs, Format, ModeArg, ModelArgs, RangeArgs,
    ThresholdArgs, VerifyArgs,
};
use crate::report::{format, write_file, write_output, Metadata, Report};
use crate::CliError;

struct Loaded {
    spec: MixtureSpec,
    params: ModelParams,
}

impl Loaded {
    fn metadata(&self) -> Metadata {
        Metadata::new(Some(self.spec.to_string()), Some(self.params.gamma))
    }
}

fn load(args: &ModelArgs) -> Result<Loaded, CliError> {
    let text = fs::read_to_string(&args.model).map_err(|source| CliError::Read {
        path: args.model.clone(),
        source,
    })?;
    let spec = if args.renormalize {
        parse_mixture_renormalized(&text)?
    } else {
        parse_mixture(&text)?
    };
    let params = derive_params(&spec, args.gamma)?;
    Ok(Loaded { spec, params })
}

/// Thresholds `t_min, t_min + step, ...` up to `t_max`.
fn thresholds_in(range: &RangeArgs) -> Result<Vec<f64>, CliError> {
    let RangeArgs { t_min, t_max, step } = *range;
    if !(step > 0.0) || !step.is_finite() {
        return Err(CliError::Usage(format!(
            "--step must be positive, got {step}"
        )));
    }
    if !(t_min.is_finite() && t_max.is_finite() && t_min <= t_max) {
        return Err(CliError::Usage(format!("invalid range [{t_min}, {t_max}]")));
    }
    let count = ((t_max - t_min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| t_min + step * i as f64).collect())
}

fn pure_sum(params: &ModelParams) -> Option<PureSumSpec> {
    params
        .closed_form_degree()
        .and_then(|s| PureSumSpec::new_unchecked(u64::from(s)).ok())
}

#[derive(Serialize)]
struct ComplexityBody {
    result: ComplexityResult,
}

pub fn complexity(args: &ComplexityArgs) -> Result<(), CliError> {
    let fmt = format(
        &args.output,
        Format::Json,
        &[Format::Json, Format::Csv],
        "complexity",
    )?;
    let model = load(&args.model)?;
    let result = match args.mode {
        ModeArg::Total => sigma_total(&model.params, args.t)?,
        ModeArg::Minima => sigma_min(&model.params, args.t)?,
    };
    let text = match fmt {
        Format::Json => {
            Report::new("complexity", model.metadata(), ComplexityBody { result }).to_json()
        }
        Format::Csv => {
            let m = result.maximizer;
            let t = result
                .threshold_t
                .map_or(String::new(), |t| format!("{t:e}"));
            format!(
                "value,constant_part,functional_part,u0,u1,u2,mode,t\n{:e},{:e},{:e},{:e},{:e},{:e},{},{t}\n",
                result.value,
                result.constant_part,
                result.functional_part,
                m.u0,
                m.u1,
                m.u2,
                match result.mode {
                    bsg_core::Mode::Total => "total",
                    bsg_core::Mode::Minima => "minima",
                },
            )
        }
    };
    write_output(&args.output, &text)
}

#[derive(Serialize)]
struct CurveRow {
    t: f64,
    sigma_total: f64,
    sigma_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form_total: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form_min: Option<f64>,
}

#[derive(Serialize)]
struct RowsBody<T> {
    rows: Vec<T>,
}

pub fn curve(args: &CurveArgs) -> Result<(), CliError> {
    let fmt = format(
        &args.output,
        Format::Csv,
        &[Format::Json, Format::Csv],
        "curve",
    )?;
    let ts = thresholds_in(&args.range)?;
    let model = load(&args.model)?;
    let params = &model.params;
    let closed = pure_sum(params);
    let rows = ts
        .par_iter()
        .map(|&t| -> Result<CurveRow, CliError> {
            Ok(CurveRow {
                t,
                sigma_total: sigma_total(params, Some(t))?.value,
                sigma_min: sigma_min(params, Some(t))?.value,
                closed_form_total: closed.map(|s| sigma_pq(t, s)),
                closed_form_min: closed.map(|s| sigma_pq_min(t, s)),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let text = match fmt {
        Format::Json => Report::new("curve", model.metadata(), RowsBody { rows }).to_json(),
        Format::Csv => {
            let mut out = String::from("t,sigma_total,sigma_min");
            if closed.is_some() {
                out.push_str(",closed_form_total,closed_form_min");
            }
            out.push('\n');
            for r in &rows {
                out.push_str(&format!("{:e},{:e},{:e}", r.t, r.sigma_total, r.sigma_min));
                if let (Some(a), Some(b)) = (r.closed_form_total, r.closed_form_min) {
                    out.push_str(&format!(",{a:e},{b:e}"));
                }
                out.push('\n');
            }
            out
        }
    };
    write_output(&args.output, &text)
}

#[derive(Serialize)]
struct ThresholdsBody {
    #[serde(skip_serializing_if = "Option::is_none")]
    e_infinity: Option<Threshold>,
    ground_state_bound: Threshold,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form_e_infinity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form_ground_state: Option<f64>,
    method: &'static str,
}

pub fn thresholds(args: &ThresholdArgs) -> Result<(), CliError> {
    format(&args.output, Format::Json, &[Format::Json], "thresholds")?;
    let model = load(&args.model)?;
    let params = &model.params;
    let e_infinity = if params.is_pure() {
        Some(e_infinity_search(params)?)
    } else {
        eprintln!("warning: e_infinity is only computed for pure models; field omitted");
        None
    };
    let ground_state_bound = ground_state_search(params)?;
    let closed = pure_sum(params);
    let body = ThresholdsBody {
        e_infinity,
        ground_state_bound,
        closed_form_e_infinity: closed.map(e_inf_closed),
        closed_form_ground_state: closed.map(e0_closed),
        method: "bisection",
    };
    write_output(
        &args.output,
        &Report::new("thresholds", model.metadata(), body).to_json(),
    )
}

#[derive(Serialize)]
struct DensityMeta {
    u: FieldPoint,
    #[serde(flatten)]
    sidecar: DensitySidecar,
    richardson: bool,
}

#[derive(Serialize)]
struct DensityBody<'a> {
    #[serde(flatten)]
    meta: DensityMeta,
    grid: &'a [f64],
    values: &'a [f64],
}

fn sidecar_path(output: &Path) -> PathBuf {
    output.with_extension("json")
}

pub fn density(args: &DensityArgs) -> Result<(), CliError> {
    let fmt = format(
        &args.output,
        Format::Csv,
        &[Format::Json, Format::Csv],
        "density",
    )?;
    if fmt == Format::Csv {
        if let Some(path) = &args.output.output {
            if path.extension().is_some_and(|e| e == "json") {
                return Err(CliError::Usage(
                    "a CSV output path ending in .json would be overwritten by its sidecar".into(),
                ));
            }
        }
    }
    let model = load(&args.model)?;
    let u = FieldPoint::from_slice(&args.u);
    if !u.is_finite() {
        return Err(CliError::Usage("--u must be finite".into()));
    }
    let window = args.window.map(|[lo, hi]| (lo, hi));
    let options = DensityOptions {
        resolution: args.resolution,
        eta_min: args.eta_min,
        richardson: args.richardson,
    };
    let d: SpectralDensity = density_with(&model.params, u, window, options)?;
    let meta = DensityMeta {
        u,
        sidecar: d.sidecar(),
        richardson: args.richardson,
    };
    match fmt {
        Format::Json => {
            let body = DensityBody {
                meta,
                grid: &d.grid,
                values: &d.values,
            };
            write_output(
                &args.output,
                &Report::new("density", model.metadata(), body).to_json(),
            )
        }
        Format::Csv => {
            let sidecar = Report::new("density", model.metadata(), meta).to_json();
            write_output(&args.output, &d.to_csv())?;
            match &args.output.output {
                Some(path) => write_file(&sidecar_path(path), &sidecar),
                None => {
                    eprint!("{sidecar}");
                    Ok(())
                }
            }
        }
    }
}

#[derive(Serialize)]
struct ClosedFormRow {
    t: f64,
    sigma: f64,
    sigma_min: f64,
}

#[derive(Serialize)]
struct ClosedFormBody {
    s: u64,
    e_infinity: f64,
    ground_state_bound: f64,
    rows: Vec<ClosedFormRow>,
}

pub fn closed_form(args: &ClosedFormArgs) -> Result<(), CliError> {
    let fmt = format(
        &args.output,
        Format::Csv,
        &[Format::Json, Format::Csv],
        "closed-form",
    )?;
    let s = if args.allow_small {
        PureSumSpec::new_unchecked(args.s)?
    } else {
        PureSumSpec::new(args.s)?
    };
    let rows: Vec<ClosedFormRow> = thresholds_in(&args.range)?
        .into_iter()
        .map(|t| ClosedFormRow {
            t,
            sigma: sigma_pq(t, s),
            sigma_min: sigma_pq_min(t, s),
        })
        .collect();
    let text = match fmt {
        Format::Json => {
            let body = ClosedFormBody {
                s: s.get(),
                e_infinity: e_inf_closed(s),
                ground_state_bound: e0_closed(s),
                rows,
            };
            Report::new("closed-form", Metadata::new(None, None), body).to_json()
        }
        Format::Csv => {
            let mut out = String::from("t,sigma,sigma_min\n");
            for r in &rows {
                out.push_str(&format!("{:e},{:e},{:e}\n", r.t, r.sigma, r.sigma_min));
            }
            out
        }
    };
    write_output(&args.output, &text)
}

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    computed: f64,
    oracle: f64,
    tolerance: f64,
    pass: bool,
}

impl Check {
    fn new(name: String, computed: f64, oracle: f64, tolerance: f64) -> Self {
        Self {
            name,
            computed,
            oracle,
            tolerance,
            pass: (computed - oracle).abs() <= tolerance,
        }
    }
}

#[derive(Serialize)]
struct VerifyBody {
    n: usize,
    n1: usize,
    n2: usize,
    samples: usize,
    seed: u64,
    checks: Vec<Check>,
    passed: bool,
}

const ESD_TOL: f64 = 0.10;
const EDGE_BAND: f64 = 0.15;
const COUPLING_TOL: f64 = 0.5;
const LOG_DET_TOL: f64 = 0.05;
/// Looser band when zero lies inside the bulk and `log|lambda|` is singular.
const LOG_DET_TOL_SINGULAR: f64 = 0.08;

fn field_label(u: FieldPoint) -> String {
    format!("u=({},{},{})", u.u0, u.u1, u.u2)
}

pub fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    format(&args.output, Format::Json, &[Format::Json], "verify")?;
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    if args.dump_eigenvalues && args.output.output.is_none() {
        return Err(CliError::Usage("--dump-eigenvalues needs --output".into()));
    }
    let model = load(&args.model)?;
    let params = &model.params;
    let dims = admissible_dims(params.gamma, args.n)?;
    let points = [FieldPoint::origin(), FieldPoint::new(-2.5, 0.0, 0.0)];
    let mut checks = Vec::new();

    for (k, &u) in points.iter().enumerate() {
        let label = field_label(u);
        let first = spectrum(&sample_h(params, &dims, u, args.seed)?)?;
        if let (true, Some(path)) = (args.dump_eigenvalues, &args.output.output) {
            let stem = path.with_extension("");
            write_file(
                &PathBuf::from(format!("{}-{k}.csv", stem.display())),
                &first.to_csv(),
            )?;
        }
        let d = density_with(params, u, None, DensityOptions::default())?;
        let w1 = w1_distance(&first, &d)?.w1;
        checks.push(Check::new(format!("esd_w1[{label}]"), w1, 0.0, ESD_TOL));

        let edges = edge_check(params, &dims, u, args.samples, args.seed, EDGE_BAND)?;
        let worst = |f: fn(&bsg_core::rmt::ExtremePair) -> f64, target: f64| {
            edges
                .samples
                .iter()
                .map(f)
                .max_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
                .expect("at least one sample")
        };
        checks.push(Check::new(
            format!("lambda_min[{label}]"),
            worst(|e| e.lambda_min, edges.predicted_left),
            edges.predicted_left,
            EDGE_BAND,
        ));
        checks.push(Check::new(
            format!("lambda_max[{label}]"),
            worst(|e| e.lambda_max, edges.predicted_right),
            edges.predicted_right,
            EDGE_BAND,
        ));

        let mc = mc_log_determinant(params, &dims, u, args.samples, args.seed)?;
        let oracle = log_potential_exact(params, u)?;
        let tol = if d.left_edge > 0.0 || d.right_edge < 0.0 {
            LOG_DET_TOL
        } else {
            LOG_DET_TOL_SINGULAR
        };
        checks.push(Check::new(
            format!("log_det[{label}]"),
            mc.mean,
            oracle,
            tol,
        ));

        let coupling = (0..args.samples as u64)
            .into_par_iter()
            .map(|i| -> Result<f64, bsg_core::Error> {
                let seed = args.seed.wrapping_add(i);
                operator_norm(
                    &(sample_h(params, &dims, u, seed)? - sample_h_prime(params, &dims, u, seed)?),
                )
            })
            .collect::<Result<Vec<f64>, _>>()?
            .into_iter()
            .fold(0.0, f64::max);
        checks.push(Check::new(
            format!("coupling_norm[{label}]"),
            coupling,
            0.0,
            COUPLING_TOL,
        ));
    }

    let n = args.n as f64;
    checks.push(Check::new(
        "prefactor".into(),
        finite_n_prefactor_log(&dims, params),
        prefactor_limit(params),
        3.0 * n.ln() / n,
    ));

    let failed = checks.iter().filter(|c| !c.pass).count();
    let body = VerifyBody {
        n: dims.n,
        n1: dims.n1,
        n2: dims.n2,
        samples: args.samples,
        seed: args.seed,
        passed: failed == 0,
        checks,
    };
    write_output(
        &args.output,
        &Report::new("verify", model.metadata(), body).to_json(),
    )?;
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}
