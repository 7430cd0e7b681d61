//! Finite-N Kac-Rice Hessians and Monte Carlo checks of the limiting
//! spectral predictions.
//!
//! Randomness comes from `ChaCha8Rng` seeded with a `u64`; Monte Carlo sample
//! `i` uses stream `i` of that seed. Gaussians are drawn with the ziggurat
//! sampler of `rand_distr::StandardNormal`. Results are reproducible within
//! this implementation for a fixed seed.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::mde::{support_edges, FieldPoint, SpectralDensity};
use crate::model::ModelParams;

/// Eigenvalues below this magnitude make `log|det|` meaningless.
const SINGULAR_EIGENVALUE: f64 = 1e-300;
/// Stream offset for the single resample after a singular draw.
const RESAMPLE_STREAM: u64 = 1 << 32;
/// Search range for the nearest admissible sizes.
const ADMISSIBLE_SEARCH: usize = 1_000_000;

/// Block sizes with `(N1 - 1) / (N - 2) = gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockDims {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub gamma: f64,
}

impl BlockDims {
    /// Size `N - 2` of the Hessian.
    pub fn size(&self) -> usize {
        self.n - 2
    }
}

fn exact_n1(gamma: f64, n: usize) -> Option<usize> {
    if n < 4 {
        return None;
    }
    let x = gamma * (n - 2) as f64;
    let r = x.round();
    let n1 = r as usize + 1;
    ((x - r).abs() < 1e-9 && n1 >= 2 && n >= n1 + 2).then_some(n1)
}

/// The block sizes at total size `n`, when `gamma (n - 2) + 1` is an integer.
pub fn admissible_dims(gamma: f64, n: usize) -> Result<BlockDims> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "N must be at least 4, got {n}"
        )));
    }
    match exact_n1(gamma, n) {
        Some(n1) => Ok(BlockDims {
            n,
            n1,
            n2: n - n1,
            gamma,
        }),
        None => {
            let below = (4..n).rev().find(|&m| exact_n1(gamma, m).is_some());
            let above = (n + 1..n.saturating_add(ADMISSIBLE_SEARCH))
                .find(|&m| exact_n1(gamma, m).is_some());
            Err(Error::InadmissibleDims {
                gamma,
                n,
                below,
                above,
            })
        }
    }
}

/// The sorted eigenvalues of a symmetric matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSpectrum {
    pub eigenvalues: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl EmpiricalSpectrum {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "spectrum must be nonempty and finite".into(),
            ));
        }
        eigenvalues.sort_by(f64::total_cmp);
        Ok(Self {
            lambda_min: eigenvalues[0],
            lambda_max: eigenvalues[eigenvalues.len() - 1],
            eigenvalues,
        })
    }

    /// `lambda,` one eigenvalue per line after a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda\n");
        for x in &self.eigenvalues {
            out.push_str(&format!("{x:e}\n"));
        }
        out
    }
}

/// All eigenvalues of a symmetric matrix, sorted.
pub fn spectrum(matrix: &DMatrix<f64>) -> Result<EmpiricalSpectrum> {
    if !matrix.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    EmpiricalSpectrum::from_eigenvalues(
        matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect(),
    )
}

fn check_dims(params: &ModelParams, dims: &BlockDims) -> Result<()> {
    if (dims.gamma - params.gamma).abs() > 1e-12 {
        return Err(Error::DimensionMismatch(format!(
            "block sizes were built for gamma = {}, the model has gamma = {}",
            dims.gamma, params.gamma
        )));
    }
    if dims.n1 + dims.n2 != dims.n || exact_n1(dims.gamma, dims.n) != Some(dims.n1) {
        return Err(Error::DimensionMismatch(format!(
            "inconsistent block sizes {dims:?}"
        )));
    }
    Ok(())
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The noise matrix `W_N`. Draw order: block 1 upper triangle, block 2
/// upper triangle, then the cross block row by row.
fn sample_w(params: &ModelParams, dims: &BlockDims, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let (k1, k2) = (dims.n1 - 1, dims.n2 - 1);
    let n = dims.n as f64;
    let mut w = DMatrix::zeros(k1 + k2, k1 + k2);
    for (offset, k, ni, xi_dd) in [
        (0, k1, dims.n1 as f64, params.xi1_dprime),
        (k1, k2, dims.n2 as f64, params.xi2_dprime),
    ] {
        // GOE with E[M_ij^2] = (1 + delta_ij) / (Ni - 1), then the block scale.
        let scale = (n * (ni - 1.0) * xi_dd / (ni * ni)).sqrt();
        let off = scale / ((ni - 1.0).sqrt());
        let diag = off * std::f64::consts::SQRT_2;
        for i in 0..k {
            for j in i..k {
                let g: f64 = rng.sample(StandardNormal);
                let v = if i == j { diag * g } else { off * g };
                w[(offset + i, offset + j)] = v;
                w[(offset + j, offset + i)] = v;
            }
        }
    }
    let cross =
        (n * params.xi1_prime * params.xi2_prime / (dims.n1 as f64 * dims.n2 as f64)).sqrt();
    for i in 0..k1 {
        for j in 0..k2 {
            let v = cross * rng.sample::<f64, _>(StandardNormal);
            w[(i, k1 + j)] = v;
            w[(k1 + j, i)] = v;
        }
    }
    w
}

/// The Hadamard factor `T_N` turning `W_N` into `W'_N`, as its five distinct
/// values: block 1 off-diagonal, block 1 diagonal, cross, block 2
/// off-diagonal, block 2 diagonal.
pub fn t_factors(dims: &BlockDims) -> [f64; 5] {
    let (n, n1, n2, g) = (dims.n as f64, dims.n1 as f64, dims.n2 as f64, dims.gamma);
    let within = |ni: f64, frac: f64, delta: f64| {
        (ni * ni / ((1.0 + delta) * frac * frac * n * (n - 2.0))).sqrt()
    };
    [
        within(n1, g, 0.0),
        within(n1, g, 1.0),
        (n1 * n2 / (g * n * (n2 - 1.0))).sqrt(),
        within(n2, 1.0 - g, 0.0),
        within(n2, 1.0 - g, 1.0),
    ]
}

fn add_diagonal(m: &mut DMatrix<f64>, k1: usize, d1: f64, d2: f64) {
    for i in 0..m.nrows() {
        m[(i, i)] += if i < k1 { d1 } else { d2 };
    }
}

/// `H_N(u) = A_N(u) + W_N` from stream `stream` of `seed`.
pub fn sample_h_stream(
    params: &ModelParams,
    dims: &BlockDims,
    u: FieldPoint,
    seed: u64,
    stream: u64,
) -> Result<DMatrix<f64>> {
    check_dims(params, dims)?;
    let mut m = sample_w(params, dims, &mut rng_for(seed, stream));
    let n = dims.n as f64;
    let d1 = n / dims.n1 as f64 * (params.alpha1 * u.u1 - params.xi1_prime * u.u0);
    let d2 = n / dims.n2 as f64 * (params.alpha2 * u.u2 - params.xi2_prime * u.u0);
    add_diagonal(&mut m, dims.n1 - 1, d1, d2);
    Ok(m)
}

/// `H_N(u) = A_N(u) + W_N`.
pub fn sample_h(
    params: &ModelParams,
    dims: &BlockDims,
    u: FieldPoint,
    seed: u64,
) -> Result<DMatrix<f64>> {
    sample_h_stream(params, dims, u, seed, 0)
}

/// `H'_N(u) = A'_N(u) + T_N . W_N`, built from the same Gaussians as
/// [`sample_h`] with the same seed.
pub fn sample_h_prime(
    params: &ModelParams,
    dims: &BlockDims,
    u: FieldPoint,
    seed: u64,
) -> Result<DMatrix<f64>> {
    check_dims(params, dims)?;
    let mut m = sample_w(params, dims, &mut rng_for(seed, 0));
    let k1 = dims.n1 - 1;
    let [t1, t1d, tc, t2, t2d] = t_factors(dims);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let t = match (i < k1, j < k1) {
                (true, true) if i == j => t1d,
                (true, true) => t1,
                (false, false) if i == j => t2d,
                (false, false) => t2,
                _ => tc,
            };
            m[(i, j)] *= t;
        }
    }
    let g = dims.gamma;
    let d1 = (params.alpha1 * u.u1 - params.xi1_prime * u.u0) / g;
    let d2 = (params.alpha2 * u.u2 - params.xi2_prime * u.u0) / (1.0 - g);
    add_diagonal(&mut m, k1, d1, d2);
    Ok(m)
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn operator_norm(matrix: &DMatrix<f64>) -> Result<f64> {
    let s = spectrum(matrix)?;
    Ok(s.lambda_min.abs().max(s.lambda_max.abs()))
}

/// Distances between an empirical spectrum and a reference measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDistance {
    pub w1: f64,
    /// Bounded-Lipschitz distance, bounded here by `min(W1, 2)`.
    pub bounded_lipschitz: f64,
}

/// `int |F(x) - G(x)| dx` for two CDFs known on a common sorted grid, each
/// linear between grid points except for jumps. `f` and `g` hold the right
/// limits at each point; between `x[k]` and `x[k+1]` the functions
/// interpolate linearly from the right limit at `x[k]` to the left limit at
/// `x[k+1]`.
fn integrate_abs_difference(
    x: &[f64],
    f_right: &[f64],
    f_left: &[f64],
    g_right: &[f64],
    g_left: &[f64],
) -> f64 {
    let mut total = 0.0;
    for k in 0..x.len() - 1 {
        let h = x[k + 1] - x[k];
        if h <= 0.0 {
            continue;
        }
        let a = f_right[k] - g_right[k];
        let b = f_left[k + 1] - g_left[k + 1];
        total += if a * b >= 0.0 {
            0.5 * h * (a.abs() + b.abs())
        } else {
            // Linear difference changes sign inside the cell.
            0.5 * h * (a * a + b * b) / (a.abs() + b.abs())
        };
    }
    total
}

/// Empirical CDF values just left and just right of each point of `x`.
fn empirical_cdf(sorted: &[f64], x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = sorted.len() as f64;
    let left = x
        .iter()
        .map(|&v| sorted.partition_point(|&e| e < v) as f64 / n)
        .collect();
    let right = x
        .iter()
        .map(|&v| sorted.partition_point(|&e| e <= v) as f64 / n)
        .collect();
    (left, right)
}

/// Wasserstein-1 distance between the empirical measure of `spectrum` and
/// the (mass-normalized) sampled density.
pub fn w1_distance(
    spectrum: &EmpiricalSpectrum,
    density: &SpectralDensity,
) -> Result<SpectralDistance> {
    let grid = &density.grid;
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    if spectrum.lambda_min < lo || spectrum.lambda_max > hi {
        return Err(Error::DimensionMismatch(format!(
            "spectrum [{}, {}] leaves the density window [{lo}, {hi}]",
            spectrum.lambda_min, spectrum.lambda_max
        )));
    }
    // Cumulative trapezoid of the density, normalized to total mass one.
    let mut cdf_grid = vec![0.0; grid.len()];
    for k in 1..grid.len() {
        cdf_grid[k] = cdf_grid[k - 1]
            + 0.5 * (grid[k] - grid[k - 1]) * (density.values[k] + density.values[k - 1]);
    }
    let mass = cdf_grid[grid.len() - 1];
    if !(mass > 0.0) {
        return Err(Error::InvalidArgument("density has no mass".into()));
    }
    let mut x: Vec<f64> = grid.iter().chain(&spectrum.eigenvalues).copied().collect();
    x.sort_by(f64::total_cmp);
    x.dedup();
    let dens: Vec<f64> = x
        .iter()
        .map(|&v| {
            let k = grid.partition_point(|&g| g <= v).clamp(1, grid.len() - 1);
            let (x0, x1) = (grid[k - 1], grid[k]);
            let t = ((v - x0) / (x1 - x0)).clamp(0.0, 1.0);
            (cdf_grid[k - 1] + t * (cdf_grid[k] - cdf_grid[k - 1])) / mass
        })
        .collect();
    let (emp_left, emp_right) = empirical_cdf(&spectrum.eigenvalues, &x);
    let w1 = integrate_abs_difference(&x, &emp_right, &emp_left, &dens, &dens);
    Ok(SpectralDistance {
        w1,
        bounded_lipschitz: w1.min(2.0),
    })
}

/// Wasserstein-1 distance between two empirical measures.
pub fn w1_between_spectra(a: &EmpiricalSpectrum, b: &EmpiricalSpectrum) -> f64 {
    let mut x: Vec<f64> = a
        .eigenvalues
        .iter()
        .chain(&b.eigenvalues)
        .copied()
        .collect();
    x.sort_by(f64::total_cmp);
    x.dedup();
    let (_, fa) = empirical_cdf(&a.eigenvalues, &x);
    let (_, fb) = empirical_cdf(&b.eigenvalues, &x);
    // Both CDFs are constant on [x_k, x_{k+1}).
    x.windows(2)
        .enumerate()
        .map(|(k, w)| (w[1] - w[0]) * (fa[k] - fb[k]).abs())
        .sum()
}

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

fn mean_and_error(values: &[f64]) -> MonteCarloEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std_error = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    MonteCarloEstimate {
        mean,
        std_error,
        samples: values.len(),
    }
}

/// `(1/(N-2)) sum_i log|lambda_i|` of a spectrum, `None` if it is singular.
fn normalized_log_det(s: &EmpiricalSpectrum) -> Option<f64> {
    let mut total = 0.0;
    for &x in &s.eigenvalues {
        if x.abs() < SINGULAR_EIGENVALUE {
            return None;
        }
        total += x.abs().ln();
    }
    Some(total / s.eigenvalues.len() as f64)
}

/// Monte Carlo estimate of `(1/(N-2)) log|det H_N(u)|`.
pub fn mc_log_determinant(
    params: &ModelParams,
    dims: &BlockDims,
    u: FieldPoint,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples == 0 {
        return Err(Error::InvalidArgument(
            "at least one sample is required".into(),
        ));
    }
    check_dims(params, dims)?;
    let values = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let stream = i as u64;
            for s in [stream, stream + RESAMPLE_STREAM] {
                let m = sample_h_stream(params, dims, u, seed, s)?;
                if let Some(v) = normalized_log_det(&spectrum(&m)?) {
                    return Ok(v);
                }
            }
            Err(Error::SingularSample { sample: i })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_and_error(&values))
}

/// `(1/N) log f(N1, N2)`, the finite-N Kac-Rice prefactor.
pub fn finite_n_prefactor_log(dims: &BlockDims, params: &ModelParams) -> f64 {
    let n = dims.n as f64;
    let pi = std::f64::consts::PI;
    let sphere = |ni: f64| std::f64::consts::LN_2 + 0.5 * ni * (pi * ni).ln() - ln_gamma(0.5 * ni);
    let (n1, n2) = (dims.n1 as f64, dims.n2 as f64);
    let log_f = sphere(n1) + sphere(n2) + 1.5 * (n / (2.0 * pi)).ln()
        - 0.5
            * ((n - 2.0) * (2.0 * pi * n).ln()
                + (n1 - 1.0) * (params.xi1_prime / n1).ln()
                + (n2 - 1.0) * (params.xi2_prime / n2).ln());
    log_f / n
}

/// Extreme eigenvalues of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremePair {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub predicted_left: f64,
    pub predicted_right: f64,
    pub tolerance: f64,
    pub samples: Vec<ExtremePair>,
    /// Fraction of samples with both extremes within `tolerance`.
    pub fraction_within: f64,
}

/// Compares sampled extreme eigenvalues with the limiting support edges.
pub fn edge_check(
    params: &ModelParams,
    dims: &BlockDims,
    u: FieldPoint,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> Result<EdgeReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument(
            "at least one sample is required".into(),
        ));
    }
    let (left, right) = support_edges(params, u)?;
    let extremes = (0..samples)
        .into_par_iter()
        .map(|i| {
            let s = spectrum(&sample_h_stream(params, dims, u, seed, i as u64)?)?;
            Ok(ExtremePair {
                lambda_min: s.lambda_min,
                lambda_max: s.lambda_max,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let within = extremes
        .iter()
        .filter(|e| {
            (e.lambda_min - left).abs() <= tolerance && (e.lambda_max - right).abs() <= tolerance
        })
        .count();
    Ok(EdgeReport {
        predicted_left: left,
        predicted_right: right,
        tolerance,
        fraction_within: within as f64 / samples as f64,
        samples: extremes,
    })
}
