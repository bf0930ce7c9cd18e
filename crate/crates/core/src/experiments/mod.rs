//! Experiment drivers: exact reference runs, sign scans, dataset generation,
//! training, the hidden-layer and data-size scans, and Gibbs equilibration.
//!
//! The functions here compute results; [`commands`] wires them to config
//! files and output directories for the binary.

pub mod commands;
pub mod config;

pub use config::ExperimentConfig;

use serde::{Deserialize, Serialize};

use crate::basis::{HilbertSpace, RotorConfiguration};
use crate::eigensolver::{amplitude_ratio, ground_state_with, GroundStateSolution, Method, SolverOptions};
use crate::error::{Error, Result};
use crate::estimators::{delta, energy_rbm, symmetry_violation_fraction, ExactEvaluator, MonteCarloEvaluator};
use crate::hamiltonian::{build_hamiltonian, SparseHamiltonian};
use crate::rbm::{
    train, Evaluator, GibbsChainState, GibbsSampler, RbmParameters, TrainingConfig, TrainingOutcome,
    TrainingStatus,
};
use crate::rng;
use crate::signs::{convergence_scan, ScanRow};

/// Process exit codes of the binary.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const NOT_REACHED: i32 = 4;
}

/// Exit code for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Parse { .. } | Error::Io(_) | Error::Checkpoint(_) => exit::CONFIG,
        _ => exit::NUMERICAL,
    }
}

const INIT_TAG: u64 = 0x1417;
const EVAL_TAG: u64 = 0xe7a1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdReport {
    pub n_sites: usize,
    pub ell_max: u32,
    pub r: f64,
    pub dim: usize,
    pub energy_0: f64,
    pub energy_1: f64,
    pub gap: f64,
    pub amplitude_ratio: f64,
    pub method: Method,
    pub residual: f64,
    /// Weight of the ground state outside the `(m = 0, even ℓ)` sector.
    pub off_sector_weight: f64,
}

/// Exact ground state and Hamiltonian for one chain.
pub fn solve(n_sites: usize, ell_max: u32, r: f64, opts: &SolverOptions) -> Result<(SparseHamiltonian, GroundStateSolution)> {
    let h = build_hamiltonian(HilbertSpace::new(n_sites, ell_max)?, r)?;
    let sol = ground_state_with(&h, opts)?;
    Ok((h, sol))
}

pub fn ed_report(h: &SparseHamiltonian, sol: &GroundStateSolution) -> EdReport {
    let space = h.space();
    let mask = space.sector_mask(0, 0);
    let off_sector_weight =
        sol.amplitudes.iter().zip(&mask).filter(|(_, &m)| !m).map(|(a, _)| a * a).sum();
    EdReport {
        n_sites: space.n_sites(),
        ell_max: space.ell_max(),
        r: h.separation(),
        dim: space.total_dim(),
        energy_0: sol.energy_0,
        energy_1: sol.energy_1,
        gap: sol.gap,
        amplitude_ratio: amplitude_ratio(sol),
        method: sol.method,
        residual: sol.residual,
        off_sector_weight,
    }
}

pub fn run_ed(n_sites: usize, ell_max: u32, r: f64, opts: &SolverOptions) -> Result<EdReport> {
    let (h, sol) = solve(n_sites, ell_max, r, opts)?;
    Ok(ed_report(&h, &sol))
}

#[derive(Clone, Debug, Serialize)]
pub struct SignsRow {
    pub r: f64,
    #[serde(flatten)]
    pub row: ScanRow,
}

/// Sign diagnostics over every `(R, ℓ_max)` pair, `R` outermost.
pub fn run_signs(n_sites: usize, rs: &[f64], ell_maxes: &[u32], opts: &SolverOptions) -> Result<Vec<SignsRow>> {
    let mut rows = Vec::new();
    for &r in rs {
        for row in convergence_scan(n_sites, r, ell_maxes, opts)? {
            rows.push(SignsRow { r, row });
        }
    }
    Ok(rows)
}

/// How δ is measured while training.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorKind {
    /// Gibbs samples from the all-zero configuration.
    Mc,
    /// Exact enumeration of `p_λ`; small spaces only.
    Exact,
}

impl std::str::FromStr for EvaluatorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mc" => Ok(Self::Mc),
            "exact" => Ok(Self::Exact),
            _ => Err(format!("expected `mc` or `exact`, got `{s}`")),
        }
    }
}

/// Exact reference the trainer compares against.
#[derive(Clone, Copy, Debug)]
pub struct Reference<'a> {
    pub h: &'a SparseHamiltonian,
    pub energy_0: f64,
    pub gap: f64,
}

impl<'a> Reference<'a> {
    pub fn new(h: &'a SparseHamiltonian, sol: &GroundStateSolution) -> Self {
        Self { h, energy_0: sol.energy_0, gap: sol.gap }
    }

    pub fn evaluator(&self, kind: EvaluatorKind, cfg: &TrainingConfig) -> Box<dyn Evaluator + 'a> {
        match kind {
            EvaluatorKind::Mc => Box::new(MonteCarloEvaluator {
                h: self.h,
                e_exact: self.energy_0,
                gap: self.gap,
                n_samples: cfg.eval_samples,
                gibbs_steps: cfg.eval_gibbs_steps,
                seed: rng::derive_seed(cfg.seed, EVAL_TAG),
            }),
            EvaluatorKind::Exact => Box::new(ExactEvaluator { h: self.h, e_exact: self.energy_0, gap: self.gap }),
        }
    }
}

/// Trains a freshly initialised RBM with `n_hidden` hidden units. The
/// initial weights are drawn from a seed derived from `cfg.seed`.
pub fn train_fresh(
    data: &[RotorConfiguration],
    space: &HilbertSpace,
    n_hidden: usize,
    cfg: &TrainingConfig,
    reference: &Reference<'_>,
    kind: EvaluatorKind,
) -> Result<TrainingOutcome> {
    if n_hidden == 0 {
        return Err(Error::Config("n_hidden must be at least 1".into()));
    }
    let init = RbmParameters::random(space, n_hidden, rng::derive_seed(cfg.seed, INIT_TAG));
    let mut evaluator = reference.evaluator(kind, cfg);
    train(init, data, cfg, evaluator.as_mut())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    /// `n_h` or `|D|`, depending on the scan.
    pub axis: usize,
    pub reached: bool,
    /// Epochs of the last attempt.
    pub epochs_used: usize,
    /// δ at the last evaluation of the last attempt; NaN if none happened.
    pub final_delta: f64,
    pub attempts: usize,
    pub diverged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub results: Vec<ScalingResult>,
    /// First grid point that reached the target.
    pub minimum: Option<usize>,
    #[serde(skip)]
    pub outcomes: Vec<TrainingOutcome>,
}

/// Walks `grid` in order, training up to `retries` times per point, and
/// stops at the first point that reaches the target.
fn scan_axis(
    grid: &[usize],
    retries: usize,
    mut run: impl FnMut(usize, usize) -> Result<TrainingOutcome>,
) -> Result<ScalingReport> {
    if grid.is_empty() {
        return Err(Error::Config("scan grid is empty".into()));
    }
    let mut results = Vec::new();
    let mut outcomes = Vec::new();
    let mut minimum = None;
    for &axis in grid {
        let mut attempts = 0;
        let mut last = None;
        for attempt in 0..retries.max(1) {
            attempts += 1;
            let out = run(axis, attempt)?;
            let done = out.reached();
            last = Some(out);
            if done {
                break;
            }
        }
        let out = last.expect("at least one attempt");
        log::info!("axis {axis}: {:?} after {} epochs", out.status, out.epochs_run);
        results.push(ScalingResult {
            axis,
            reached: out.reached(),
            epochs_used: out.epochs_run,
            final_delta: out.final_delta().unwrap_or(f64::NAN),
            attempts,
            diverged: out.status == TrainingStatus::Diverged,
        });
        let reached = out.reached();
        outcomes.push(out);
        if reached {
            minimum = Some(axis);
            break;
        }
    }
    Ok(ScalingReport { results, minimum, outcomes })
}

fn attempt_config(cfg: &TrainingConfig, axis: usize, attempt: usize) -> TrainingConfig {
    TrainingConfig { seed: rng::derive_seed(cfg.seed, ((axis as u64) << 16) | attempt as u64), ..cfg.clone() }
}

/// Smallest `n_h` on `grid` that trains to the target on the full dataset.
pub fn scale_hidden(
    data: &[RotorConfiguration],
    space: &HilbertSpace,
    grid: &[usize],
    cfg: &TrainingConfig,
    retries: usize,
    reference: &Reference<'_>,
    kind: EvaluatorKind,
) -> Result<ScalingReport> {
    scan_axis(grid, retries, |n_h, attempt| {
        train_fresh(data, space, n_h, &attempt_config(cfg, n_h, attempt), reference, kind)
    })
}

/// Smallest prefix length on `sizes` that trains to the target with
/// `n_hidden` hidden units.
#[allow(clippy::too_many_arguments)]
pub fn scale_data(
    data: &[RotorConfiguration],
    space: &HilbertSpace,
    n_hidden: usize,
    sizes: &[usize],
    cfg: &TrainingConfig,
    retries: usize,
    reference: &Reference<'_>,
    kind: EvaluatorKind,
) -> Result<ScalingReport> {
    if let Some(&too_big) = sizes.iter().find(|&&s| s > data.len() || s == 0) {
        return Err(Error::Config(format!(
            "data size {too_big} is outside 1..={} (dataset length)",
            data.len()
        )));
    }
    scan_axis(sizes, retries, |size, attempt| {
        train_fresh(&data[..size], space, n_hidden, &attempt_config(cfg, size, attempt), reference, kind)
    })
}

/// `500·2^i` up to `max`.
pub fn default_data_grid(max: usize) -> Vec<usize> {
    std::iter::successors(Some(500usize), |s| s.checked_mul(2)).take_while(|&s| s <= max).collect()
}

/// `1, 2, 5, 10, 20, 50, …` up to `max`.
pub fn log_schedule(max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut decade = 1usize;
    'outer: loop {
        for f in [1, 2, 5] {
            let k = f * decade;
            if k > max {
                break 'outer;
            }
            out.push(k);
        }
        decade *= 10;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibrationRow {
    pub k: usize,
    pub delta_ns: f64,
    pub delta_ns_stderr: f64,
    /// `None` when no sample satisfied the symmetries.
    pub delta_s: Option<f64>,
    pub delta_s_stderr: Option<f64>,
    pub f_ns: f64,
    pub f_ns_stderr: f64,
    pub n_symmetric: usize,
}

/// δ over all samples and over symmetric samples only, with the fraction of
/// violating samples, for each Gibbs step count in `ks`.
///
/// Chain `c` starts from the all-zero configuration and uses stream `c` of
/// `seed`. The chains are advanced through the schedule rather than
/// restarted, so the samples at step count `k` are exactly those of fresh
/// `k`-step chains.
pub fn equilibrate(
    params: &RbmParameters,
    reference: &Reference<'_>,
    ks: &[usize],
    n_chains: usize,
    seed: u64,
) -> Result<Vec<EquilibrationRow>> {
    if n_chains == 0 {
        return Err(Error::Config("n_chains must be at least 1".into()));
    }
    if ks.is_empty() || ks.contains(&0) || ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("k schedule must be strictly increasing and start at 1 or more".into()));
    }
    if params.space() != *reference.h.space() {
        return Err(Error::Domain("checkpoint and Hamiltonian act on different spaces".into()));
    }
    let mut sampler = GibbsSampler::new(params);
    let mut chains: Vec<_> = (0..n_chains)
        .map(|c| (GibbsChainState::all_zero(params.n_sites(), params.n_hidden()), rng::stream_rng(seed, c as u64)))
        .collect();
    let mut rows = Vec::with_capacity(ks.len());
    let mut done = 0;
    for &k in ks {
        for (state, rng) in chains.iter_mut() {
            sampler.run(state, k - done, rng);
        }
        done = k;
        let samples: Vec<RotorConfiguration> =
            chains.iter().map(|(s, _)| RotorConfiguration::from_sigmas(s.visible.clone())).collect();
        let all = energy_rbm(params, &samples, reference.h)?;
        let split = symmetry_violation_fraction(&samples)?;
        let (delta_s, delta_s_stderr) = if split.symmetric.is_empty() {
            log::warn!("k = {k}: no symmetric samples, delta_s is missing");
            (None, None)
        } else {
            let s = energy_rbm(params, &split.symmetric, reference.h)?;
            (Some(delta(s.total, reference.energy_0, reference.gap)?), Some(s.std_error / reference.gap))
        };
        let f = split.fraction;
        rows.push(EquilibrationRow {
            k,
            delta_ns: delta(all.total, reference.energy_0, reference.gap)?,
            delta_ns_stderr: all.std_error / reference.gap,
            delta_s,
            delta_s_stderr,
            f_ns: f,
            f_ns_stderr: (f * (1.0 - f) / n_chains as f64).sqrt(),
            n_symmetric: split.symmetric.len(),
        });
    }
    Ok(rows)
}
