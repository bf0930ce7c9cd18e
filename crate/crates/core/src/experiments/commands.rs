//! Config-driven entry points behind each CLI subcommand.
//!
//! Every command resolves its configuration (defaults, then file, then
//! flags), writes its data files into the output directory with the
//! resolved configuration as `#` header lines, and finishes with a
//! `manifest.json` that records the configuration, version, timings and
//! produced files.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::ExperimentConfig;
use super::{
    default_data_grid, ed_report, equilibrate, exit, exit_code, log_schedule, run_signs, scale_data,
    scale_hidden, solve, train_fresh, EvaluatorKind, Reference, ScalingReport,
};
use crate::eigensolver::{Method, MethodChoice, SolverOptions};
use crate::error::{Error, Result};
use crate::rbm::{load_params, save_params, TraceRow, TrainingConfig, TrainingStatus};
use crate::sampling::{read_dataset, sample_exact, write_dataset, MeasurementDataset, DEFAULT_DATASET_SIZE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Ed,
    Signs,
    Sample,
    Train,
    ScaleHidden,
    ScaleData,
    Equilibrate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ed => "ed",
            Self::Signs => "signs",
            Self::Sample => "sample",
            Self::Train => "train",
            Self::ScaleHidden => "scale-hidden",
            Self::ScaleData => "scale-data",
            Self::Equilibrate => "equilibrate",
        }
    }
}

const COMMON_KEYS: &[&str] = &["seed", "out"];
const SOLVER_KEYS: &[&str] = &["tol", "max_iter", "method"];
const TRAINING_KEYS: &[&str] = &[
    "dataset",
    "learning_rate",
    "positive_batch",
    "negative_batch",
    "gibbs_k",
    "max_epochs",
    "eval_interval",
    "eval_samples",
    "eval_gibbs_steps",
    "target_delta",
    "evaluator",
];

/// What a finished command reports back to the binary.
#[derive(Debug)]
pub struct CommandOutput {
    pub exit_code: i32,
    pub summary: Value,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    status: String,
    exit_code: i32,
    config: &'a ExperimentConfig,
    timings_seconds: &'a BTreeMap<String, f64>,
    outputs: Vec<String>,
    summary: &'a Value,
}

struct Run {
    out_dir: PathBuf,
    config: ExperimentConfig,
    timings: BTreeMap<String, f64>,
    outputs: Vec<PathBuf>,
    started: Instant,
}

impl Run {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f(self);
        self.timings.insert(name.to_string(), t.elapsed().as_secs_f64());
        out
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.out_dir.join(name);
        self.outputs.push(p.clone());
        p
    }

    fn write_csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let path = self.path(name);
        let mut file = BufWriter::new(File::create(&path)?);
        file.write_all(self.config.header_lines().as_bytes())?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_trace(&mut self, name: &str, trace: &[TraceRow]) -> Result<()> {
        self.write_csv(
            name,
            &["epoch", "delta", "delta_stderr", "kinetic", "potential"],
            trace.iter().map(|r| {
                vec![r.epoch.to_string(), num(r.delta), num(r.delta_stderr), num(r.kinetic), num(r.potential)]
            }),
        )
    }

    fn finish(mut self, command: Command, exit_code: i32, status: String, summary: Value) -> Result<CommandOutput> {
        self.timings.insert("total".into(), self.started.elapsed().as_secs_f64());
        let manifest = Manifest {
            command: command.name(),
            version: env!("CARGO_PKG_VERSION"),
            status,
            exit_code,
            config: &self.config,
            timings_seconds: &self.timings,
            outputs: self.outputs.iter().map(|p| p.display().to_string()).collect(),
            summary: &summary,
        };
        let path = self.out_dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(CommandOutput { exit_code, summary })
    }
}

/// Round-trip decimal with 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn solver_options(cfg: &ExperimentConfig) -> Result<SolverOptions> {
    let method = match cfg.get::<String>("method")?.as_str() {
        "auto" => MethodChoice::Auto,
        "dense" => MethodChoice::Force(Method::Dense),
        "lanczos" => MethodChoice::Force(Method::Lanczos),
        other => return Err(Error::Config(format!("method must be auto, dense or lanczos, got `{other}`"))),
    };
    Ok(SolverOptions { tol: cfg.get("tol")?, max_iter: cfg.get("max_iter")?, method, ..Default::default() })
}

fn training_config(cfg: &ExperimentConfig) -> Result<TrainingConfig> {
    let t = TrainingConfig {
        learning_rate: cfg.get("learning_rate")?,
        positive_batch: cfg.get("positive_batch")?,
        negative_batch: cfg.get("negative_batch")?,
        gibbs_k: cfg.get("gibbs_k")?,
        max_epochs: cfg.get("max_epochs")?,
        eval_interval: cfg.get("eval_interval")?,
        eval_samples: cfg.get("eval_samples")?,
        eval_gibbs_steps: cfg.get("eval_gibbs_steps")?,
        seed: cfg.get("seed")?,
        target_delta: cfg.get("target_delta")?,
    };
    t.validate()?;
    Ok(t)
}

fn evaluator_kind(cfg: &ExperimentConfig) -> Result<EvaluatorKind> {
    cfg.get("evaluator")
}

/// Fills defaults and rejects unknown keys.
fn resolve(command: Command, given: &ExperimentConfig) -> Result<ExperimentConfig> {
    let mut cfg = given.clone();
    cfg.set_default("seed", 0);
    let mut allowed: Vec<&str> = COMMON_KEYS.to_vec();
    let solver = |cfg: &mut ExperimentConfig, allowed: &mut Vec<&str>| {
        let d = SolverOptions::default();
        cfg.set_default("tol", d.tol);
        cfg.set_default("max_iter", d.max_iter);
        cfg.set_default("method", "auto");
        allowed.extend_from_slice(SOLVER_KEYS);
    };
    let training = |cfg: &mut ExperimentConfig, allowed: &mut Vec<&str>, learning_rate: f64| {
        let d = TrainingConfig::default();
        cfg.set_default("learning_rate", learning_rate);
        cfg.set_default("positive_batch", d.positive_batch);
        cfg.set_default("negative_batch", d.negative_batch);
        cfg.set_default("gibbs_k", d.gibbs_k);
        cfg.set_default("max_epochs", d.max_epochs);
        cfg.set_default("eval_interval", d.eval_interval);
        cfg.set_default("eval_samples", d.eval_samples);
        cfg.set_default("eval_gibbs_steps", d.eval_gibbs_steps);
        cfg.set_default("target_delta", d.target_delta);
        cfg.set_default("evaluator", "mc");
        allowed.extend_from_slice(TRAINING_KEYS);
    };
    match command {
        Command::Ed => {
            cfg.set_default("ell_max", 5);
            solver(&mut cfg, &mut allowed);
            allowed.extend_from_slice(&["n_sites", "ell_max", "R"]);
        }
        Command::Signs => {
            cfg.set_default("ell_max", "1,2,3,4,5");
            cfg.set_default("R", "1.0");
            solver(&mut cfg, &mut allowed);
            allowed.extend_from_slice(&["n_sites", "ell_max", "R"]);
        }
        Command::Sample => {
            cfg.set_default("ell_max", 5);
            cfg.set_default("count", DEFAULT_DATASET_SIZE);
            solver(&mut cfg, &mut allowed);
            allowed.extend_from_slice(&["n_sites", "ell_max", "R", "count"]);
        }
        Command::Train => {
            solver(&mut cfg, &mut allowed);
            training(&mut cfg, &mut allowed, 0.001);
            allowed.push("n_hidden");
        }
        Command::ScaleHidden => {
            solver(&mut cfg, &mut allowed);
            training(&mut cfg, &mut allowed, 0.001);
            cfg.set_default("hidden_grid", "1,2,3,4,5,6,7,8");
            cfg.set_default("retries", 1);
            allowed.extend_from_slice(&["hidden_grid", "retries"]);
        }
        Command::ScaleData => {
            solver(&mut cfg, &mut allowed);
            training(&mut cfg, &mut allowed, 0.01);
            cfg.set_default("retries", 1);
            allowed.extend_from_slice(&["n_hidden_min", "sizes", "retries"]);
        }
        Command::Equilibrate => {
            solver(&mut cfg, &mut allowed);
            cfg.set_default("k_schedule", join(&log_schedule(10_000)));
            cfg.set_default("n_chains", 10_000);
            allowed.extend_from_slice(&["checkpoint", "R", "k_schedule", "n_chains"]);
        }
    }
    cfg.check_keys(&allowed)?;
    Ok(cfg)
}

fn join(values: &[usize]) -> String {
    values.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Runs `command` with the given configuration, writing into `out_dir`.
/// Failures after the output directory exists still leave a manifest.
pub fn run(command: Command, given: &ExperimentConfig, out_dir: &Path) -> Result<CommandOutput> {
    let config = resolve(command, given)?;
    fs::create_dir_all(out_dir)?;
    let mut run = Run {
        out_dir: out_dir.to_path_buf(),
        config,
        timings: BTreeMap::new(),
        outputs: Vec::new(),
        started: Instant::now(),
    };
    let result = match command {
        Command::Ed => cmd_ed(&mut run),
        Command::Signs => cmd_signs(&mut run),
        Command::Sample => cmd_sample(&mut run),
        Command::Train => cmd_train(&mut run),
        Command::ScaleHidden => cmd_scale(&mut run, Axis::Hidden),
        Command::ScaleData => cmd_scale(&mut run, Axis::Data),
        Command::Equilibrate => cmd_equilibrate(&mut run),
    };
    match result {
        Ok((code, status, summary)) => run.finish(command, code, status, summary),
        Err(e) => {
            let code = exit_code(&e);
            let summary = json!({ "error": e.to_string() });
            // best effort: the original error is what matters to the caller
            let _ = run.finish(command, code, "error".into(), summary);
            Err(e)
        }
    }
}

type Finished = (i32, String, Value);

fn ok(summary: Value) -> Result<Finished> {
    Ok((exit::SUCCESS, "ok".into(), summary))
}

fn cmd_ed(run: &mut Run) -> Result<Finished> {
    let cfg = run.config.clone();
    let (n, ell_max, r) = (cfg.get("n_sites")?, cfg.get("ell_max")?, cfg.get("R")?);
    let opts = solver_options(&cfg)?;
    let report = run.stage("ed", |_| {
        let (h, sol) = solve(n, ell_max, r, &opts)?;
        Ok(ed_report(&h, &sol))
    })?;
    run.write_csv(
        "ed.csv",
        &[
            "n_sites", "ell_max", "R", "dim", "energy_0", "energy_1", "gap", "amplitude_ratio", "method",
            "residual", "off_sector_weight",
        ],
        [vec![
            report.n_sites.to_string(),
            report.ell_max.to_string(),
            num(report.r),
            report.dim.to_string(),
            num(report.energy_0),
            num(report.energy_1),
            num(report.gap),
            num(report.amplitude_ratio),
            serde_json::to_value(report.method)?.as_str().unwrap_or_default().to_string(),
            num(report.residual),
            num(report.off_sector_weight),
        ]],
    )?;
    ok(serde_json::to_value(&report)?)
}

fn cmd_signs(run: &mut Run) -> Result<Finished> {
    let cfg = run.config.clone();
    let n = cfg.get("n_sites")?;
    let rs: Vec<f64> = cfg.get_list("R")?;
    let ells: Vec<u32> = cfg.get_list("ell_max")?;
    let opts = solver_options(&cfg)?;
    let rows = run.stage("scan", |_| run_signs(n, &rs, &ells, &opts))?;
    run.write_csv(
        "signs.csv",
        &["R", "ell_max", "tau_minus", "epsilon", "gap", "epsilon_over_gap"],
        rows.iter().map(|s| {
            vec![
                num(s.r),
                s.row.ell_max.to_string(),
                num(s.row.tau_minus),
                num(s.row.epsilon),
                num(s.row.gap),
                num(s.row.epsilon_over_gap),
            ]
        }),
    )?;
    ok(serde_json::to_value(&rows)?)
}

fn cmd_sample(run: &mut Run) -> Result<Finished> {
    let cfg = run.config.clone();
    let (n, ell_max, r) = (cfg.get("n_sites")?, cfg.get("ell_max")?, cfg.get("R")?);
    let (count, seed): (usize, u64) = (cfg.get("count")?, cfg.get("seed")?);
    let opts = solver_options(&cfg)?;
    let (h, sol) = run.stage("ed", |_| solve(n, ell_max, r, &opts))?;
    let ds = run.stage("sample", |_| sample_exact(&sol, &h, count, seed))?;
    let path = run.path("dataset.txt");
    write_dataset(&ds, &path)?;
    ok(json!({ "count": ds.len(), "energy_0": sol.energy_0, "gap": sol.gap, "dataset": path }))
}

/// Dataset plus its exact reference.
fn load_problem(run: &mut Run) -> Result<(MeasurementDataset, crate::hamiltonian::SparseHamiltonian, crate::eigensolver::GroundStateSolution)> {
    let cfg = run.config.clone();
    let path: PathBuf = cfg.get("dataset")?;
    let ds = read_dataset(&path)?;
    let opts = solver_options(&cfg)?;
    let (h, sol) = run.stage("ed", |_| solve(ds.meta.n_sites, ds.meta.ell_max, ds.meta.r, &opts))?;
    Ok((ds, h, sol))
}

fn cmd_train(run: &mut Run) -> Result<Finished> {
    let cfg = run.config.clone();
    let n_hidden: usize = cfg.get("n_hidden")?;
    let tcfg = training_config(&cfg)?;
    let kind = evaluator_kind(&cfg)?;
    let (ds, h, sol) = load_problem(run)?;
    let space = ds.space()?;
    let reference = Reference::new(&h, &sol);
    let outcome = run.stage("train", |_| train_fresh(&ds.samples, &space, n_hidden, &tcfg, &reference, kind))?;
    run.write_trace("trace.csv", &outcome.trace)?;
    let ckpt = run.path("rbm.ckpt");
    save_params(&outcome.params, &ckpt)?;
    let summary = json!({
        "status": outcome.status,
        "epochs_run": outcome.epochs_run,
        "final_delta": outcome.final_delta(),
        "energy_0": sol.energy_0,
        "gap": sol.gap,
    });
    let code = match outcome.status {
        TrainingStatus::Diverged => {
            log::error!("training diverged at epoch {}; partial trace written", outcome.epochs_run);
            exit::NUMERICAL
        }
        TrainingStatus::BudgetExhausted if tcfg.target_delta.is_finite() => exit::NOT_REACHED,
        _ => exit::SUCCESS,
    };
    Ok((code, format!("{:?}", outcome.status).to_lowercase(), summary))
}

#[derive(Clone, Copy)]
enum Axis {
    Hidden,
    Data,
}

fn cmd_scale(run: &mut Run, axis: Axis) -> Result<Finished> {
    let cfg = run.config.clone();
    let tcfg = training_config(&cfg)?;
    let kind = evaluator_kind(&cfg)?;
    let retries: usize = cfg.get("retries")?;
    let (ds, h, sol) = load_problem(run)?;
    let space = ds.space()?;
    let reference = Reference::new(&h, &sol);
    let (report, name, prefix, fixed_hidden): (ScalingReport, _, _, Option<usize>) = match axis {
        Axis::Hidden => {
            let grid: Vec<usize> = cfg.get_list("hidden_grid")?;
            let rep = run.stage("scan", |_| scale_hidden(&ds.samples, &space, &grid, &tcfg, retries, &reference, kind))?;
            (rep, "scale_hidden.csv", "trace_nh", None)
        }
        Axis::Data => {
            let n_h_min: usize = cfg.get("n_hidden_min")?;
            let sizes: Vec<usize> =
                if cfg.contains("sizes") { cfg.get_list("sizes")? } else { default_data_grid(ds.len()) };
            let rep = run.stage("scan", |_| {
                scale_data(&ds.samples, &space, n_h_min + 1, &sizes, &tcfg, retries, &reference, kind)
            })?;
            (rep, "scale_data.csv", "trace_d", Some(n_h_min + 1))
        }
    };
    let mut trace_names = Vec::new();
    for (res, out) in report.results.iter().zip(&report.outcomes) {
        let trace_name = format!("{prefix}{}.csv", res.axis);
        run.write_trace(&trace_name, &out.trace)?;
        trace_names.push(trace_name);
    }
    run.write_csv(
        name,
        &["axis", "reached", "epochs_used", "final_delta", "attempts", "diverged", "trace"],
        report.results.iter().zip(&trace_names).map(|(r, t)| {
            vec![
                r.axis.to_string(),
                r.reached.to_string(),
                r.epochs_used.to_string(),
                num(r.final_delta),
                r.attempts.to_string(),
                r.diverged.to_string(),
                t.clone(),
            ]
        }),
    )?;
    let mut summary = json!({ "minimum": report.minimum, "results": report.results });
    if let Some(n_h) = fixed_hidden {
        summary["n_hidden"] = json!(n_h);
    }
    match report.minimum {
        Some(_) => ok(summary),
        None => Ok((exit::NOT_REACHED, "all_failed".into(), summary)),
    }
}

fn cmd_equilibrate(run: &mut Run) -> Result<Finished> {
    let cfg = run.config.clone();
    let ckpt: PathBuf = cfg.get("checkpoint")?;
    let params = load_params(&ckpt)?;
    let r: f64 = cfg.get("R")?;
    let ks: Vec<usize> = cfg.get_list("k_schedule")?;
    let n_chains: usize = cfg.get("n_chains")?;
    let seed: u64 = cfg.get("seed")?;
    let opts = solver_options(&cfg)?;
    let (h, sol) = run.stage("ed", |_| solve(params.n_sites(), params.ell_max(), r, &opts))?;
    let reference = Reference::new(&h, &sol);
    let rows = run.stage("sample", |_| equilibrate(&params, &reference, &ks, n_chains, seed))?;
    run.write_csv(
        "equilibrate.csv",
        &["k", "delta_ns", "delta_ns_stderr", "delta_s", "delta_s_stderr", "f_ns", "f_ns_stderr", "n_symmetric"],
        rows.iter().map(|r| {
            vec![
                r.k.to_string(),
                num(r.delta_ns),
                num(r.delta_ns_stderr),
                opt_num(r.delta_s),
                opt_num(r.delta_s_stderr),
                num(r.f_ns),
                num(r.f_ns_stderr),
                r.n_symmetric.to_string(),
            ]
        }),
    )?;
    ok(serde_json::to_value(&rows)?)
}
