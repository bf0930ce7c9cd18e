use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rotor_recon::experiments::commands::{run, Command};
use rotor_recon::experiments::{exit, exit_code, ExperimentConfig};

/// Reconstruction of dipolar rotor-chain ground states with restricted
/// Boltzmann machines.
#[derive(Parser, Debug)]
#[command(name = "rotor-recon", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// `key = value` config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory [default: out/<command>].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct Solver {
    /// Eigensolver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// auto, dense or lanczos.
    #[arg(long)]
    method: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
struct Training {
    /// Measurement dataset written by `sample`.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    positive_batch: Option<usize>,
    #[arg(long)]
    negative_batch: Option<usize>,
    #[arg(long)]
    gibbs_k: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    eval_interval: Option<usize>,
    #[arg(long)]
    eval_samples: Option<usize>,
    #[arg(long)]
    eval_gibbs_steps: Option<usize>,
    /// `inf` disables early stopping.
    #[arg(long)]
    target_delta: Option<f64>,
    /// mc or exact.
    #[arg(long)]
    evaluator: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Exact ground state, gap and amplitude ratio.
    Ed {
        #[arg(long)]
        n_sites: Option<usize>,
        #[arg(long)]
        ell_max: Option<u32>,
        /// Dimensionless separation.
        #[arg(long = "R", visible_alias = "r")]
        r: Option<f64>,
        #[command(flatten)]
        solver: Solver,
    },
    /// Sign-structure scan over comma-separated `R` and `ell_max` lists.
    Signs {
        #[arg(long)]
        n_sites: Option<usize>,
        #[arg(long)]
        ell_max: Option<String>,
        #[arg(long = "R", visible_alias = "r")]
        r: Option<String>,
        #[command(flatten)]
        solver: Solver,
    },
    /// Draw a measurement dataset from the exact ground state.
    Sample {
        #[arg(long)]
        n_sites: Option<usize>,
        #[arg(long)]
        ell_max: Option<u32>,
        #[arg(long = "R", visible_alias = "r")]
        r: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        solver: Solver,
    },
    /// Train one RBM on a dataset.
    Train {
        #[arg(long)]
        n_hidden: Option<usize>,
        #[command(flatten)]
        training: Training,
        #[command(flatten)]
        solver: Solver,
    },
    /// Smallest hidden layer that reaches the target.
    ScaleHidden {
        /// Comma-separated hidden-layer sizes.
        #[arg(long)]
        hidden_grid: Option<String>,
        #[arg(long)]
        retries: Option<usize>,
        #[command(flatten)]
        training: Training,
        #[command(flatten)]
        solver: Solver,
    },
    /// Smallest dataset that reaches the target with `n_hidden_min + 1` hidden units.
    ScaleData {
        #[arg(long)]
        n_hidden_min: Option<usize>,
        /// Comma-separated dataset sizes [default: 500·2^i].
        #[arg(long)]
        sizes: Option<String>,
        #[arg(long)]
        retries: Option<usize>,
        #[command(flatten)]
        training: Training,
        #[command(flatten)]
        solver: Solver,
    },
    /// δ and symmetry violations against the number of Gibbs steps.
    Equilibrate {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long = "R", visible_alias = "r")]
        r: Option<f64>,
        /// Comma-separated step counts.
        #[arg(long)]
        k_schedule: Option<String>,
        #[arg(long)]
        n_chains: Option<usize>,
        #[command(flatten)]
        solver: Solver,
    },
}

macro_rules! put {
    ($cfg:expr, $($key:literal => $val:expr),* $(,)?) => {
        $( if let Some(v) = &$val { $cfg.set($key, v.to_string()); } )*
    };
}

fn put_path(cfg: &mut ExperimentConfig, key: &str, v: &Option<PathBuf>) {
    if let Some(p) = v {
        cfg.set(key, p.display());
    }
}

fn put_solver(cfg: &mut ExperimentConfig, s: &Solver) {
    put!(cfg, "tol" => s.tol, "max_iter" => s.max_iter, "method" => s.method);
}

fn put_training(cfg: &mut ExperimentConfig, t: &Training) {
    put_path(cfg, "dataset", &t.dataset);
    put!(cfg,
        "learning_rate" => t.learning_rate,
        "positive_batch" => t.positive_batch,
        "negative_batch" => t.negative_batch,
        "gibbs_k" => t.gibbs_k,
        "max_epochs" => t.max_epochs,
        "eval_interval" => t.eval_interval,
        "eval_samples" => t.eval_samples,
        "eval_gibbs_steps" => t.eval_gibbs_steps,
        "target_delta" => t.target_delta,
        "evaluator" => t.evaluator,
    );
}

fn flags(cmd: &Cmd) -> (Command, ExperimentConfig) {
    let mut cfg = ExperimentConfig::new();
    let command = match cmd {
        Cmd::Ed { n_sites, ell_max, r, solver } => {
            put!(cfg, "n_sites" => n_sites, "ell_max" => ell_max, "R" => r);
            put_solver(&mut cfg, solver);
            Command::Ed
        }
        Cmd::Signs { n_sites, ell_max, r, solver } => {
            put!(cfg, "n_sites" => n_sites, "ell_max" => ell_max, "R" => r);
            put_solver(&mut cfg, solver);
            Command::Signs
        }
        Cmd::Sample { n_sites, ell_max, r, count, solver } => {
            put!(cfg, "n_sites" => n_sites, "ell_max" => ell_max, "R" => r, "count" => count);
            put_solver(&mut cfg, solver);
            Command::Sample
        }
        Cmd::Train { n_hidden, training, solver } => {
            put!(cfg, "n_hidden" => n_hidden);
            put_training(&mut cfg, training);
            put_solver(&mut cfg, solver);
            Command::Train
        }
        Cmd::ScaleHidden { hidden_grid, retries, training, solver } => {
            put!(cfg, "hidden_grid" => hidden_grid, "retries" => retries);
            put_training(&mut cfg, training);
            put_solver(&mut cfg, solver);
            Command::ScaleHidden
        }
        Cmd::ScaleData { n_hidden_min, sizes, retries, training, solver } => {
            put!(cfg, "n_hidden_min" => n_hidden_min, "sizes" => sizes, "retries" => retries);
            put_training(&mut cfg, training);
            put_solver(&mut cfg, solver);
            Command::ScaleData
        }
        Cmd::Equilibrate { checkpoint, r, k_schedule, n_chains, solver } => {
            put_path(&mut cfg, "checkpoint", checkpoint);
            put!(cfg, "R" => r, "k_schedule" => k_schedule, "n_chains" => n_chains);
            put_solver(&mut cfg, solver);
            Command::Equilibrate
        }
    };
    (command, cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let top = Cli::parse();
    let (command, overrides) = flags(&top.command);

    let mut cfg = match &top.common.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(exit::CONFIG as u8);
            }
        },
        None => ExperimentConfig::new(),
    };
    cfg.merge(&overrides);
    if let Some(seed) = top.common.seed {
        cfg.set("seed", seed);
    }
    if let Some(out) = &top.common.out {
        cfg.set("out", out.display());
    }
    let out_dir = cfg.raw("out").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out").join(command.name()));
    cfg.set("out", out_dir.display());

    match run(command, &cfg, &out_dir) {
        Ok(out) => {
            println!("{}", serde_json::to_string_pretty(&out.summary).unwrap_or_default());
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
