use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gmmvqa::harness::{
    cmd_bound, cmd_gradscan, cmd_tfim_gen, cmd_train, cmd_verify, gradscan_csv, RunConfig, VerifyOptions,
};
use gmmvqa::{Error, GradEngine, StrategyKind};

#[derive(Parser)]
#[command(version, about = "Gaussian-mixture initialization benchmarks for variational circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the conformance suite and print a pass/fail table.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Random instances per identity and variance.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Monte-Carlo gradient-norm scan; writes CSV.
    Gradscan(Common),
    /// Optimize the configured circuit; writes the trace as CSV.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        optimizer: Option<OptimizerArg>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        iters: Option<usize>,
    },
    /// Print the gradient-norm lower bounds for the configured observable.
    Bound {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        json: bool,
    },
    /// Write a transverse-field Ising observable file.
    TfimGen(Common),
}

#[derive(Copy, Clone, ValueEnum)]
enum OptimizerArg {
    Gd,
    Adam,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Qubit count; several comma-separated values sweep a gradscan.
    #[arg(long, value_delimiter = ',')]
    n_qubits: Vec<usize>,
    #[arg(long)]
    blocks: Option<usize>,
    /// Strategy kind; several comma-separated values for gradscan.
    #[arg(long, value_delimiter = ',')]
    strategy: Vec<StrategyKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    engine: Option<GradEngine>,
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(&n) = self.n_qubits.first() {
            cfg.n_qubits = n;
            cfg.gradscan.qubit_counts = self.n_qubits.clone();
        }
        if let Some(&kind) = self.strategy.first() {
            cfg.strategy.kind = kind;
            cfg.gradscan.strategies = self.strategy.clone();
        }
        if let Some(b) = self.blocks {
            cfg.n_blocks = b;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(s) = self.samples {
            cfg.n_samples = s;
        }
        if let Some(e) = self.engine {
            cfg.engine = Some(e);
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        }),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

fn to_json(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Verify { common, trials, json } => {
            let cfg = common.config()?;
            let mut opts = VerifyOptions {
                seed: cfg.seed,
                ..VerifyOptions::default()
            };
            if let Some(t) = trials {
                opts.trials = t;
            }
            let report = cmd_verify(&opts)?;
            let text = if json { to_json(&report) } else { format!("{report}\n") };
            emit(cfg.out.as_deref(), &text)?;
            Ok(report.all_passed())
        }
        Command::Gradscan(common) => {
            let cfg = common.config()?;
            let rows = cmd_gradscan(&cfg)?;
            emit(cfg.out.as_deref(), &gradscan_csv(&rows))?;
            Ok(true)
        }
        Command::Train {
            common,
            optimizer,
            lr,
            iters,
        } => {
            let mut cfg = common.config()?;
            if let Some(o) = optimizer {
                cfg.train.optimizer = match o {
                    OptimizerArg::Gd => gmmvqa::harness::Optimizer::Gd,
                    OptimizerArg::Adam => gmmvqa::harness::Optimizer::Adam,
                };
            }
            if let Some(lr) = lr {
                cfg.train.learning_rate = lr;
            }
            if let Some(n) = iters {
                cfg.train.max_iters = n;
            }
            let summary = cmd_train(&cfg)?;
            emit(cfg.out.as_deref(), &summary.trace_csv())?;
            eprintln!("{summary}");
            Ok(true)
        }
        Command::Bound { common, json } => {
            let cfg = common.config()?;
            let report = cmd_bound(&cfg)?;
            let text = if json { to_json(&report) } else { report.to_string() };
            emit(cfg.out.as_deref(), &text)?;
            Ok(true)
        }
        Command::TfimGen(common) => {
            let cfg = common.config()?;
            emit(cfg.out.as_deref(), &cmd_tfim_gen(cfg.n_qubits)?)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
