mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "tf-outer", version, about = "Outer-measure time-frequency experiments")]
struct Cli {
    /// JSON run configuration; the bundled default when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config value by dotted key path, e.g. `ensemble.size=20`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Output directory; falls back to `output_dir`, then `$TF_OUTER_OUT`, then `tf-outer-out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Embed one ensemble instance and write the field.
    Embed(FieldArgs),
    /// Outer and iterated outer norms of an embedded field.
    Opnorm {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        /// Iterated L^p 𝕃^q over strips instead of plain L^p.
        #[arg(long)]
        iterated: bool,
        #[arg(long)]
        weak: bool,
    },
    /// Cover the super-level set of the auxiliary embedding.
    Cover {
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 0)]
        instance: usize,
        /// Replace the instance data by zero.
        #[arg(long)]
        zero: bool,
    },
    /// Evaluate a Carleson-type operator on one instance.
    Operator {
        #[arg(long, value_enum)]
        kind: OperatorKind,
        #[arg(long, default_value_t = 0)]
        instance: usize,
    },
    /// Run one verification experiment.
    Verify {
        #[arg(value_enum)]
        experiment: VerifyKind,
    },
    /// Ensemble-size and refinement stability of the configured experiment.
    Sweep {
        #[arg(long, value_enum)]
        experiment: Option<VerifyKind>,
    },
}

#[derive(Args, Debug, Clone)]
struct FieldArgs {
    #[arg(long, value_enum, default_value_t = FieldKind::Energy)]
    which: FieldKind,
    #[arg(long, default_value_t = 0)]
    instance: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Energy,
    Mass,
    VarMass,
    VarMassLinear,
    Aux,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Carleson,
    VarCarleson,
    VarTruncation,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyKind {
    Duality,
    Holder,
    Rn,
    Interp,
    Bounds,
    Sizecontrol,
    Wavepackets,
}

impl VerifyKind {
    fn from_name(s: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(s, true).ok().or(match s {
            "size_control" => Some(Self::Sizecontrol),
            _ => None,
        })
    }
}

pub enum Failure {
    /// Assertion failure inside a verify suite.
    Check(String),
    Config(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_cli(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run_cli(cli: Cli) -> Result<(), Failure> {
    let cfg = config::load(cli.config.as_deref(), &cli.overrides).map_err(Failure::Config)?;
    match cli.workers {
        Some(1) => tf_outer::par::set_sequential(true),
        Some(n) if n > 1 => {
            tf_outer::par::init_workers(n);
        }
        Some(_) => return Err(Failure::Config("--workers must be at least 1".into())),
        None => {}
    }
    let out = output::Output::new(output::resolve_dir(cli.out, cfg.output_dir.as_deref())).map_err(Failure::Config)?;
    match cli.command {
        Command::Embed(f) => run::embed(&cfg, &out, f.which, f.instance),
        Command::Opnorm { field, p, q, iterated, weak } => run::opnorm(&cfg, &out, field.which, field.instance, p, q, iterated, weak),
        Command::Cover { lambda, instance, zero } => run::cover(&cfg, &out, lambda, instance, zero),
        Command::Operator { kind, instance } => run::operator(&cfg, &out, kind, instance),
        Command::Verify { experiment } => run::verify(&cfg, &out, experiment),
        Command::Sweep { experiment } => {
            let which = match experiment {
                Some(e) => e,
                None => VerifyKind::from_name(&cfg.experiment)
                    .ok_or_else(|| Failure::Config(format!("experiment: unknown experiment `{}`", cfg.experiment)))?,
            };
            run::sweep(&cfg, &out, which)
        }
    }
}
