//! `volterra`: convergence studies for the stochastic Volterra equation.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use volterra_core::experiments::config::ExperimentConfig;
use volterra_core::experiments::presets::presets;
use volterra_core::experiments::report::sci17;
use volterra_core::experiments::{
    deterministic_convergence, ml_table, strong_convergence_mc, weak_convergence, ConvergenceReport,
};
use volterra_core::kernel_cq::{cq_weights_contour, cq_weights_riesz, KernelSpec};
use volterra_core::{Error, Result};

#[derive(Parser)]
#[command(name = "volterra", version, about = "Convergence studies for a linear stochastic Volterra equation")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides estimator.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores. Overrides estimator.threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (directory for `presets`). Overrides output.path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Coarse rows left out of the slope fit. Overrides estimator.drop_coarse.
    #[arg(long, global = true)]
    drop_coarse: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Dump convolution quadrature weights as CSV.
    Weights(WeightsArgs),
    /// Deterministic error ladder.
    DetConv,
    /// Weak error ladder for the second moment or another functional.
    WeakConv,
    /// Strong (mean-square) error ladder by Monte Carlo.
    StrongConv,
    /// Table of E_rho(-x) on an equispaced grid.
    MlEval(MlArgs),
    /// Emit the bundled experiment configurations.
    Presets {
        /// Only this preset.
        #[arg(long)]
        name: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Recurrence,
    Contour,
}

#[derive(Args)]
struct WeightsArgs {
    #[arg(long)]
    rho: f64,
    #[arg(long)]
    dt: f64,
    #[arg(long)]
    count: usize,
    #[arg(long, value_enum, default_value = "recurrence")]
    method: Method,
    /// Tempering rate; implies the contour method.
    #[arg(long)]
    eta: Option<f64>,
    /// Contour radius in (0, 1).
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Args)]
struct MlArgs {
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = 20.0)]
    x_max: f64,
    #[arg(long, default_value_t = 101)]
    points: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    match cli.command {
        Command::Weights(a) => emit(g.out.as_deref(), &weights_csv(&a)?),
        Command::MlEval(a) => {
            let mut s = String::from("x,value\n");
            for (x, v) in ml_table(a.rho, a.x_max, a.points)? {
                writeln!(s, "{},{}", sci17(x), sci17(v)).expect("writing to a string");
            }
            emit(g.out.as_deref(), &s)
        }
        Command::Presets { name } => write_presets(g.out.as_deref(), name.as_deref()),
        Command::DetConv => study(&g, deterministic_convergence),
        Command::WeakConv => study(&g, weak_convergence),
        Command::StrongConv => study(&g, strong_convergence_mc),
    }
}

fn weights_csv(a: &WeightsArgs) -> Result<String> {
    let w = match (a.method, a.eta) {
        (Method::Recurrence, None) => cq_weights_riesz(a.rho, a.dt, a.count)?,
        (_, eta) => {
            let kernel = match eta {
                Some(eta) => KernelSpec::tempered_riesz(a.rho, eta)?,
                None => KernelSpec::riesz(a.rho)?,
            };
            cq_weights_contour(&kernel, a.dt, a.count, a.radius)?
        }
    };
    let mut s = String::from("k,weight\n");
    for (k, v) in w.as_slice().iter().enumerate() {
        writeln!(s, "{k},{}", sci17(*v)).expect("writing to a string");
    }
    Ok(s)
}

fn load_config(g: &Global) -> Result<ExperimentConfig> {
    let path = g.config.as_deref().ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = g.seed {
        cfg.estimator.seed = seed;
    }
    if let Some(threads) = g.threads {
        cfg.estimator.threads = threads;
    }
    if let Some(k) = g.drop_coarse {
        cfg.estimator.drop_coarse = k;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn study(g: &Global, f: fn(&ExperimentConfig) -> Result<ConvergenceReport>) -> Result<()> {
    let cfg = load_config(g)?;
    let report = f(&cfg)?;
    eprintln!("{}", report.summary());
    if !report.meta.sampling_dominated_rows.is_empty() {
        eprintln!("warning: rows {:?} are dominated by sampling error", report.meta.sampling_dominated_rows);
    }
    match g.out.as_ref().or(cfg.output.path.as_ref()) {
        Some(path) => report.write(path),
        None => emit(None, &report.to_csv()),
    }
}

fn write_presets(dir: Option<&Path>, only: Option<&str>) -> Result<()> {
    let all = presets();
    let chosen: Vec<_> = all.iter().filter(|(n, _, _)| only.is_none_or(|o| o == *n)).collect();
    if chosen.is_empty() {
        let names: Vec<&str> = all.iter().map(|(n, _, _)| *n).collect();
        return Err(Error::Config(format!("unknown preset {:?}; available: {}", only.unwrap_or(""), names.join(", "))));
    }
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for (name, _, text) in chosen {
                std::fs::write(dir.join(format!("{name}.toml")), text)?;
            }
            Ok(())
        }
        None => {
            let mut s = String::new();
            for (name, desc, text) in chosen {
                writeln!(s, "# {name}: {desc}\n{text}").expect("writing to a string");
            }
            emit(None, &s)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
