use clap::{Args, Parser, Subcommand};
use mcflab::diagnostics::DensityProbe;
use mcflab::io::{self, commands::exit, RunOverrides};
use mcflab::{McfError, SpacetimePoint};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

/// Mean curvature flow laboratory.
#[derive(Parser)]
#[command(name = "mcflab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the geometry described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `[output] dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write SVG frames of every recorded slice.
        #[arg(long)]
        frames: bool,
        /// Record a slice every K steps.
        #[arg(long, value_name = "K")]
        stride: Option<u64>,
    },
    /// Gaussian density probes on a stored run.
    Probe(ProbeArgs),
    /// Write an exact solution (or the reference density table).
    Oracle {
        /// sphere, cylinder, grim-reaper, plane or reference-densities
        name: String,
        /// Solution parameter, e.g. `radius=1` or `n=2`.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        /// Comma-separated times.
        #[arg(long, value_delimiter = ',', conflicts_with = "matching")]
        times: Vec<f64>,
        /// Use the slice times of a stored run.
        #[arg(long = "match", value_name = "DIR")]
        matching: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a run with a reference on the reference's time grid.
    Compare {
        #[arg(long)]
        history: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        /// Largest allowed relative shape and area error.
        #[arg(long, default_value_t = 1e-2)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long)]
    history: PathBuf,
    /// File with `[probe]` sections.
    #[arg(long, conflicts_with = "t0")]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    x: f64,
    #[arg(long, default_value_t = 0.0)]
    y: f64,
    #[arg(long)]
    t0: Option<f64>,
    /// Cutoff scale (`inf` for none).
    #[arg(long, default_value_t = f64::INFINITY)]
    rho: f64,
    #[arg(long, default_value_t = 0.01)]
    r_min: f64,
    #[arg(long, default_value_t = 0.5)]
    r_max: f64,
    #[arg(long, default_value_t = 16)]
    count: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn init_threads() {
    let Ok(v) = std::env::var("MCFLAB_THREADS") else { return };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            #[cfg(feature = "parallel")]
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("MCFLAB_THREADS ignored: {e}");
            }
            #[cfg(not(feature = "parallel"))]
            let _ = n;
        }
        _ => log::warn!("MCFLAB_THREADS must be a positive integer, got {v:?}"),
    }
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, f64>, McfError> {
    raw.iter()
        .map(|kv| {
            let bad = || McfError::Config { key: kv.clone(), message: "expected KEY=NUMBER".into() };
            let (k, v) = kv.split_once('=').ok_or_else(bad)?;
            Ok((k.trim().to_string(), v.trim().parse::<f64>().map_err(|_| bad())?))
        })
        .collect()
}

fn probes_of(a: &ProbeArgs) -> Result<Vec<DensityProbe>, McfError> {
    if let Some(path) = &a.config {
        return io::parse_probes(&std::fs::read_to_string(path)?);
    }
    let t0 = a.t0.ok_or_else(|| McfError::Config { key: "t0".into(), message: "give --t0 or --config".into() })?;
    Ok(vec![DensityProbe::geometric(SpacetimePoint::new(a.x, a.y, t0), a.rho, a.r_min, a.r_max, a.count)?])
}

fn execute(cli: Cli) -> Result<i32, McfError> {
    match cli.command {
        Command::Run { config, out, frames, stride } => {
            let cfg = io::load_config(&config)?;
            let s = io::cmd_run(&cfg, &RunOverrides { out, frames, stride })?;
            println!(
                "stop: {}; t = {:.6}; steps: {}; surgeries: {}; discards: {}; output: {}",
                s.stop,
                s.final_time,
                s.steps,
                s.surgeries,
                s.discards,
                s.out_dir.display()
            );
            for (k, c) in s.classes.iter().enumerate() {
                println!("probe {k}: {} (density {:.6}, confidence {:.3})", c.label, c.density_value, c.confidence);
            }
            Ok(exit::OK)
        }
        Command::Probe(a) => {
            let probes = probes_of(&a)?;
            for (k, c) in io::cmd_probe(&a.history, &probes, a.out.as_deref())?.iter().enumerate() {
                println!("probe {k}: {} (density {:.6}, confidence {:.3})", c.label, c.density_value, c.confidence);
            }
            Ok(exit::OK)
        }
        Command::Oracle { name, params, times, matching, out } => {
            let params = parse_params(&params)?;
            let times = match matching {
                Some(dir) => io::commands::slice_times(&dir)?,
                None if times.is_empty() => vec![0.0],
                None => times,
            };
            let k = io::cmd_oracle(&name, &params, &times, &out)?;
            println!("{name}: {k} entries written to {}", out.display());
            Ok(exit::OK)
        }
        Command::Compare { history, reference, tolerance, out } => {
            let r = io::cmd_compare(&history, &reference, tolerance, out.as_deref())?;
            println!(
                "{} times; max shape error {:.3e}; max area error {:.3e}; {}",
                r.rows.len(),
                r.max_shape,
                r.max_area,
                if r.pass { "pass" } else { "FAIL" }
            );
            Ok(if r.pass { exit::OK } else { exit::FAILURE })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(io::exit_code(&e) as u8)
        }
    }
}
