//! `mzi`: simulate, verify and sweep the nested interferometer from the command line.
//!
//! Exit codes: 0 success, 1 an acceptance criterion failed, 2 usage or
//! configuration error.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand};
use mzi_core::config::{sweep, RunConfig, SweepParameter, PRESET_NAMES};
use mzi_core::verification::run_acceptance_matrix;
use mzi_core::{Execution, Mirror};

#[derive(Parser)]
#[command(name = "mzi", version, about = "Nested Mach-Zehnder interferometer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write the time series and spectrum CSVs.
    Simulate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        common: Common,
    },
    /// Run the acceptance matrix; with --out, also write report.json and report.txt.
    Verify {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Evaluate samples on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Vary one parameter and record the per-mirror peak powers and DC power.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// amplitude-scale, skew or phase-b
        #[arg(long)]
        param: SweepParameter,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Shipped configuration.
    #[arg(long, value_parser = PossibleValuesParser::new(PRESET_NAMES))]
    preset: Option<String>,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Evaluate samples on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn exec(&self) -> Execution {
        execution(self.sequential)
    }
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn load(source: &Source) -> Result<RunConfig> {
    if let Some(name) = &source.preset {
        return RunConfig::preset(name).ok_or_else(|| anyhow!("unknown preset `{name}`"));
    }
    let path = source.config.as_ref().expect("clap enforces one source");
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    RunConfig::parse(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn simulate(source: &Source, common: &Common) -> Result<()> {
    let cfg = load(source)?;
    let out = cfg.run(common.exec())?;
    let ts_path = common.out.join(&cfg.output.time_series);
    let sp_path = common.out.join(&cfg.output.spectrum);
    output::write_time_series(&ts_path, &out.series)?;
    output::write_spectrum(&sp_path, &out.spectrum)?;

    let s = &out.spectrum;
    println!("mirror  bin  peak_power              predicted               detectable");
    for m in Mirror::ALL {
        println!(
            "{:<6}  {:>3}  {:<22}  {:<22}  {}",
            m.label(),
            s.peak_bins[m],
            output::float(s.peak_power[m]),
            output::float(out.predicted[m]),
            s.is_detectable(m)
        );
    }
    println!("dc_power    {}", output::float(s.dc_power()));
    println!("noise_floor {}", output::float(s.noise_floor));
    println!("wrote {} and {}", ts_path.display(), sp_path.display());
    Ok(())
}

fn verify(out: Option<&Path>, exec: Execution) -> Result<bool> {
    let report = run_acceptance_matrix(exec)?;
    for c in &report.criteria {
        println!("criterion {}: {} - {}", c.id, if c.passed { "PASS" } else { "FAIL" }, c.title);
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_file(&dir.join("report.json"), &report.to_json())?;
        write_file(&dir.join("report.txt"), &report.to_string())?;
    }
    Ok(report.all_passed())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run_sweep(source: &Source, param: SweepParameter, values: &[f64], common: &Common) -> Result<()> {
    let cfg = load(source)?;
    let rows = sweep(&cfg, param, values, common.exec())?;
    let path = common.out.join(format!("sweep_{}.csv", param.name()));
    output::write_sweep(&path, param.name(), &rows)?;
    for row in &rows {
        let peaks: Vec<String> = Mirror::ALL.iter().map(|&m| format!("{m}={:.6e}", row.peak_power[m])).collect();
        println!("{}={:<12} {}  dc={:.6e}", param.name(), row.value, peaks.join(" "), row.dc_power);
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { source, common } => simulate(source, common).map(|_| true),
        Command::Verify { out, sequential } => verify(out.as_deref(), execution(*sequential)),
        Command::Sweep { source, param, values, common } => run_sweep(source, *param, values, common).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
