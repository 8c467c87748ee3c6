//! `nvmem` command-line front end.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use nvmem_core::params::{parse_quantity, Dimension};
use nvmem_core::raman_dynamics::{prepare, write_series_csv};
use nvmem_core::{
    index_csv, run_sweep, selection_rules, simulate_noise, simulate_protocol, summary_json,
    table_report, RunConfig, StepSize, SweepSpec,
};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "nvmem", version, about = "Raman quantum memory in an NV ensemble coupled to a microcavity")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Config file (`key = value` lines). Defaults apply when absent.
    #[arg(long, global = true, env = "NVMEM_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Fixed time step, e.g. `2e-12` or `0.001ns`.
    #[arg(long, global = true)]
    pub dt: Option<String>,
    /// Sweep worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Drop the lower excited branch (k = 4..6) from the dynamics.
    #[arg(long, global = true)]
    pub no_lower_branch: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coupling ratio tables and eigenvalues.
    Tables,
    /// Same files as `tables`.
    Eigen,
    /// Storage and retrieval with signal and noise runs.
    Simulate,
    /// Noise run only.
    Noise,
    /// Sweep one numeric config key.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Config key to vary, e.g. `detuning`.
    #[arg(long)]
    pub param: String,
    #[arg(long, allow_hyphen_values = true)]
    pub start: String,
    #[arg(long, allow_hyphen_values = true)]
    pub stop: String,
    #[arg(long)]
    pub step: String,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error [{}]: {}", .0.name(), .0)]
    Config(nvmem_core::Error),
    #[error("numerical failure [{}]: {}", .0.name(), .0)]
    Numerical(nvmem_core::Error),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl From<nvmem_core::Error> for CliError {
    fn from(e: nvmem_core::Error) -> Self {
        if e.is_config_error() {
            CliError::Config(e)
        } else {
            CliError::Numerical(e)
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Reads the config and applies the command-line overrides.
pub fn load_config(global: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut config = match &global.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(dt) = &global.dt {
        let value = parse_quantity(dt, Dimension::Time)
            .map_err(|m| nvmem_core::Error::InvalidParameter { name: "dt".into(), reason: m })?;
        config.dt = StepSize::Fixed(value);
    }
    if global.no_lower_branch {
        config.include_lower_branch = false;
    }
    config.validate()?;
    Ok(config)
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn json_bytes(value: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s.into_bytes()
}

fn write_series(path: &Path, result: &nvmem_core::SimulationResult) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write_series_csv(result, &mut w)
        .and_then(|_| w.flush())
        .map_err(io_err(path))
}

pub fn cmd_tables(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    ensure_dir(out)?;
    let p = prepare(config)?;
    if p.ground.degenerate {
        eprintln!("warning: ground |+>/|-> states are degenerate (E_perp = B_z = 0); basis fixed by convention");
    }
    let (x, y) = match table_report(&p.couplings) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("warning: {e}; writing raw |g| tables instead");
            let raw = |g: &selection_rules::Projections| {
                selection_rules::ratio_csv(&g.map(|row| row.map(|z| z.norm())))
            };
            (raw(&p.couplings.g_x), raw(&p.couplings.g_y))
        }
    };
    write_atomic(&out.join("ratio_x.csv"), x.as_bytes())?;
    write_atomic(&out.join("ratio_y.csv"), y.as_bytes())?;

    let mut ev = String::from("manifold,label,energy_hz\n");
    for (j, e) in p.ground.energies.iter().enumerate() {
        ev.push_str(&format!("ground,{},{e:.12e}\n", j + 1));
    }
    for (k, e) in p.excited.energies.iter().enumerate() {
        ev.push_str(&format!("excited,{},{e:.12e}\n", k + 4));
    }
    write_atomic(&out.join("eigenvalues.csv"), ev.as_bytes())
}

pub fn cmd_simulate(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    ensure_dir(out)?;
    let outcome = simulate_protocol(config)?;
    write_series(&out.join("signal.csv"), &outcome.signal)?;
    write_series(&out.join("noise.csv"), &outcome.noise)?;
    write_atomic(&out.join("summary.json"), &json_bytes(&summary_json(&outcome.metrics, config)))
}

pub fn cmd_noise(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    ensure_dir(out)?;
    let noise = simulate_noise(config)?;
    write_series(&out.join("noise.csv"), &noise)
}

/// Runs the sweep, writing `point_NNNN.json` per successful point and
/// `index.csv` last. Every point is attempted; the first failure (in grid
/// order) is returned after the index is written.
pub fn cmd_sweep(config: &RunConfig, args: &SweepArgs, workers: usize, out: &Path) -> Result<(), CliError> {
    let spec = SweepSpec::parse(&args.param, &args.start, &args.stop, &args.step)?;
    ensure_dir(out)?;
    let write_failure: Mutex<Option<CliError>> = Mutex::new(None);
    let points = run_sweep(config, &spec, workers, |p| {
        if let Ok(m) = &p.outcome {
            let path = out.join(format!("point_{:04}.json", p.index));
            if let Err(e) = write_atomic(&path, &json_bytes(&summary_json(m, &p.config))) {
                write_failure.lock().expect("lock").get_or_insert(e);
            }
        }
    })?;
    write_atomic(&out.join("index.csv"), index_csv(&spec.parameter, &points).as_bytes())?;
    if let Some(e) = write_failure.into_inner().expect("lock") {
        return Err(e);
    }
    for p in &points {
        if let Err(e) = &p.outcome {
            eprintln!("point {} ({} = {:e}) failed: {e}", p.index, spec.parameter, p.value);
        }
    }
    match points.into_iter().find_map(|p| p.outcome.err()) {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let config = load_config(&cli.global)?;
    let out = &cli.global.out;
    match &cli.command {
        Command::Tables | Command::Eigen => cmd_tables(&config, out),
        Command::Simulate => cmd_simulate(&config, out),
        Command::Noise => cmd_noise(&config, out),
        Command::Sweep(args) => cmd_sweep(&config, args, cli.global.workers, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn global() -> GlobalArgs {
        GlobalArgs { config: None, out: ".".into(), dt: None, workers: 1, no_lower_branch: false }
    }

    #[test]
    fn overrides_apply() {
        let g = GlobalArgs { dt: Some("0.002ns".into()), no_lower_branch: true, ..global() };
        let c = load_config(&g).unwrap();
        assert_eq!(c.dt, StepSize::Fixed(2e-12));
        assert!(!c.include_lower_branch);
        assert_eq!(load_config(&global()).unwrap(), RunConfig::default());
    }

    #[test]
    fn bad_dt_is_a_config_error() {
        let g = GlobalArgs { dt: Some("2GHz".into()), ..global() };
        assert_eq!(load_config(&g).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn error_classes() {
        assert_eq!(CliError::from(nvmem_core::Error::ZeroSignal).exit_code(), 3);
        let parse = nvmem_core::Error::ConfigParse { line: 1, column: 1, message: "x".into() };
        assert_eq!(CliError::from(parse).exit_code(), 2);
        let io = CliError::Io { path: "x".into(), source: io::Error::other("x") };
        assert_eq!(io.exit_code(), 4);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
