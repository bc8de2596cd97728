use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ionmirror::interferometer::DetectorWhich;
use ionmirror::ion::SidebandKind;
use ionmirror::scenario::{
    emit, emit_to_path, run_scenario, run_sweep, run_witness, OutputFormat, ScenarioConfig, SweepSpec, SweepValues,
};
use ionmirror::validation::run_validation;
use ionmirror::Error;
use num_complex::Complex64;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  invalid configuration or arguments, i/o failure, or a failed validation check
  2  numerical failure (truncation too small, overflow, memory cap)";

#[derive(Parser)]
#[command(
    name = "ionmirror",
    version,
    about = "Entangle a trapped ion's motion with a moving mirror by interfering cavity outputs",
    after_help = EXIT_CODES
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one parameter point and emit a single result row.
    #[command(after_help = EXIT_CODES)]
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sweep one parameter over a list or a linear/log grid.
    #[command(after_help = EXIT_CODES)]
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Parameter to sweep (theta, gamma_over_etaG, Gamma_over_Omega, kappa,
        /// alpha0, detection_time_fraction, seed).
        #[arg(long)]
        parameter: Option<String>,
        /// Explicit comma-separated values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["start", "stop", "count"])]
        values: Option<Vec<f64>>,
        /// Grid start (with --stop and --count).
        #[arg(long, allow_hyphen_values = true)]
        start: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        stop: Option<f64>,
        /// Number of grid points.
        #[arg(long)]
        count: Option<usize>,
        /// Space the grid logarithmically.
        #[arg(long)]
        log: bool,
    },
    /// Run the built-in validation suite: a table of checks and a JSON verdict.
    #[command(after_help = EXIT_CODES)]
    Validate {
        /// Also write the JSON verdict to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Apply the displacement witness to the generated state and to a
    /// product comparator; prints JSON.
    #[command(after_help = EXIT_CODES)]
    Witness {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Scenario parameters. Flags override values read from `--config`.
#[derive(Args)]
struct ScenarioArgs {
    /// TOML file with scenario fields (and an optional [sweep] table).
    #[arg(long)]
    config: Option<PathBuf>,
    /// red or blue.
    #[arg(long)]
    sideband: Option<SidebandKind>,
    /// Electronic angle of cos θ|e⟩ + sin θ|g⟩, in [0, π/2].
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Cavity-1 decay rate over ηG.
    #[arg(long = "gamma_over_etaG", allow_hyphen_values = true)]
    gamma_over_eta_g: Option<f64>,
    /// Cavity-2 decay rate over Ω_m.
    #[arg(long = "Gamma_over_Omega", allow_hyphen_values = true)]
    gamma_over_omega: Option<f64>,
    /// Optomechanical coupling κ = g/Ω_m.
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<f64>,
    /// Initial mirror amplitude, `re` or `re,im`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    alpha0: Option<Complex64>,
    /// Detection time as a fraction of the window 1/Ω_m, in [0, 1].
    #[arg(long = "detection_time_fraction", allow_hyphen_values = true)]
    detection_time_fraction: Option<f64>,
    /// D_A or D_B.
    #[arg(long)]
    outcome: Option<DetectorWhich>,
    /// Mirror truncation, `mirror=N`.
    #[arg(long = "truncation_overrides", value_parser = parse_overrides)]
    truncation_overrides: Option<usize>,
    /// Echoed in the output; the pipeline itself is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OutputArgs {
    /// csv or json.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re` or `re,im`, got `{s}`")),
    }
}

fn parse_overrides(s: &str) -> Result<usize, String> {
    let v = s.strip_prefix("mirror=").unwrap_or(s);
    v.parse().map_err(|e| format!("expected `mirror=N`, got `{s}`: {e}"))
}

fn config_error(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

/// Reads a TOML file into a scenario and an optional sweep table.
fn read_config(path: &Path) -> Result<(ScenarioConfig, Option<SweepSpec>), Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut table: toml::Table = toml::from_str(&text).map_err(|e| config_error("config", e.to_string()))?;
    let sweep = match table.remove("sweep") {
        Some(v) => Some(
            v.try_into::<SweepSpec>()
                .map_err(|e| config_error("sweep", e.to_string()))?,
        ),
        None => None,
    };
    let cfg = toml::Value::Table(table)
        .try_into::<ScenarioConfig>()
        .map_err(|e| config_error("config", e.to_string()))?;
    Ok((cfg, sweep))
}

impl ScenarioArgs {
    fn resolve(&self) -> Result<(ScenarioConfig, Option<SweepSpec>), Error> {
        let (mut cfg, sweep) = match &self.config {
            Some(p) => read_config(p)?,
            None => (ScenarioConfig::default(), None),
        };
        if let Some(v) = self.sideband {
            cfg.sideband = v;
        }
        if let Some(v) = self.theta {
            cfg.theta = v;
        }
        if let Some(v) = self.gamma_over_eta_g {
            cfg.gamma_over_eta_g = v;
        }
        if let Some(v) = self.gamma_over_omega {
            cfg.gamma_over_omega = v;
        }
        if let Some(v) = self.kappa {
            cfg.kappa = v;
        }
        if let Some(v) = self.alpha0 {
            cfg.alpha0 = v;
        }
        if let Some(v) = self.detection_time_fraction {
            cfg.detection_time_fraction = v;
        }
        if let Some(v) = self.outcome {
            cfg.outcome = v;
        }
        if let Some(v) = self.truncation_overrides {
            cfg.truncation_overrides.mirror = Some(v);
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg.validate()?;
        Ok((cfg, sweep))
    }
}

fn write_rows(rows: &[ionmirror::scenario::ResultRow], out: &OutputArgs) -> Result<(), Error> {
    match &out.output {
        Some(p) => emit_to_path(rows, out.format, p),
        None => emit(rows, out.format, io::stdout().lock()),
    }
}

fn write_text(text: &str, path: Option<&Path>) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io(e.to_string())),
    }
}

fn sweep_spec(
    from_file: Option<SweepSpec>,
    parameter: Option<String>,
    values: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    count: Option<usize>,
    log: bool,
) -> Result<SweepSpec, Error> {
    let grid_given = start.is_some() || stop.is_some() || count.is_some();
    let values = match (values, grid_given) {
        (Some(values), _) => Some(SweepValues::List { values }),
        (None, true) => {
            let start = start.ok_or_else(|| config_error("start", "grid needs --start"))?;
            let stop = stop.ok_or_else(|| config_error("stop", "grid needs --stop"))?;
            let count = count.ok_or_else(|| config_error("count", "grid needs --count"))?;
            Some(if log {
                SweepValues::Log { start, stop, count }
            } else {
                SweepValues::Linear { start, stop, count }
            })
        }
        (None, false) => None,
    };
    let parameter = parameter.or_else(|| from_file.as_ref().map(|s| s.parameter.clone()));
    let values = values.or_else(|| from_file.map(|s| s.values));
    match (parameter, values) {
        (Some(parameter), Some(values)) => Ok(SweepSpec { parameter, values }),
        (None, _) => Err(config_error("parameter", "sweep needs --parameter")),
        (_, None) => Err(config_error("values", "sweep needs --values or --start/--stop/--count")),
    }
}

fn execute(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Run { scenario, output } => {
            let (cfg, _) = scenario.resolve()?;
            let row = run_scenario(&cfg)?;
            write_rows(&[row], &output)?;
        }
        Command::Sweep {
            scenario,
            output,
            parameter,
            values,
            start,
            stop,
            count,
            log,
        } => {
            let (cfg, from_file) = scenario.resolve()?;
            let spec = sweep_spec(from_file, parameter, values, start, stop, count, log)?;
            let rows = run_sweep(&cfg, &spec)?;
            write_rows(&rows, &output)?;
        }
        Command::Validate { json } => {
            let report = run_validation();
            let verdict = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))? + "\n";
            write_text(&report.table(), None)?;
            write_text(&verdict, None)?;
            if let Some(p) = json {
                write_text(&verdict, Some(&p))?;
            }
            return Ok(report.passed);
        }
        Command::Witness { scenario, output } => {
            let (cfg, _) = scenario.resolve()?;
            let cmp = run_witness(&cfg)?;
            let text = serde_json::to_string_pretty(&cmp).map_err(|e| Error::Io(e.to_string()))? + "\n";
            write_text(&text, output.as_deref())?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
