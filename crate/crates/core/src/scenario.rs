//! Scenario configuration, the full pipeline for one parameter point,
//! parameter sweeps and CSV/JSON output.
//!
//! All inputs are dimensionless: ηG = 1 sets the ion time unit and Ω_m = 1
//! the mirror one. Detection time is t = detection_time_fraction · t_D with
//! t_D = [`DETECTION_WINDOW`]/Ω_m.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{entanglement_analytic, entanglement_numeric, witness, WitnessReport};
use crate::error::{Error, Result};
use crate::fock::{check_truncation, CoherentAmplitude, ModeLabel, ModeLayout, StateVector};
use crate::interferometer::{run_protocol, DetectorWhich, HybridTwoTermState, ProtocolResult, DEFAULT_CONVENTION};
use crate::ion::{prepare_ion, IonParams, SidebandKind, VIB_DIM};
use crate::optomech::{prepare_om_numeric_in, OmParams};

/// Detection window t_D in units of 1/Ω_m.
pub const DETECTION_WINDOW: f64 = 1.0;

impl fmt::Display for SidebandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SidebandKind::Red => "red",
            SidebandKind::Blue => "blue",
        })
    }
}

impl FromStr for SidebandKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "red" => Ok(SidebandKind::Red),
            "blue" => Ok(SidebandKind::Blue),
            _ => Err(Error::config(
                "sideband",
                format!("expected `red` or `blue`, got `{s}`"),
            )),
        }
    }
}

/// Per-mode truncation overrides. Only the mirror truncation is free; the
/// field and vibrational modes are fixed at three levels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationOverrides {
    pub mirror: Option<usize>,
}

impl fmt::Display for TruncationOverrides {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mirror {
            Some(d) => write!(f, "mirror={d}"),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub sideband: SidebandKind,
    pub theta: f64,
    #[serde(rename = "gamma_over_etaG")]
    pub gamma_over_eta_g: f64,
    #[serde(rename = "Gamma_over_Omega")]
    pub gamma_over_omega: f64,
    pub kappa: f64,
    /// [re, im].
    pub alpha0: Complex64,
    pub detection_time_fraction: f64,
    pub outcome: DetectorWhich,
    pub truncation_overrides: TruncationOverrides,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            sideband: SidebandKind::Red,
            theta: std::f64::consts::FRAC_PI_4,
            gamma_over_eta_g: 0.0,
            gamma_over_omega: 0.0,
            kappa: 1.0,
            alpha0: Complex64::new(1.0, 0.0),
            detection_time_fraction: 0.0,
            outcome: DetectorWhich::DB,
            truncation_overrides: TruncationOverrides::default(),
            seed: 0,
        }
    }
}

fn nonnegative(field: &str, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::config(field, format!("must be finite and ≥ 0, got {x}")));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=FRAC_PI_2).contains(&self.theta) {
            return Err(Error::config(
                "theta",
                format!("must lie in [0, π/2], got {}", self.theta),
            ));
        }
        nonnegative("gamma_over_etaG", self.gamma_over_eta_g)?;
        nonnegative("Gamma_over_Omega", self.gamma_over_omega)?;
        nonnegative("kappa", self.kappa)?;
        if !self.alpha0.re.is_finite() || !self.alpha0.im.is_finite() {
            return Err(Error::config("alpha0", "must be finite"));
        }
        if !(0.0..=1.0).contains(&self.detection_time_fraction) {
            return Err(Error::config(
                "detection_time_fraction",
                format!("must lie in [0, 1], got {}", self.detection_time_fraction),
            ));
        }
        if !matches!(self.outcome, DetectorWhich::DA | DetectorWhich::DB) {
            return Err(Error::config("outcome", "must be D_A or D_B"));
        }
        if let Some(d) = self.truncation_overrides.mirror {
            if d < 2 {
                return Err(Error::config("truncation_overrides", "mirror dimension must be ≥ 2"));
            }
        }
        Ok(())
    }

    pub fn ion_params(&self) -> IonParams {
        IonParams::dimensionless(self.gamma_over_eta_g, self.theta)
    }

    pub fn om_params(&self) -> OmParams {
        OmParams::dimensionless(self.kappa, self.gamma_over_omega, CoherentAmplitude(self.alpha0))
    }

    pub fn mirror_dim(&self) -> usize {
        self.truncation_overrides
            .mirror
            .unwrap_or_else(|| self.om_params().mirror_dim())
    }

    /// Detection time in units of 1/Ω_m.
    pub fn detection_time(&self) -> f64 {
        self.detection_time_fraction * DETECTION_WINDOW / self.om_params().omega_m
    }

    /// Sets a parameter by its configuration name.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "theta" => self.theta = value,
            "gamma_over_etaG" => self.gamma_over_eta_g = value,
            "Gamma_over_Omega" => self.gamma_over_omega = value,
            "kappa" => self.kappa = value,
            "alpha0" => self.alpha0 = Complex64::new(value, 0.0),
            "detection_time_fraction" => self.detection_time_fraction = value,
            "seed" => {
                if !(value >= 0.0) || value.fract() != 0.0 {
                    return Err(Error::config(
                        "seed",
                        format!("must be a nonnegative integer, got {value}"),
                    ));
                }
                self.seed = value as u64
            }
            _ => return Err(Error::config("parameter", format!("unknown sweep parameter `{name}`"))),
        }
        Ok(())
    }
}

/// One row of output. Complex inputs and the outcome distribution are
/// flattened into scalar columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sideband: SidebandKind,
    pub theta: f64,
    #[serde(rename = "gamma_over_etaG")]
    pub gamma_over_eta_g: f64,
    #[serde(rename = "Gamma_over_Omega")]
    pub gamma_over_omega: f64,
    pub kappa: f64,
    pub alpha0_re: f64,
    pub alpha0_im: f64,
    pub detection_time_fraction: f64,
    pub outcome: DetectorWhich,
    pub truncation_overrides: String,
    pub seed: u64,
    pub success_probability_preparation: f64,
    #[serde(rename = "detection_probability_D_A")]
    pub detection_probability_da: f64,
    #[serde(rename = "detection_probability_D_B")]
    pub detection_probability_db: f64,
    pub detection_probability_none: f64,
    pub detection_probability_multi: f64,
    /// Set when the requested outcome has zero probability; the state-derived
    /// columns are then empty.
    pub empty_state: bool,
    pub entropy_bits: Option<f64>,
    pub negativity: Option<f64>,
    pub overlap_s_magnitude: Option<f64>,
    pub fidelity_closed_form_vs_numeric: Option<f64>,
    pub witness_vacuum_probability: Option<f64>,
}

/// Column names of [`ResultRow`] in declared order.
pub const COLUMNS: [&str; 22] = [
    "sideband",
    "theta",
    "gamma_over_etaG",
    "Gamma_over_Omega",
    "kappa",
    "alpha0_re",
    "alpha0_im",
    "detection_time_fraction",
    "outcome",
    "truncation_overrides",
    "seed",
    "success_probability_preparation",
    "detection_probability_D_A",
    "detection_probability_D_B",
    "detection_probability_none",
    "detection_probability_multi",
    "empty_state",
    "entropy_bits",
    "negativity",
    "overlap_s_magnitude",
    "fidelity_closed_form_vs_numeric",
    "witness_vacuum_probability",
];

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

impl ResultRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.sideband.to_string(),
            float(self.theta),
            float(self.gamma_over_eta_g),
            float(self.gamma_over_omega),
            float(self.kappa),
            float(self.alpha0_re),
            float(self.alpha0_im),
            float(self.detection_time_fraction),
            self.outcome.to_string(),
            self.truncation_overrides.clone(),
            self.seed.to_string(),
            float(self.success_probability_preparation),
            float(self.detection_probability_da),
            float(self.detection_probability_db),
            float(self.detection_probability_none),
            float(self.detection_probability_multi),
            self.empty_state.to_string(),
            opt(self.entropy_bits),
            opt(self.negativity),
            opt(self.overlap_s_magnitude),
            opt(self.fidelity_closed_form_vs_numeric),
            opt(self.witness_vacuum_probability),
        ]
    }
}

/// Intermediate products of one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub row: ResultRow,
    pub protocol: ProtocolResult,
    pub witness: Option<WitnessReport>,
    /// Displacement used by the witness: minus the mirror amplitude paired
    /// with vibrational |1⟩.
    pub witness_displacement: Option<CoherentAmplitude>,
}

/// Runs the pipeline: sideband preparation at t′ = π/(2ηG), optomechanical
/// no-click evolution to t″ = π/Ω_m, decay until detection, beam splitter,
/// detection and analysis.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ResultRow> {
    Ok(run_scenario_full(cfg)?.row)
}

pub fn run_scenario_full(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    cfg.validate()?;
    let ip = cfg.ion_params();
    let op = cfg.om_params();
    let dim = cfg.mirror_dim();
    check_truncation(op.max_amplitude(), dim)?;

    let ion = prepare_ion(&ip, cfg.sideband, ip.transfer_time())?;
    let om = prepare_om_numeric_in(&op, op.half_period(), dim)?;
    let t = cfg.detection_time();
    let protocol = run_protocol(&ion, &om, t, (ip.gamma, op.gamma), cfg.outcome, DEFAULT_CONVENTION)?;
    let p = protocol.probabilities;

    let mut row = ResultRow {
        sideband: cfg.sideband,
        theta: cfg.theta,
        gamma_over_eta_g: cfg.gamma_over_eta_g,
        gamma_over_omega: cfg.gamma_over_omega,
        kappa: cfg.kappa,
        alpha0_re: cfg.alpha0.re,
        alpha0_im: cfg.alpha0.im,
        detection_time_fraction: cfg.detection_time_fraction,
        outcome: cfg.outcome,
        truncation_overrides: cfg.truncation_overrides.to_string(),
        seed: cfg.seed,
        success_probability_preparation: ion.success_probability,
        detection_probability_da: p.d_a,
        detection_probability_db: p.d_b,
        detection_probability_none: p.none,
        detection_probability_multi: p.multi,
        empty_state: true,
        entropy_bits: None,
        negativity: None,
        overlap_s_magnitude: None,
        fidelity_closed_form_vs_numeric: None,
        witness_vacuum_probability: None,
    };

    let (Some(hybrid), Some(state)) = (protocol.hybrid, protocol.state.as_ref()) else {
        return Ok(ScenarioOutput {
            row,
            protocol,
            witness: None,
            witness_displacement: None,
        });
    };
    let analytic = entanglement_analytic(&hybrid)?;
    let numeric = entanglement_numeric(state)?;
    let expanded = hybrid.expand(VIB_DIM, dim)?;
    let displacement = witness_displacement(&hybrid);
    let report = witness(state, displacement)?;

    row.empty_state = false;
    row.entropy_bits = Some(numeric.entropy_bits);
    row.negativity = Some(numeric.negativity);
    row.overlap_s_magnitude = analytic.overlap_s.map(|s| s.norm());
    row.fidelity_closed_form_vs_numeric = Some(expanded.fidelity(state)?);
    row.witness_vacuum_probability = report.post_displacement_vacuum_probability;
    Ok(ScenarioOutput {
        row,
        protocol,
        witness: Some(report),
        witness_displacement: Some(displacement),
    })
}

fn witness_displacement(h: &HybridTwoTermState) -> CoherentAmplitude {
    let beta = if h.vib_labels.1 == 1 { h.beta2 } else { h.beta1 };
    CoherentAmplitude(-beta.value())
}

/// Witness applied to the generated state and to the normalized product
/// comparator built from the same amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessComparison {
    pub displacement: CoherentAmplitude,
    pub entangled: WitnessReport,
    pub product: WitnessReport,
}

pub fn run_witness(cfg: &ScenarioConfig) -> Result<WitnessComparison> {
    let out = run_scenario_full(cfg)?;
    let (Some(entangled), Some(displacement), Some(h)) = (out.witness, out.witness_displacement, out.protocol.hybrid)
    else {
        return Err(Error::InvalidArgument(format!(
            "outcome {} has zero probability",
            cfg.outcome
        )));
    };
    let dim = cfg.mirror_dim();
    let comparator = product_from_branches(&h, dim)?;
    Ok(WitnessComparison {
        displacement,
        entangled,
        product: witness(&comparator, displacement)?,
    })
}

/// (|0⟩ + |1⟩)(|β1⟩ + |β2⟩), normalized.
fn product_from_branches(h: &HybridTwoTermState, dim: usize) -> Result<StateVector> {
    let one = Complex64::new(1.0, 0.0);
    let branches = HybridTwoTermState {
        c1: one,
        c2: one,
        vib_labels: (0, 0),
        ..*h
    };
    let mirror = branches.expand(VIB_DIM, dim)?.extract(ModeLabel::IonVibration, 0)?;
    let vib = StateVector::from_terms(
        ModeLayout::single(ModeLabel::IonVibration, VIB_DIM)?,
        &[(&[0], one), (&[1], one)],
    )?;
    vib.tensor(&mirror)?.normalized()
}

/// Values for a swept parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SweepValues {
    List { values: Vec<f64> },
    Linear { start: f64, stop: f64, count: usize },
    Log { start: f64, stop: f64, count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: SweepValues,
}

impl SweepSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        let grid = |start: f64, stop: f64, count: usize, log: bool| -> Result<Vec<f64>> {
            if count == 0 {
                return Err(Error::config("count", "must be ≥ 1"));
            }
            if !start.is_finite() || !stop.is_finite() {
                return Err(Error::config("start", "grid endpoints must be finite"));
            }
            if count > 1 && start == stop {
                return Err(Error::config("stop", "grid must be strictly monotone"));
            }
            if log && !(start > 0.0 && stop > 0.0) {
                return Err(Error::config("start", "log grid endpoints must be > 0"));
            }
            if count == 1 {
                return Ok(vec![start]);
            }
            let last = (count - 1) as f64;
            Ok((0..count)
                .map(|i| {
                    let f = i as f64 / last;
                    if i == count - 1 {
                        stop
                    } else if log {
                        start * (stop / start).powf(f)
                    } else {
                        start + (stop - start) * f
                    }
                })
                .collect())
        };
        match &self.values {
            SweepValues::List { values } if values.is_empty() => Err(Error::config("values", "list is empty")),
            SweepValues::List { values } => Ok(values.clone()),
            SweepValues::Linear { start, stop, count } => grid(*start, *stop, *count, false),
            SweepValues::Log { start, stop, count } => grid(*start, *stop, *count, true),
        }
    }
}

/// Runs one scenario per sweep value, in parallel, returning rows in sweep
/// order.
pub fn run_sweep(cfg: &ScenarioConfig, sweep: &SweepSpec) -> Result<Vec<ResultRow>> {
    let configs: Vec<ScenarioConfig> = sweep
        .values()?
        .into_iter()
        .map(|v| {
            let mut c = *cfg;
            c.set(&sweep.parameter, v)?;
            Ok(c)
        })
        .collect::<Result<_>>()?;
    configs.par_iter().map(run_scenario).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::config("format", format!("expected `csv` or `json`, got `{s}`"))),
        }
    }
}

/// Writes rows as CSV (header plus one line per row, floats to 17
/// significant digits) or as a JSON array of objects.
pub fn emit<W: Write>(rows: &[ResultRow], format: OutputFormat, out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no rows to emit".into()));
    }
    let io = |e: std::io::Error| Error::Io(e.to_string());
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(out);
            let fail = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(COLUMNS).map_err(fail)?;
            for row in rows {
                w.write_record(row.record()).map_err(fail)?;
            }
            w.flush().map_err(io)?;
        }
        OutputFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows).map_err(|e| Error::Io(e.to_string()))?;
            out.write_all(b"\n").map_err(io)?;
            out.flush().map_err(io)?;
        }
    }
    Ok(())
}

pub fn emit_to_path(rows: &[ResultRow], format: OutputFormat, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    emit(rows, format, std::io::BufWriter::new(file))
}
