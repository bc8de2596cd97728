//! Self-check suite: closed forms against truncated-basis propagation and
//! the protocol invariants, each reduced to a pass/fail line.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    displacement_operator, entanglement_analytic, entanglement_numeric, product_comparator, witness,
};
use crate::error::Result;
use crate::fock::{CoherentAmplitude, ModeLabel, ModeLayout, StateVector};
use crate::interferometer::{
    beam_splitter, beam_splitter_inverse, detect, run_protocol, BeamSplitterConvention, DetectorWhich, ProtocolResult,
    DEFAULT_CONVENTION,
};
use crate::ion::{compare_closed_form, p_no_detection_formula, prepare_ion, IonParams, SidebandKind};
use crate::optomech::{
    closed_form_om_state, closed_form_om_state_in, evolve_om_conditional, initial_om_state, OmParams,
};

/// Detection time used by the protocol grids, in units of 1/Ω_m.
pub const GRID_DETECTION_TIME: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn at_most(name: &'static str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed: value <= tolerance,
            value,
            tolerance,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<4}  {:<width$}  {:>10.3e}  (tol {:.1e})  {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance,
                c.detail
            );
        }
        let n = self.checks.iter().filter(|c| c.passed).count();
        let _ = writeln!(s, "{n}/{} checks passed", self.checks.len());
        s
    }
}

/// Prepares both subsystems and runs the protocol for one parameter point.
#[allow(clippy::too_many_arguments)]
pub fn protocol_point(
    kind: SidebandKind,
    theta: f64,
    gamma_over_eta_g: f64,
    gamma_over_omega: f64,
    kappa: f64,
    alpha0: f64,
    t: f64,
    outcome: DetectorWhich,
) -> Result<ProtocolResult> {
    let ip = IonParams::dimensionless(gamma_over_eta_g, theta);
    let op = OmParams::dimensionless(kappa, gamma_over_omega, CoherentAmplitude::real(alpha0));
    let ion = prepare_ion(&ip, kind, ip.transfer_time())?;
    let om = closed_form_om_state(&op, op.half_period())?;
    run_protocol(&ion, &om, t, (ip.gamma, op.gamma), outcome, DEFAULT_CONVENTION)
}

/// (θ, γ/ηG, Γ/Ω_m, κ) grid shared by the protocol checks.
pub fn protocol_grid() -> Vec<(f64, f64, f64, f64)> {
    let mut g = Vec::new();
    for theta in [0.0, FRAC_PI_4, FRAC_PI_2] {
        for gamma in [0.0, 0.05] {
            for rate in [0.0, 0.1] {
                for kappa in [0.0, 1.0] {
                    g.push((theta, gamma, rate, kappa));
                }
            }
        }
    }
    g
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

fn bell_limit() -> Result<CheckResult> {
    let r = protocol_point(SidebandKind::Red, FRAC_PI_4, 0.0, 0.0, 3.0, 1.0, 0.0, DetectorWhich::DB)?;
    let e = entanglement_numeric(r.state.as_ref().expect("D_B has nonzero probability"))?;
    let asym = (r.probabilities.d_a - r.probabilities.d_b).abs();
    let dev = (e.entropy_bits - 1.0).abs();
    let mut c = CheckResult::at_most(
        "bell limit entropy",
        dev,
        1e-3,
        format!("S = {:.6} bits", e.entropy_bits),
    );
    c.passed &= asym <= 1e-10;
    c.detail += &format!(", |P(D_A) − P(D_B)| = {asym:.1e}");
    Ok(c)
}

fn optomech_closed_form() -> Result<CheckResult> {
    let mut points = Vec::new();
    for a0 in [0.0, 1.0, 2.0] {
        for kappa in [0.0, 0.5, 1.0] {
            for rate in [0.0, 0.1] {
                points.push((a0, kappa, rate));
            }
        }
    }
    let worst = points
        .par_iter()
        .map(|&(a0, kappa, rate)| -> Result<f64> {
            let p = OmParams::dimensionless(kappa, rate, CoherentAmplitude::real(a0));
            let dim = p.mirror_dim();
            let start = initial_om_state(&p, dim)?;
            let mut worst: f64 = 0.0;
            for k in 0..9 {
                let t = 2.0 * PI * k as f64 / 8.0;
                let num = evolve_om_conditional(&p, &start, t)?;
                let cf = closed_form_om_state_in(&p, t, dim)?;
                worst = worst.max(1.0 - cf.state.fidelity(&num)?);
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckResult::at_most(
        "optomechanical closed form",
        max_of(worst),
        1e-8,
        "max 1 − F over 162 points",
    ))
}

fn ion_closed_form() -> Result<CheckResult> {
    let deficit = |r: f64| -> Result<f64> {
        let p = IonParams::dimensionless(r, FRAC_PI_4);
        Ok(compare_closed_form(&p, SidebandKind::Red, p.transfer_time())?.deficit_vs_exact)
    };
    let (d2, d3, d0) = (deficit(1e-2)?, deficit(1e-3)?, deficit(0.0)?);
    let ratio = d2 / d3;
    Ok(CheckResult {
        name: "ion closed form scaling",
        passed: (50.0..=200.0).contains(&ratio) && d0.abs() <= 1e-12,
        value: ratio,
        tolerance: 200.0,
        detail: format!("deficit ratio {ratio:.2} in [50, 200], deficit at γ = 0: {d0:.1e}"),
    })
}

fn no_detection_formula() -> Result<CheckResult> {
    let limits = [
        p_no_detection_formula(&IonParams::dimensionless(0.0, 0.3)),
        p_no_detection_formula(&IonParams::dimensionless(0.2, FRAC_PI_2)),
    ];
    // the printed form, unmodified, away from θ = π/2
    let mut worst: f64 = 0.0;
    for (r, theta) in [(0.01f64, 0.2f64), (0.05, 0.7), (0.1, 1.2), (0.3, 1.5)] {
        let x = PI * PI * r / 8.0;
        let direct = 1.0 / (1.0 + (-PI * r).exp() * x.sinh().powi(2) / (x.cosh().powi(2) + theta.tan().powi(2)));
        let f = p_no_detection_formula(&IonParams::dimensionless(r, theta));
        worst = worst.max((f - direct).abs());
    }
    let mut c = CheckResult::at_most("no-detection formula", worst, 1e-12, "against the unscaled expression");
    c.passed &= limits == [1.0, 1.0];
    c.detail += &format!(", limits {limits:?}");
    Ok(c)
}

fn completeness() -> Result<CheckResult> {
    let worst = protocol_grid()
        .par_iter()
        .map(|&(theta, gamma, rate, kappa)| -> Result<f64> {
            let mut w: f64 = 0.0;
            for kind in [SidebandKind::Red, SidebandKind::Blue] {
                let r = protocol_point(
                    kind,
                    theta,
                    gamma,
                    rate,
                    kappa,
                    1.0,
                    GRID_DETECTION_TIME,
                    DetectorWhich::DB,
                )?;
                w = w.max((r.probabilities.total() - 1.0).abs());
            }
            Ok(w)
        })
        .collect::<Result<Vec<_>>>()?;
    let fields = ModeLayout::new(&[(ModeLabel::Field1, 3), (ModeLabel::Field2, 3)])?;
    let out = beam_splitter(
        &StateVector::basis(fields, &[1, 1])?,
        ModeLabel::Field1,
        ModeLabel::Field2,
    )?;
    let hom =
        detect(&out, DetectorWhich::DA)?.outcome.probability + detect(&out, DetectorWhich::DB)?.outcome.probability;
    let mut c = CheckResult::at_most(
        "outcome completeness",
        max_of(worst),
        1e-10,
        "max |ΣP − 1| over the grid",
    );
    c.passed &= hom <= 1e-12;
    c.detail += &format!(", single clicks from |1,1⟩: {hom:.1e}");
    Ok(c)
}

fn hybrid_faithfulness() -> Result<CheckResult> {
    let worst = protocol_grid()
        .par_iter()
        .map(|&(theta, gamma, rate, kappa)| -> Result<f64> {
            let mut w: f64 = 0.0;
            for kind in [SidebandKind::Red, SidebandKind::Blue] {
                for outcome in [DetectorWhich::DA, DetectorWhich::DB] {
                    let r = protocol_point(kind, theta, gamma, rate, kappa, 1.0, GRID_DETECTION_TIME, outcome)?;
                    let (Some(h), Some(s)) = (r.hybrid, r.state) else {
                        continue;
                    };
                    let dim = s.layout().dim_of(ModeLabel::Mirror)?;
                    w = w.max(1.0 - h.expand(3, dim)?.fidelity(&s)?);
                }
            }
            Ok(w)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckResult::at_most(
        "two-branch state vs pipeline",
        max_of(worst),
        1e-9,
        "max 1 − F, both sidebands and detectors",
    ))
}

fn entanglement_agreement() -> Result<CheckResult> {
    let worst = protocol_grid()
        .par_iter()
        .map(|&(theta, gamma, rate, kappa)| -> Result<f64> {
            let r = protocol_point(
                SidebandKind::Red,
                theta,
                gamma,
                rate,
                kappa,
                1.0,
                GRID_DETECTION_TIME,
                DetectorWhich::DB,
            )?;
            let (Some(h), Some(s)) = (r.hybrid, r.state) else {
                return Ok(0.0);
            };
            let a = entanglement_analytic(&h)?;
            let n = entanglement_numeric(&s)?;
            Ok((a.entropy_bits - n.entropy_bits)
                .abs()
                .max((a.negativity - n.negativity).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckResult::at_most(
        "analytic vs numeric entanglement",
        max_of(worst),
        1e-7,
        "entropy and negativity",
    ))
}

fn witness_discrimination() -> Result<CheckResult> {
    let (a0, kappa) = (1.0, 1.0);
    let r = protocol_point(
        SidebandKind::Red,
        FRAC_PI_4,
        0.0,
        0.0,
        kappa,
        a0,
        0.0,
        DetectorWhich::DB,
    )?;
    let state = r.state.expect("D_B has nonzero probability");
    let dim = state.layout().dim_of(ModeLabel::Mirror)?;
    let alpha = CoherentAmplitude::real(a0);
    let entangled = witness(&state, alpha)?
        .post_displacement_vacuum_probability
        .unwrap_or(0.0);
    let product = witness(&product_comparator(alpha, kappa, 3, dim)?, alpha)?
        .post_displacement_vacuum_probability
        .unwrap_or(1.0);
    let expected = (1.0 + (-2.0 * kappa * kappa).exp()) / 2.0;
    let mut c = CheckResult::at_most(
        "witness discrimination",
        1.0 - entangled,
        1e-6,
        format!("entangled {entangled:.9}"),
    );
    c.passed &= product < entangled && (product - expected).abs() <= 1e-8;
    c.detail += &format!(", product {product:.9} (expected {expected:.9})");
    Ok(c)
}

fn zero_coupling() -> Result<CheckResult> {
    let worst = [0.0, 0.3, FRAC_PI_4, 1.2, FRAC_PI_2]
        .par_iter()
        .map(|&theta| -> Result<f64> {
            let mut w: f64 = 0.0;
            for kind in [SidebandKind::Red, SidebandKind::Blue] {
                let r = protocol_point(kind, theta, 0.05, 0.1, 0.0, 1.0, GRID_DETECTION_TIME, DetectorWhich::DB)?;
                if let Some(s) = r.state {
                    let e = entanglement_numeric(&s)?;
                    w = w.max(e.entropy_bits).max(e.negativity);
                }
            }
            Ok(w)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckResult::at_most(
        "zero coupling is a product",
        max_of(worst),
        1e-9,
        "max entropy, negativity at κ = 0",
    ))
}

fn splitter_unitarity() -> Result<CheckResult> {
    let fields = ModeLayout::new(&[(ModeLabel::Field1, 3), (ModeLabel::Field2, 3)])?;
    let amps = nalgebra::DVector::from_fn(9, |i, _| {
        Complex64::new((1.3 * i as f64).sin(), (0.7 * i as f64 + 0.2).cos())
    });
    let s = StateVector::new(fields, amps)?;
    let mut worst: f64 = 0.0;
    for conv in [BeamSplitterConvention::Standard, BeamSplitterConvention::Alternative] {
        let out = crate::interferometer::beam_splitter_with(&s, ModeLabel::Field1, ModeLabel::Field2, conv)?;
        worst = worst.max((out.stored_norm() - s.stored_norm()).abs() / s.stored_norm());
        let back = beam_splitter_inverse(&out, ModeLabel::Field1, ModeLabel::Field2, conv)?;
        worst = worst.max(back.max_abs_diff(&s)?);
    }
    Ok(CheckResult::at_most(
        "beam splitter unitarity",
        worst,
        1e-12,
        "norm and inverse round trip",
    ))
}

fn displacement_inverse() -> Result<CheckResult> {
    let alpha = CoherentAmplitude::new(1.1, -0.4);
    let dim = 40;
    let d = displacement_operator(alpha, dim)?;
    let e = displacement_operator(CoherentAmplitude(-alpha.value()), dim)?;
    let prod = d.matrix() * e.matrix();
    let low = 10;
    let mut worst: f64 = 0.0;
    for i in 0..low {
        for j in 0..low {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    Ok(CheckResult::at_most(
        "displacement inverse",
        worst,
        1e-9,
        "D(α)D(−α) on the lowest 10 levels",
    ))
}

type Check = fn() -> Result<CheckResult>;

const CHECKS: [(&str, Check); 11] = [
    ("bell limit entropy", bell_limit),
    ("optomechanical closed form", optomech_closed_form),
    ("ion closed form scaling", ion_closed_form),
    ("no-detection formula", no_detection_formula),
    ("outcome completeness", completeness),
    ("two-branch state vs pipeline", hybrid_faithfulness),
    ("witness discrimination", witness_discrimination),
    ("zero coupling is a product", zero_coupling),
    ("analytic vs numeric entanglement", entanglement_agreement),
    ("beam splitter unitarity", splitter_unitarity),
    ("displacement inverse", displacement_inverse),
];

/// Runs every check. A check that errors is reported as a failure.
pub fn run_validation() -> ValidationReport {
    let checks: Vec<CheckResult> = CHECKS
        .par_iter()
        .map(|(name, f)| {
            f().unwrap_or_else(|e| CheckResult {
                name,
                passed: false,
                value: f64::NAN,
                tolerance: f64::NAN,
                detail: format!("error: {e}"),
            })
        })
        .collect();
    ValidationReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
