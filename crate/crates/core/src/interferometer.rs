//! Beam splitter, photodetection and the post-selected ion-mirror state.
//!
//! After the splitter the output port A occupies the field-1 slot of the
//! layout and port B the field-2 slot. A click in D_A is the projection onto
//! |1⟩_A|0⟩_B, a click in D_B onto |0⟩_A|1⟩_B.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    annihilation, coherent_amplitudes, coherent_overlap, expm, CoherentAmplitude, ModeLabel, ModeLayout, StateVector,
    FIELD_DIM,
};
use crate::ion::{IonParams, IonPreparationResult, SidebandKind};
use crate::optomech::{decay_to_detection, OmParams, OmPreparationResult};

/// Sign convention of the 50:50 splitter.
///
/// `Standard` sends a cavity-1 photon to (−|1_A⟩ + |1_B⟩)/√2 and a cavity-2
/// photon to (|1_A⟩ + |1_B⟩)/√2, so D_B keeps both branches in phase and D_A
/// flips the cavity-1 branch. `Alternative` is the map a → (a + A)/√2,
/// A → (a − A)/√2 read as creation operators; it sends |1,1⟩ to exactly
/// (|2,0⟩ − |0,2⟩)/√2, whereas `Standard` gives the same state with the
/// opposite global sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeamSplitterConvention {
    Standard,
    Alternative,
}

pub const DEFAULT_CONVENTION: BeamSplitterConvention = BeamSplitterConvention::Standard;

impl BeamSplitterConvention {
    /// Amplitude of a photon from cavity `k` (0 or 1) in output port `p`
    /// (0 = A, 1 = B).
    pub fn port_amplitudes(self) -> [[f64; 2]; 2] {
        let h = FRAC_1_SQRT_2;
        match self {
            BeamSplitterConvention::Standard => [[-h, h], [h, h]],
            BeamSplitterConvention::Alternative => [[h, h], [h, -h]],
        }
    }

    /// 9×9 unitary on (field-1, field-2), indexed n1·3 + n2.
    ///
    /// Built as a rotation exp[(π/4)(a†A − aA†)] combined with a parity flip,
    /// which keeps it unitary on the truncated space. Sectors with up to two
    /// photons are reproduced exactly.
    pub fn unitary(self) -> DMatrix<Complex64> {
        let d = FIELD_DIM;
        let a = annihilation(d).expect("field dimension is valid");
        let id = DMatrix::<Complex64>::identity(d, d);
        let a1 = a.kronecker(&id);
        let a2 = id.kronecker(&a);
        let k = &a1.adjoint() * &a2 - &a1 * a2.adjoint();
        let rot = expm(&(k * Complex64::new(FRAC_PI_4, 0.0))).expect("bounded generator");
        let parity = |first: bool| {
            DMatrix::from_fn(d * d, d * d, |r, c| {
                if r != c {
                    return Complex64::new(0.0, 0.0);
                }
                let n = if first { r / d } else { r % d };
                Complex64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
            })
        };
        match self {
            BeamSplitterConvention::Standard => rot * parity(true),
            BeamSplitterConvention::Alternative => parity(false) * rot,
        }
    }
}

fn check_field_modes(state: &StateVector, mode1: ModeLabel, mode2: ModeLabel) -> Result<()> {
    for mode in [mode1, mode2] {
        let d = state.layout().dim_of(mode)?;
        if d != FIELD_DIM {
            return Err(Error::LayoutMismatch(format!(
                "beam splitter needs field modes of dimension {FIELD_DIM}, {mode} has {d}"
            )));
        }
    }
    Ok(())
}

/// 50:50 splitter on two field modes with the default convention.
pub fn beam_splitter(state: &StateVector, mode1: ModeLabel, mode2: ModeLabel) -> Result<StateVector> {
    beam_splitter_with(state, mode1, mode2, DEFAULT_CONVENTION)
}

pub fn beam_splitter_with(
    state: &StateVector,
    mode1: ModeLabel,
    mode2: ModeLabel,
    convention: BeamSplitterConvention,
) -> Result<StateVector> {
    check_field_modes(state, mode1, mode2)?;
    state.apply_pair(mode1, mode2, &convention.unitary())
}

/// Inverse of [`beam_splitter_with`] for the same convention.
pub fn beam_splitter_inverse(
    state: &StateVector,
    mode1: ModeLabel,
    mode2: ModeLabel,
    convention: BeamSplitterConvention,
) -> Result<StateVector> {
    check_field_modes(state, mode1, mode2)?;
    state.apply_pair(mode1, mode2, &convention.unitary().adjoint())
}

/// Detector event after the splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectorWhich {
    #[serde(rename = "D_A")]
    DA,
    #[serde(rename = "D_B")]
    DB,
    #[serde(rename = "none")]
    None,
    #[serde(rename = "multi")]
    Multi,
}

impl DetectorWhich {
    pub const ALL: [DetectorWhich; 4] = [
        DetectorWhich::DA,
        DetectorWhich::DB,
        DetectorWhich::None,
        DetectorWhich::Multi,
    ];

    /// Output occupations (n_A, n_B) for single-pattern outcomes.
    fn pattern(self) -> Option<(usize, usize)> {
        match self {
            DetectorWhich::DA => Some((1, 0)),
            DetectorWhich::DB => Some((0, 1)),
            DetectorWhich::None => Some((0, 0)),
            DetectorWhich::Multi => None,
        }
    }

    /// Output port index of a single click.
    pub fn port(self) -> Option<usize> {
        match self {
            DetectorWhich::DA => Some(0),
            DetectorWhich::DB => Some(1),
            _ => None,
        }
    }
}

impl fmt::Display for DetectorWhich {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DetectorWhich::DA => "D_A",
            DetectorWhich::DB => "D_B",
            DetectorWhich::None => "none",
            DetectorWhich::Multi => "multi",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for DetectorWhich {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D_A" | "DA" | "d_a" | "A" => Ok(DetectorWhich::DA),
            "D_B" | "DB" | "d_b" | "B" => Ok(DetectorWhich::DB),
            "none" => Ok(DetectorWhich::None),
            "multi" => Ok(DetectorWhich::Multi),
            _ => Err(Error::config("outcome", format!("unknown detector outcome `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorOutcome {
    pub which: DetectorWhich,
    pub probability: f64,
}

/// Probabilities of the exhaustive outcome set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeProbabilities {
    pub d_a: f64,
    pub d_b: f64,
    pub none: f64,
    pub multi: f64,
}

impl OutcomeProbabilities {
    pub fn get(&self, which: DetectorWhich) -> f64 {
        match which {
            DetectorWhich::DA => self.d_a,
            DetectorWhich::DB => self.d_b,
            DetectorWhich::None => self.none,
            DetectorWhich::Multi => self.multi,
        }
    }

    pub fn total(&self) -> f64 {
        self.d_a + self.d_b + self.none + self.multi
    }
}

/// Result of a projective detection.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub outcome: DetectorOutcome,
    /// Normalized post-measurement state, `None` when the outcome has zero
    /// probability or no other modes remain. For single patterns the field modes are removed; for
    /// `Multi` the projected state keeps them, since the remaining modes are
    /// left in a mixture over the two-photon patterns.
    pub remainder: Option<StateVector>,
}

fn field_positions(layout: &ModeLayout) -> Result<(usize, usize)> {
    Ok((layout.position(ModeLabel::Field1)?, layout.position(ModeLabel::Field2)?))
}

/// Projects the output ports (field-1 slot = A, field-2 slot = B) onto an
/// outcome. The probability is relative to the squared norm of `state`.
pub fn detect(state: &StateVector, which: DetectorWhich) -> Result<Detection> {
    let (ka, kb) = field_positions(state.layout())?;
    let total = state.stored_norm();
    if !(total > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let projected = match which.pattern() {
        Some((na, nb)) if state.layout().num_modes() == 2 => {
            let p = state.amplitude(&if ka < kb { [na, nb] } else { [nb, na] })?.norm_sqr() / total;
            return Ok(Detection {
                outcome: DetectorOutcome { which, probability: p },
                remainder: None,
            });
        }
        Some((na, nb)) => state.extract(ModeLabel::Field1, na)?.extract(ModeLabel::Field2, nb)?,
        None => {
            let layout = state.layout();
            let amps = state.amplitudes().map_with_location(|i, _, z| {
                let occ = layout.occupations(i);
                if occ[ka] + occ[kb] >= 2 {
                    z
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            StateVector::new(layout.clone(), amps)?
        }
    };
    let probability = projected.stored_norm() / total;
    let remainder = if projected.stored_norm() > 0.0 {
        Some(projected.normalized()?)
    } else {
        None
    };
    Ok(Detection {
        outcome: DetectorOutcome { which, probability },
        remainder,
    })
}

/// Probabilities of all four outcomes.
pub fn outcome_probabilities(state: &StateVector) -> Result<OutcomeProbabilities> {
    Ok(OutcomeProbabilities {
        d_a: detect(state, DetectorWhich::DA)?.outcome.probability,
        d_b: detect(state, DetectorWhich::DB)?.outcome.probability,
        none: detect(state, DetectorWhich::None)?.outcome.probability,
        multi: detect(state, DetectorWhich::Multi)?.outcome.probability,
    })
}

/// c1|v1⟩|β1⟩ + c2|v2⟩|β2⟩ over (vibration, mirror).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridTwoTermState {
    pub c1: Complex64,
    pub beta1: CoherentAmplitude,
    pub c2: Complex64,
    pub beta2: CoherentAmplitude,
    pub vib_labels: (usize, usize),
    pub normalized: bool,
}

impl HybridTwoTermState {
    /// Squared norm, including the branch overlap when the labels coincide.
    pub fn norm_squared(&self) -> f64 {
        let mut n = self.c1.norm_sqr() + self.c2.norm_sqr();
        if self.vib_labels.0 == self.vib_labels.1 {
            n += 2.0 * (self.c1.conj() * self.c2 * coherent_overlap(self.beta1, self.beta2)).re;
        }
        n
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm_squared();
        if !(n > 0.0) {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / n.sqrt();
        Ok(Self {
            c1: self.c1 * s,
            c2: self.c2 * s,
            normalized: true,
            ..*self
        })
    }

    /// Mirror overlap ⟨β1|β2⟩.
    pub fn overlap(&self) -> Complex64 {
        coherent_overlap(self.beta1, self.beta2)
    }

    /// Expansion in the truncated (vibration, mirror) basis.
    pub fn expand(&self, vib_dim: usize, mirror_dim: usize) -> Result<StateVector> {
        let layout = hybrid_layout(vib_dim, mirror_dim)?;
        let (v1, v2) = self.vib_labels;
        if v1 >= vib_dim || v2 >= vib_dim {
            return Err(Error::InvalidArgument(format!(
                "vibrational labels {v1}, {v2} exceed dimension {vib_dim}"
            )));
        }
        let mut amps = nalgebra::DVector::zeros(layout.total_dim());
        for (v, c, beta) in [(v1, self.c1, self.beta1), (v2, self.c2, self.beta2)] {
            crate::fock::check_truncation(beta.magnitude(), mirror_dim)?;
            let coh = coherent_amplitudes(beta, mirror_dim);
            for n in 0..mirror_dim {
                amps[v * mirror_dim + n] += c * coh[n];
            }
        }
        StateVector::new(layout, amps)
    }
}

/// (vibration, mirror) layout of the post-selected state.
pub fn hybrid_layout(vib_dim: usize, mirror_dim: usize) -> Result<ModeLayout> {
    ModeLayout::new(&[(ModeLabel::IonVibration, vib_dim), (ModeLabel::Mirror, mirror_dim)])
}

/// Everything produced by one protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub outcome: DetectorWhich,
    /// Outcome probabilities from the truncated-basis state.
    pub probabilities: OutcomeProbabilities,
    /// Probability of the chosen outcome from the two-branch expressions.
    pub analytic_probability: f64,
    /// Normalized two-branch state; `None` if the outcome cannot occur.
    pub hybrid: Option<HybridTwoTermState>,
    /// Normalized truncated-basis state over (vibration, mirror).
    pub state: Option<StateVector>,
}

/// Joint state of both cavities at detection time t, before the splitter.
pub fn joint_state_at_detection(
    ion: &IonPreparationResult,
    om: &OmPreparationResult,
    t: f64,
    rates: (f64, f64),
) -> Result<StateVector> {
    let joint = ion.state.tensor(&om.state)?;
    let decayed = decay_to_detection(&joint, ModeLabel::Field1, rates.0, t)?;
    decay_to_detection(&decayed, ModeLabel::Field2, rates.1, t)
}

/// Composes the prepared subsystems, lets the fields decay until detection
/// time t, combines them on the splitter and post-selects `outcome`.
///
/// The two-branch state is assembled from the prepared amplitudes, the
/// decay factors and the splitter amplitudes; the truncated-basis state is
/// obtained independently by applying each step to the full joint vector.
/// Branches are ordered by vibrational label.
pub fn run_protocol(
    ion: &IonPreparationResult,
    om: &OmPreparationResult,
    t: f64,
    rates: (f64, f64),
    outcome: DetectorWhich,
    convention: BeamSplitterConvention,
) -> Result<ProtocolResult> {
    let joint = joint_state_at_detection(ion, om, t, rates)?;
    let mixed = beam_splitter_with(&joint, ModeLabel::Field1, ModeLabel::Field2, convention)?;
    let probabilities = outcome_probabilities(&mixed)?;
    let detection = detect(&mixed, outcome)?;

    let (hybrid, analytic_probability) = match outcome.port() {
        Some(port) => analytic_hybrid(ion, om, t, rates, port, convention)?,
        None => (None, detection.outcome.probability),
    };
    let state = match outcome {
        DetectorWhich::Multi => None,
        _ => detection.remainder,
    };
    Ok(ProtocolResult {
        outcome,
        probabilities,
        analytic_probability,
        hybrid,
        state,
    })
}

fn analytic_hybrid(
    ion: &IonPreparationResult,
    om: &OmPreparationResult,
    t: f64,
    rates: (f64, f64),
    port: usize,
    convention: BeamSplitterConvention,
) -> Result<(Option<HybridTwoTermState>, f64)> {
    let (a0, a1) = (ion.branch_amplitude(0)?, ion.branch_amplitude(1)?);
    let [vac, photon] = om.analytic_terms;
    if vac.photons != 0 || photon.photons != 1 {
        return Err(Error::InvalidArgument(
            "optomechanical terms must be ordered by photon number".into(),
        ));
    }
    let (m0, m1) = (vac.coefficient, photon.coefficient);
    let d_ion = (-0.5 * rates.0 * t).exp();
    let d_om = (-0.5 * rates.1 * t).exp();
    let u = convention.port_amplitudes();

    // photon from the ion cavity: ion in its exchanged vibration, mirror on the vacuum branch
    let from_ion = (
        ion.sideband.exchanged_vibration(),
        a1 * d_ion * m0 * u[0][port],
        vac.amplitude,
    );
    // photon from the mirror cavity: ion in its initial vibration, mirror displaced
    let from_om = (
        ion.sideband.initial_vibration(),
        a0 * m1 * d_om * u[1][port],
        photon.amplitude,
    );
    let (first, second) = if from_ion.0 <= from_om.0 {
        (from_ion, from_om)
    } else {
        (from_om, from_ion)
    };
    let raw = HybridTwoTermState {
        c1: first.1,
        beta1: first.2,
        c2: second.1,
        beta2: second.2,
        vib_labels: (first.0, second.0),
        normalized: false,
    };
    let ion_norm = a0.norm_sqr() + a1.norm_sqr() * d_ion * d_ion;
    let om_norm = m0.norm_sqr() + m1.norm_sqr() * d_om * d_om;
    let probability = raw.norm_squared() / (ion_norm * om_norm);
    if !(raw.norm_squared() > 0.0) {
        return Ok((None, 0.0));
    }
    Ok((Some(raw.normalize()?), probability))
}

/// Printed post-selection coefficients (C1, C2), with C1 the branch carrying
/// vibrational label 0. Red: C1 = e^{−Γt/2}e^{−πΓ/2Ω_m}e^{iπκ²},
/// C2 = e^{−γt/2}cosh(π²γ/8ηG)cos θ; blue: C1 = ½e^{−γt/2}cosh(π²γ/8ηG)cos θ,
/// C2 = ½e^{−Γt/2}e^{−πΓ/2Ω_m}e^{iπκ²}sin θ.
pub fn paper_coefficients(sideband: SidebandKind, ion: &IonParams, om: &OmParams, t: f64) -> (Complex64, Complex64) {
    let kappa = om.kappa();
    let mirror = Complex64::from_polar(
        (-0.5 * om.gamma * t).exp() * (-PI * om.gamma / (2.0 * om.omega_m)).exp(),
        PI * kappa * kappa,
    );
    let cavity = (-0.5 * ion.gamma * t).exp() * (PI * PI * ion.gamma / (8.0 * ion.eta_g())).cosh() * ion.theta.cos();
    match sideband {
        SidebandKind::Red => (mirror, Complex64::new(cavity, 0.0)),
        SidebandKind::Blue => (Complex64::new(0.5 * cavity, 0.0), 0.5 * mirror * ion.theta.sin()),
    }
}

/// Printed against first-principles branch ratios C1/C2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientComparison {
    pub printed: (Complex64, Complex64),
    pub derived: (Complex64, Complex64),
    pub printed_ratio: Complex64,
    pub derived_ratio: Complex64,
    /// derived_ratio / printed_ratio.
    pub ratio_of_ratios: Complex64,
}

pub fn compare_coefficients(
    sideband: SidebandKind,
    ion: &IonParams,
    om: &OmParams,
    t: f64,
    hybrid: &HybridTwoTermState,
) -> CoefficientComparison {
    let printed = paper_coefficients(sideband, ion, om, t);
    let printed_ratio = printed.0 / printed.1;
    let derived_ratio = hybrid.c1 / hybrid.c2;
    CoefficientComparison {
        printed,
        derived: (hybrid.c1, hybrid.c2),
        printed_ratio,
        derived_ratio,
        ratio_of_ratios: derived_ratio / printed_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ion::prepare_ion;
    use crate::optomech::closed_form_om_state;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fields() -> ModeLayout {
        ModeLayout::new(&[(ModeLabel::Field1, 3), (ModeLabel::Field2, 3)]).unwrap()
    }

    #[test]
    fn unitary_for_both_conventions() {
        for conv in [BeamSplitterConvention::Standard, BeamSplitterConvention::Alternative] {
            let u = conv.unitary();
            let err = (&u * u.adjoint() - DMatrix::identity(9, 9))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-14, "{conv:?}: {err}");
        }
    }

    #[test]
    fn single_photons_follow_port_amplitudes() {
        for conv in [BeamSplitterConvention::Standard, BeamSplitterConvention::Alternative] {
            let u = conv.port_amplitudes();
            for (cavity, occ) in [(0, [1, 0]), (1, [0, 1])] {
                let out = beam_splitter_with(
                    &StateVector::basis(fields(), &occ).unwrap(),
                    ModeLabel::Field1,
                    ModeLabel::Field2,
                    conv,
                )
                .unwrap();
                assert!((out.amplitude(&[1, 0]).unwrap() - c(u[cavity][0], 0.0)).norm() < 1e-14);
                assert!((out.amplitude(&[0, 1]).unwrap() - c(u[cavity][1], 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn vacuum_is_invariant() {
        let vac = StateVector::basis(fields(), &[0, 0]).unwrap();
        let out = beam_splitter(&vac, ModeLabel::Field1, ModeLabel::Field2).unwrap();
        assert!(out.max_abs_diff(&vac).unwrap() < 1e-15);
    }

    #[test]
    fn hong_ou_mandel() {
        let h = FRAC_1_SQRT_2;
        let pair = StateVector::basis(fields(), &[1, 1]).unwrap();
        let target = StateVector::from_terms(fields(), &[(&[2, 0], c(h, 0.0)), (&[0, 2], c(-h, 0.0))]).unwrap();
        let alt = beam_splitter_with(
            &pair,
            ModeLabel::Field1,
            ModeLabel::Field2,
            BeamSplitterConvention::Alternative,
        )
        .unwrap();
        assert!(alt.max_abs_diff(&target).unwrap() < 1e-14);
        let std = beam_splitter(&pair, ModeLabel::Field1, ModeLabel::Field2).unwrap();
        assert!(std.max_abs_diff(&target.scaled(c(-1.0, 0.0)).unwrap()).unwrap() < 1e-14);
        assert!(std.amplitude(&[1, 1]).unwrap().norm() < 1e-15);
        let d = detect(&std, DetectorWhich::DA).unwrap();
        assert!(d.outcome.probability < 1e-30);
        assert!(d.remainder.is_none());
    }

    #[test]
    fn detector_on_vacuum() {
        let layout =
            ModeLayout::new(&[(ModeLabel::Field1, 3), (ModeLabel::Aux(0), 2), (ModeLabel::Field2, 3)]).unwrap();
        let vac = StateVector::basis(layout, &[0, 1, 0]).unwrap();
        let d = detect(&vac, DetectorWhich::DB).unwrap();
        assert_eq!(d.outcome.probability, 0.0);
        let none = detect(&vac, DetectorWhich::None).unwrap();
        assert_eq!(none.outcome.probability, 1.0);
        let rest = none.remainder.unwrap();
        assert_eq!(rest.layout().labels(), &[ModeLabel::Aux(0)]);
        assert_eq!(rest.amplitude(&[1]).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn detection_with_fields_out_of_order() {
        let layout =
            ModeLayout::new(&[(ModeLabel::Field2, 3), (ModeLabel::Aux(0), 2), (ModeLabel::Field1, 3)]).unwrap();
        // port A is the field-1 slot, wherever it sits
        let s = StateVector::basis(layout, &[0, 1, 1]).unwrap();
        assert_eq!(detect(&s, DetectorWhich::DA).unwrap().outcome.probability, 1.0);
        assert_eq!(detect(&s, DetectorWhich::DB).unwrap().outcome.probability, 0.0);
    }

    #[test]
    fn wrong_field_dimension() {
        let layout = ModeLayout::new(&[(ModeLabel::Field1, 3), (ModeLabel::Field2, 4)]).unwrap();
        let s = StateVector::basis(layout, &[0, 0]).unwrap();
        assert!(matches!(
            beam_splitter(&s, ModeLabel::Field1, ModeLabel::Field2),
            Err(Error::LayoutMismatch(_))
        ));
    }

    #[test]
    fn printed_coefficient_examples() {
        let ion = IonParams::dimensionless(0.0, FRAC_PI_4);
        let om = OmParams::dimensionless(0.5, 0.0, CoherentAmplitude::real(1.0));
        let (c1, _) = paper_coefficients(SidebandKind::Red, &ion, &om, 0.0);
        assert!((c1 - Complex64::from_polar(1.0, FRAC_PI_4)).norm() < 1e-15);
        let (b1, _) = paper_coefficients(SidebandKind::Blue, &ion, &om, 0.0);
        assert!((b1.re - 2f64.sqrt() / 4.0).abs() < 1e-15 && b1.im == 0.0);
    }

    #[test]
    fn detectors_differ_by_relative_sign() {
        let ion_p = IonParams::dimensionless(0.0, 0.6);
        let om_p = OmParams::dimensionless(0.8, 0.0, CoherentAmplitude::real(0.5));
        let ion = prepare_ion(&ion_p, SidebandKind::Red, ion_p.transfer_time()).unwrap();
        let om = closed_form_om_state(&om_p, om_p.half_period()).unwrap();
        let run = |w| {
            run_protocol(&ion, &om, 0.0, (0.0, 0.0), w, DEFAULT_CONVENTION)
                .unwrap()
                .hybrid
                .unwrap()
        };
        let (b, a) = (run(DetectorWhich::DB), run(DetectorWhich::DA));
        assert!((a.c1 - b.c1).norm() < 1e-14);
        assert!((a.c2 + b.c2).norm() < 1e-14);
        assert_eq!(b.vib_labels, (0, 1));
        assert!((b.beta1.value() - c(-0.5 + 1.6, 0.0)).norm() < 1e-14);
        assert!((b.beta2.value() - c(-0.5, 0.0)).norm() < 1e-14);
    }
}
