//! Optomechanical cavity: a single-photon-level field coupled to a moving
//! mirror by radiation pressure, with no-click cavity decay.
//!
//! All states here are written in the frame rotating at the optical
//! frequency, i.e. the Ω_c A†A evolution is factored out. Because A†A is
//! conserved this only changes the relative phase of the photon-number
//! sectors.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    check_truncation, coherent_amplitudes, expm_apply, required_dim, CoherentAmplitude, Hermiticity, ModeLabel,
    ModeLayout, Operator, StateVector, FIELD_DIM,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmParams {
    /// Cavity-2 field frequency Ω_c.
    pub omega_c: f64,
    /// Mirror frequency Ω_m.
    pub omega_m: f64,
    /// Radiation-pressure coupling g.
    pub g: f64,
    /// Cavity-2 decay rate Γ.
    pub gamma: f64,
    /// Initial mirror amplitude α₀.
    pub alpha0: CoherentAmplitude,
}

impl Default for OmParams {
    fn default() -> Self {
        Self {
            omega_c: 0.0,
            omega_m: 1.0,
            g: 1.0,
            gamma: 0.0,
            alpha0: CoherentAmplitude::real(1.0),
        }
    }
}

impl OmParams {
    /// Parameters with Ω_m = 1.
    pub fn dimensionless(kappa: f64, gamma_over_omega: f64, alpha0: CoherentAmplitude) -> Self {
        Self {
            omega_c: 0.0,
            omega_m: 1.0,
            g: kappa,
            gamma: gamma_over_omega,
            alpha0,
        }
    }

    /// κ = g/Ω_m.
    pub fn kappa(&self) -> f64 {
        self.g / self.omega_m
    }

    /// t″ = π/Ω_m, half a mechanical period.
    pub fn half_period(&self) -> f64 {
        PI / self.omega_m
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_m > 0.0) || !self.omega_m.is_finite() {
            return Err(Error::config("omega_m", "must be finite and > 0"));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::config("gamma", "must be finite and ≥ 0"));
        }
        if !self.g.is_finite() || !self.omega_c.is_finite() {
            return Err(Error::config("g", "must be finite"));
        }
        let a = self.alpha0.value();
        if !a.re.is_finite() || !a.im.is_finite() {
            return Err(Error::config("alpha0", "must be finite"));
        }
        Ok(())
    }

    /// Largest coherent amplitude reached by the zero- and one-photon
    /// branches: |α(t″)| ≤ |κ| + |α₀ − κ|.
    pub fn max_amplitude(&self) -> f64 {
        let a0 = self.alpha0.value();
        let k = self.kappa();
        let transient = k.abs() + (a0 - k).norm();
        transient.max(a0.norm()).max((-a0 + 2.0 * k).norm())
    }

    /// Mirror truncation from the rule applied to [`Self::max_amplitude`].
    pub fn mirror_dim(&self) -> usize {
        required_dim(self.max_amplitude())
    }
}

/// One branch n, |β⟩, coefficient of a two-branch optomechanical state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmTerm {
    pub photons: usize,
    pub amplitude: CoherentAmplitude,
    pub coefficient: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmPreparationResult {
    /// Normalized state over (field-2, mirror).
    pub state: StateVector,
    pub analytic_terms: [OmTerm; 2],
    /// Normalizing constant M of the two-branch bracket.
    pub norm_constant: f64,
}

pub fn om_layout(mirror_dim: usize) -> Result<ModeLayout> {
    ModeLayout::new(&[(ModeLabel::Field2, FIELD_DIM), (ModeLabel::Mirror, mirror_dim)])
}

/// Ω_c A†A + Ω_m B†B − g A†A(B + B†), optionally with −i(Γ/2)A†A.
pub fn build_om_hamiltonian(p: &OmParams, with_jump: bool, mirror_dim: usize) -> Result<Operator> {
    let layout = om_layout(mirror_dim)?;
    let n_field = Operator::number_on(&layout, ModeLabel::Field2)?;
    let b = Operator::annihilation_on(&layout, ModeLabel::Mirror)?;
    let position = &b + &b.dagger();
    let hermitian = &(&n_field.scale_re(p.omega_c)
        + &Operator::number_on(&layout, ModeLabel::Mirror)?.scale_re(p.omega_m))
        - &(&n_field * &position).scale_re(p.g);
    let hermitian = hermitian.with_hermiticity(Hermiticity::Hermitian);
    if !with_jump {
        return Ok(hermitian);
    }
    let flag = if p.gamma > 0.0 {
        Hermiticity::AntiHermitianPartPresent
    } else {
        Hermiticity::Hermitian
    };
    Ok((&hermitian + &n_field.scale(Complex64::new(0.0, -0.5 * p.gamma))).with_hermiticity(flag))
}

/// Initial state (|0⟩₂ + |1⟩₂)|α₀⟩/√2 in the given mirror truncation.
pub fn initial_om_state(p: &OmParams, mirror_dim: usize) -> Result<StateVector> {
    check_truncation(p.alpha0.magnitude(), mirror_dim)?;
    let coh = coherent_amplitudes(p.alpha0, mirror_dim);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = DVector::zeros(FIELD_DIM * mirror_dim);
    for n in 0..mirror_dim {
        amps[n] = coh[n] * h;
        amps[mirror_dim + n] = coh[n] * h;
    }
    StateVector::new(om_layout(mirror_dim)?, amps)
}

/// No-click evolution for time `t_dprime` in the optical rotating frame.
pub fn evolve_om_conditional(p: &OmParams, initial: &StateVector, t_dprime: f64) -> Result<StateVector> {
    p.validate()?;
    if !(t_dprime >= 0.0) {
        return Err(Error::InvalidArgument(format!("t'' must be ≥ 0, got {t_dprime}")));
    }
    let mirror_dim = initial.layout().dim_of(ModeLabel::Mirror)?;
    if initial.layout() != &om_layout(mirror_dim)? {
        return Err(Error::LayoutMismatch(format!(
            "expected (field-2, mirror), got {}",
            initial.layout()
        )));
    }
    let rotating = OmParams { omega_c: 0.0, ..*p };
    let h = build_om_hamiltonian(&rotating, true, mirror_dim)?;
    expm_apply(&h, t_dprime, initial)
}

/// φ(t″) = κ²(Ω_m t″ − sin Ω_m t″).
pub fn kerr_phase(p: &OmParams, t: f64) -> f64 {
    let k = p.kappa();
    let w = p.omega_m * t;
    k * k * (w - w.sin())
}

/// α(t″) = α₀e^{−iΩ_m t″} + κ(1 − e^{−iΩ_m t″}).
pub fn displaced_amplitude(p: &OmParams, t: f64) -> Complex64 {
    let rot = Complex64::from_polar(1.0, -p.omega_m * t);
    p.alpha0.value() * rot + p.kappa() * (1.0 - rot)
}

/// Phase κ·Im[α₀*(e^{iΩ_m t″} − 1)] picked up by the one-photon branch from
/// the non-commuting displacements; zero for α₀ = 0 and for real α₀ at
/// multiples of half a period.
pub fn displacement_phase(p: &OmParams, t: f64) -> f64 {
    let a0c = p.alpha0.value().conj();
    p.kappa() * (a0c * (Complex64::from_polar(1.0, p.omega_m * t) - 1.0)).im
}

fn om_terms(p: &OmParams, t: f64, with_displacement_phase: bool) -> ([OmTerm; 2], f64) {
    let decay = (-0.5 * p.gamma * t).exp();
    let m = 1.0 / (1.0 + decay * decay).sqrt();
    let mut phase = kerr_phase(p, t);
    if with_displacement_phase {
        phase += displacement_phase(p, t);
    }
    let terms = [
        OmTerm {
            photons: 0,
            amplitude: (p.alpha0.value() * Complex64::from_polar(1.0, -p.omega_m * t)).into(),
            coefficient: Complex64::new(m, 0.0),
        },
        OmTerm {
            photons: 1,
            amplitude: displaced_amplitude(p, t).into(),
            coefficient: Complex64::from_polar(m * decay, phase),
        },
    ];
    (terms, m)
}

/// Expands two-branch terms into the truncated (field-2, mirror) basis.
pub fn expand_om_terms(terms: &[OmTerm], mirror_dim: usize) -> Result<StateVector> {
    let mut amps = DVector::zeros(FIELD_DIM * mirror_dim);
    for term in terms {
        if term.photons >= FIELD_DIM {
            return Err(Error::InvalidArgument(format!(
                "{} photons exceed the field truncation",
                term.photons
            )));
        }
        check_truncation(term.amplitude.magnitude(), mirror_dim)?;
        let coh = coherent_amplitudes(term.amplitude, mirror_dim);
        for n in 0..mirror_dim {
            amps[term.photons * mirror_dim + n] += term.coefficient * coh[n];
        }
    }
    StateVector::new(om_layout(mirror_dim)?, amps)
}

/// Exact two-branch solution from the initial (|0⟩ + |1⟩)|α₀⟩/√2:
/// M[|0⟩|α₀e^{−iΩ_m t″}⟩ + e^{−Γt″/2} e^{i(φ + χ)}|1⟩|α(t″)⟩],
/// with χ = [`displacement_phase`].
pub fn closed_form_om_state(p: &OmParams, t_dprime: f64) -> Result<OmPreparationResult> {
    closed_form_om_state_in(p, t_dprime, p.mirror_dim())
}

pub fn closed_form_om_state_in(p: &OmParams, t_dprime: f64, mirror_dim: usize) -> Result<OmPreparationResult> {
    p.validate()?;
    if !(t_dprime >= 0.0) {
        return Err(Error::InvalidArgument(format!("t'' must be ≥ 0, got {t_dprime}")));
    }
    let (terms, m) = om_terms(p, t_dprime, true);
    let state = expand_om_terms(&terms, mirror_dim)?.normalized()?;
    Ok(OmPreparationResult {
        state,
        analytic_terms: terms,
        norm_constant: m,
    })
}

/// The two-branch form as printed, without the displacement phase χ. It agrees
/// with [`closed_form_om_state`] whenever χ vanishes.
pub fn printed_om_terms(p: &OmParams, t_dprime: f64) -> [OmTerm; 2] {
    om_terms(p, t_dprime, false).0
}

/// Propagated state with the closed-form branch description attached.
pub fn prepare_om_numeric(p: &OmParams, t_dprime: f64) -> Result<OmPreparationResult> {
    prepare_om_numeric_in(p, t_dprime, p.mirror_dim())
}

pub fn prepare_om_numeric_in(p: &OmParams, t_dprime: f64, dim: usize) -> Result<OmPreparationResult> {
    let evolved = evolve_om_conditional(p, &initial_om_state(p, dim)?, t_dprime)?;
    let (terms, m) = om_terms(p, t_dprime, true);
    Ok(OmPreparationResult {
        state: evolved.normalized()?,
        analytic_terms: terms,
        norm_constant: m,
    })
}

/// Multiplies each n-photon component of `field_mode` by e^{−rate·n·t/2}.
/// The result is left unnormalized.
pub fn decay_to_detection(state: &StateVector, field_mode: ModeLabel, rate: f64, t: f64) -> Result<StateVector> {
    if !(rate >= 0.0) || !(t >= 0.0) || !rate.is_finite() || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "decay needs rate ≥ 0 and t ≥ 0, got {rate}, {t}"
        )));
    }
    state.weight_mode(field_mode, |n| Complex64::new((-0.5 * rate * n as f64 * t).exp(), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_hamiltonian_is_diagonal() {
        let p = OmParams {
            omega_c: 3.0,
            omega_m: 0.8,
            g: 0.0,
            ..OmParams::default()
        };
        let dim = 12;
        let h = build_om_hamiltonian(&p, false, dim).unwrap();
        for i in 0..h.layout().total_dim() {
            for j in 0..h.layout().total_dim() {
                let z = h.matrix()[(i, j)];
                if i == j {
                    let (n2, nm) = (i / dim, i % dim);
                    assert!((z.re - (3.0 * n2 as f64 + 0.8 * nm as f64)).abs() < 1e-14);
                } else {
                    assert_eq!(z, Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn photon_number_is_conserved() {
        let p = OmParams {
            omega_c: 1.3,
            g: 0.7,
            gamma: 0.2,
            ..OmParams::default()
        };
        let h = build_om_hamiltonian(&p, true, 15).unwrap();
        let n = Operator::number_on(h.layout(), ModeLabel::Field2).unwrap();
        assert!(h.hermitian_part().commutator(&n).max_abs() < 1e-12);
        assert!(h.commutator(&n).max_abs() < 1e-12);
    }

    #[test]
    fn kappa_is_derived() {
        let p = OmParams {
            omega_m: 2.0,
            g: 0.3,
            ..OmParams::default()
        };
        assert!((p.kappa() - 0.15).abs() < 1e-15);
    }

    #[test]
    fn kerr_phase_at_half_period() {
        let p = OmParams::dimensionless(0.5, 0.0, CoherentAmplitude::real(0.0));
        let res = closed_form_om_state(&p, p.half_period()).unwrap();
        let phase = res.analytic_terms[1].coefficient.arg();
        assert!((phase - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn decay_leaves_vacuum_untouched() {
        let p = OmParams::dimensionless(0.8, 0.1, CoherentAmplitude::real(0.5));
        let res = closed_form_om_state(&p, 1.0).unwrap();
        let out = decay_to_detection(&res.state, ModeLabel::Field2, 0.7, 2.0).unwrap();
        let d = p.mirror_dim();
        for n in 0..d {
            assert_eq!(out.amplitudes()[n], res.state.amplitudes()[n]);
            let expected = res.state.amplitudes()[d + n] * (-0.7f64).exp();
            assert!((out.amplitudes()[d + n] - expected).norm() < 1e-16);
        }
    }

    #[test]
    fn decay_unknown_mode() {
        let p = OmParams::default();
        let res = closed_form_om_state(&p, 0.0).unwrap();
        assert!(matches!(
            decay_to_detection(&res.state, ModeLabel::Field1, 1.0, 1.0),
            Err(Error::UnknownMode(_))
        ));
    }

    #[test]
    fn mirror_dimension_covers_every_branch() {
        let p = OmParams::dimensionless(3.0, 0.0, CoherentAmplitude::real(1.0));
        assert!((p.max_amplitude() - 5.0).abs() < 1e-12);
        assert_eq!(p.mirror_dim(), 65);
    }
}
