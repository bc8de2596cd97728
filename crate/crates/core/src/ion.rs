//! Trapped ion in a leaky cavity: Hamiltonians, no-click conditional
//! evolution on the first red and blue motional sidebands, electronic
//! projection, and the closed-form conditional states.
//!
//! Basis conventions: the electronic mode has |g⟩ = level 0 and |e⟩ = level 1,
//! so σ₊ = |e⟩⟨g| and σ_z = diag(−1, +1).

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{annihilation, expm_apply, Hermiticity, ModeLabel, ModeLayout, Operator, StateVector, FIELD_DIM};

/// Vibrational truncation used for sideband dynamics.
pub const VIB_DIM: usize = 3;

/// Lamb-Dicke parameters at or above this value are flagged.
pub const LAMB_DICKE_WARN: f64 = 0.3;

const G_LEVEL: usize = 0;
const E_LEVEL: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonParams {
    /// Cavity-1 angular frequency.
    pub omega_c: f64,
    /// Vibrational frequency.
    pub omega_v: f64,
    /// Electronic transition frequency.
    pub omega_0: f64,
    /// Ion-field coupling G.
    pub coupling: f64,
    /// Lamb-Dicke parameter η.
    pub eta: f64,
    /// Cavity-1 decay rate γ.
    pub gamma: f64,
    /// Electronic superposition angle: cos θ|e⟩ + sin θ|g⟩.
    pub theta: f64,
    /// Phase on the |g⟩ branch of the blue-sideband preparation.
    pub xi: f64,
}

impl Default for IonParams {
    fn default() -> Self {
        Self {
            omega_c: 0.0,
            omega_v: 1.0,
            omega_0: 1.0,
            coupling: 10.0,
            eta: 0.1,
            gamma: 0.0,
            theta: std::f64::consts::FRAC_PI_4,
            xi: 0.0,
        }
    }
}

impl IonParams {
    /// Parameters with ηG = 1 and the given γ/ηG and θ.
    pub fn dimensionless(gamma_over_eta_g: f64, theta: f64) -> Self {
        Self {
            gamma: gamma_over_eta_g,
            theta,
            ..Self::default()
        }
    }

    pub fn eta_g(&self) -> f64 {
        self.eta * self.coupling
    }

    /// t′ = π/(2ηG), the half Rabi period of the sideband exchange.
    pub fn transfer_time(&self) -> f64 {
        FRAC_PI_2 / self.eta_g()
    }

    pub fn outside_lamb_dicke(&self) -> bool {
        self.eta >= LAMB_DICKE_WARN
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::config("eta", "must be > 0"));
        }
        if !(self.coupling > 0.0) {
            return Err(Error::config("coupling", "must be > 0"));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::config("gamma", "must be finite and ≥ 0"));
        }
        if !(0.0..=FRAC_PI_2).contains(&self.theta) {
            return Err(Error::config("theta", "must lie in [0, π/2]"));
        }
        if !self.xi.is_finite() {
            return Err(Error::config("xi", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SidebandKind {
    /// δ = ω₀ − ω_c = ω_v: exchange |0,0,e⟩ ↔ |1,1,g⟩.
    Red,
    /// δ = −ω_v: exchange |0,1,e⟩ ↔ |1,0,g⟩.
    Blue,
}

impl SidebandKind {
    /// Detuning ω₀ − ω_c selecting this sideband.
    pub fn detuning(self, omega_v: f64) -> f64 {
        match self {
            SidebandKind::Red => omega_v,
            SidebandKind::Blue => -omega_v,
        }
    }

    /// Initial vibrational level of the preparation.
    pub fn initial_vibration(self) -> usize {
        match self {
            SidebandKind::Red => 0,
            SidebandKind::Blue => 1,
        }
    }

    /// Vibrational level paired with a cavity photon after the exchange.
    pub fn exchanged_vibration(self) -> usize {
        match self {
            SidebandKind::Red => 1,
            SidebandKind::Blue => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PreparationSource {
    /// Matrix-exponential propagation in the truncated basis.
    Propagator,
    /// Exact solution of the two-level non-Hermitian block.
    ExactTwoLevel,
    /// Printed small-decay closed form.
    PaperClosedForm,
}

/// Normalized (field-1, vibration) state after a no-click evolution and a
/// projection of the electron onto |g⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct IonPreparationResult {
    pub sideband: SidebandKind,
    pub state: StateVector,
    /// Probability of finding |g⟩ given no cavity click.
    pub success_probability: f64,
    /// Squared norm of the conditional state before projection.
    pub no_jump_probability: f64,
    /// Unnormalized amplitudes of the |0⟩₁ and |1⟩₁ branches after projection.
    pub closed_form_coefficients: (Complex64, Complex64),
    pub source: PreparationSource,
}

impl IonPreparationResult {
    /// Normalized amplitude of the branch with `photons` in cavity 1.
    pub fn branch_amplitude(&self, photons: usize) -> Result<Complex64> {
        let vib = match (photons, self.sideband) {
            (0, s) => s.initial_vibration(),
            (1, s) => s.exchanged_vibration(),
            _ => return Err(Error::InvalidArgument(format!("no branch with {photons} photons"))),
        };
        self.state.amplitude(&[photons, vib])
    }
}

/// (field-1, vibration, electronic) layout.
pub fn ion_layout(vib_dim: usize) -> Result<ModeLayout> {
    ModeLayout::new(&[
        (ModeLabel::Field1, FIELD_DIM),
        (ModeLabel::IonVibration, vib_dim),
        (ModeLabel::IonElectronic, 2),
    ])
}

/// (field-1, vibration) layout of the prepared state.
pub fn ion_field_layout() -> Result<ModeLayout> {
    ModeLayout::new(&[(ModeLabel::Field1, FIELD_DIM), (ModeLabel::IonVibration, VIB_DIM)])
}

fn sigma_plus() -> DMatrix<Complex64> {
    let mut s = DMatrix::zeros(2, 2);
    s[(E_LEVEL, G_LEVEL)] = Complex64::new(1.0, 0.0);
    s
}

fn sigma_z() -> DMatrix<Complex64> {
    let mut s = DMatrix::zeros(2, 2);
    s[(G_LEVEL, G_LEVEL)] = Complex64::new(-1.0, 0.0);
    s[(E_LEVEL, E_LEVEL)] = Complex64::new(1.0, 0.0);
    s
}

/// sin(η(b + b†)) on a truncated vibrational mode, via the eigenbasis of the
/// real symmetric position-like operator.
pub fn operator_sine(eta: f64, dim: usize) -> Result<DMatrix<Complex64>> {
    let b = annihilation(dim)?;
    let x = (&b + b.adjoint()) * Complex64::new(eta, 0.0);
    let eig = x.symmetric_eigen();
    let sines = eig.eigenvalues.map(|l| Complex64::new(l.sin(), 0.0));
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&sines) * v.adjoint())
}

/// ω_c a†a + ω_v b†b + (ω₀/2)σ_z + G(σ₊ + σ₋)(a + a†) sin[η(b + b†)].
pub fn build_full_ion_hamiltonian(p: &IonParams, layout: &ModeLayout) -> Result<Operator> {
    for label in [ModeLabel::Field1, ModeLabel::IonVibration, ModeLabel::IonElectronic] {
        layout.position(label)?;
    }
    if layout.num_modes() != 3 {
        return Err(Error::LayoutMismatch(format!(
            "expected field-1, vibration, electronic; got {layout}"
        )));
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    let a = Operator::annihilation_on(layout, ModeLabel::Field1)?;
    let field_x = &a + &a.dagger();
    let sp = sigma_plus();
    let sx = Operator::embed(layout, ModeLabel::IonElectronic, &(&sp + sp.adjoint()))?;
    let sine = Operator::embed(
        layout,
        ModeLabel::IonVibration,
        &operator_sine(p.eta, layout.dim_of(ModeLabel::IonVibration)?)?,
    )?;

    let free = &(&Operator::number_on(layout, ModeLabel::Field1)?.scale_re(p.omega_c)
        + &Operator::number_on(layout, ModeLabel::IonVibration)?.scale_re(p.omega_v))
        + &Operator::embed(layout, ModeLabel::IonElectronic, &(sigma_z() * c(0.5 * p.omega_0)))?;
    let interaction = (&(&sx * &field_x) * &sine).scale_re(p.coupling);
    Ok((&free + &interaction).classified())
}

fn sideband_hamiltonian_on(
    layout: &ModeLayout,
    p: &IonParams,
    kind: SidebandKind,
    with_jump: bool,
) -> Result<Operator> {
    let a = Operator::annihilation_on(layout, ModeLabel::Field1)?;
    let b = Operator::annihilation_on(layout, ModeLabel::IonVibration)?;
    let sp = Operator::embed(layout, ModeLabel::IonElectronic, &sigma_plus())?;
    let sm = sp.dagger();
    // red: σ₋a†b† + σ₊ab; blue: σ₋a†b + σ₊ab†
    let emit = match kind {
        SidebandKind::Red => &(&sm * &a.dagger()) * &b.dagger(),
        SidebandKind::Blue => &(&sm * &a.dagger()) * &b,
    };
    let coupling = (&emit + &emit.dagger())
        .scale_re(p.eta_g())
        .with_hermiticity(Hermiticity::Hermitian);
    if !with_jump {
        return Ok(coupling);
    }
    let jump = Operator::number_on(layout, ModeLabel::Field1)?.scale(Complex64::new(0.0, -0.5 * p.gamma));
    let flag = if p.gamma > 0.0 {
        Hermiticity::AntiHermitianPartPresent
    } else {
        Hermiticity::Hermitian
    };
    Ok((&coupling + &jump).with_hermiticity(flag))
}

/// Interaction-picture sideband Hamiltonian, optionally with the no-click
/// term −i(γ/2)a†a, on the standard (field-1, vibration, electronic) layout.
pub fn build_sideband_hamiltonian(p: &IonParams, kind: SidebandKind, with_jump: bool) -> Result<Operator> {
    sideband_hamiltonian_on(&ion_layout(VIB_DIM)?, p, kind, with_jump)
}

/// Initial state |0⟩₁|n_v⟩(cos θ|e⟩ + e^{iξ} sin θ|g⟩); ξ only enters the
/// blue preparation.
pub fn initial_ion_state(p: &IonParams, kind: SidebandKind) -> Result<StateVector> {
    let v = kind.initial_vibration();
    let g_phase = match kind {
        SidebandKind::Red => Complex64::new(1.0, 0.0),
        SidebandKind::Blue => Complex64::from_polar(1.0, p.xi),
    };
    StateVector::from_terms(
        ion_layout(VIB_DIM)?,
        &[
            (&[0, v, E_LEVEL], Complex64::new(p.theta.cos(), 0.0)),
            (&[0, v, G_LEVEL], g_phase * p.theta.sin()),
        ],
    )
}

/// No-click conditional state at time `t_prime`, before any projection.
pub fn evolve_ion_conditional(p: &IonParams, kind: SidebandKind, t_prime: f64) -> Result<StateVector> {
    p.validate()?;
    if !(t_prime >= 0.0) {
        return Err(Error::InvalidArgument(format!("t' must be ≥ 0, got {t_prime}")));
    }
    let h = build_sideband_hamiltonian(p, kind, true)?;
    expm_apply(&h, t_prime, &initial_ion_state(p, kind)?)
}

/// Projects the electron of a conditional (field-1, vibration, electronic)
/// state onto |g⟩ and packages the normalized remainder.
pub fn project_ground(
    conditional: &StateVector,
    kind: SidebandKind,
    source: PreparationSource,
) -> Result<IonPreparationResult> {
    let ground = conditional.extract(ModeLabel::IonElectronic, G_LEVEL)?;
    let no_jump = conditional.stored_norm();
    if !(ground.stored_norm() > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let v0 = kind.initial_vibration();
    let v1 = kind.exchanged_vibration();
    let coefficients = (ground.amplitude(&[0, v0])?, ground.amplitude(&[1, v1])?);
    Ok(IonPreparationResult {
        sideband: kind,
        success_probability: ground.stored_norm() / no_jump,
        no_jump_probability: no_jump,
        state: ground.normalized()?,
        closed_form_coefficients: coefficients,
        source,
    })
}

/// Red-sideband preparation by numerical propagation.
pub fn prepare_ion_red(p: &IonParams, t_prime: f64) -> Result<IonPreparationResult> {
    let psi = evolve_ion_conditional(p, SidebandKind::Red, t_prime)?;
    project_ground(&psi, SidebandKind::Red, PreparationSource::Propagator)
}

/// Blue-sideband preparation by numerical propagation.
pub fn prepare_ion_blue(p: &IonParams, t_prime: f64) -> Result<IonPreparationResult> {
    let psi = evolve_ion_conditional(p, SidebandKind::Blue, t_prime)?;
    project_ground(&psi, SidebandKind::Blue, PreparationSource::Propagator)
}

pub fn prepare_ion(p: &IonParams, kind: SidebandKind, t_prime: f64) -> Result<IonPreparationResult> {
    match kind {
        SidebandKind::Red => prepare_ion_red(p, t_prime),
        SidebandKind::Blue => prepare_ion_blue(p, t_prime),
    }
}

/// Amplitudes (|0,n_v,e⟩, |1,n_v',g⟩) of the driven two-level block, exact in
/// γ: with Ω = √((ηG)² − (γ/4)²),
/// c_e = e^{−γt/4}[cos Ωt + (γ/4) sin Ωt/Ω] cos θ,
/// c_g = −i ηG e^{−γt/4} (sin Ωt/Ω) cos θ.
pub fn exact_block_amplitudes(p: &IonParams, t: f64) -> (Complex64, Complex64) {
    let eg = p.eta_g();
    let omega = Complex64::new(eg * eg - p.gamma * p.gamma / 16.0, 0.0).sqrt();
    let (cos_w, sinc_w) = if omega.norm() * t < 1e-8 {
        (Complex64::new(1.0, 0.0), Complex64::new(t, 0.0))
    } else {
        ((omega * t).cos(), (omega * t).sin() / omega)
    };
    let damp = (-p.gamma * t / 4.0).exp() * p.theta.cos();
    let c_e = (cos_w + sinc_w * (p.gamma / 4.0)) * damp;
    let c_g = Complex64::new(0.0, -eg) * sinc_w * damp;
    (c_e, c_g)
}

/// Exact conditional state of the two-level block, projected onto |g⟩.
pub fn exact_ion_state(p: &IonParams, kind: SidebandKind, t_prime: f64) -> Result<IonPreparationResult> {
    p.validate()?;
    let (c_e, c_g) = exact_block_amplitudes(p, t_prime);
    let psi = conditional_from_coefficients(p, kind, c_e, c_g)?;
    project_ground(&psi, kind, PreparationSource::ExactTwoLevel)
}

fn conditional_from_coefficients(
    p: &IonParams,
    kind: SidebandKind,
    c_e: Complex64,
    c_g: Complex64,
) -> Result<StateVector> {
    let v0 = kind.initial_vibration();
    let v1 = kind.exchanged_vibration();
    let g_phase = match kind {
        SidebandKind::Red => Complex64::new(1.0, 0.0),
        SidebandKind::Blue => Complex64::from_polar(1.0, p.xi),
    };
    StateVector::from_terms(
        ion_layout(VIB_DIM)?,
        &[
            (&[0, v0, G_LEVEL], g_phase * p.theta.sin()),
            (&[0, v0, E_LEVEL], c_e),
            (&[1, v1, G_LEVEL], c_g),
        ],
    )
}

/// Printed small-decay closed forms, evaluated verbatim (red carries e^{−γt′},
/// blue e^{−γt′/2}).
///
/// With y = (γ/2)ηG t′²:
/// red  c_e = [cos(ηGt′) cosh y + sin(ηGt′) e^{−γt′} sinh y] cos θ,
///      c_g = [i cos(ηGt′) e^{−γt′} sinh y − i sin(ηGt′) cosh y] cos θ;
/// blue c_e = [cos(ηGt′) cosh y − sin(ηGt′) e^{−γt′/2} sinh y] cos θ,
///      c_g = [−i cos(ηGt′) e^{−γt′/2} sinh y − i sin(ηGt′) cosh y] cos θ.
pub fn closed_form_amplitudes(p: &IonParams, kind: SidebandKind, t: f64) -> (Complex64, Complex64) {
    let eg = p.eta_g();
    let y = 0.5 * p.gamma * eg * t * t;
    let (cw, sw) = ((eg * t).cos(), (eg * t).sin());
    let (ch, sh) = (y.cosh(), y.sinh());
    let ct = p.theta.cos();
    let i = Complex64::i();
    match kind {
        SidebandKind::Red => {
            let decay = (-p.gamma * t).exp();
            let c_e = Complex64::new((cw * ch + sw * decay * sh) * ct, 0.0);
            let c_g = (i * cw * decay * sh - i * sw * ch) * ct;
            (c_e, c_g)
        }
        SidebandKind::Blue => {
            let decay = (-p.gamma * t / 2.0).exp();
            let c_e = Complex64::new((cw * ch - sw * decay * sh) * ct, 0.0);
            let c_g = (-i * cw * decay * sh - i * sw * ch) * ct;
            (c_e, c_g)
        }
    }
}

/// Printed closed-form state, projected and normalized.
pub fn closed_form_ion_state(p: &IonParams, kind: SidebandKind, t_prime: f64) -> Result<IonPreparationResult> {
    p.validate()?;
    let (c_e, c_g) = closed_form_amplitudes(p, kind, t_prime);
    let psi = conditional_from_coefficients(p, kind, c_e, c_g)?;
    project_ground(&psi, kind, PreparationSource::PaperClosedForm)
}

/// Blue transfer-time state with the extra e^{−γt/2} on the |1⟩₁ branch
/// evaluated at t = t′ (the alternative reading of the printed result; the
/// t = 0 reading is [`closed_form_ion_state`] itself).
pub fn closed_form_blue_delayed(p: &IonParams) -> Result<IonPreparationResult> {
    let t = p.transfer_time();
    let mut res = closed_form_ion_state(p, SidebandKind::Blue, t)?;
    let (c0, c1) = res.closed_form_coefficients;
    let c1 = c1 * (-p.gamma * t / 2.0).exp();
    let state = StateVector::from_terms(ion_field_layout()?, &[(&[0, 1], c0), (&[1, 0], c1)])?;
    res.closed_form_coefficients = (c0, c1);
    res.state = state.normalized()?;
    Ok(res)
}

/// Fidelity gaps between the printed closed form, the exact two-level
/// solution and the propagator at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormComparison {
    pub sideband: SidebandKind,
    pub t_prime: f64,
    /// 1 − F(closed form, exact two-level block).
    pub deficit_vs_exact: f64,
    /// 1 − F(closed form, propagator).
    pub deficit_vs_propagator: f64,
    /// 1 − F(exact two-level block, propagator).
    pub exact_vs_propagator: f64,
    /// Blue only: 1 − F for the e^{−γt′/2}-delayed reading, against the propagator.
    pub delayed_reading_deficit: Option<f64>,
}

pub fn compare_closed_form(p: &IonParams, kind: SidebandKind, t_prime: f64) -> Result<ClosedFormComparison> {
    let closed = closed_form_ion_state(p, kind, t_prime)?;
    let exact = exact_ion_state(p, kind, t_prime)?;
    let numeric = prepare_ion(p, kind, t_prime)?;
    let delayed = match kind {
        SidebandKind::Blue if (t_prime - p.transfer_time()).abs() <= 1e-12 * t_prime.max(1.0) => {
            Some(1.0 - closed_form_blue_delayed(p)?.state.fidelity(&numeric.state)?)
        }
        _ => None,
    };
    Ok(ClosedFormComparison {
        sideband: kind,
        t_prime,
        deficit_vs_exact: 1.0 - closed.state.fidelity(&exact.state)?,
        deficit_vs_propagator: 1.0 - closed.state.fidelity(&numeric.state)?,
        exact_vs_propagator: 1.0 - exact.state.fidelity(&numeric.state)?,
        delayed_reading_deficit: delayed,
    })
}

/// No-detection probability at t′ = π/(2ηG): the printed formula and the
/// propagator value |⟨g|ψ⟩|² for the normalized conditional state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoDetection {
    pub formula: f64,
    pub propagator: f64,
}

/// [1 + e^{−πγ/ηG} sinh²(π²γ/8ηG) / (cosh²(π²γ/8ηG) + tan²θ)]⁻¹.
pub fn p_no_detection_formula(p: &IonParams) -> f64 {
    if p.theta >= FRAC_PI_2 {
        return 1.0;
    }
    let r = p.gamma / p.eta_g();
    let x = std::f64::consts::PI.powi(2) * r / 8.0;
    let (c, s) = (p.theta.cos(), p.theta.sin());
    // multiplied through by cos²θ so θ → π/2 stays finite
    let correction = (-std::f64::consts::PI * r).exp() * x.sinh().powi(2) * c * c / (x.cosh().powi(2) * c * c + s * s);
    1.0 / (1.0 + correction)
}

pub fn p_no_detection_red(p: &IonParams) -> Result<NoDetection> {
    let prep = prepare_ion_red(p, p.transfer_time())?;
    Ok(NoDetection {
        formula: p_no_detection_formula(p),
        propagator: prep.success_probability,
    })
}
