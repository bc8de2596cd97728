use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::layout::{ModeLabel, ModeLayout};
use super::state::StateVector;
use crate::error::{Error, Result};

/// Largest Poisson tail a truncated coherent state may drop.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// Dimensionless coherent displacement amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentAmplitude(pub Complex64);

impl CoherentAmplitude {
    pub fn new(re: f64, im: f64) -> Self {
        Self(Complex64::new(re, im))
    }

    pub fn real(re: f64) -> Self {
        Self::new(re, 0.0)
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn magnitude(self) -> f64 {
        self.0.norm()
    }
}

impl From<Complex64> for CoherentAmplitude {
    fn from(z: Complex64) -> Self {
        Self(z)
    }
}

/// Recommended truncation for coherent amplitudes up to `max_magnitude`:
/// ⌈|α|² + 6|α| + 10⌉.
pub fn required_dim(max_magnitude: f64) -> usize {
    let a = max_magnitude.abs();
    (a * a + 6.0 * a + 10.0).ceil() as usize
}

/// Poisson weight of levels n ≥ dim for mean photon number |α|².
pub fn poisson_tail(magnitude: f64, dim: usize) -> f64 {
    let mean = magnitude * magnitude;
    if mean == 0.0 {
        return if dim == 0 { 1.0 } else { 0.0 };
    }
    // log p_dim, then walk upward until terms are negligible
    let mut log_p = -mean + dim as f64 * mean.ln() - ln_factorial(dim);
    let mut tail = 0.0;
    let mut n = dim;
    loop {
        let p = log_p.exp();
        tail += p;
        n += 1;
        log_p += mean.ln() - (n as f64).ln();
        if n as f64 > mean && p < 1e-30 * tail.max(1e-300) {
            break;
        }
        if n > dim + 100_000 {
            break;
        }
    }
    tail
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Amplitudes e^{−|α|²/2} αⁿ/√(n!) for n < dim, without renormalization.
pub fn coherent_amplitudes(alpha: CoherentAmplitude, dim: usize) -> DVector<Complex64> {
    let a = alpha.value();
    let mut amps = DVector::zeros(dim);
    if dim == 0 {
        return amps;
    }
    amps[0] = Complex64::new((-0.5 * a.norm_sqr()).exp(), 0.0);
    for n in 1..dim {
        amps[n] = amps[n - 1] * a / (n as f64).sqrt();
    }
    amps
}

/// Truncated coherent state |α⟩ on a single mode.
///
/// Fails when the dropped Poisson tail exceeds [`TAIL_TOLERANCE`]. The stored
/// norm is the captured weight (≤ 1); call [`StateVector::normalized`] to
/// renormalize.
pub fn coherent_state(alpha: CoherentAmplitude, dim: usize, label: ModeLabel) -> Result<StateVector> {
    let layout = ModeLayout::single(label, dim)?;
    check_truncation(alpha.magnitude(), dim)?;
    StateVector::new(layout, coherent_amplitudes(alpha, dim))
}

pub(crate) fn check_truncation(magnitude: f64, dim: usize) -> Result<()> {
    if !magnitude.is_finite() {
        return Err(Error::InvalidArgument("coherent amplitude is not finite".into()));
    }
    if poisson_tail(magnitude, dim) > TAIL_TOLERANCE {
        return Err(Error::TruncationTooSmall {
            magnitude,
            dim,
            required: required_dim(magnitude),
        });
    }
    Ok(())
}

/// ⟨α|β⟩ = exp(−|α|²/2 − |β|²/2 + α*β) for untruncated coherent states.
pub fn coherent_overlap(alpha: CoherentAmplitude, beta: CoherentAmplitude) -> Complex64 {
    let (a, b) = (alpha.value(), beta.value());
    (-0.5 * a.norm_sqr() - 0.5 * b.norm_sqr() + a.conj() * b).exp()
}
