//! Entanglement measures and the local witness procedure for post-selected
//! (vibration, mirror) states.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    annihilation, check_truncation, coherent_amplitudes, expm, required_dim, CoherentAmplitude, ModeLabel, ModeLayout,
    Operator, StateVector,
};
use crate::interferometer::{hybrid_layout, HybridTwoTermState};

const NORM_TOL: f64 = 1e-10;

/// Vacuum probability at or above which the witness reads "entangled".
pub const WITNESS_THRESHOLD: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    /// Largest two Schmidt coefficients, descending.
    pub schmidt_coefficients: [f64; 2],
    pub entropy_bits: f64,
    pub negativity: f64,
    /// ⟨β1|β2⟩; only known for the analytic method.
    pub overlap_s: Option<Complex64>,
    pub method: Method,
}

fn entropy_bits(probabilities: impl IntoIterator<Item = f64>) -> f64 {
    let h: f64 = probabilities
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum();
    h.max(0.0)
}

/// Schmidt spectrum of a normalized two-branch state.
///
/// The mirror branches are orthonormalized as e1 = |β1⟩ and
/// e2 = (|β2⟩ − s|β1⟩)/√(1 − |s|²), giving the coefficient matrix
/// [[c1, 0], [c2 s, c2 √(1 − |s|²)]]. Its singular values follow from the
/// trace (= 1) and |det|.
pub fn entanglement_analytic(h: &HybridTwoTermState) -> Result<EntanglementReport> {
    let n = h.norm_squared();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(n));
    }
    let s = h.overlap();
    let det = if h.vib_labels.0 == h.vib_labels.1 {
        0.0
    } else {
        // 1 − |s|² = 1 − e^{−|β1−β2|²}, kept accurate as the branches merge
        let dist = (h.beta1.value() - h.beta2.value()).norm_sqr();
        let r = (-(-dist).exp_m1()).sqrt();
        h.c1.norm() * h.c2.norm() * r
    };
    let x = 4.0 * det * det;
    let root = (1.0 - x).max(0.0).sqrt();
    let small = 2.0 * det * det / (1.0 + root);
    let large = 1.0 - small;
    Ok(EntanglementReport {
        schmidt_coefficients: [large.sqrt(), small.sqrt()],
        entropy_bits: entropy_bits([large, small]),
        negativity: det,
        overlap_s: Some(s),
        method: Method::Analytic,
    })
}

/// Schmidt spectrum across the cut vibration | mirror, from the singular
/// values of the amplitude matrix.
pub fn entanglement_numeric(state: &StateVector) -> Result<EntanglementReport> {
    for label in [ModeLabel::IonVibration, ModeLabel::Mirror] {
        state.layout().position(label)?;
    }
    if (state.stored_norm() - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(state.stored_norm()));
    }
    let (_, m) = state.bipartite_matrix(&[ModeLabel::IonVibration])?;
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv.resize(sv.len().max(2), 0.0);
    let negativity = {
        // (Σσ)² − 1 over 2, the pure-state negativity for any Schmidt rank
        let sum: f64 = sv.iter().sum();
        ((sum * sum - 1.0) / 2.0).max(0.0)
    };
    Ok(EntanglementReport {
        schmidt_coefficients: [sv[0], sv[1]],
        entropy_bits: entropy_bits(sv.iter().map(|x| x * x)),
        negativity,
        overlap_s: None,
        method: Method::Numeric,
    })
}

/// Negativity from the spectrum of the partial transpose of |ψ⟩⟨ψ| with
/// respect to the modes in `first`. Dense in the full dimension; meant for
/// small states.
pub fn partial_transpose_negativity(state: &StateVector, first: &[ModeLabel]) -> Result<f64> {
    let psi = state.normalized()?;
    let (layout, m) = psi.bipartite_matrix(first)?;
    let (da, db) = (layout.total_dim(), m.ncols());
    let n = da * db;
    // ρ^{T_A}[(i,j),(k,l)] = ρ[(k,j),(i,l)] = ψ(k,j) ψ*(i,l)
    let pt = DMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (r / db, r % db);
        let (k, l) = (c / db, c % db);
        m[(k, j)] * m[(i, l)].conj()
    });
    let eig = pt.symmetric_eigenvalues();
    Ok(eig.iter().filter(|&&x| x < 0.0).map(|x| -x).sum())
}

/// Truncated displacement exp(αB† − α*B) on `dim` levels.
///
/// The exponential is taken in a larger space so that the images of all
/// `dim` retained levels fit, then cropped.
pub fn displacement_operator(alpha: CoherentAmplitude, dim: usize) -> Result<Operator> {
    check_truncation(alpha.magnitude(), dim)?;
    let big = dim.max(required_dim(((dim - 1) as f64).sqrt() + alpha.magnitude()));
    let b = annihilation(big)?;
    let a = alpha.value();
    let gen = &b.adjoint() * a - &b * a.conj();
    let full = expm(&gen)?;
    let layout = ModeLayout::single(ModeLabel::Mirror, dim)?;
    Operator::new(layout, full.view((0, 0), (dim, dim)).into_owned())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ConsistentWithEntangled,
    ConsistentWithProduct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    /// Probability of finding the vibration in |1⟩.
    pub projection_probability: f64,
    /// Mirror vacuum probability after the displacement; `None` when the
    /// projection cannot succeed.
    pub post_displacement_vacuum_probability: Option<f64>,
    pub verdict: Verdict,
}

/// Projects the vibration onto |1⟩, displaces the mirror by `alpha0` and
/// reports the mirror's vacuum probability.
pub fn witness(state: &StateVector, alpha0: CoherentAmplitude) -> Result<WitnessReport> {
    let total = state.stored_norm();
    if !(total > 0.0) {
        return Err(Error::ZeroNorm);
    }
    if state.layout().num_modes() != 2 {
        return Err(Error::LayoutMismatch(format!(
            "witness expects (vibration, mirror), got {}",
            state.layout()
        )));
    }
    let mirror = state.extract(ModeLabel::IonVibration, 1)?;
    let projection_probability = mirror.stored_norm() / total;
    if !(mirror.stored_norm() > 0.0) {
        return Ok(WitnessReport {
            projection_probability: 0.0,
            post_displacement_vacuum_probability: None,
            verdict: Verdict::ConsistentWithProduct,
        });
    }
    let mirror = mirror.normalized()?;
    let dim = mirror.layout().dim_of(ModeLabel::Mirror)?;
    let d = displacement_operator(alpha0, dim)?;
    let displaced = mirror.apply_local(ModeLabel::Mirror, d.matrix())?;
    let vacuum = (displaced.amplitudes()[0].norm_sqr()).min(1.0);
    Ok(WitnessReport {
        projection_probability,
        post_displacement_vacuum_probability: Some(vacuum),
        verdict: if vacuum >= WITNESS_THRESHOLD {
            Verdict::ConsistentWithEntangled
        } else {
            Verdict::ConsistentWithProduct
        },
    })
}

/// Normalized (|0⟩ + |1⟩)(|−α₀+2κ⟩ + |−α₀⟩) over (vibration, mirror), the
/// equal-weight product comparator for the witness.
pub fn product_comparator(
    alpha0: CoherentAmplitude,
    kappa: f64,
    vib_dim: usize,
    mirror_dim: usize,
) -> Result<StateVector> {
    let a = alpha0.value();
    let b1 = CoherentAmplitude(-a + 2.0 * kappa);
    let b2 = CoherentAmplitude(-a);
    for beta in [b1, b2] {
        check_truncation(beta.magnitude(), mirror_dim)?;
    }
    let m1 = coherent_amplitudes(b1, mirror_dim);
    let m2 = coherent_amplitudes(b2, mirror_dim);
    let layout = hybrid_layout(vib_dim, mirror_dim)?;
    let mut amps = nalgebra::DVector::zeros(layout.total_dim());
    for v in 0..2 {
        for n in 0..mirror_dim {
            amps[v * mirror_dim + n] = m1[n] + m2[n];
        }
    }
    StateVector::new(layout, amps)?.normalized()
}
