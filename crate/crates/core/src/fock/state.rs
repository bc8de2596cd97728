use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::layout::{ModeLabel, ModeLayout};
use super::operator::Operator;
use crate::error::{Error, Result};

const NORMALIZED_TOL: f64 = 1e-10;

/// Complex amplitudes over a composite Fock basis.
///
/// States are not normalized automatically: conditional (no-click) evolution
/// shrinks the norm on purpose, and `stored_norm` carries the squared norm of
/// the amplitudes as stored.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: ModeLayout,
    amplitudes: DVector<Complex64>,
    stored_norm: f64,
}

impl StateVector {
    pub fn new(layout: ModeLayout, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::LayoutMismatch(format!(
                "{} amplitudes for layout {layout} of dimension {}",
                amplitudes.len(),
                layout.total_dim()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NumericalOverflow("non-finite amplitude".into()));
        }
        let stored_norm = amplitudes.norm_squared();
        Ok(Self {
            layout,
            amplitudes,
            stored_norm,
        })
    }

    pub fn zeros(layout: ModeLayout) -> Self {
        let n = layout.total_dim();
        Self {
            layout,
            amplitudes: DVector::zeros(n),
            stored_norm: 0.0,
        }
    }

    /// Number state with the given per-mode occupations.
    pub fn basis(layout: ModeLayout, occupations: &[usize]) -> Result<Self> {
        let idx = layout.index_of(occupations)?;
        let mut amps = DVector::zeros(layout.total_dim());
        amps[idx] = Complex64::new(1.0, 0.0);
        Self::new(layout, amps)
    }

    /// Builds a state from (occupations, amplitude) pairs.
    pub fn from_terms(layout: ModeLayout, terms: &[(&[usize], Complex64)]) -> Result<Self> {
        let mut amps = DVector::zeros(layout.total_dim());
        for (occ, c) in terms {
            amps[layout.index_of(occ)?] += *c;
        }
        Self::new(layout, amps)
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<Complex64> {
        self.amplitudes
    }

    /// Squared norm of the stored amplitudes.
    pub fn stored_norm(&self) -> f64 {
        self.stored_norm
    }

    pub fn is_normalized(&self) -> bool {
        (self.stored_norm - 1.0).abs() <= NORMALIZED_TOL
    }

    pub fn amplitude(&self, occupations: &[usize]) -> Result<Complex64> {
        Ok(self.amplitudes[self.layout.index_of(occupations)?])
    }

    pub fn normalized(&self) -> Result<Self> {
        if !(self.stored_norm > 0.0) {
            return Err(Error::ZeroNorm);
        }
        let scale = 1.0 / self.stored_norm.sqrt();
        Self::new(self.layout.clone(), self.amplitudes.map(|z| z * scale))
    }

    pub fn scaled(&self, factor: Complex64) -> Result<Self> {
        Self::new(self.layout.clone(), self.amplitudes.map(|z| z * factor))
    }

    /// Sum of two states over the same layout.
    pub fn add(&self, other: &StateVector) -> Result<Self> {
        self.check_layout(other)?;
        Self::new(self.layout.clone(), &self.amplitudes + &other.amplitudes)
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_layout(other)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// |⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩); insensitive to norm and global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        let overlap = self.inner(other)?;
        let denom = self.stored_norm * other.stored_norm;
        if !(denom > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(overlap.norm_sqr() / denom)
    }

    /// Largest entrywise |difference|, with no phase or norm adjustment.
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        self.check_layout(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Kronecker product; the layout of `other` is appended.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        let amps = self.amplitudes.kronecker(&other.amplitudes);
        Self::new(layout, amps)
    }

    pub fn apply(&self, op: &Operator) -> Result<Self> {
        if op.layout() != &self.layout {
            return Err(Error::LayoutMismatch(format!(
                "operator on {} applied to state on {}",
                op.layout(),
                self.layout
            )));
        }
        Self::new(self.layout.clone(), op.matrix() * &self.amplitudes)
    }

    /// Applies a single-mode matrix to the mode `label`, identity elsewhere.
    pub fn apply_local(&self, label: ModeLabel, local: &DMatrix<Complex64>) -> Result<Self> {
        let k = self.layout.position(label)?;
        let d = self.layout.dims()[k];
        if local.nrows() != d || local.ncols() != d {
            return Err(Error::LayoutMismatch(format!(
                "{}x{} matrix on mode {label} of dimension {d}",
                local.nrows(),
                local.ncols()
            )));
        }
        let stride = self.layout.stride(k);
        let block = d * stride;
        let mut out = DVector::zeros(self.amplitudes.len());
        for base in (0..self.amplitudes.len()).step_by(block) {
            for inner in 0..stride {
                let off = base + inner;
                for row in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for col in 0..d {
                        let m = local[(row, col)];
                        if m.re != 0.0 || m.im != 0.0 {
                            acc += m * self.amplitudes[off + col * stride];
                        }
                    }
                    out[off + row * stride] = acc;
                }
            }
        }
        Self::new(self.layout.clone(), out)
    }

    /// Applies a two-mode matrix, indexed n1·d2 + n2, to the modes `first`
    /// and `second`; identity elsewhere.
    pub fn apply_pair(&self, first: ModeLabel, second: ModeLabel, local: &DMatrix<Complex64>) -> Result<Self> {
        let (k1, k2) = (self.layout.position(first)?, self.layout.position(second)?);
        if k1 == k2 {
            return Err(Error::InvalidArgument(format!("mode {first} given twice")));
        }
        let (d1, d2) = (self.layout.dims()[k1], self.layout.dims()[k2]);
        let d = d1 * d2;
        if local.nrows() != d || local.ncols() != d {
            return Err(Error::LayoutMismatch(format!(
                "{}x{} matrix on modes {first}, {second} of dimensions {d1}, {d2}",
                local.nrows(),
                local.ncols()
            )));
        }
        let (s1, s2) = (self.layout.stride(k1), self.layout.stride(k2));
        let offsets: Vec<usize> = (0..d).map(|j| (j / d2) * s1 + (j % d2) * s2).collect();
        let mut out = DVector::zeros(self.amplitudes.len());
        let mut gathered = vec![Complex64::new(0.0, 0.0); d];
        for base in 0..self.amplitudes.len() {
            let occ = self.layout.occupations(base);
            if occ[k1] != 0 || occ[k2] != 0 {
                continue;
            }
            for (g, off) in gathered.iter_mut().zip(&offsets) {
                *g = self.amplitudes[base + off];
            }
            if gathered.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                continue;
            }
            for (row, off) in offsets.iter().enumerate() {
                out[base + off] = (0..d).map(|col| local[(row, col)] * gathered[col]).sum();
            }
        }
        Self::new(self.layout.clone(), out)
    }

    /// Multiplies each component by `weight(n)` where `n` is the occupation of
    /// mode `label`.
    pub fn weight_mode<F>(&self, label: ModeLabel, weight: F) -> Result<Self>
    where
        F: Fn(usize) -> Complex64,
    {
        let k = self.layout.position(label)?;
        let d = self.layout.dims()[k];
        let stride = self.layout.stride(k);
        let factors: Vec<Complex64> = (0..d).map(&weight).collect();
        let amps = DVector::from_iterator(
            self.amplitudes.len(),
            self.amplitudes
                .iter()
                .enumerate()
                .map(|(i, z)| z * factors[(i / stride) % d]),
        );
        Self::new(self.layout.clone(), amps)
    }

    /// Amplitudes with mode `label` fixed at `level`, as a state over the
    /// remaining modes. Not renormalized.
    pub fn extract(&self, label: ModeLabel, level: usize) -> Result<Self> {
        let k = self.layout.position(label)?;
        let d = self.layout.dims()[k];
        if level >= d {
            return Err(Error::InvalidArgument(format!("level {level} outside dimension {d}")));
        }
        if self.layout.num_modes() == 1 {
            return Err(Error::InvalidArgument("cannot extract the only mode".into()));
        }
        let rest: Vec<ModeLabel> = self.layout.labels().iter().copied().filter(|l| *l != label).collect();
        let rest_layout = self.layout.subset(&rest)?;
        let amps = DVector::from_iterator(
            rest_layout.total_dim(),
            self.amplitudes
                .iter()
                .enumerate()
                .filter(|(i, _)| self.layout.occupations(*i)[k] == level)
                .map(|(_, z)| *z),
        );
        Self::new(rest_layout, amps)
    }

    /// Reshapes the amplitudes into a (kept × traced) matrix. Row index runs
    /// over the kept modes in layout order.
    pub fn bipartite_matrix(&self, keep: &[ModeLabel]) -> Result<(ModeLayout, DMatrix<Complex64>)> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument("keep set is empty".into()));
        }
        let kept_layout = self.layout.subset(keep)?;
        let kept_pos: Vec<usize> = kept_layout
            .labels()
            .iter()
            .map(|l| self.layout.position(*l))
            .collect::<Result<_>>()?;
        let traced_pos: Vec<usize> = (0..self.layout.num_modes()).filter(|k| !kept_pos.contains(k)).collect();
        let dims = self.layout.dims();
        let rows = kept_layout.total_dim();
        let cols: usize = traced_pos.iter().map(|&k| dims[k]).product();
        let mut m = DMatrix::zeros(rows, cols);
        for (i, z) in self.amplitudes.iter().enumerate() {
            let occ = self.layout.occupations(i);
            let r = kept_pos.iter().fold(0, |acc, &k| acc * dims[k] + occ[k]);
            let c = traced_pos.iter().fold(0, |acc, &k| acc * dims[k] + occ[k]);
            m[(r, c)] = *z;
        }
        Ok((kept_layout, m))
    }

    /// Reduced density matrix over `keep`. Its trace equals `stored_norm`.
    pub fn partial_trace(&self, keep: &[ModeLabel]) -> Result<DensityMatrix> {
        let (layout, m) = self.bipartite_matrix(keep)?;
        let matrix = &m * m.adjoint();
        Ok(DensityMatrix { layout, matrix })
    }

    /// Expectation value ⟨ψ|op|ψ⟩ of an operator (unnormalized).
    pub fn expectation(&self, op: &Operator) -> Result<Complex64> {
        let applied = self.apply(op)?;
        self.inner(&applied)
    }

    fn check_layout(&self, other: &StateVector) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch(format!("{} vs {}", self.layout, other.layout)));
        }
        Ok(())
    }
}

/// Reduced density matrix over a subset of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub layout: ModeLayout,
    pub matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// ⟨levels|ρ|levels⟩ for a basis state of the kept modes.
    pub fn population(&self, occupations: &[usize]) -> Result<f64> {
        let i = self.layout.index_of(occupations)?;
        Ok(self.matrix[(i, i)].re)
    }
}
