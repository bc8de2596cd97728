use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::layout::{ModeLabel, ModeLayout};
use crate::error::{Error, Result};

/// Relative tolerance for classifying a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hermiticity {
    Hermitian,
    /// Carries a non-zero anti-Hermitian part, e.g. a no-click decay term.
    AntiHermitianPartPresent,
    Unknown,
}

/// Dense operator over a composite layout.
///
/// Generators are stored in angular-frequency units (ħ = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    layout: ModeLayout,
    matrix: DMatrix<Complex64>,
    hermiticity: Hermiticity,
}

/// Truncated annihilation matrix with ⟨n−1|a|n⟩ = √n.
pub fn annihilation(dim: usize) -> Result<DMatrix<Complex64>> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim });
    }
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

/// Truncated number operator diag(0, 1, …, dim−1).
pub fn number(dim: usize) -> Result<DMatrix<Complex64>> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim });
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(i as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// Annihilation operator on a single anonymous mode. The creation operator is
/// its [`Operator::dagger`].
pub fn ladder(dim: usize) -> Result<Operator> {
    let layout = ModeLayout::single(ModeLabel::Aux(0), dim)?;
    Ok(Operator::new(layout, annihilation(dim)?)?.with_hermiticity(Hermiticity::Unknown))
}

impl Operator {
    pub fn new(layout: ModeLayout, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = layout.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::LayoutMismatch(format!(
                "{}x{} matrix for layout {layout} of dimension {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            layout,
            matrix,
            hermiticity: Hermiticity::Unknown,
        })
    }

    pub fn zeros(layout: &ModeLayout) -> Self {
        let n = layout.total_dim();
        Self {
            layout: layout.clone(),
            matrix: DMatrix::zeros(n, n),
            hermiticity: Hermiticity::Hermitian,
        }
    }

    pub fn identity(layout: &ModeLayout) -> Self {
        let n = layout.total_dim();
        Self {
            layout: layout.clone(),
            matrix: DMatrix::identity(n, n),
            hermiticity: Hermiticity::Hermitian,
        }
    }

    /// Lifts a single-mode matrix acting on `label` into the full layout.
    pub fn embed(layout: &ModeLayout, label: ModeLabel, local: &DMatrix<Complex64>) -> Result<Self> {
        let k = layout.position(label)?;
        let d = layout.dims()[k];
        if local.nrows() != d || local.ncols() != d {
            return Err(Error::LayoutMismatch(format!(
                "{}x{} matrix on mode {label} of dimension {d}",
                local.nrows(),
                local.ncols()
            )));
        }
        let before: usize = layout.dims()[..k].iter().product();
        let after = layout.stride(k);
        let m = DMatrix::<Complex64>::identity(before, before)
            .kronecker(local)
            .kronecker(&DMatrix::identity(after, after));
        Operator::new(layout.clone(), m)
    }

    /// Annihilation operator of mode `label` within `layout`.
    pub fn annihilation_on(layout: &ModeLayout, label: ModeLabel) -> Result<Self> {
        Self::embed(layout, label, &annihilation(layout.dim_of(label)?)?)
    }

    /// Number operator of mode `label` within `layout`.
    pub fn number_on(layout: &ModeLayout, label: ModeLabel) -> Result<Self> {
        Ok(Self::embed(layout, label, &number(layout.dim_of(label)?)?)?.with_hermiticity(Hermiticity::Hermitian))
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn hermiticity(&self) -> Hermiticity {
        self.hermiticity
    }

    pub fn with_hermiticity(mut self, flag: Hermiticity) -> Self {
        self.hermiticity = flag;
        self
    }

    /// Sets the flag from a numerical check of M − M†.
    pub fn classified(self) -> Self {
        let flag = if self.is_hermitian() {
            Hermiticity::Hermitian
        } else {
            Hermiticity::AntiHermitianPartPresent
        };
        self.with_hermiticity(flag)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max|M − M†| ≤ 1e−12 · max|M|.
    pub fn is_hermitian(&self) -> bool {
        let scale = self.max_abs();
        let dev = (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        dev <= HERMITIAN_TOL * scale
    }

    pub fn dagger(&self) -> Self {
        Self {
            layout: self.layout.clone(),
            matrix: self.matrix.adjoint(),
            hermiticity: self.hermiticity,
        }
    }

    /// (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        let m = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        Self {
            layout: self.layout.clone(),
            matrix: m,
            hermiticity: Hermiticity::Hermitian,
        }
    }

    /// (M − M†)/2.
    pub fn anti_hermitian_part(&self) -> Self {
        let m = (&self.matrix - self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        Self {
            layout: self.layout.clone(),
            matrix: m,
            hermiticity: Hermiticity::Unknown,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let hermiticity = if factor.im == 0.0 {
            self.hermiticity
        } else {
            Hermiticity::Unknown
        };
        Self {
            layout: self.layout.clone(),
            matrix: &self.matrix * factor,
            hermiticity,
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// [self, other] = self·other − other·self.
    pub fn commutator(&self, other: &Operator) -> Self {
        &(self * other) - &(other * self)
    }

    /// Kronecker product; the layout of `other` is appended.
    pub fn tensor(&self, other: &Operator) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        let hermiticity = match (self.hermiticity, other.hermiticity) {
            (Hermiticity::Hermitian, Hermiticity::Hermitian) => Hermiticity::Hermitian,
            _ => Hermiticity::Unknown,
        };
        Ok(Self {
            layout,
            matrix: self.matrix.kronecker(&other.matrix),
            hermiticity,
        })
    }

    fn assert_same_layout(&self, other: &Operator) {
        assert_eq!(
            self.layout, other.layout,
            "operator layouts differ: {} vs {}",
            self.layout, other.layout
        );
    }
}

fn combine(a: Hermiticity, b: Hermiticity) -> Hermiticity {
    use Hermiticity::*;
    match (a, b) {
        (Hermitian, Hermitian) => Hermitian,
        (Hermitian, AntiHermitianPartPresent) | (AntiHermitianPartPresent, Hermitian) => AntiHermitianPartPresent,
        _ => Unknown,
    }
}

impl Add for &Operator {
    type Output = Operator;

    /// Panics if the layouts differ.
    fn add(self, rhs: &Operator) -> Operator {
        self.assert_same_layout(rhs);
        Operator {
            layout: self.layout.clone(),
            matrix: &self.matrix + &rhs.matrix,
            hermiticity: combine(self.hermiticity, rhs.hermiticity),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        self.assert_same_layout(rhs);
        Operator {
            layout: self.layout.clone(),
            matrix: &self.matrix - &rhs.matrix,
            hermiticity: combine(self.hermiticity, rhs.hermiticity),
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        self.assert_same_layout(rhs);
        Operator {
            layout: self.layout.clone(),
            matrix: &self.matrix * &rhs.matrix,
            hermiticity: Hermiticity::Unknown,
        }
    }
}
