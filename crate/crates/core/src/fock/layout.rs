use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest composite dimension any state may have.
pub const MAX_TOTAL_DIM: usize = 1 << 16;

/// Semantic tag of a mode in a composite system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeLabel {
    Field1,
    IonVibration,
    IonElectronic,
    Field2,
    Mirror,
    /// Anonymous mode, used for generic test systems.
    Aux(u8),
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeLabel::Field1 => f.write_str("field-1"),
            ModeLabel::IonVibration => f.write_str("ion-vibration"),
            ModeLabel::IonElectronic => f.write_str("ion-electronic"),
            ModeLabel::Field2 => f.write_str("field-2"),
            ModeLabel::Mirror => f.write_str("mirror"),
            ModeLabel::Aux(k) => write!(f, "aux-{k}"),
        }
    }
}

/// Ordered list of truncated modes. The first mode is the most significant
/// digit of the composite basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeLayout {
    dims: Vec<usize>,
    labels: Vec<ModeLabel>,
}

impl ModeLayout {
    pub fn new(modes: &[(ModeLabel, usize)]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidArgument("layout needs at least one mode".into()));
        }
        let mut total: usize = 1;
        for (i, &(label, dim)) in modes.iter().enumerate() {
            if dim < 2 {
                return Err(Error::InvalidDimension { dim });
            }
            if label == ModeLabel::IonElectronic && dim != 2 {
                return Err(Error::ElectronicDimension { dim });
            }
            if modes[..i].iter().any(|(l, _)| *l == label) {
                return Err(Error::LayoutMismatch(format!("duplicate mode {label}")));
            }
            total = total
                .checked_mul(dim)
                .filter(|t| *t <= MAX_TOTAL_DIM)
                .ok_or(Error::MemoryCap {
                    total: total.saturating_mul(dim),
                    cap: MAX_TOTAL_DIM,
                })?;
        }
        Ok(Self {
            labels: modes.iter().map(|m| m.0).collect(),
            dims: modes.iter().map(|m| m.1).collect(),
        })
    }

    /// Single-mode layout.
    pub fn single(label: ModeLabel, dim: usize) -> Result<Self> {
        Self::new(&[(label, dim)])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[ModeLabel] {
        &self.labels
    }

    pub fn num_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn position(&self, label: ModeLabel) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| *l == label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    pub fn dim_of(&self, label: ModeLabel) -> Result<usize> {
        Ok(self.dims[self.position(label)?])
    }

    /// Stride of mode `k` in the flattened index.
    pub fn stride(&self, k: usize) -> usize {
        self.dims[k + 1..].iter().product()
    }

    /// Flattened index of a basis state given per-mode occupations.
    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.dims.len() {
            return Err(Error::LayoutMismatch(format!(
                "expected {} occupations, got {}",
                self.dims.len(),
                occupations.len()
            )));
        }
        let mut idx = 0;
        for (&n, &d) in occupations.iter().zip(&self.dims) {
            if n >= d {
                return Err(Error::InvalidArgument(format!("occupation {n} outside dimension {d}")));
            }
            idx = idx * d + n;
        }
        Ok(idx)
    }

    /// Per-mode occupations of a flattened index.
    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            occ[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        occ
    }

    /// Layout of `self` followed by `other`; labels must not collide.
    pub fn concat(&self, other: &ModeLayout) -> Result<ModeLayout> {
        let modes: Vec<_> = self
            .labels
            .iter()
            .copied()
            .zip(self.dims.iter().copied())
            .chain(other.labels.iter().copied().zip(other.dims.iter().copied()))
            .collect();
        ModeLayout::new(&modes)
    }

    /// Sub-layout containing the listed modes, in layout order.
    pub fn subset(&self, keep: &[ModeLabel]) -> Result<ModeLayout> {
        let mut positions = keep.iter().map(|l| self.position(*l)).collect::<Result<Vec<_>>>()?;
        positions.sort_unstable();
        positions.dedup();
        let modes: Vec<_> = positions.iter().map(|&k| (self.labels[k], self.dims[k])).collect();
        ModeLayout::new(&modes)
    }
}

impl fmt::Display for ModeLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .labels
            .iter()
            .zip(&self.dims)
            .map(|(l, d)| format!("{l}:{d}"))
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let layout =
            ModeLayout::new(&[(ModeLabel::Aux(0), 3), (ModeLabel::Aux(1), 2), (ModeLabel::Aux(2), 4)]).unwrap();
        assert_eq!(layout.total_dim(), 24);
        for i in 0..24 {
            assert_eq!(layout.index_of(&layout.occupations(i)).unwrap(), i);
        }
        assert_eq!(layout.index_of(&[1, 0, 2]).unwrap(), 10);
        assert_eq!(layout.stride(0), 8);
    }

    #[test]
    fn rejects_bad_modes() {
        assert_eq!(
            ModeLayout::single(ModeLabel::Mirror, 1),
            Err(Error::InvalidDimension { dim: 1 })
        );
        assert_eq!(
            ModeLayout::single(ModeLabel::IonElectronic, 3),
            Err(Error::ElectronicDimension { dim: 3 })
        );
        assert!(matches!(
            ModeLayout::new(&[(ModeLabel::Mirror, 2), (ModeLabel::Mirror, 2)]),
            Err(Error::LayoutMismatch(_))
        ));
        assert!(matches!(
            ModeLayout::new(&[(ModeLabel::Field1, 300), (ModeLabel::Mirror, 300)]),
            Err(Error::MemoryCap { .. })
        ));
    }
}
