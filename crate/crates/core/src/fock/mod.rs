//! Dense linear algebra over truncated composite Fock spaces.

mod coherent;
mod expm;
mod layout;
mod operator;
mod state;

pub(crate) use coherent::check_truncation;
pub use coherent::{
    coherent_amplitudes, coherent_overlap, coherent_state, poisson_tail, required_dim, CoherentAmplitude,
    TAIL_TOLERANCE,
};
pub use expm::{expm, expm_apply};
pub use layout::{ModeLabel, ModeLayout, MAX_TOTAL_DIM};
pub use operator::{annihilation, ladder, number, Hermiticity, Operator, HERMITIAN_TOL};
pub use state::{DensityMatrix, StateVector};

/// Field truncation: occupations 0, 1, 2.
pub const FIELD_DIM: usize = 3;
