//! Simulation of a cavity-assisted protocol that entangles the vibrational
//! mode of a trapped ion with a moving mirror.
//!
//! Two cavities are prepared independently: an ion-cavity system driven on a
//! motional sideband and an optomechanical cavity whose mirror starts in a
//! coherent state. Their output fields meet on a 50:50 beam splitter, and a
//! single-photon click post-selects a hybrid state pairing ion Fock states
//! with mirror coherent states.
//!
//! Every closed-form state is paired with a brute-force evolution in a
//! truncated Fock basis so the two can be compared directly.
//!
//! Units: ħ = 1, so Hamiltonians are generators in rad/s.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod fock;
pub mod interferometer;
pub mod ion;
pub mod optomech;
pub mod scenario;
pub mod validation;

pub use error::{Error, Result};
