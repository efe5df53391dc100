//! Franck-Condon vibronic spectra from Gaussian boson operations in a
//! truncated Fock space, with an emulator for the trapped-ion realization.
//!
//! The pipeline is: [`doktorov`] turns molecular parameters into an ordered
//! list of [`fock::GaussianOp`]s, [`fock`] applies them to the vacuum,
//! [`spectrum`] assembles the stick spectrum, and [`ion`] plans laser pulses,
//! emulates finite-shot projection measurements and corrects their errors.

pub mod doktorov;
pub mod error;
pub mod expm;
pub mod fock;
pub mod input;
pub mod ion;
pub mod spectrum;

pub use error::{Error, ErrorKind, Result};
