//! A desk-scale laboratory for variational quantum machine-learning models:
//! an exact state-vector simulator, layered circuit builders, barren-plateau
//! diagnostics, gradient-based training, quantum kernels, and compilation of
//! kernel models into 1-D brickwork circuits.

pub mod ansatz;
pub mod diagnostics;
pub mod experiments;
pub mod error;
pub mod hardfn;
pub mod kernel;
pub mod lcu;
pub mod rng;
pub mod statevec;
pub mod train;

pub use error::{Error, Result};
