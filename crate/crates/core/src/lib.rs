//! Group neural networks over finite and discretized locally compact Abelian
//! groups, with exact finite-scale checks of density and discrimination.

pub mod cli;
pub mod density;
pub mod error;
pub mod fourier;
pub mod groups;
pub mod homs;
pub mod linalg;
pub mod netlib;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;
