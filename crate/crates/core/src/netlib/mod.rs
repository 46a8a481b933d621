//! Group neural networks `F(x) = sum_i alpha_i psi(map_i(x))`: activations,
//! evaluation, dictionaries of map-activation columns, least-squares fitting
//! and greedy term selection.
//!
//! Activations read a point through a fixed real embedding: `x_j / m_j` on a
//! finite group, the angle `2 pi x_j / R` on a torus grid and the raw
//! coordinate on `Z^d`.

mod activation;
mod dictionary;
mod fit;
mod greedy;
mod network;

pub use activation::{Activation, ActivationKind};
pub use dictionary::{build_dictionary, sample_distinct, Dictionary};
pub use fit::{fit_coefficients, fit_coefficients_with_tol, lp_error, sup_error, Exponent, FitReport};
pub use greedy::{greedy_select, GreedyConfig, GreedyResult, MapMode};
pub use network::{GroupNetwork, Term};
pub(crate) use network::Evaluator;
