//! Numerical laboratory for Cauchy singular integral operators with
//! semi-almost periodic matrix symbols acting on variable Lebesgue
//! spaces: Luxemburg norms by root-finding on the modular, principal
//! value quadrature for the singular operator, almost-periodic symbol
//! algebra with simultaneous-recurrence searches, translation-limit
//! experiments, and finite-section invertibility diagnostics.

pub mod config;
pub mod error;
pub mod exponents;
pub mod functions;
pub mod limits;
pub mod modular;
pub mod quad;
pub mod sio;
pub mod symbols;

pub use error::{Error, Result};
