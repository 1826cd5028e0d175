//! Non-Markovian invariant-manifold reduction of stochastic evolution
//! equations with quadratic nonlinearity and multiplicative noise, and the
//! numerical machinery to verify its closed-form statistics, residual
//! bounds, and error-scaling laws on two case studies: a 2-mode pump-gate
//! system and a Galerkin-truncated stochastic Rayleigh-Benard model.

pub mod ab;
pub mod error;
pub mod mterm;
pub mod paths;
pub mod rbc;
pub mod reduced;
pub mod stats;

pub use error::{CoreError, Result};
