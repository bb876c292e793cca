//! Numerical tools for one-dimensional quasi-periodic Schrödinger operators
//! `(Hu)_n = u_{n+1} + u_{n-1} + λ v(x + nα) u_n`.

pub mod cocycles;
pub mod diophantine;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod spectral;

pub use error::{Error, Result};
