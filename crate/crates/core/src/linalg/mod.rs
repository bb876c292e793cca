//! Small dense kernels shared by the operator and cocycle code.

pub mod mat2;
pub mod tridiag;

pub use mat2::{Mat2C, C2};
