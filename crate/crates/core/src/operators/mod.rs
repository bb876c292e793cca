//! Finite truncations of the operator and its dual, Green functions,
//! regularity, determinants and decay profiles of dual eigenvectors.

mod block;
mod determinant;
mod localization;
mod potential;
mod regular;
mod uniformity;

pub use block::{
    dual_cosines, dual_tridiagonal, green, schrodinger_diagonal, schrodinger_tridiagonal, truncate, BlockKind, GreenFunction, MatrixBlock, OperatorConfig, Window,
    SINGULAR_CONDITION,
};
pub use determinant::{det_pn, membership_a, LogDet};
pub use localization::{block_eigen, localization_profile, median, EigenDecay, LocalizationReport, RegionFit, C0};
pub use potential::Potential;
pub use regular::{classify_regular, Regularity, RegularityReport, WindowVector};
pub use uniformity::{resonant_intervals, uniformity_xi};
