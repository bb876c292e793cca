//! Spectral measures, IDS, Weyl functions and the numerical checks built on them.

mod duality;
mod holder;
mod ids;
mod measure;
mod pipeline;
mod thouless;
mod weyl;

pub use duality::{duality_gap, gaps, hausdorff_sorted, DualityReport, GapRow, LAYER_WEIGHT_MAX, MAX_DUALITY_N};
pub use holder::{holder_from_measure, holder_scan, log_grid, HolderReport, HolderRow};
pub use ids::{ids, ids_curve, spectrum_energies, truncation_eigenvalues};
pub use measure::{
    measure_interval, mu_x, resolution_floor, truncation_measure, truncation_measure_sum, IntervalMass, MeasureApprox,
    MAX_HALF_WIDTH,
};
pub use pipeline::{pk_epsilon_pipeline, PipelineRow, PkPipeline};
pub use thouless::{thouless_residual, ThoulessResidual, COLLISION_DISTANCE};
pub use weyl::{free_m_plus, herglotz_m, herglotz_sample, psi, psi_grid, rotate, weyl_m_plus, HerglotzSample, WeylValue, MAX_DEPTH};
