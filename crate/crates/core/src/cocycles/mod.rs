//! SL(2, ℂ) cocycles over x ↦ x + α: transfer products, growth rates,
//! conjugation, small-divisor solves, Bloch lifts and the P_(k) sums.

mod bloch;
mod cocycle;
mod divisor;
mod lyapunov;
mod model_x;
mod pk;

pub use bloch::{bloch_lift, BlochLift};
pub use cocycle::{conjugate, transfer, transfer_ladder, Cocycle, FourierSeries, Generator, MatrixMap, TransferProduct};
pub use divisor::{conjugated_corner_modes, divisor_solve, phase_offset, DivisorSolve};
pub use lyapunov::{
    lyapunov_finite, lyapunov_ladder, lyapunov_orbit, strip_growth_scan, LyapunovEstimate, StripGrowth, StripRow,
    Subadditivity,
};
pub use model_x::{growth_exponent, model_x, model_x_closed_form, ModelX};
pub use pk::{pk_sequence, PkChecks, PkEntry, PkSequence};
