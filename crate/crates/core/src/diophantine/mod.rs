//! Continued fractions, small divisors and resonances of phases.

mod cf;
mod ext;
mod resonance;

pub use cf::{beta_estimate, dc_check, BetaEstimate, CfExpansion, DcReport, FrequencySpec, DEFAULT_PRECISION};
pub use ext::ExtReal;
pub use resonance::{
    phase_ext, phase_gap, resonances, small_divisor_profile, DivisorRow, Resonance, ResonanceSequence,
    SmallDivisorProfile,
};
