//! Asymptotic density under permutations: lazy sets and permutations, horizon
//! estimates, oscillating and preserving constructions, reductions and series.

pub mod constructions;
pub mod density;
pub mod error;
pub mod partition;
pub mod perms;
pub mod preservation;
pub mod reductions;
pub mod series;
pub mod sets;
pub mod slalom;

pub use density::{
    checkpoint_schedule, closure_bound, density_profile, estimate_density, image_set, rat,
    relative_density_profile, strong_density_check, DensityEstimate, DensityProfile,
    EstimateConfig, StrongDensityVerdict, Verdict,
};
pub use error::{DensityError, Result};
pub use partition::{IntervalPartition, Regime};
pub use perms::LazyPermutation;
pub use sets::LazySet;
pub use slalom::Slalom;
