//! Exact points, the subtractive maps and the regions they act on.

mod maps;
mod params;
mod point;
mod region;
mod shuffle;

pub use maps::{
    lift_from_b, project_free_to_simplex, project_to_b, project_to_simplex, s_map_step, step,
    subtractive_step, unordered_step3,
};
pub(crate) use maps::step_into;
pub use params::MapParams;
pub use point::{FreePoint, OrderedPoint};
pub(crate) use point::sum;
pub use region::{classify, in_a, in_d, in_gamma, in_theta, RegionFlags};
pub(crate) use region::{in_a_raw, in_d_raw, in_theta_raw};
pub use shuffle::{binomial, Shuffle};
