//! Exact n-step distributions of the lazy walk, a rational oracle, a Monte
//! Carlo speed sampler, and trace caching.

mod cache;
mod exact;
mod measure;
mod sample;
mod trace;

pub use cache::{
    cache_load, cache_store, format_hex_float, parse_hex_float, read_header, CacheHeader,
    CACHE_FORMAT, CACHE_VERSION,
};
pub use exact::{rational_convolve, rational_step_measure, rational_walk, to_f64, RationalMeasure};
pub use measure::{convolve, lazy_step_measure, prune, SparseMeasure};
pub use sample::{sample_speed, SpeedEstimate};
pub use trace::{walk_sequence, RadialView, Retention, StepView, WalkMode, WalkOptions, WalkTrace};
