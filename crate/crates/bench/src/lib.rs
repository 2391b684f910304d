//! Fixtures shared by the benchmarks.

use walklab::walk::{Retention, WalkOptions};
use walklab::{Group, SparseMeasure, WalkTrace};

/// `P^(n)` computed by explicit convolution.
pub fn measure_at<G: Group>(group: &G, n: usize) -> SparseMeasure<G::Elem> {
    let options = WalkOptions::new(group, n).explicit().retain(Retention::UpTo(n));
    let trace = WalkTrace::run(group.clone(), &options, Vec::new(), |_, _| Ok(())).expect("fixture walk fits the default budget");
    trace.measure(n).expect("retained").clone()
}
