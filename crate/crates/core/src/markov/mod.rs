//! Exact Markov partitions for the piecewise-linear banded family.
//!
//! (Under construction: arrangement and partition assembly land next.)

mod arrangement;
mod exact_map;
mod surd;
mod trace;

pub use exact_map::ExactTwistSpec;
pub use trace::{trace_manifold, ManifoldFlavor, ManifoldPolyline, TraceOptions};
