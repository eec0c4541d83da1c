//! Deterministic numerics and Monte Carlo estimators: moment integrals,
//! path-counting bound series, tail-mass reports, event-probability
//! estimation with Wilson intervals, tail scans, and critical-intensity
//! bisection.

pub mod estimate;
pub mod gspec;
pub mod integrals;
pub mod quad;

pub use estimate::*;
pub use gspec::{expected_connection, AnalysisError, GSpec, TailDecay};
pub use integrals::*;
pub use quad::{integrate, integrate_half_line, integrate_tail, integrate_with_splits, QuadResult};
