//! Loewner chains driven by piecewise-constant functions.

pub mod adaptive;
pub mod driver;
pub mod maps;
pub mod probe;
pub mod trace;

pub use adaptive::{simulate, Flow, SimConfig, SimOutcome, TraceObserver};
pub use driver::{sample_driver, DrivingPath};
pub use probe::{forward_probe, hcap_estimate, HullProbe};
pub use trace::{dist_to_trace, point_segment_distance, trace_from_driver, Trace};
