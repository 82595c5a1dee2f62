//! Per-phase wall-clock records for both pipelines.
//!
//! All durations are milliseconds from a monotonic clock; format with
//! [`fmt_ms`] to report at 1 microsecond precision.

use std::time::Instant;

/// Phase durations of the sequential pipeline (milliseconds).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SeqPhaseTimings {
    pub label_longest: f64,
    pub label_frontier: f64,
    pub label_seeds: f64,
    pub traversal: f64,
    pub repair: f64,
}

impl SeqPhaseTimings {
    pub fn total(&self) -> f64 {
        self.label_longest + self.label_frontier + self.label_seeds + self.traversal + self.repair
    }
}

/// Per-kernel durations of the parallel pipeline (milliseconds).
///
/// `copy_to_workers` and `copy_back` time the buffer copies into and out of
/// the pipeline's working arrays; they stand in for the transfer cost a
/// device offload would pay and are reported separately from kernel time.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ParPhaseTimings {
    pub copy_to_workers: f64,
    pub label_longest: f64,
    pub label_frontier: f64,
    pub label_seeds: f64,
    pub label_extra: f64,
    pub change_attributes: f64,
    pub search_frontier: f64,
    pub overwrite_seeds: f64,
    pub scan_compact: f64,
    pub copy_back: f64,
}

impl ParPhaseTimings {
    /// Kernel-only total, copies excluded.
    pub fn kernel_total(&self) -> f64 {
        self.label_longest
            + self.label_frontier
            + self.label_seeds
            + self.label_extra
            + self.change_attributes
            + self.search_frontier
            + self.overwrite_seeds
            + self.scan_compact
    }

    pub fn total_with_copies(&self) -> f64 {
        self.kernel_total() + self.copy_to_workers + self.copy_back
    }
}

/// Milliseconds elapsed since `start`.
pub(crate) fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_nanos() as f64 / 1e6
}

/// Renders milliseconds with 1 microsecond precision.
pub fn fmt_ms(ms: f64) -> String {
    format!("{ms:.3}")
}
