//! Interval-union algebra, thickness, and the middle-α classification.

mod interval;
mod region;
mod sumset;
mod thickness;

pub use interval::{minkowski_sum, minkowski_sum_with_cap, Interval, IntervalUnion, DEFAULT_PAIR_CAP, MERGE_RTOL};
pub use region::{gap_lemma_predicate, middle_alpha_classify, RegionTag, RegionVerdict};
pub use sumset::{sum_cover_analysis, CoverSource, SumCoverAnalysis, SumCoverRow, VerdictHint, DECAY_RATIO_THRESHOLD};
pub use thickness::thickness;
