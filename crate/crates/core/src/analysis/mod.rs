//! Robustness and validation analyses around the scoring pipeline.

pub mod regions;
pub mod stability;

pub use regions::{
    correlate_regions, join_regions, load_region_csv, normalize_by_area, pearson, pearson_r,
    read_region_csv, CorrelationSummary, RegionSeries, REGION_HEADER,
};
pub use stability::{
    parse_size_spec, subset_stability, subset_stability_with, write_stability_csv, StabilityConfig,
    StabilitySeries, StabilitySummary, DEFAULT_STABILITY_FLOOR, STABILITY_HEADER, SUBSET_RNG,
};
