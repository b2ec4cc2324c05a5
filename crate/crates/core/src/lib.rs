//! Interest-based assimilation scores from audience-size estimates.
//!
//! Given audience counts per interest for a destination population, a target
//! (migrant) population living there, and the target's home population, the
//! [`scoring`] module selects interests typical of the destination and
//! measures how close the target comes to the destination on them.
//!
//! ```
//! use assim_core::{fixtures, score_triple};
//!
//! let (dest, target, home) = fixtures::worked_example();
//! let report = score_triple(&dest, &target, &home, 50.0).unwrap();
//! assert_eq!(report.selection.top_k, ["berlin", "brewery"]);
//! assert!((report.median_score - 0.259).abs() < 1e-3);
//! ```

pub mod analysis;
pub mod error;
pub mod fixtures;
pub mod ingestion;
pub mod population;
pub mod scoring;
pub mod synth;
pub mod table;

pub use error::{Error, Result};
pub use population::{Education, ExpatStatus, Gender, PopulationSpec};
pub use scoring::{
    aggregate_median, interest_ratios, per_interest_scores, score_triple, score_triple_with,
    select_distinct, top_k_count, InterestRatios, ScoreOptions, ScoreReport, ScoreReportDocument,
    SelectionResult,
};
pub use table::{
    align_tables, validate_table, AlignedTriple, AudienceTable, InterestId, RawAudienceTable,
    TripleSpec,
};
