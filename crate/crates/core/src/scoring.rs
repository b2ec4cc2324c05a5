//! Interest ratios, distinctive-interest selection and assimilation scores.
//!
//! The pipeline for a (dest, target, home) triple:
//!
//! 1. align the three tables on their common interests;
//! 2. normalise each table into interest ratios, `audience(i) / total`, which
//!    removes per-population differences in overall platform activity;
//! 3. keep the interests whose destination ratio strictly exceeds the home
//!    ratio, rank them by `ir_dest / ir_home` and retain the top `k` percent;
//! 4. score each retained interest as `ir_target / ir_dest`;
//! 5. summarise with the median.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::PopulationSpec;
use crate::table::{align_tables, check_k, AudienceTable, TripleSpec};

/// Normalised share of each interest within one population.
#[derive(Debug, Clone, PartialEq)]
pub struct InterestRatios {
    pub population: PopulationSpec,
    pub ratios: BTreeMap<String, f64>,
}

impl InterestRatios {
    pub fn get(&self, id: &str) -> Option<f64> {
        self.ratios.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    fn same_universe(&self, other: &InterestRatios) -> bool {
        self.ratios.len() == other.ratios.len() && self.ratios.keys().eq(other.ratios.keys())
    }
}

pub fn interest_ratios(table: &AudienceTable) -> Result<InterestRatios> {
    if table.total() == 0 {
        return Err(Error::ZeroTotalAudience(table.population().label.clone()));
    }
    // Counts and totals are bounded by 2^53, so both conversions are exact and
    // each ratio is the correctly rounded quotient. Scaling a table by an
    // integer therefore yields bitwise identical ratios.
    let total = table.total() as f64;
    let ratios = table
        .iter()
        .map(|(id, _, a)| (id.to_owned(), a as f64 / total))
        .collect();
    Ok(InterestRatios {
        population: table.population().clone(),
        ratios,
    })
}

/// Interests more prevalent in the destination than at home, and the
/// top-k percent of them by distinctiveness.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// `ir_dest / ir_home` for every interest with `ir_dest > ir_home`.
    /// Infinite when the home ratio is zero.
    pub distinctly_dest: BTreeMap<String, f64>,
    /// Sorted by distinctiveness descending, then id ascending.
    pub top_k: Vec<String>,
    pub k_percent: f64,
    pub universe_size: usize,
}

/// `max(1, ceil(n * k / 100))`, never more than `n`.
pub fn top_k_count(n: usize, k_percent: f64) -> usize {
    let raw = (n as f64 * k_percent / 100.0).ceil() as usize;
    raw.max(1).min(n)
}

pub(crate) fn rank_desc(a: (&str, f64), b: (&str, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0))
}

pub fn select_distinct(
    dest_ir: &InterestRatios,
    home_ir: &InterestRatios,
    k_percent: f64,
) -> Result<SelectionResult> {
    check_k(k_percent)?;
    if !dest_ir.same_universe(home_ir) {
        return Err(Error::UniverseMismatch);
    }
    let distinctly_dest: BTreeMap<String, f64> = dest_ir
        .ratios
        .iter()
        .zip(home_ir.ratios.values())
        .filter(|((_, d), h)| **d > **h)
        .map(|((id, d), h)| {
            let ratio = if *h == 0.0 { f64::INFINITY } else { d / h };
            (id.clone(), ratio)
        })
        .collect();
    if distinctly_dest.is_empty() {
        return Err(Error::NoDistinctiveInterests);
    }

    let mut ranked: Vec<(&str, f64)> = distinctly_dest
        .iter()
        .map(|(id, r)| (id.as_str(), *r))
        .collect();
    ranked.sort_by(|a, b| rank_desc(*a, *b));
    let keep = top_k_count(ranked.len(), k_percent);
    let top_k = ranked[..keep]
        .iter()
        .map(|(id, _)| (*id).to_owned())
        .collect();

    Ok(SelectionResult {
        distinctly_dest,
        top_k,
        k_percent,
        universe_size: dest_ir.len(),
    })
}

/// `ir_target(i) / ir_dest(i)` for each selected interest.
///
/// `target_ir` must be normalised over the full aligned universe, not just
/// the selected interests.
pub fn per_interest_scores(
    target_ir: &InterestRatios,
    dest_ir: &InterestRatios,
    selection: &SelectionResult,
) -> Result<BTreeMap<String, f64>> {
    if !target_ir.same_universe(dest_ir) {
        return Err(Error::UniverseMismatch);
    }
    if selection.top_k.is_empty() {
        return Err(Error::EmptyScores);
    }
    selection
        .top_k
        .iter()
        .map(|id| {
            let (t, d) = match (target_ir.get(id), dest_ir.get(id)) {
                (Some(t), Some(d)) => (t, d),
                _ => return Err(Error::UniverseMismatch),
            };
            debug_assert!(d > 0.0, "selected interest {id} has zero destination ratio");
            Ok((id.clone(), t / d))
        })
        .collect()
}

/// Median; even-length input takes the mean of the two middle values.
pub fn aggregate_median<I>(scores: I) -> Result<f64>
where
    I: IntoIterator<Item = f64>,
{
    let mut values: Vec<f64> = scores.into_iter().collect();
    if values.is_empty() {
        return Err(Error::EmptyScores);
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Ok(if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScoreOptions {
    /// Clip each per-interest score to this value before taking the median.
    /// Off by default: raw scores are aggregated.
    pub cap: Option<f64>,
}

/// Everything produced by one scoring run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub triple: TripleSpec,
    pub per_interest: BTreeMap<String, f64>,
    pub median_score: f64,
    pub selection: SelectionResult,
    /// Names of the selected interests, taken from the destination table.
    pub names: BTreeMap<String, String>,
    pub options: ScoreOptions,
}

pub fn score_triple(
    dest: &AudienceTable,
    target: &AudienceTable,
    home: &AudienceTable,
    k_percent: f64,
) -> Result<ScoreReport> {
    score_triple_with(dest, target, home, k_percent, ScoreOptions::default())
}

pub fn score_triple_with(
    dest: &AudienceTable,
    target: &AudienceTable,
    home: &AudienceTable,
    k_percent: f64,
    options: ScoreOptions,
) -> Result<ScoreReport> {
    let triple = TripleSpec::new(
        dest.population().clone(),
        target.population().clone(),
        home.population().clone(),
        k_percent,
    )?;
    let aligned = align_tables(dest, target, home)?;
    let dest_ir = interest_ratios(&aligned.dest)?;
    let target_ir = interest_ratios(&aligned.target)?;
    let home_ir = interest_ratios(&aligned.home)?;

    let selection = select_distinct(&dest_ir, &home_ir, k_percent)?;
    let mut per_interest = per_interest_scores(&target_ir, &dest_ir, &selection)?;
    if let Some(cap) = options.cap {
        for score in per_interest.values_mut() {
            *score = score.min(cap);
        }
    }
    let median_score = aggregate_median(per_interest.values().copied())?;
    let names = selection
        .top_k
        .iter()
        .map(|id| {
            (
                id.clone(),
                aligned.dest.name(id).unwrap_or_default().to_owned(),
            )
        })
        .collect();

    Ok(ScoreReport {
        triple,
        per_interest,
        median_score,
        selection,
        names,
        options,
    })
}

/// The three populations of a scored triple, as written in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriplePopulations {
    pub dest: PopulationSpec,
    pub target: PopulationSpec,
    pub home: PopulationSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectedInterest {
    pub interest_id: String,
    pub name: String,
    /// `null` in JSON when the home ratio is zero.
    pub distinctiveness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterestScore {
    pub interest_id: String,
    pub score: f64,
}

/// Serialized form of a [`ScoreReport`]. Field names are part of the output
/// contract; unknown fields are rejected on read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreReportDocument {
    pub triple: TriplePopulations,
    pub k_percent: f64,
    pub universe_size: usize,
    pub distinct_count: usize,
    pub selected: Vec<SelectedInterest>,
    pub scores: Vec<InterestScore>,
    pub median_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score_cap: Option<f64>,
}

impl ScoreReport {
    pub fn document(&self) -> ScoreReportDocument {
        let sel = &self.selection;
        ScoreReportDocument {
            triple: TriplePopulations {
                dest: self.triple.dest.clone(),
                target: self.triple.target.clone(),
                home: self.triple.home.clone(),
            },
            k_percent: sel.k_percent,
            universe_size: sel.universe_size,
            distinct_count: sel.distinctly_dest.len(),
            selected: sel
                .top_k
                .iter()
                .map(|id| SelectedInterest {
                    interest_id: id.clone(),
                    name: self.names.get(id).cloned().unwrap_or_default(),
                    distinctiveness: sel
                        .distinctly_dest
                        .get(id)
                        .copied()
                        .filter(|r| r.is_finite()),
                })
                .collect(),
            scores: sel
                .top_k
                .iter()
                .map(|id| InterestScore {
                    interest_id: id.clone(),
                    score: self.per_interest[id],
                })
                .collect(),
            median_score: self.median_score,
            score_cap: self.options.cap,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.document()).expect("report serialization cannot fail")
    }
}
