//! Sensitivity of the median score to the size of the interest universe.
//!
//! For each subset size and trial, a uniform sample of interests is drawn
//! without replacement, all three tables are restricted to it (ratios are
//! renormalised over the sample) and the full scoring pipeline is re-run.

use std::collections::BTreeMap;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::score_triple;
use crate::table::{align_tables, check_k, AudienceTable};

pub const DEFAULT_STABILITY_FLOOR: usize = 500;
pub const STABILITY_HEADER: [&str; 3] = ["size", "trial", "median_score"];

/// Generator used for subset draws. Each `(seed, size, trial)` seeds
/// `ChaCha20Rng::seed_from_u64(seed)` on stream `size << 32 | trial`, and the
/// subset is `rand::seq::index::sample(rng, universe, size)` over interest ids
/// in ascending order.
pub const SUBSET_RNG: &str =
    "chacha20;seed_from_u64(seed);stream=size<<32|trial;rand::seq::index::sample";

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityConfig {
    pub k_percent: f64,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub stability_floor: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySeries {
    pub sizes: Vec<usize>,
    pub trials_per_size: usize,
    pub seed: u64,
    /// One entry per trial; `None` where the subset had no distinctive
    /// interests (or a zero-audience population) and could not be scored.
    pub scores: BTreeMap<usize, Vec<Option<f64>>>,
    pub stability_floor: usize,
    /// Mean of every scored sample with `size >= stability_floor`.
    pub baseline_mean: Option<f64>,
    pub max_rel_change: Option<f64>,
    pub avg_rel_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySummary {
    pub max_rel_change: Option<f64>,
    pub avg_rel_change: Option<f64>,
    pub stability_floor: usize,
    pub baseline_mean: Option<f64>,
    pub seed: u64,
    pub trials: usize,
    pub missing_samples: usize,
    pub rng: String,
}

impl StabilitySeries {
    pub fn summary(&self) -> StabilitySummary {
        StabilitySummary {
            max_rel_change: self.max_rel_change,
            avg_rel_change: self.avg_rel_change,
            stability_floor: self.stability_floor,
            baseline_mean: self.baseline_mean,
            seed: self.seed,
            trials: self.trials_per_size,
            missing_samples: self
                .scores
                .values()
                .flatten()
                .filter(|s| s.is_none())
                .count(),
            rng: SUBSET_RNG.to_owned(),
        }
    }

    /// `(size, trial, score)` in size then trial order.
    pub fn rows(&self) -> impl Iterator<Item = (usize, usize, Option<f64>)> + '_ {
        self.scores
            .iter()
            .flat_map(|(size, trials)| trials.iter().enumerate().map(move |(t, s)| (*size, t, *s)))
    }
}

pub fn subset_stability(
    dest: &AudienceTable,
    target: &AudienceTable,
    home: &AudienceTable,
    k_percent: f64,
    sizes: &[usize],
    trials: usize,
    seed: u64,
) -> Result<StabilitySeries> {
    let config = StabilityConfig {
        k_percent,
        sizes: sizes.to_vec(),
        trials,
        seed,
        stability_floor: DEFAULT_STABILITY_FLOOR,
    };
    subset_stability_with(dest, target, home, &config)
}

pub fn subset_stability_with(
    dest: &AudienceTable,
    target: &AudienceTable,
    home: &AudienceTable,
    config: &StabilityConfig,
) -> Result<StabilitySeries> {
    check_k(config.k_percent)?;
    if config.trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    if config.sizes.is_empty() {
        return Err(Error::InvalidSizes("no subset sizes given".into()));
    }
    if config.sizes.contains(&0) {
        return Err(Error::InvalidSizes("subset sizes must be positive".into()));
    }
    if config.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSizes(
            "subset sizes must be strictly increasing".into(),
        ));
    }
    let aligned = align_tables(dest, target, home)?;
    let universe: Vec<&str> = aligned.dest.ids().collect();
    let largest = *config.sizes.last().expect("non-empty");
    if largest > universe.len() {
        return Err(Error::SizeExceedsUniverse {
            size: largest,
            universe: universe.len(),
        });
    }

    let jobs: Vec<(usize, usize)> = config
        .sizes
        .iter()
        .flat_map(|&size| (0..config.trials).map(move |t| (size, t)))
        .collect();
    let outcomes: Vec<Result<Option<f64>>> = jobs
        .par_iter()
        .map(|&(size, trial)| {
            let ids = sample_ids(&universe, size, config.seed, trial);
            let run = || -> Result<f64> {
                let d = aligned.dest.restrict(ids.iter().copied())?;
                let t = aligned.target.restrict(ids.iter().copied())?;
                let h = aligned.home.restrict(ids.iter().copied())?;
                Ok(score_triple(&d, &t, &h, config.k_percent)?.median_score)
            };
            match run() {
                Ok(m) => Ok(Some(m)),
                Err(Error::NoDistinctiveInterests | Error::ZeroTotalAudience(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut scores: BTreeMap<usize, Vec<Option<f64>>> = BTreeMap::new();
    for (&(size, _), outcome) in jobs.iter().zip(outcomes) {
        scores.entry(size).or_default().push(outcome?);
    }

    let stable: Vec<f64> = scores
        .range(config.stability_floor..)
        .flat_map(|(_, v)| v.iter().flatten().copied())
        .collect();
    let (baseline_mean, max_rel_change, avg_rel_change) = relative_change(&stable);

    Ok(StabilitySeries {
        sizes: config.sizes.clone(),
        trials_per_size: config.trials,
        seed: config.seed,
        scores,
        stability_floor: config.stability_floor,
        baseline_mean,
        max_rel_change,
        avg_rel_change,
    })
}

/// Ids of the sampled interests, in ascending order.
fn sample_ids<'a>(universe: &[&'a str], size: usize, seed: u64, trial: usize) -> Vec<&'a str> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((size as u64) << 32) | trial as u64);
    let mut picked = rand::seq::index::sample(&mut rng, universe.len(), size).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| universe[i]).collect()
}

/// `(mean, max |x - mean| / mean, avg |x - mean| / mean)`.
fn relative_change(samples: &[f64]) -> (Option<f64>, Option<f64>, Option<f64>) {
    if samples.is_empty() {
        return (None, None, None);
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    if mean == 0.0 {
        return (Some(mean), None, None);
    }
    let rel: Vec<f64> = samples.iter().map(|s| (s - mean).abs() / mean).collect();
    let max = rel.iter().copied().fold(0.0, f64::max);
    let avg = rel.iter().sum::<f64>() / rel.len() as f64;
    (Some(mean), Some(max), Some(avg))
}

/// Parses `start:stop:step` (inclusive stop) or a single size.
pub fn parse_size_spec(spec: &str) -> Result<Vec<usize>> {
    let bad = |why: &str| Error::InvalidSizes(format!("`{spec}`: {why}"));
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| bad("expected non-negative integers"))
    };
    let sizes: Vec<usize> = match parts.as_slice() {
        [single] => vec![num(single)?],
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step == 0 {
                return Err(bad("step must be positive"));
            }
            if start > stop {
                return Err(bad("start exceeds stop"));
            }
            (start..=stop).step_by(step).collect()
        }
        _ => return Err(bad("expected start:stop:step")),
    };
    if sizes.contains(&0) {
        return Err(bad("sizes must be positive"));
    }
    Ok(sizes)
}

/// Plot-ready `size,trial,median_score`; unscored samples leave the score empty.
pub fn write_stability_csv<W: Write>(series: &StabilitySeries, writer: W) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(STABILITY_HEADER)?;
    for (size, trial, score) in series.rows() {
        let score = score.map(|s| s.to_string()).unwrap_or_default();
        wtr.write_record([size.to_string(), trial.to_string(), score])?;
    }
    wtr.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn size_spec() {
        let sizes = parse_size_spec("100:2900:100").unwrap();
        assert_eq!(sizes.len(), 29);
        assert_eq!(sizes.first(), Some(&100));
        assert_eq!(sizes.last(), Some(&2900));
        assert_eq!(parse_size_spec("5").unwrap(), vec![5]);
        assert_eq!(parse_size_spec("1:10:4").unwrap(), vec![1, 5, 9]);
        for bad in ["", "a:b:c", "1:2", "10:1:1", "1:10:0", "0:10:5", "-1:5:1"] {
            assert!(
                matches!(parse_size_spec(bad), Err(Error::InvalidSizes(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn full_universe_matches_direct_score() {
        let (d, t, h) = fixtures::worked_example();
        let direct = score_triple(&d, &t, &h, 50.0).unwrap().median_score;
        let series = subset_stability(&d, &t, &h, 50.0, &[5], 1, 3).unwrap();
        assert_eq!(series.scores[&5], vec![Some(direct)]);
    }

    #[test]
    fn deterministic_for_seed() {
        let (d, t, h) = fixtures::worked_example();
        let a = subset_stability(&d, &t, &h, 50.0, &[2, 3, 4], 4, 11).unwrap();
        let b = subset_stability(&d, &t, &h, 50.0, &[2, 3, 4], 4, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.scores.values().all(|v| v.len() == 4));
    }

    #[test]
    fn small_subsets_record_misses() {
        // Any single-interest subset has identical ratios (1.0) in every
        // population, so nothing is distinctive.
        let (d, t, h) = fixtures::worked_example();
        let series = subset_stability(&d, &t, &h, 50.0, &[1], 3, 0).unwrap();
        assert_eq!(series.scores[&1], vec![None, None, None]);
        assert_eq!(series.summary().missing_samples, 3);
    }

    #[test]
    fn rejects_bad_sizes() {
        let (d, t, h) = fixtures::worked_example();
        assert!(matches!(
            subset_stability(&d, &t, &h, 50.0, &[6], 1, 0),
            Err(Error::SizeExceedsUniverse {
                size: 6,
                universe: 5
            })
        ));
        assert!(matches!(
            subset_stability(&d, &t, &h, 50.0, &[3, 2], 1, 0),
            Err(Error::InvalidSizes(_))
        ));
        assert!(matches!(
            subset_stability(&d, &t, &h, 50.0, &[3], 0, 0),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn relative_change_statistics() {
        let (mean, max, avg) = relative_change(&[0.9, 1.0, 1.1]);
        assert!((mean.unwrap() - 1.0).abs() < 1e-12);
        assert!((max.unwrap() - 0.1).abs() < 1e-12);
        assert!((avg.unwrap() - 0.2 / 3.0).abs() < 1e-12);
        assert_eq!(relative_change(&[]), (None, None, None));
    }

    #[test]
    fn csv_output() {
        let (d, t, h) = fixtures::worked_example();
        let series = subset_stability(&d, &t, &h, 50.0, &[1, 5], 1, 0).unwrap();
        let mut out = Vec::new();
        write_stability_csv(&series, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "size,trial,median_score");
        assert_eq!(lines[1], "1,0,");
        assert!(lines[2].starts_with("5,0,0.25"));
    }
}
