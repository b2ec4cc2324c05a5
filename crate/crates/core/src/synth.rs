//! Synthetic (dest, home, target) triples with a known answer.
//!
//! Destination and home interest shares are drawn from a symmetric Dirichlet.
//! The target's shares are the mixture `alpha * p_dest + (1 - alpha) * p_home`,
//! so for every selected interest the exact score is
//! `alpha + (1 - alpha) * p_home / p_dest`. [`oracle_median`] evaluates that
//! identity directly from the shares, sharing no code with the scoring module.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingestion::write_audience_csv;
use crate::population::{ExpatStatus, PopulationSpec};
use crate::table::{AudienceTable, InterestId, MAX_AUDIENCE};

const MAX_DRAW_ATTEMPTS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Dest,
    Home,
    #[default]
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_interests: usize,
    /// Weight of the destination distribution in the target mixture.
    pub alpha: f64,
    pub dest_total: u64,
    pub home_total: u64,
    pub target_total: u64,
    /// Multiplier applied to the counts of `activity_population`.
    pub activity_scale: f64,
    pub activity_population: Role,
    pub dirichlet_concentration: f64,
    /// Top-k percentage used by the oracle's selection.
    pub k_percent: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_interests: 2907,
            alpha: 0.5,
            dest_total: 10_000_000,
            home_total: 40_000_000,
            target_total: 1_000_000,
            activity_scale: 1.0,
            activity_population: Role::Target,
            dirichlet_concentration: 1.0,
            k_percent: 50.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidConfig(m));
        if self.n_interests < 2 {
            return invalid(format!(
                "n_interests must be at least 2, got {}",
                self.n_interests
            ));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return invalid(format!("alpha must be in [0, 1], got {}", self.alpha));
        }
        for (name, total) in [
            ("dest_total", self.dest_total),
            ("home_total", self.home_total),
            ("target_total", self.target_total),
        ] {
            if (total as u128) < self.n_interests as u128 || total > MAX_AUDIENCE {
                return invalid(format!(
                    "{name} must be in [n_interests, 2^53], got {total}"
                ));
            }
        }
        if !(self.activity_scale > 0.0 && self.activity_scale.is_finite()) {
            return invalid(format!(
                "activity_scale must be positive, got {}",
                self.activity_scale
            ));
        }
        if !(self.dirichlet_concentration > 0.0 && self.dirichlet_concentration.is_finite()) {
            return invalid(format!(
                "dirichlet_concentration must be positive, got {}",
                self.dirichlet_concentration
            ));
        }
        if !(self.k_percent > 0.0 && self.k_percent <= 100.0) {
            return Err(Error::InvalidK(self.k_percent));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthTriple {
    pub dest: AudienceTable,
    pub home: AudienceTable,
    pub target: AudienceTable,
    pub oracle_median: f64,
    /// Exact (pre-rounding) shares, indexed like the interest ids.
    pub p_dest: Vec<f64>,
    pub p_home: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub alpha: f64,
    pub oracle_median: f64,
    pub seed: u64,
    pub k_percent: f64,
    pub n_interests: usize,
}

pub fn interest_id(index: usize, n_interests: usize) -> String {
    let width = (n_interests.saturating_sub(1)).to_string().len().max(4);
    format!("i{index:0width$}")
}

pub fn generate_triple(config: &SynthConfig) -> Result<SynthTriple> {
    config.validate()?;
    let (p_dest, p_home) = draw_shares(config)?;
    let n = config.n_interests;
    let alpha = config.alpha;
    let p_target: Vec<f64> = p_dest
        .iter()
        .zip(&p_home)
        .map(|(d, h)| alpha * d + (1.0 - alpha) * h)
        .collect();

    let mut dest_counts = apportion(config.dest_total, &p_dest);
    let mut home_counts = apportion(config.home_total, &p_home);
    let mut target_counts = apportion(config.target_total, &p_target);
    let scaled = match config.activity_population {
        Role::Dest => &mut dest_counts,
        Role::Home => &mut home_counts,
        Role::Target => &mut target_counts,
    };
    for c in scaled.iter_mut() {
        *c = (*c as f64 * config.activity_scale).round() as u64;
    }

    let ids: Vec<InterestId> = (0..n)
        .map(|i| InterestId::new(interest_id(i, n), format!("Synthetic interest {i}")))
        .collect();
    let table = |spec: PopulationSpec, counts: Vec<u64>| {
        AudienceTable::from_counts(spec, ids.iter().cloned().zip(counts))
    };

    let oracle = oracle_median(&p_dest, &p_home, alpha, config.k_percent)?;
    Ok(SynthTriple {
        dest: table(
            PopulationSpec::new("synthetic_dest", "dest").with_expat_status(ExpatStatus::NonExpats),
            dest_counts,
        )?,
        home: table(
            PopulationSpec::new("synthetic_home", "home").with_expat_status(ExpatStatus::NonExpats),
            home_counts,
        )?,
        target: table(
            PopulationSpec::new("synthetic_target", "dest")
                .with_expat_status(ExpatStatus::ExpatsAll),
            target_counts,
        )?,
        oracle_median: oracle,
        p_dest,
        p_home,
    })
}

/// Two normalised symmetric-Dirichlet draws, retried on a fresh stream when
/// they coincide or collapse to zero mass.
fn draw_shares(config: &SynthConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let gamma = Gamma::new(config.dirichlet_concentration, 1.0)
        .map_err(|e| Error::InvalidConfig(format!("dirichlet_concentration: {e}")))?;
    for attempt in 0..MAX_DRAW_ATTEMPTS {
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        rng.set_stream(u64::from(attempt));
        let mut draw = || -> Option<Vec<f64>> {
            let raw: Vec<f64> = (0..config.n_interests)
                .map(|_| gamma.sample(&mut rng))
                .collect();
            let sum: f64 = raw.iter().sum();
            (sum > 0.0 && sum.is_finite()).then(|| raw.into_iter().map(|g| g / sum).collect())
        };
        let (Some(dest), Some(home)) = (draw(), draw()) else {
            continue;
        };
        if dest.iter().zip(&home).any(|(d, h)| d > h) {
            return Ok((dest, home));
        }
    }
    Err(Error::DegenerateDraw(MAX_DRAW_ATTEMPTS))
}

/// `round(total * share)` per interest; the rounding residual goes to the
/// largest share so the counts sum to `total` exactly.
fn apportion(total: u64, shares: &[f64]) -> Vec<u64> {
    let mut counts: Vec<u64> = shares
        .iter()
        .map(|s| (total as f64 * s).round() as u64)
        .collect();
    let mut residual = total as i128 - counts.iter().map(|&c| i128::from(c)).sum::<i128>();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| shares[b].total_cmp(&shares[a]).then(a.cmp(&b)));
    if residual > 0 {
        counts[order[0]] += residual as u64;
        return counts;
    }
    // A deficit larger than the top count spills to the next-largest shares.
    for &i in &order {
        if residual == 0 {
            break;
        }
        let take = (-residual).min(i128::from(counts[i]));
        counts[i] -= take as u64;
        residual += take;
    }
    counts
}

/// Exact median score implied by the mixture identity.
///
/// Selects indices with `p_dest > p_home`, ranks them by `p_dest / p_home`
/// descending (index ascending on ties), keeps `max(1, ceil(n * k / 100))`,
/// and returns the median of `alpha + (1 - alpha) * p_home / p_dest`.
pub fn oracle_median(p_dest: &[f64], p_home: &[f64], alpha: f64, k_percent: f64) -> Result<f64> {
    if p_dest.len() != p_home.len() {
        return Err(Error::LengthMismatch(p_dest.len(), p_home.len()));
    }
    if !(k_percent > 0.0 && k_percent <= 100.0) {
        return Err(Error::InvalidK(k_percent));
    }
    let mut candidates: Vec<(usize, f64)> = Vec::new();
    for i in 0..p_dest.len() {
        if p_dest[i] > p_home[i] {
            let ratio = if p_home[i] == 0.0 {
                f64::INFINITY
            } else {
                p_dest[i] / p_home[i]
            };
            candidates.push((i, ratio));
        }
    }
    if candidates.is_empty() {
        return Err(Error::NoDistinctiveInterests);
    }
    candidates.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let wanted = (candidates.len() as f64 * k_percent / 100.0).ceil() as usize;
    let keep = wanted.clamp(1, candidates.len());

    let mut scores: Vec<f64> = candidates[..keep]
        .iter()
        .map(|&(i, _)| alpha + (1.0 - alpha) * (p_home[i] / p_dest[i]))
        .collect();
    scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = scores.len();
    Ok(if m % 2 == 1 {
        scores[m / 2]
    } else {
        0.5 * (scores[m / 2 - 1] + scores[m / 2])
    })
}

/// Writes `dest.csv`, `home.csv`, `target.csv` and `ground_truth.json`.
pub fn write_synth(
    triple: &SynthTriple,
    config: &SynthConfig,
    out_dir: impl AsRef<Path>,
) -> Result<GroundTruth> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_audience_csv(&triple.dest, out_dir.join("dest.csv"))?;
    write_audience_csv(&triple.home, out_dir.join("home.csv"))?;
    write_audience_csv(&triple.target, out_dir.join("target.csv"))?;
    let truth = GroundTruth {
        alpha: config.alpha,
        oracle_median: triple.oracle_median,
        seed: config.seed,
        k_percent: config.k_percent,
        n_interests: config.n_interests,
    };
    let path = out_dir.join("ground_truth.json");
    let json = serde_json::to_string_pretty(&truth).expect("ground truth serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(truth)
}
