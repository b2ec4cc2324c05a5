//! Audience tables and their alignment across the three populations.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::PopulationSpec;

/// Largest audience (and table total) representable exactly as an `f64`.
pub const MAX_AUDIENCE: u64 = 1 << 53;

/// A platform interest: opaque id plus a human-readable name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InterestId {
    pub id: String,
    pub name: String,
}

impl InterestId {
    pub fn new(id: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
        }
    }
}

/// Unchecked table contents, as read from a file or received from a caller.
#[derive(Debug, Clone, PartialEq)]
pub struct RawAudienceTable {
    pub population: PopulationSpec,
    pub entries: Vec<(InterestId, i64)>,
    /// Total stated by the source, if any. Checked against the entry sum.
    pub claimed_total: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Entry {
    name: String,
    audience: u64,
}

/// Audience count per interest for one population.
///
/// Only constructible through validation, so every instance satisfies:
/// non-empty, unique non-empty ids, counts and total at most [`MAX_AUDIENCE`],
/// and `total` equal to the exact entry sum. Iteration is in ascending id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AudienceTable {
    population: PopulationSpec,
    entries: BTreeMap<String, Entry>,
    total: u64,
}

/// Checks every table invariant and recomputes the total.
pub fn validate_table(raw: RawAudienceTable) -> Result<AudienceTable> {
    raw.population.validate()?;
    if raw.entries.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut entries = BTreeMap::new();
    for (interest, value) in raw.entries {
        if interest.id.is_empty() {
            return Err(Error::EmptyInterestId);
        }
        if value < 0 {
            return Err(Error::NegativeAudience {
                interest: interest.id,
                value,
            });
        }
        let audience = value as u64;
        if audience > MAX_AUDIENCE {
            return Err(Error::AudienceTooLarge {
                what: interest.id,
                value: audience.into(),
            });
        }
        if entries.contains_key(&interest.id) {
            return Err(Error::DuplicateInterest(interest.id));
        }
        entries.insert(
            interest.id,
            Entry {
                name: interest.name,
                audience,
            },
        );
    }
    let total = checked_total(&raw.population, &entries)?;
    if let Some(claimed) = raw.claimed_total {
        if claimed < 0 || claimed as u64 != total {
            return Err(Error::TotalMismatch {
                claimed,
                actual: total,
            });
        }
    }
    Ok(AudienceTable {
        population: raw.population,
        entries,
        total,
    })
}

fn checked_total(population: &PopulationSpec, entries: &BTreeMap<String, Entry>) -> Result<u64> {
    let sum: u128 = entries.values().map(|e| u128::from(e.audience)).sum();
    if sum > u128::from(MAX_AUDIENCE) {
        return Err(Error::AudienceTooLarge {
            what: format!("total of {}", population.label),
            value: sum,
        });
    }
    Ok(sum as u64)
}

impl AudienceTable {
    /// Builds a validated table from non-negative counts.
    pub fn from_counts<I>(population: PopulationSpec, counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (InterestId, u64)>,
    {
        let mut entries = Vec::new();
        for (interest, count) in counts {
            let value = i64::try_from(count).map_err(|_| Error::AudienceTooLarge {
                what: interest.id.clone(),
                value: count.into(),
            })?;
            entries.push((interest, value));
        }
        validate_table(RawAudienceTable {
            population,
            entries,
            claimed_total: None,
        })
    }

    pub fn population(&self) -> &PopulationSpec {
        &self.population
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn audience(&self, id: &str) -> Option<u64> {
        self.entries.get(id).map(|e| e.audience)
    }

    pub fn name(&self, id: &str) -> Option<&str> {
        self.entries.get(id).map(|e| e.name.as_str())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    /// `(id, name, audience)` in ascending id order.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&str, &str, u64)> + '_ {
        self.entries
            .iter()
            .map(|(id, e)| (id.as_str(), e.name.as_str(), e.audience))
    }

    pub fn ids(&self) -> impl ExactSizeIterator<Item = &str> + '_ {
        self.entries.keys().map(String::as_str)
    }

    pub fn to_raw(&self) -> RawAudienceTable {
        RawAudienceTable {
            population: self.population.clone(),
            entries: self
                .iter()
                .map(|(id, name, a)| (InterestId::new(id, name), a as i64))
                .collect(),
            claimed_total: Some(self.total as i64),
        }
    }

    /// Keeps only the listed interests (ids absent from the table are ignored)
    /// and recomputes the total.
    pub fn restrict<'a, I>(&self, ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let entries: BTreeMap<String, Entry> = ids
            .into_iter()
            .filter_map(|id| self.entries.get_key_value(id))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        if entries.is_empty() {
            return Err(Error::EmptyTable);
        }
        let total = checked_total(&self.population, &entries)?;
        Ok(Self {
            population: self.population.clone(),
            entries,
            total,
        })
    }

    /// Every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Result<Self> {
        let mut counts = Vec::with_capacity(self.len());
        for (id, name, a) in self.iter() {
            let scaled = a
                .checked_mul(factor)
                .ok_or_else(|| Error::AudienceTooLarge {
                    what: id.to_owned(),
                    value: u128::from(a) * u128::from(factor),
                })?;
            counts.push((InterestId::new(id, name), scaled));
        }
        Self::from_counts(self.population.clone(), counts)
    }

    pub fn with_population(mut self, population: PopulationSpec) -> Result<Self> {
        population.validate()?;
        self.population = population;
        Ok(self)
    }
}

/// The destination, target and home populations plus the top-k percentage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleSpec {
    pub dest: PopulationSpec,
    pub target: PopulationSpec,
    pub home: PopulationSpec,
    pub k_percent: f64,
}

impl TripleSpec {
    pub fn new(
        dest: PopulationSpec,
        target: PopulationSpec,
        home: PopulationSpec,
        k_percent: f64,
    ) -> Result<Self> {
        let spec = Self {
            dest,
            target,
            home,
            k_percent,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_k(self.k_percent)?;
        for p in [&self.dest, &self.target, &self.home] {
            p.validate()?;
        }
        let labels = [&self.dest.label, &self.target.label, &self.home.label];
        if labels[0] == labels[1] || labels[0] == labels[2] || labels[1] == labels[2] {
            return Err(Error::InvalidTriple(format!(
                "labels must be distinct, got {labels:?}"
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_k(k_percent: f64) -> Result<()> {
    if k_percent > 0.0 && k_percent <= 100.0 {
        Ok(())
    } else {
        Err(Error::InvalidK(k_percent))
    }
}

/// Three tables over one shared interest universe.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedTriple {
    pub dest: AudienceTable,
    pub target: AudienceTable,
    pub home: AudienceTable,
    /// Ids present in at least one table but not all three, ascending.
    pub dropped: Vec<String>,
}

impl AlignedTriple {
    pub fn universe_size(&self) -> usize {
        self.dest.len()
    }
}

/// Restricts all three tables to the interests they have in common.
///
/// Interests missing from any table are dropped (never zero-filled) and
/// reported in [`AlignedTriple::dropped`].
pub fn align_tables(
    dest: &AudienceTable,
    target: &AudienceTable,
    home: &AudienceTable,
) -> Result<AlignedTriple> {
    let common: BTreeSet<&str> = dest
        .ids()
        .filter(|id| target.contains(id) && home.contains(id))
        .collect();
    if common.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let dropped: Vec<String> = dest
        .ids()
        .chain(target.ids())
        .chain(home.ids())
        .filter(|id| !common.contains(id))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_owned)
        .collect();
    if !dropped.is_empty() {
        log::warn!(
            "dropping {} interest(s) not shared by all populations: {}",
            dropped.len(),
            dropped.join(",")
        );
    }
    Ok(AlignedTriple {
        dest: dest.restrict(common.iter().copied())?,
        target: target.restrict(common.iter().copied())?,
        home: home.restrict(common.iter().copied())?,
        dropped,
    })
}
