//! Small hand-built datasets used by tests, benches and the CLI examples.
//!
//! The same data ships as CSV under `crates/core/fixtures/`.

use crate::population::{ExpatStatus, PopulationSpec};
use crate::table::{AudienceTable, InterestId};

pub const BREWERY: &str = "brewery";
pub const BERLIN: &str = "berlin";
pub const TECHNOLOGY: &str = "technology";
pub const MUSIC: &str = "music";
pub const GOD_IN_ISLAM: &str = "god_in_islam";

fn build(population: PopulationSpec, rows: &[(&str, &str, u64)]) -> AudienceTable {
    AudienceTable::from_counts(
        population,
        rows.iter()
            .map(|(id, name, a)| (InterestId::new(*id, *name), *a)),
    )
    .expect("fixture tables are valid")
}

pub fn germany_non_expats() -> PopulationSpec {
    PopulationSpec::new("germany_non_expats", "de").with_expat_status(ExpatStatus::NonExpats)
}

pub fn arab_league_non_expats() -> PopulationSpec {
    PopulationSpec::new("arab_league_non_expats", "arab_league")
        .with_expat_status(ExpatStatus::NonExpats)
}

pub fn arabic_speaking_expats_in_germany() -> PopulationSpec {
    PopulationSpec::new("arabic_speaking_expats_de", "de")
        .with_language("ar")
        .with_expat_status(ExpatStatus::ExpatsAll)
}

/// Five interests with destination, target and home audiences:
/// non-expats in Germany, Arabic-speaking expats in Germany and non-expats in
/// Arab League countries. Returned as `(dest, target, home)`.
pub fn worked_example() -> (AudienceTable, AudienceTable, AudienceTable) {
    let dest = build(
        germany_non_expats(),
        &[
            (BREWERY, "Brewery", 790_000),
            (BERLIN, "Berlin", 6_200_000),
            (TECHNOLOGY, "Technology", 1_200_000),
            (MUSIC, "Music", 1_600_000),
            (GOD_IN_ISLAM, "God in Islam", 14_000),
        ],
    );
    let home = build(
        arab_league_non_expats(),
        &[
            (BREWERY, "Brewery", 260_000),
            (BERLIN, "Berlin", 1_500_000),
            (TECHNOLOGY, "Technology", 12_000_000),
            (MUSIC, "Music", 6_400_000),
            (GOD_IN_ISLAM, "God in Islam", 21_000_000),
        ],
    );
    let target = build(
        arabic_speaking_expats_in_germany(),
        &[
            (BREWERY, "Brewery", 14_000),
            (BERLIN, "Berlin", 320_000),
            (TECHNOLOGY, "Technology", 120_000),
            (MUSIC, "Music", 690_000),
            (GOD_IN_ISLAM, "God in Islam", 170_000),
        ],
    );
    (dest, target, home)
}

/// Two disjoint target subgroups whose median scores both fall below the
/// median of their union.
///
/// Three interests are equally distinctive, so all are scored at
/// `k_percent = 100`. Each subgroup over-indexes on a different one of them,
/// scoring `(1.8, 0.2, 0.2)` and `(0.2, 1.8, 0.2)` with median 0.2. Pooled
/// counts score `(1.0, 1.0, 0.2)` with median 1.0.
#[derive(Debug, Clone)]
pub struct SimpsonFixture {
    pub dest: AudienceTable,
    pub home: AudienceTable,
    pub group_a: AudienceTable,
    pub group_b: AudienceTable,
    pub pooled: AudienceTable,
    pub k_percent: f64,
}

pub fn simpson() -> SimpsonFixture {
    let ids = [
        ("s1", "Distinctive one"),
        ("s2", "Distinctive two"),
        ("s3", "Distinctive three"),
        ("f1", "Shared one"),
        ("f2", "Shared two"),
    ];
    let table = |spec: PopulationSpec, counts: [u64; 5]| {
        let rows: Vec<(&str, &str, u64)> = ids
            .iter()
            .zip(counts)
            .map(|((id, n), c)| (*id, *n, c))
            .collect();
        build(spec, &rows)
    };
    let group_a = [900, 100, 100, 450, 450];
    let group_b = [100, 900, 100, 450, 450];
    let pooled: [u64; 5] = std::array::from_fn(|i| group_a[i] + group_b[i]);
    SimpsonFixture {
        dest: table(
            PopulationSpec::new("dest", "de"),
            [1000, 1000, 1000, 500, 500],
        ),
        home: table(
            PopulationSpec::new("home", "xx"),
            [100, 100, 100, 5000, 5000],
        ),
        group_a: table(
            PopulationSpec::new("group_a", "de").with_expat_status(ExpatStatus::ExpatsAll),
            group_a,
        ),
        group_b: table(
            PopulationSpec::new("group_b", "de").with_expat_status(ExpatStatus::ExpatsAll),
            group_b,
        ),
        pooled: table(
            PopulationSpec::new("pooled", "de").with_expat_status(ExpatStatus::ExpatsAll),
            pooled,
        ),
        k_percent: 100.0,
    }
}
