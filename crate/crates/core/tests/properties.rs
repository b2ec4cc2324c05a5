use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use assim_core::analysis::{pearson, subset_stability};
use assim_core::ingestion::rate_limit::max_in_any_window;
use assim_core::ingestion::{read_audience_csv, write_audience};
use assim_core::synth::{generate_triple, oracle_median, SynthConfig};
use assim_core::table::validate_table;
use assim_core::{
    aggregate_median, interest_ratios, score_triple, select_distinct, top_k_count, AudienceTable,
    InterestId, PopulationSpec,
};
use proptest::prelude::*;

fn table_from(label: &str, counts: &[u64]) -> AudienceTable {
    let entries = counts.iter().enumerate().map(|(i, c)| {
        (
            InterestId::new(format!("i{i:03}"), format!("interest {i}")),
            *c,
        )
    });
    AudienceTable::from_counts(PopulationSpec::new(label, "de"), entries).unwrap()
}

fn counts(len: usize, max: u64) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0..=max, len)
        .prop_filter("needs a positive total", |c| c.iter().any(|v| *v > 0))
}

fn triple_counts() -> impl Strategy<Value = (Vec<u64>, Vec<u64>, Vec<u64>)> {
    (2usize..40).prop_flat_map(|n| {
        (
            counts(n, 1_000_000),
            counts(n, 1_000_000),
            counts(n, 1_000_000),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ratios_sum_to_one(c in prop::collection::vec(0u64..=1u64 << 40, 1..200)
        .prop_filter("positive total", |c| c.iter().any(|v| *v > 0)))
    {
        let ir = interest_ratios(&table_from("p", &c)).unwrap();
        let sum: f64 = ir.ratios.values().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12, "sum {}", sum);
        prop_assert!(ir.ratios.values().all(|r| (0.0..=1.0).contains(r)));
    }

    #[test]
    fn validation_is_idempotent(c in counts(20, 1_000_000), claim in any::<bool>()) {
        let table = table_from("p", &c);
        let mut raw = table.to_raw();
        if !claim {
            raw.claimed_total = None;
        }
        let again = validate_table(raw).unwrap();
        prop_assert_eq!(&again, &table);
        prop_assert_eq!(validate_table(again.to_raw()).unwrap(), table);
    }

    #[test]
    fn csv_round_trip(
        entries in prop::collection::btree_map("[a-z0-9_]{1,12}", ("[ -~]{0,20}", 0u64..=1u64 << 48), 1..30)
    ) {
        let table = AudienceTable::from_counts(
            PopulationSpec::new("p", "de"),
            entries.iter().map(|(id, (name, c))| (InterestId::new(id.clone(), name.clone()), *c)),
        ).unwrap();
        let mut buf = Vec::new();
        write_audience(&table, &mut buf).unwrap();
        let back = read_audience_csv(buf.as_slice(), "mem", table.population().clone()).unwrap();
        prop_assert_eq!(back, table);
    }

    #[test]
    fn selection_is_sound((d, _, h) in triple_counts(), k in 1.0f64..=100.0) {
        let dest_ir = interest_ratios(&table_from("d", &d)).unwrap();
        let home_ir = interest_ratios(&table_from("h", &h)).unwrap();
        let Ok(sel) = select_distinct(&dest_ir, &home_ir, k) else {
            // Only possible when no interest is more prevalent in the destination.
            prop_assert!(dest_ir.ratios.iter().all(|(id, r)| *r <= home_ir.ratios[id]));
            return Ok(());
        };
        for (id, r) in &dest_ir.ratios {
            prop_assert_eq!(sel.distinctly_dest.contains_key(id), *r > home_ir.ratios[id]);
        }
        prop_assert_eq!(sel.top_k.len(), top_k_count(sel.distinctly_dest.len(), k));
        let ranks: Vec<f64> = sel.top_k.iter().map(|id| sel.distinctly_dest[id]).collect();
        prop_assert!(ranks.windows(2).all(|w| w[0] >= w[1]));
        let floor = *ranks.last().unwrap();
        for (id, r) in &sel.distinctly_dest {
            if !sel.top_k.contains(id) {
                prop_assert!(*r <= floor);
            }
        }
    }

    #[test]
    fn scores_are_deterministic_and_order_free((d, t, h) in triple_counts()) {
        let (dest, target, home) = (table_from("d", &d), table_from("t", &t), table_from("h", &h));
        let a = score_triple(&dest, &target, &home, 50.0);
        let b = score_triple(&dest, &target, &home, 50.0);
        // Same entries fed in reverse order.
        let reversed = |tbl: &AudienceTable| {
            let rows: Vec<_> = tbl.iter().map(|(id, name, c)| (InterestId::new(id, name), c)).collect();
            AudienceTable::from_counts(tbl.population().clone(), rows.into_iter().rev()).unwrap()
        };
        let c = score_triple(&reversed(&dest), &reversed(&target), &reversed(&home), 50.0);
        match (a, b, c) {
            (Ok(a), Ok(b), Ok(c)) => {
                prop_assert_eq!(a.to_json(), b.to_json());
                prop_assert_eq!(a.to_json(), c.to_json());
            }
            (Err(a), Err(b), Err(c)) => {
                prop_assert_eq!(a.code(), b.code());
                prop_assert_eq!(a.code(), c.code());
            }
            _ => prop_assert!(false, "outcomes disagree"),
        }
    }

    #[test]
    fn integer_scaling_changes_nothing((d, t, h) in triple_counts(), factor in 1u64..=1_000_000, which in 0usize..3) {
        let mut tables = [table_from("d", &d), table_from("t", &t), table_from("h", &h)];
        let base = score_triple(&tables[0], &tables[1], &tables[2], 50.0).map(|r| r.to_json());
        tables[which] = tables[which].scaled(factor).unwrap();
        let scaled = score_triple(&tables[0], &tables[1], &tables[2], 50.0).map(|r| r.to_json());
        prop_assert_eq!(base.map_err(|e| e.code()), scaled.map_err(|e| e.code()));
    }

    /// Target built as an exact integer mixture of the destination and home
    /// distributions: its ratios are `m/q * ir_dest + (1 - m/q) * ir_home`.
    #[test]
    fn median_rises_with_mixture_weight(
        pairs in prop::collection::vec((1u64..10_000, 1u64..10_000), 2..20),
        q in 2u64..10,
    ) {
        let d: Vec<u64> = pairs.iter().map(|p| p.0).collect();
        let h: Vec<u64> = pairs.iter().map(|p| p.1).collect();
        let (dt, ht): (u64, u64) = (d.iter().sum(), h.iter().sum());
        let (dest, home) = (table_from("d", &d), table_from("h", &h));
        let mut previous = f64::NEG_INFINITY;
        for m in 0..=q {
            let t: Vec<u64> = d.iter().zip(&h).map(|(di, hi)| m * di * ht + (q - m) * hi * dt).collect();
            let report = match score_triple(&dest, &table_from("t", &t), &home, 50.0) {
                Ok(r) => r,
                Err(e) => {
                    prop_assert_eq!(e.code(), "NoDistinctiveInterests");
                    return Ok(());
                }
            };
            prop_assert!(report.median_score >= previous - 1e-12, "{} < {}", report.median_score, previous);
            prop_assert!(report.median_score <= 1.0 + 1e-12);
            if m == q {
                prop_assert!((report.median_score - 1.0).abs() <= 1e-12);
            }
            previous = report.median_score;
        }
    }

    #[test]
    fn oracle_is_monotone_in_alpha(
        pairs in prop::collection::vec((0.01f64..1.0, 0.01f64..1.0), 2..50),
        k in 1.0f64..=100.0,
    ) {
        let (sd, sh): (f64, f64) = (pairs.iter().map(|p| p.0).sum(), pairs.iter().map(|p| p.1).sum());
        let p_dest: Vec<f64> = pairs.iter().map(|p| p.0 / sd).collect();
        let p_home: Vec<f64> = pairs.iter().map(|p| p.1 / sh).collect();
        if p_dest.iter().zip(&p_home).all(|(d, h)| d <= h) {
            return Ok(());
        }
        let medians: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|a| oracle_median(&p_dest, &p_home, *a, k).unwrap())
            .collect();
        prop_assert!(medians.windows(2).all(|w| w[0] <= w[1] + 1e-12), "{:?}", medians);
        prop_assert!((medians[4] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn median_matches_sorted_oracle(v in prop::collection::vec(-1e6f64..1e6, 1..100)) {
        let mut sorted = v.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let expected = if n % 2 == 1 { sorted[n / 2] } else { (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0 };
        prop_assert_eq!(aggregate_median(v).unwrap(), expected);
    }

    #[test]
    fn pearson_symmetric_bounded_affine(
        xy in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..50),
        scale in prop_oneof![0.001f64..1e3, -1e3f64..-0.001],
        shift in -1e4f64..1e4,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        let Ok(r) = pearson(&x, &y) else { return Ok(()) };
        prop_assert!((-1.0..=1.0).contains(&r));
        prop_assert!((pearson(&y, &x).unwrap() - r).abs() <= 1e-12);
        let x2: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
        let r2 = pearson(&x2, &y).unwrap();
        prop_assert!((r2 - scale.signum() * r).abs() <= 1e-8, "{} vs {}", r2, r);
    }

    #[test]
    fn window_count_matches_brute_force(offsets in prop::collection::vec(0u64..1000, 0..60), window in 1u64..200) {
        let t0 = Instant::now();
        let times: Vec<Instant> = offsets.iter().map(|o| t0 + Duration::from_millis(*o)).collect();
        let brute = offsets
            .iter()
            .map(|s| offsets.iter().filter(|o| **o >= *s && **o < s + window).count())
            .max()
            .unwrap_or(0);
        prop_assert_eq!(max_in_any_window(&times, Duration::from_millis(window)), brute);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn stability_reproducible_per_seed(seed in any::<u64>(), trials in 1usize..4) {
        let triple = generate_triple(&SynthConfig { n_interests: 120, seed, ..SynthConfig::default() }).unwrap();
        let run = |s| subset_stability(&triple.dest, &triple.target, &triple.home, 50.0, &[20, 60, 120], trials, s).unwrap();
        let (a, b) = (run(seed), run(seed));
        prop_assert_eq!(&a.scores, &b.scores);
        let full = score_triple(&triple.dest, &triple.target, &triple.home, 50.0).unwrap().median_score;
        prop_assert!(a.scores[&120].iter().all(|s| *s == Some(full)));
    }
}

#[test]
fn different_seeds_draw_different_subsets() {
    let triple = generate_triple(&SynthConfig {
        n_interests: 300,
        ..SynthConfig::default()
    })
    .unwrap();
    let run = |s| {
        subset_stability(
            &triple.dest,
            &triple.target,
            &triple.home,
            50.0,
            &[50],
            8,
            s,
        )
        .unwrap()
        .scores
    };
    let (a, b): (BTreeMap<_, _>, BTreeMap<_, _>) = (run(1), run(2));
    assert_ne!(a, b);
}
