mod common;

use std::collections::BTreeSet;

use gammasep::ingest::{self, parse_str, summarize, write_csv};
use gammasep::preprocess::{flag_outliers, remove_missing, OutlierRule};
use gammasep::transform::{self, TransformKind};
use gammasep::{Dataset, Label, SentinelPolicy};
use proptest::prelude::*;
use rand::Rng;

fn table(rows: &[Vec<f64>]) -> Dataset {
    let labels = (0..rows.len())
        .map(|i| if i % 3 == 0 { Label::Hadron } else { Label::Gamma })
        .collect();
    Dataset::new(Dataset::attribute_names(), rows.concat(), labels, "test").unwrap()
}

fn rows_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 10), 8..60)
}

#[test]
fn full_file_counts() {
    let ds = ingest::load_csv(common::data_path(), SentinelPolicy::Both).unwrap();
    assert_eq!(ds.n_rows(), 19020);
    assert_eq!(ds.class_counts(), (12332, 6688));
    assert_eq!(ds.missing_count(), 0);
}

#[test]
fn injected_missing_values_are_removed() {
    let text = std::fs::read_to_string(common::data_path()).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut rng = common::rng(123);
    let mut rows = BTreeSet::new();
    while rows.len() < 123 {
        rows.insert(rng.random_range(0..lines.len()));
    }
    for (k, &r) in rows.iter().enumerate() {
        let mut f: Vec<String> = lines[r].split(',').map(String::from).collect();
        let col = rng.random_range(0..10);
        f[col] = if k % 2 == 0 { String::new() } else { "99999".into() };
        lines[r] = f.join(",");
    }
    let ds = parse_str(&lines.join("\n"), SentinelPolicy::Both).unwrap();
    assert_eq!(ds.missing_count(), 123);
    let (out, dropped) = remove_missing(&ds).unwrap();
    assert_eq!(dropped, 123);
    assert_eq!(out.n_rows(), 19020 - 123);

    // Under the empty-cell policy the sentinel is ordinary data.
    let ds = parse_str(&lines.join("\n"), SentinelPolicy::EmptyCell).unwrap();
    assert_eq!(ds.missing_count(), 62);
}

#[test]
fn sentinel_needs_exact_equality() {
    let ds = parse_str("1,2,3,4,5,6,7,8,99999.0001,10,g\n1,2,3,4,5,6,7,8,99999,10,h\n", SentinelPolicy::Both).unwrap();
    assert_eq!(ds.value(0, 8), Some(99999.0001));
    assert_eq!(ds.value(1, 8), None);
}

#[test]
fn skewness_matches_direct_formula() {
    let mut rng = common::rng(20);
    for _ in 0..50 {
        let rows: Vec<Vec<f64>> = (0..20).map(|_| (0..10).map(|_| rng.random_range(-5.0..5.0f64).powi(3)).collect()).collect();
        let ds = table(&rows);
        for (j, s) in summarize(&ds).iter().enumerate() {
            let want = common::direct_skewness(&ds.column(j));
            assert!((s.skewness().unwrap() - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }
}

#[test]
fn skewness_needs_three_values() {
    let ds = parse_str("1,2,3,4,5,6,7,8,9,10,g\n2,2,3,4,5,6,7,8,9,10,h\n", SentinelPolicy::Both).unwrap();
    assert!(summarize(&ds)[0].skewness().is_err());
    let ds = parse_str("1,2,3,4,5,6,7,8,9,10,g\n2,2,3,4,5,6,7,8,9,10,h\n3,2,3,4,5,6,7,8,9,10,h\n", SentinelPolicy::Both).unwrap();
    let s = &summarize(&ds)[0];
    assert_eq!((s.mean, s.skewness().unwrap()), (2.0, 0.0));
}

proptest! {
    #[test]
    fn csv_round_trip(rows in rows_strategy()) {
        let ds = table(&rows);
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf, Some("comment")).unwrap();
        let back = parse_str(std::str::from_utf8(&buf).unwrap(), SentinelPolicy::Both).unwrap();
        prop_assert_eq!(back.labels(), ds.labels());
        for r in 0..ds.n_rows() {
            prop_assert_eq!(back.row(r), ds.row(r));
        }
    }

    #[test]
    fn class_counts_sum_to_rows(rows in rows_strategy()) {
        let ds = table(&rows);
        let (g, h) = ds.class_counts();
        prop_assert_eq!(g + h, ds.n_rows());
    }

    #[test]
    fn summary_is_permutation_invariant(rows in rows_strategy(), seed in any::<u64>()) {
        let ds = table(&rows);
        let mut idx: Vec<usize> = (0..ds.n_rows()).collect();
        use rand::seq::SliceRandom;
        idx.shuffle(&mut common::rng(seed));
        let shuffled = ds.select_rows(&idx).unwrap();
        for (a, b) in summarize(&ds).iter().zip(summarize(&shuffled).iter()) {
            prop_assert!(a.q1 <= a.median && a.median <= a.q3 && a.std >= 0.0);
            prop_assert_eq!((a.min, a.max, a.q1, a.median, a.q3), (b.min, b.max, b.q1, b.median, b.q3));
            prop_assert!((a.mean - b.mean).abs() <= 1e-9 * a.mean.abs().max(1.0));
            prop_assert!((a.skewness().unwrap() - b.skewness().unwrap()).abs() <= 1e-8);
        }
    }

    #[test]
    fn outlier_flags_survive_affine_maps(
        rows in rows_strategy(),
        scale in prop_oneof![0.01f64..100.0, -100.0f64..-0.01],
        shift in -1e4f64..1e4,
    ) {
        let ds = table(&rows);
        let mapped: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| scale * v + shift).collect()).collect();
        let dm = table(&mapped);
        for rule in [OutlierRule::iqr_fence(), OutlierRule::three_sigma()] {
            prop_assert_eq!(flag_outliers(&ds, rule).unwrap(), flag_outliers(&dm, rule).unwrap());
        }
        if scale > 0.0 {
            let rule = OutlierRule::upper_sigma();
            prop_assert_eq!(flag_outliers(&ds, rule).unwrap(), flag_outliers(&dm, rule).unwrap());
        }
    }

    #[test]
    fn rescalings_hit_their_targets(rows in rows_strategy()) {
        let ds = table(&rows);
        let mm = transform::fit(TransformKind::MinMax, &ds).unwrap().apply(&ds).unwrap();
        let z = transform::fit(TransformKind::ZScore, &ds).unwrap().apply(&ds).unwrap();
        for j in 0..10 {
            let c = mm.column(j);
            prop_assert!(c.iter().all(|v| (-1e-12..=1.0 + 1e-12).contains(v)));
            prop_assert_eq!(c.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
            let c = z.column(j);
            prop_assert!(ingest::mean(&c).abs() < 1e-9);
            prop_assert!((ingest::sample_variance(&c) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fitted_transform_is_affine_and_text_stable(rows in rows_strategy()) {
        let ds = table(&rows);
        for kind in [TransformKind::MinMax, TransformKind::ZScore] {
            let t = transform::fit(kind, &ds).unwrap();
            let back = transform::FittedTransform::from_text(&t.to_text()).unwrap();
            prop_assert_eq!(&back, &t);
            let out = t.apply(&ds).unwrap();
            // Rows map independently: transforming a subset equals subsetting.
            let sub = t.apply(&ds.select_rows(&[0, 2, 4]).unwrap()).unwrap();
            prop_assert_eq!(sub, out.select_rows(&[0, 2, 4]).unwrap());
        }
    }
}
