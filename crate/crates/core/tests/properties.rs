//! Property tests over random instances.

mod common;

use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use xfer_score::analysis::{bin_levels, rank_models};
use xfer_score::baselines::{leep_lower_bound, soft_pair_bound};
use xfer_score::io::{decode_matrix_bin, encode_matrix_bin, read_matrix_csv, write_matrix_csv, RawMatrix};
use xfer_score::leep::inner_sums;
use xfer_score::{
    conditional_from_joint, eep_predict, empirical_joint, h_score, leep_score, p_value_two_sided, pearson,
    ExperimentRecord, FeatureMatrix, Measure, PredictionMatrix, TargetLabels,
};

fn leep_of(rows: &[Vec<f64>], labels: &[usize], c: usize) -> f64 {
    let pred = PredictionMatrix::from_rows(rows).unwrap();
    leep_score(&pred, &TargetLabels::from_indices(labels, Some(c)).unwrap()).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn leep_permutation_invariant(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let inst = random_instance(&mut rng, 30, 6, 4);
        let mut order: Vec<usize> = (0..inst.labels.len()).collect();
        order.shuffle(&mut rng);
        let rows: Vec<Vec<f64>> = order.iter().map(|&i| inst.rows[i].clone()).collect();
        let labels: Vec<usize> = order.iter().map(|&i| inst.labels[i]).collect();
        let base = leep_score(&inst.pred, &inst.targets).unwrap().value;
        prop_assert_eq!(base.to_bits(), leep_of(&rows, &labels, inst.c).to_bits());
    }

    #[test]
    fn leep_duplication_invariant(seed in any::<u64>(), copies in 2usize..5) {
        let mut rng = rng(seed);
        let inst = random_instance(&mut rng, 20, 5, 4);
        let rows: Vec<Vec<f64>> = (0..copies).flat_map(|_| inst.rows.clone()).collect();
        let labels: Vec<usize> = (0..copies).flat_map(|_| inst.labels.clone()).collect();
        let base = leep_score(&inst.pred, &inst.targets).unwrap().value;
        prop_assert!((base - leep_of(&rows, &labels, inst.c)).abs() <= 1e-12);
    }

    #[test]
    fn leep_relabeling_invariant(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let inst = random_instance(&mut rng, 20, 6, 4);
        let mut ymap: Vec<usize> = (0..inst.c).collect();
        ymap.shuffle(&mut rng);
        let m = inst.rows[0].len();
        let mut zmap: Vec<usize> = (0..m).collect();
        zmap.shuffle(&mut rng);
        let rows: Vec<Vec<f64>> = inst.rows.iter().map(|r| {
            let mut out = vec![0.0; m];
            for (z, &v) in r.iter().enumerate() {
                out[zmap[z]] = v;
            }
            out
        }).collect();
        let labels: Vec<usize> = inst.labels.iter().map(|&y| ymap[y]).collect();
        let base = leep_score(&inst.pred, &inst.targets).unwrap().value;
        prop_assert_eq!(base.to_bits(), leep_of(&rows, &labels, inst.c).to_bits());
    }

    #[test]
    fn leep_matches_oracle_and_is_bounded(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let inst = random_instance(&mut rng, 20, 5, 4);
        let got = leep_score(&inst.pred, &inst.targets).unwrap().value;
        prop_assert!(got <= 0.0 && got.is_finite());
        prop_assert!((got - naive_leep(&inst.rows, &inst.labels, inst.c)).abs() <= 1e-12);
        for s in inner_sums(&inst.pred, &inst.targets).unwrap() {
            prop_assert!(s > 0.0 && s <= 1.0);
        }
    }

    #[test]
    fn leep_is_mean_log_eep_likelihood(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let inst = random_instance(&mut rng, 20, 5, 4);
        let cond = conditional_from_joint(&empirical_joint(&inst.pred, &inst.targets).unwrap());
        let mut total = 0.0;
        for (row, &y) in inst.rows.iter().zip(&inst.labels) {
            let eep = eep_predict(row, &cond).unwrap();
            // Every column with mass in a training row is supported, so no mass is dropped.
            prop_assert!((eep.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            total += eep[y].ln();
        }
        let leep = leep_score(&inst.pred, &inst.targets).unwrap().value;
        prop_assert!((leep - total / inst.rows.len() as f64).abs() <= 1e-12);
    }

    #[test]
    fn soft_pair_bound_never_exceeds_leep(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let inst = random_instance(&mut rng, 20, 5, 4);
        let leep = leep_score(&inst.pred, &inst.targets).unwrap().value;
        prop_assert!(soft_pair_bound(&inst.pred, &inst.targets).unwrap().value() <= leep + 1e-12);
    }

    #[test]
    fn hard_bound_holds_for_one_hot_predictions(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let inst = random_instance(&mut rng, 20, 5, 4);
        let m = inst.rows[0].len();
        let rows: Vec<Vec<f64>> = inst.rows.iter().map(|_| {
            let z = rng.random_range(0..m);
            (0..m).map(|k| if k == z { 1.0 } else { 0.0 }).collect()
        }).collect();
        let pred = PredictionMatrix::from_rows(&rows).unwrap();
        let leep = leep_score(&pred, &inst.targets).unwrap().value;
        let hard = leep_lower_bound(&pred, &inst.targets).unwrap().value();
        let soft = soft_pair_bound(&pred, &inst.targets).unwrap().value();
        prop_assert!(hard <= leep + 1e-9);
        prop_assert!((hard - soft).abs() <= 1e-12);
    }

    #[test]
    fn h_score_range_and_invariances(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.random_range(4..30);
        let d = rng.random_range(1..5);
        let labels: Vec<usize> = (0..n).map(|i| if i < 2 { i } else { rng.random_range(0..3.min(n)) }).collect();
        let targets = TargetLabels::from_indices(&labels, None).unwrap();
        let features = random_features(&mut rng, n, d);
        let h = h_score(&features, &targets).unwrap();
        prop_assert!(h.score.value >= 0.0 && h.score.value <= h.covariance_rank as f64 + 1e-6);

        let shift: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
        let shifted = FeatureMatrix::new(n, d, features.values().iter().enumerate().map(|(k, v)| v + shift[k % d]).collect()).unwrap();
        let hs = h_score(&shifted, &targets).unwrap().score.value;
        prop_assert!((hs - h.score.value).abs() <= 1e-9 * (1.0 + h.score.value));

        let scale: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..4.0)).collect();
        let scaled = FeatureMatrix::new(n, d, features.values().iter().enumerate().map(|(k, v)| v * scale[k % d]).collect()).unwrap();
        let hc = h_score(&scaled, &targets).unwrap().score.value;
        prop_assert!((hc - h.score.value).abs() <= 1e-8 * (1.0 + h.score.value));
    }

    #[test]
    fn pearson_affine_invariant(xs in prop::collection::vec(-100.0f64..100.0, 3..40), a in 0.1f64..10.0, b in -50.0f64..50.0, seed in any::<u64>()) {
        let mut rng = rng(seed);
        let ys: Vec<f64> = xs.iter().map(|x| x + rng.random_range(-30.0..30.0)).collect();
        prop_assume!(xs.iter().any(|&x| x != xs[0]));
        let r = pearson(&xs, &ys).unwrap();
        let moved: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        prop_assert!((pearson(&moved, &ys).unwrap() - r).abs() <= 1e-12);
        let flipped: Vec<f64> = xs.iter().map(|x| -a * x + b).collect();
        prop_assert!((pearson(&flipped, &ys).unwrap() + r).abs() <= 1e-12);
        prop_assert!(r.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn p_value_monotone_in_r(n in 3usize..200, r1 in 0.0f64..1.0, r2 in 0.0f64..1.0) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let p_lo = p_value_two_sided(lo, n).unwrap();
        let p_hi = p_value_two_sided(hi, n).unwrap();
        prop_assert!(p_hi <= p_lo);
        prop_assert!((0.0..=1.0).contains(&p_lo));
        prop_assert_eq!(p_value_two_sided(-hi, n).unwrap(), p_hi);
    }

    #[test]
    fn bin_levels_monotone(scores in prop::collection::vec(-10.0f64..10.0, 1..60), k in 1usize..8) {
        let levels = bin_levels(&scores, k).unwrap();
        for (i, &a) in scores.iter().enumerate() {
            prop_assert!(levels[i] < k);
            for (j, &b) in scores.iter().enumerate() {
                if a < b {
                    prop_assert!(levels[i] <= levels[j]);
                }
            }
        }
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
        for (s, l) in scores.iter().zip(&levels) {
            if *s == min { prop_assert_eq!(*l, 0); }
            if *s == max && max > min { prop_assert_eq!(*l, k - 1); }
        }
    }

    #[test]
    fn ranking_invariant_under_shift(scores in prop::collection::vec(-5.0f64..0.0, 2..12), shift in -2.0f64..2.0) {
        let records = |delta: f64| -> Vec<ExperimentRecord> {
            scores.iter().enumerate().map(|(i, s)| ExperimentRecord::new(format!("m{i}")).with_score(Measure::Leep, s + delta)).collect()
        };
        let a = rank_models(&records(0.0), Measure::Leep).unwrap();
        let b = rank_models(&records(shift), Measure::Leep).unwrap();
        let ids = |r: &xfer_score::RankingReport| r.ranking.iter().map(|m| m.model_id.clone()).collect::<Vec<_>>();
        // Shifting can merge or split near-ties through rounding; compare only when it cannot.
        let distinct = |r: &xfer_score::RankingReport| !r.has_ties();
        if distinct(&a) && distinct(&b) {
            prop_assert_eq!(ids(&a), ids(&b));
        }
        prop_assert!(a.ranking.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn validation_is_idempotent(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.random_range(1..20);
        let m = rng.random_range(2..7);
        let raw: Vec<f64> = (0..n).flat_map(|_| {
            let row: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = row.iter().sum();
            let wobble = 1.0 + rng.random_range(-5e-4..5e-4);
            row.into_iter().map(move |v| v / s * wobble)
        }).collect();
        let once = PredictionMatrix::new(n, m, raw).unwrap();
        let twice = PredictionMatrix::new(n, m, once.values().to_vec()).unwrap();
        prop_assert_eq!(once.values(), twice.values());
        for row in once.rows() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn binary_round_trip(rows in 1usize..20, cols in 1usize..20, bits in prop::collection::vec(any::<u64>(), 400)) {
        let values: Vec<f64> = bits.iter().take(rows * cols).map(|&b| f64::from_bits(b)).collect();
        let m = RawMatrix { rows, cols, values };
        let back = decode_matrix_bin(std::path::Path::new("mem"), &encode_matrix_bin(&m)).unwrap();
        prop_assert_eq!(back.rows, rows);
        prop_assert_eq!(back.cols, cols);
        prop_assert!(back.values.iter().zip(&m.values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn csv_round_trip(rows in 1usize..10, cols in 1usize..6, values in prop::collection::vec(-1e300f64..1e300, 60)) {
        let m = RawMatrix { rows, cols, values: values[..rows * cols].to_vec() };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_matrix_csv(&path, &m).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn hard_bound_fails_on_a_soft_counterexample() {
    // Two soft rows whose argmaxes determine the labels: hard NCE is 0, but
    // LEEP's own conditional spreads mass across both labels.
    let pred = PredictionMatrix::from_rows(&[[0.6, 0.4], [0.4, 0.6]]).unwrap();
    let labels = TargetLabels::new(&[0, 1], None).unwrap();
    let leep = leep_score(&pred, &labels).unwrap().value;
    let hard = leep_lower_bound(&pred, &labels).unwrap();
    assert_eq!(hard.nce, 0.0);
    assert!(hard.value() > leep);
    assert!(soft_pair_bound(&pred, &labels).unwrap().value() <= leep);
}
