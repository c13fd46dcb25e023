mod common;

use proptest::prelude::*;

use tvgam::complexity::{
    estimate_complexity, noise_vector, scaling_experiment, supremum, synthetic_features,
    tightness_experiment, FeatureDistribution, NoiseKind,
};
use tvgam::Dataset;

fn features(max_m: usize, max_p: usize) -> impl Strategy<Value = Dataset> {
    (1..=max_m, 1..=max_p)
        .prop_flat_map(|(m, p)| prop::collection::vec(prop::collection::vec(-3i32..3, p), m))
        .prop_map(|rows| {
            let rows: Vec<Vec<f64>> = rows
                .into_iter()
                .map(|r| r.into_iter().map(|v| f64::from(v) * 0.7).collect())
                .collect();
            let m = rows.len();
            Dataset::new(&rows, &vec![0.0; m]).unwrap()
        })
}

fn kind() -> impl Strategy<Value = NoiseKind> {
    prop_oneof![Just(NoiseKind::Rademacher), Just(NoiseKind::Gaussian)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn invariant_under_increasing_maps(data in features(30, 4), kind in kind(), seed in any::<u64>()) {
        let mut moved = data.clone();
        for j in 0..data.p() {
            moved = moved.map_feature(j, |x| (x * 0.5).exp() * 3.0 - 1.0).unwrap();
        }
        let a = estimate_complexity(&data, 1.0, kind, 40, seed).unwrap();
        let b = estimate_complexity(&moved, 1.0, kind, 40, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn linear_in_budget(data in features(30, 4), kind in kind(), seed in any::<u64>()) {
        let a = estimate_complexity(&data, 1.5, kind, 40, seed).unwrap();
        let b = estimate_complexity(&data, 3.0, kind, 40, seed).unwrap();
        prop_assert_eq!(b.estimate, 2.0 * a.estimate);
        prop_assert_eq!(b.std_error, 2.0 * a.std_error);
    }

    #[test]
    fn duplicated_feature_changes_nothing(data in features(30, 3), kind in kind(), seed in any::<u64>()) {
        let rows: Vec<Vec<f64>> = (0..data.m())
            .map(|i| {
                let mut r = data.row(i).to_vec();
                r.push(r[0]);
                r
            })
            .collect();
        let doubled = Dataset::new(&rows, data.targets()).unwrap();
        let a = estimate_complexity(&data, 1.0, kind, 40, seed).unwrap();
        let b = estimate_complexity(&doubled, 1.0, kind, 40, seed).unwrap();
        prop_assert_eq!(a.estimate, b.estimate);
        prop_assert_eq!(a.std_error, b.std_error);
        prop_assert_eq!(*b.argmax_histogram.last().unwrap(), 0);
    }

    #[test]
    fn per_draw_supremum_matches_grid(data in features(4, 2), seed in any::<u64>(), draw in 0u64..100) {
        let noise = noise_vector(NoiseKind::Gaussian, seed, draw, data.m());
        let (sup, _) = supremum(&data, &noise).unwrap();
        // The supremum over GAM_p(1) is the best single feature with the whole budget.
        let mut grid = 0.0f64;
        for j in 0..data.p() {
            let order = data.order(j);
            let merged: Vec<f64> = (0..order.n_groups())
                .map(|g| order.group_members(g).iter().map(|&i| noise[i as usize]).sum())
                .collect();
            grid = grid.max(common::grid_sup(&merged, 64));
        }
        prop_assert!(sup >= grid - 1e-12);
        prop_assert!(sup - grid <= 1e-9);
    }

    #[test]
    fn report_is_consistent(data in features(20, 3), kind in kind(), seed in any::<u64>(), draws in 1usize..30) {
        let r = estimate_complexity(&data, 1.0, kind, draws, seed).unwrap();
        prop_assert!(r.std_error >= 0.0);
        prop_assert_eq!(r.argmax_histogram.iter().sum::<u64>(), draws as u64);
        match (r.bound, r.slack) {
            (Some(b), Some(s)) => prop_assert_eq!(s, b - r.estimate),
            (None, None) => prop_assert!(data.p() < 2),
            _ => prop_assert!(false, "bound and slack disagree"),
        }
    }
}

#[test]
fn same_seed_same_report() {
    let data = synthetic_features(FeatureDistribution::Normal, 5, 200, 9, 0).unwrap();
    let a = estimate_complexity(&data, 1.0, NoiseKind::Gaussian, 300, 42).unwrap();
    let b = estimate_complexity(&data, 1.0, NoiseKind::Gaussian, 300, 42).unwrap();
    assert_eq!(a, b);
    let c = estimate_complexity(&data, 1.0, NoiseKind::Gaussian, 300, 43).unwrap();
    assert_ne!(a.estimate, c.estimate);
}

#[test]
fn thread_count_does_not_change_output() {
    let data = synthetic_features(FeatureDistribution::Uniform, 7, 300, 1, 0).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_complexity(&data, 1.0, NoiseKind::Gaussian, 101, 8).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn prefix_of_draws_is_stable() {
    // Draw k uses the same noise whatever the total number of draws.
    let data = synthetic_features(FeatureDistribution::Uniform, 3, 50, 2, 0).unwrap();
    let one = estimate_complexity(&data, 1.0, NoiseKind::Rademacher, 1, 77).unwrap();
    let (sup, _) = supremum(&data, &noise_vector(NoiseKind::Rademacher, 77, 0, 50)).unwrap();
    assert_eq!(one.estimate, sup / 50.0);
}

#[test]
fn single_point_gaussian_converges() {
    let data = Dataset::new(&[vec![1.0]], &[0.0]).unwrap();
    let r = estimate_complexity(&data, 1.0, NoiseKind::Gaussian, 20_000, 12).unwrap();
    let expected = 0.5 * (2.0 / std::f64::consts::PI).sqrt();
    assert!((r.estimate - expected).abs() < 4.0 * r.std_error, "{} vs {expected}", r.estimate);
}

#[test]
fn rademacher_below_scaled_gaussian() {
    let data = synthetic_features(FeatureDistribution::Normal, 8, 400, 3, 0).unwrap();
    let r = estimate_complexity(&data, 1.0, NoiseKind::Rademacher, 2000, 1).unwrap();
    let g = estimate_complexity(&data, 1.0, NoiseKind::Gaussian, 2000, 2).unwrap();
    let k = (std::f64::consts::PI / 2.0).sqrt();
    let combined = (r.std_error.powi(2) + k * k * g.std_error.powi(2)).sqrt();
    assert!(r.estimate <= k * g.estimate + 3.0 * combined);
}

#[test]
fn sign_class_scales_like_inverse_root_m() {
    let ms = [64usize, 256, 1024, 4096];
    let estimates: Vec<f64> = ms
        .iter()
        .map(|&m| tightness_experiment(4, m, 2000, 21).unwrap().sign_class)
        .collect();
    let xs: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
    let ys: Vec<f64> = estimates.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    assert!((-0.6..=-0.4).contains(&slope), "slope {slope}");
}

#[test]
fn scaling_rows_respect_bound() {
    let rows = scaling_experiment(&[4, 16], &[100, 400], 1.0, 500, 5, FeatureDistribution::Normal).unwrap();
    for row in &rows {
        let ratio = row.ratio.unwrap();
        assert!(ratio <= 1.0 + 3.0 * row.std_error / row.bound.unwrap());
    }
    // Four times the samples roughly halves the estimate.
    for p in [4, 16] {
        let small = rows.iter().find(|r| r.p == p && r.m == 100).unwrap();
        let large = rows.iter().find(|r| r.p == p && r.m == 400).unwrap();
        let se = (large.std_error.powi(2) + 0.25 * small.std_error.powi(2)).sqrt();
        assert!((large.estimate - 0.5 * small.estimate).abs() <= 3.0 * se + 0.1 * large.estimate);
    }
}

#[test]
fn unknown_distribution_rejected() {
    assert!("cauchy".parse::<FeatureDistribution>().is_err());
    assert!(scaling_experiment(&[], &[10], 1.0, 10, 1, FeatureDistribution::Normal).is_err());
}
