//! Whole-pipeline checks through the public API with sequential execution.

use parstat_core::datagen::{generate, generate_regression, grid_values, Distribution, GridSpec, MeanFunction};
use parstat_core::quantile::{exact_quantile, solve_quantiles, sorted_quantile};
use parstat_core::regression::{predict, BandwidthMethod};
use parstat_core::shard::{fold, map_shards, tree_fold};
use parstat_core::summary::{MomentKernel, TrigMomentKernel};
use parstat_core::{
    map_reduce, Error, FourierOrder, LowessConfig, MergeKernel, QuantileRequest, RescaleMap, Sequential,
    ShardedDataset, TrigMomentSummary,
};
use proptest::prelude::*;

fn order(j: usize) -> FourierOrder {
    FourierOrder::new(j).unwrap()
}

#[test]
fn uniform_grid_quantiles_from_one_summary() {
    let values = generate(&GridSpec::new(9999, Distribution::Uniform, 1).unwrap());
    let ds = ShardedDataset::partition(values.clone(), 7).unwrap();
    let range = map_reduce(&ds, &MomentKernel, &Sequential).unwrap();
    let scale = RescaleMap::new(range.min(), range.max()).unwrap();
    let tm = map_reduce(&ds, &TrigMomentKernel::new(order(256)).with_rescale(scale), &Sequential).unwrap();

    let ps: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
    let sols = solve_quantiles(&QuantileRequest::new(ps.clone(), order(256)).unwrap(), &tm, &scale).unwrap();
    for (s, &p) in sols.iter().zip(&ps) {
        assert!((s.unscaled - exact_quantile(&values, p).unwrap()).abs() < 2e-3);
        assert!(!s.boundary_flag);
        assert!(s.derivative_residual <= 1e-4);
    }
    assert!(sols.windows(2).all(|w| w[1].unscaled >= w[0].unscaled - 1e-6));
}

#[test]
fn normal_grid_quantiles() {
    let values = generate(&GridSpec::new(20_001, Distribution::Normal, 5).unwrap());
    let ds = ShardedDataset::partition(values.clone(), 3).unwrap();
    let tm = map_reduce(&ds, &TrigMomentKernel::new(order(512)), &Sequential).unwrap();
    let sols = solve_quantiles(&QuantileRequest::new(vec![0.5], order(512)).unwrap(), &tm, &RescaleMap::unit()).unwrap();
    assert!((sols[0].unscaled - 0.5).abs() < 1e-3);
}

#[test]
fn shard_failure_names_the_shard() {
    let ds = ShardedDataset::from_shards(vec![vec![0.5, 0.2], vec![0.1, 1.5]], Default::default()).unwrap();
    let err = map_reduce(&ds, &TrigMomentKernel::new(order(4)), &Sequential).unwrap_err();
    assert!(matches!(err, Error::InShard { shard: 1, .. }));
    assert!(matches!(err.root(), Error::OutOfDomain { .. }));
}

#[test]
fn lowess_on_noisy_sine() {
    let spec = GridSpec::new(20_000, Distribution::Uniform, 21).unwrap();
    let data = generate_regression(&spec, MeanFunction::Sine, 0.1).unwrap();
    let ds = ShardedDataset::partition(data, 8).unwrap();
    let evals: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    let cfg = LowessConfig::new(0.1, 2, order(256), evals).unwrap();
    let fourier = predict(&cfg, &ds, BandwidthMethod::Fourier, &Sequential).unwrap();
    let exact = predict(&cfg, &ds, BandwidthMethod::Exact, &Sequential).unwrap();
    for (f, e) in fourier.iter().zip(&exact) {
        let (f, e) = (f.as_ref().unwrap(), e.as_ref().unwrap());
        assert!((f.mu_hat() - MeanFunction::Sine.eval(f.x)).abs() < 0.02);
        assert!((f.mu_hat() - e.mu_hat()).abs() < 1e-2);
        assert!((f.h() - e.h()).abs() < 1e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refinement_leaves_trig_moments_unchanged(
        values in prop::collection::vec(0.0f64..=1.0, 2..200),
        cut in any::<prop::sample::Index>(),
    ) {
        let kernel = TrigMomentKernel::new(order(32));
        let whole: TrigMomentSummary = kernel.summarize(&values).unwrap();
        let k = 1 + cut.index(values.len() - 1);
        let split = ShardedDataset::from_shards(vec![values[..k].to_vec(), values[k..].to_vec()], Default::default()).unwrap();
        let parts = map_shards(&split, &kernel, &Sequential).unwrap();
        for merged in [fold(&parts).unwrap(), tree_fold(&parts).unwrap()] {
            prop_assert_eq!(merged.count(), whole.count());
            for (a, b) in merged.c_bar().iter().zip(whole.c_bar()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn exact_quantile_translates(values in prop::collection::vec(-1e3f64..1e3, 1..100), p in 0.001f64..0.999, c in -1e3f64..1e3) {
        let shifted: Vec<f64> = values.iter().map(|v| v + c).collect();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let q = sorted_quantile(&sorted, p).unwrap();
        prop_assert_eq!(exact_quantile(&shifted, p).unwrap(), q + c);
    }

    #[test]
    fn uniform_grid_stays_inside_unit_interval(n in 1usize..2000) {
        let g = grid_values(n, Distribution::Uniform);
        prop_assert!(g.iter().all(|&v| v > 0.0 && v < 1.0));
    }
}
