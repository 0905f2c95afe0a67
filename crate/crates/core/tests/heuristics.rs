mod common;

use backbone_core::engine::alpha_synergy;
use backbone_core::measures::{self, LocalEntropy};
use backbone_core::search::{anneal_min_bipartition, enforce_monotone, sample_min_bipartition};
use backbone_core::{
    backbone, AggregatorKind, AnnealSchedule, BackboneConfig, ClosureSetFunction, Error,
    MarginalCache, SearchStrategy, SubsetMask,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sampled(n: usize) -> SearchStrategy {
    SearchStrategy::Sampled { num_samples: n }
}

fn annealed() -> SearchStrategy {
    SearchStrategy::Annealed(AnnealSchedule::default())
}

#[test]
fn heuristics_never_beat_exact_min() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..10 {
        let p = common::random_pmf(&mut rng, 7, 2, 60);
        let cache = MarginalCache::new(p.to_dist());
        let state = p.rows[trial % p.rows.len()].0.clone();
        let f = LocalEntropy::new(&cache, &state).unwrap();
        let exact = backbone(&f, &BackboneConfig::exact(AggregatorKind::Min)).unwrap();
        for strat in [sampled(5), annealed()] {
            let cfg = BackboneConfig::new(AggregatorKind::Min, strat).with_seed(trial as u64);
            let h = backbone(&f, &cfg).unwrap();
            for (a, b) in h.alpha_synergy.iter().zip(&exact.alpha_synergy) {
                assert!(a >= &(b - 1e-12), "{} {a} < {b}", cfg.strategy_tag());
            }
        }
    }
}

#[test]
fn max_heuristics_stay_below_exact_max() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = common::random_pmf(&mut rng, 6, 3, 40);
    let d = p.to_dist();
    let exact = measures::entropy_backbone_local(&d, &p.rows[0].0, &BackboneConfig::exact(AggregatorKind::Max))
        .unwrap();
    let cfg = BackboneConfig::new(AggregatorKind::Max, sampled(4)).with_seed(3);
    let h = measures::entropy_backbone_local(&d, &p.rows[0].0, &cfg).unwrap();
    for (a, b) in h.alpha_synergy.iter().zip(&exact.alpha_synergy) {
        assert!(a <= &(b + 1e-12));
    }
}

#[test]
fn sampling_is_exhaustive_when_budget_covers_all_subsets() {
    let f = ClosureSetFunction::loss(8, "scrambled", |m: SubsetMask| {
        m.indices().map(|i| ((i * 37 + 11) % 17) as f64).sum()
    })
    .unwrap();
    let exact = backbone(&f, &BackboneConfig::exact(AggregatorKind::Min)).unwrap();
    let cfg = BackboneConfig::new(AggregatorKind::Min, sampled(70)).with_seed(9);
    assert_eq!(backbone(&f, &cfg).unwrap().alpha_synergy, exact.alpha_synergy);
}

#[test]
fn bipartition_helpers() {
    let f = ClosureSetFunction::loss(9, "squares", |m: SubsetMask| {
        m.indices().map(|i| ((i as f64) - 4.0).powi(2)).sum()
    })
    .unwrap();
    let (v, w) = sample_min_bipartition(&f, 3, 1000, 1).unwrap();
    assert_eq!(v, 2.0);
    assert_eq!(w.to_vec(), vec![3, 4, 5]);
    let (va, wa) = anneal_min_bipartition(&f, 3, &AnnealSchedule::default(), 1).unwrap();
    assert_eq!((va, wa), (v, w));
}

#[test]
fn same_seed_reproduces_sampled_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = common::random_pmf(&mut rng, 12, 2, 300);
    let d = p.to_dist();
    let run = |seed| {
        let cfg = BackboneConfig::new(AggregatorKind::Min, sampled(3)).with_seed(seed);
        measures::entropy_backbone_local(&d, &p.rows[1].0, &cfg).unwrap()
    };
    assert_eq!(run(4), run(4));
}

#[test]
fn mean_of_sampled_stays_between_min_and_max() {
    let f = ClosureSetFunction::loss(10, "cubes", |m: SubsetMask| {
        m.indices().map(|i| (i as f64).powi(3)).sum::<f64>().sqrt()
    })
    .unwrap();
    let cfg = BackboneConfig::new(AggregatorKind::Mean, sampled(20)).with_seed(1);
    let mean = backbone(&f, &cfg).unwrap();
    let lo = backbone(&f, &BackboneConfig::exact(AggregatorKind::Min)).unwrap();
    let hi = backbone(&f, &BackboneConfig::exact(AggregatorKind::Max)).unwrap();
    for i in 0..10 {
        assert!(lo.alpha_synergy[i] <= mean.alpha_synergy[i] + 1e-12);
        assert!(mean.alpha_synergy[i] <= hi.alpha_synergy[i] + 1e-12);
    }
}

#[test]
fn repair_produces_monotone_series() {
    // odd sizes overshoot, so every even size drops
    let f = ClosureSetFunction::loss(6, "parity", |m: SubsetMask| {
        if m.len().is_multiple_of(2) { m.len() as f64 } else { m.len() as f64 + 1.5 }
    })
    .unwrap();
    let raw = backbone(&f, &BackboneConfig::exact(AggregatorKind::Min)).unwrap();
    assert!(!raw.monotone_violations.is_empty());
    let mut cfg = BackboneConfig::exact(AggregatorKind::Min);
    cfg.enforce_monotone = true;
    let fixed = backbone(&f, &cfg).unwrap();
    assert!(fixed.repaired);
    assert!(fixed.partial_atoms.iter().all(|&a| a >= 0.0));
    assert_eq!(fixed, enforce_monotone(&raw));
}

#[test]
fn exact_refuses_large_ground_sets() {
    let f = ClosureSetFunction::loss(30, "count", |m: SubsetMask| m.len() as f64).unwrap();
    let r = backbone(&f, &BackboneConfig::exact(AggregatorKind::Min));
    assert!(matches!(r, Err(Error::TooLarge { .. })));
    let cfg = BackboneConfig::new(AggregatorKind::Min, sampled(50));
    let s = backbone(&f, &cfg).unwrap();
    assert_eq!(s.alpha_synergy[29], 30.0);
    assert_eq!(alpha_synergy(&f, 3, &cfg).unwrap().value, 3.0);
}

#[test]
fn invalid_schedules_are_rejected() {
    let bad = AnnealSchedule {
        cooling: 1.5,
        ..Default::default()
    };
    let f = ClosureSetFunction::loss(4, "count", |m: SubsetMask| m.len() as f64).unwrap();
    let cfg = BackboneConfig::new(AggregatorKind::Min, SearchStrategy::Annealed(bad));
    assert!(matches!(backbone(&f, &cfg), Err(Error::Argument(_))));
    let zero = BackboneConfig::new(AggregatorKind::Min, sampled(0));
    assert!(backbone(&f, &zero).is_err());
}
