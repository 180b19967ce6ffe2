use proptest::prelude::*;
use setid::random_set::*;

fn sets() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-5.0..5.0f64, 0.0..3.0f64), 1..60)
        .prop_map(|v| v.into_iter().map(|(lo, w)| (lo, lo + w)).collect())
}

fn batch(v: &[(f64, f64)]) -> SetDrawBatch {
    SetDrawBatch::from_sets(
        "prop",
        Source::Prior,
        v.iter()
            .map(|&(a, b)| IntervalSet::new(a, b).unwrap())
            .collect(),
    )
}

proptest! {
    #[test]
    fn capacity_is_monotone(v in sets(), a in -6.0..6.0f64, w1 in 0.0..2.0f64, w2 in 0.0..2.0f64) {
        let b = batch(&v);
        let small = IntervalSet::new(a, a + w1).unwrap();
        let large = IntervalSet::new(a - w2, a + w1 + w2).unwrap();
        prop_assert!(estimate_capacity(&b, &small).unwrap() <= estimate_capacity(&b, &large).unwrap());
    }

    #[test]
    fn singleton_capacity_is_coverage(v in sets(), g in -6.0..6.0f64) {
        let b = batch(&v);
        let cap = estimate_capacity(&b, &IntervalSet::point(g)).unwrap();
        let cov = estimate_coverage(&b, &[g]).unwrap().values[0];
        prop_assert_eq!(cap, cov);
    }

    #[test]
    fn coverage_is_difference_of_ecdfs(v in sets(), g in -6.0..6.0f64) {
        // 1{lo ≤ γ ≤ hi} = 1{lo ≤ γ} − 1{hi < γ} because lo ≤ hi
        let b = batch(&v);
        let n = v.len() as f64;
        let below = v.iter().filter(|s| s.0 <= g).count() as f64;
        let passed = v.iter().filter(|s| s.1 < g).count() as f64;
        let cov = estimate_coverage(&b, &[g]).unwrap().values[0];
        prop_assert!((cov - (below - passed) / n).abs() < 1e-12);
    }

    #[test]
    fn credible_region_meets_level(v in sets(), alpha in 0.5..1.0f64) {
        let b = batch(&v);
        let cr = credible_region(&b, alpha).unwrap();
        prop_assert!(cr.containment >= alpha || cr.containment == 1.0);
        prop_assert_eq!(cr.containment, containment_fraction(&b, &cr.set).unwrap());
    }

    #[test]
    fn point_estimate_lies_between_extremes(v in sets()) {
        let b = batch(&v);
        let pe = point_estimate_set(&b).unwrap();
        let min_lo = v.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let max_hi = v.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(pe.lo() >= min_lo - 1e-12 && pe.hi() <= max_hi + 1e-12);
    }
}

#[test]
fn full_credible_level_contains_everything() {
    let b = batch(&[(0.0, 1.0), (-3.0, 0.5), (2.0, 7.0)]);
    let cr = credible_region(&b, 1.0).unwrap();
    assert_eq!(cr.containment, 1.0);
    assert_eq!((cr.set.lo(), cr.set.hi()), (-3.0, 7.0));
}

#[test]
fn skipped_draws_are_counted() {
    let s = IntervalSet::new(0.0, 1.0).unwrap();
    let b = SetDrawBatch::from_outcomes("x", Source::Posterior, vec![Some(s), None, Some(s), None]);
    assert_eq!((b.len(), b.skipped(), b.attempted()), (2, 2, 4));
    assert_eq!(b.draw_indices(), &[0, 2]);
    assert!(b.warning().is_some());
    let clean = SetDrawBatch::from_sets("x", Source::Prior, vec![s; 30]);
    assert!(clean.warning().is_none());
}

#[test]
fn empty_batch_errors() {
    let b = SetDrawBatch::from_outcomes("x", Source::Prior, vec![None]);
    assert!(estimate_coverage(&b, &[0.0]).is_err());
    assert!(point_estimate_set(&b).is_err());
    assert!(credible_region(&b, 0.9).is_err());
}
