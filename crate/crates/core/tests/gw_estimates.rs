use levelsearch_core::asymptotics::level_for;
use levelsearch_core::gw::{mc_estimate_occupation, mc_estimate_s, sample_conditioned_tree, sample_stream};
use levelsearch_core::{OffspringLaw, SimConfig};

#[test]
fn deepest_level_holds_at_most_one_node() {
    let cfg = SimConfig::new(OffspringLaw::GeometricHalf, 6, 6, 100_000, 4);
    let (_, h) = mc_estimate_occupation(&cfg).unwrap();
    assert_eq!(h.target, Some(1.0 / 132.0));
    assert!(h.within(3.0), "{h:?}");
    for i in 0..2000 {
        let t = sample_conditioned_tree(&cfg, &mut sample_stream(4, i)).unwrap();
        let deepest = t.levels().iter().filter(|&&l| l == 6).count();
        assert!(deepest <= 1);
    }
}

#[test]
fn occupation_matches_exact_means() {
    for (n, level) in [(4, 1), (8, 3), (12, 5)] {
        let cfg = SimConfig::new(OffspringLaw::GeometricHalf, n, level, 50_000, 100 + n);
        let (v, h) = mc_estimate_occupation(&cfg).unwrap();
        assert!(v.within(3.0) && h.within(3.0), "n = {n}: {v:?} {h:?}");
    }
}

#[test]
fn scaled_mean_is_stable_from_200_to_2000() {
    let scaled = |n: u64, samples| {
        let level = level_for(n, 0.8);
        let r = mc_estimate_s(&SimConfig::new(OffspringLaw::GeometricHalf, n, level, samples, 77)).unwrap();
        let scale = (n as f64).powf(1.5);
        (r.mean / scale, r.stderr / scale, r.target.unwrap() / scale)
    };
    let (small, small_se, small_exact) = scaled(200, 40_000);
    let (large, large_se, large_exact) = scaled(2000, 10_000);
    assert!((small - small_exact).abs() <= 3.0 * small_se);
    assert!((large - large_exact).abs() <= 3.0 * large_se);
    // drift of order n^(-1/2)
    let band = 3.0 * small_se.hypot(large_se) + 1.0 / (200f64).sqrt();
    assert!((small - large).abs() <= band, "{small} vs {large}");
}

#[test]
fn poisson_estimate_is_finite() {
    let level = level_for(2000, 0.8);
    let r = mc_estimate_s(&SimConfig::new(OffspringLaw::PoissonOne, 2000, level, 4000, 5)).unwrap();
    assert!(r.mean.is_finite() && r.mean > 0.0 && r.stderr > 0.0 && r.target.is_none());
}
