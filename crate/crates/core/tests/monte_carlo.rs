//! Distributional checks. Each uses a fixed seed, so the outcome is
//! deterministic; tolerances are three Monte Carlo standard errors.

use mfdp_core::control::adjusted_pvalues_sorted;
use mfdp_core::envelope::improve_envelope;
use mfdp_core::simulation::*;
use mfdp_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

fn uniform_pvalues(rng: &mut ChaCha8Rng, m: usize) -> PValueSet {
    let v: Vec<f64> = (0..m).map(|_| rng.random_range(f64::EPSILON..1.0)).collect();
    PValueSet::new(&v).unwrap()
}

#[test]
fn median_unbiased_estimate_covers_half_the_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let reps = 5000;
    let hits = (0..reps)
        .filter(|_| median_unbiased_pi0(&uniform_pvalues(&mut rng, 200), 0.2).unwrap().raw >= 1.0)
        .count();
    let r = hits as f64 / reps as f64;
    assert!(r >= 0.5 - 3.0 * (0.25f64 / reps as f64).sqrt(), "{r}");
}

#[test]
fn median_unbiased_exceeds_storey_for_decreasing_density() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let beta = Beta::<f64>::new(0.5, 1.0).unwrap();
    let (mut ours, mut storey, reps) = (0.0, 0.0, 5000);
    for _ in 0..reps {
        let v: Vec<f64> = (0..200).map(|_| beta.sample(&mut rng).max(f64::MIN_POSITIVE)).collect();
        let p = PValueSet::new(&v).unwrap();
        ours += median_unbiased_pi0(&p, 0.2).unwrap().raw;
        storey += storey_pi0(&p, 0.8).unwrap().raw;
        assert_eq!(median_unbiased_pi0(&p, 0.5).unwrap().raw, storey_pi0(&p, 0.5).unwrap().raw);
    }
    assert!(ours / reps as f64 > storey / reps as f64);
}

#[test]
fn envelope_coverage_is_one_half_under_independence() {
    let mut cfg = ScenarioConfig::new(Dependence::Independent, 1.0, 0.0);
    cfg.reps = 10_000;
    let s = Scenario::new(cfg).unwrap();
    let events = (0..10_000).filter(|&r| s.error_event(r)).count();
    let r = events as f64 / 10_000.0;
    assert!((r - 0.5).abs() <= 3.0 * 0.005, "{r}");
}

#[test]
fn simultaneous_over_gamma_grid() {
    // all hypotheses true: any rejection is a false discovery
    let cfg = ScenarioConfig::new(Dependence::Independent, 1.0, 0.0);
    let s = Scenario::new(cfg).unwrap();
    let grid: Vec<f64> = (1..=20).map(|k| k as f64 / 20.0).collect();
    let reps = 4000;
    let mut bad = 0;
    for r in 0..reps {
        let p = s.sample_pvalues(&mut s.replicate_rng(r));
        let env = improve_envelope(&p, &build_envelope(&p, s.family())).unwrap();
        let ad = adjusted_pvalues_sorted(&p, &env);
        // FDP = 1 whenever anything is rejected
        if grid.iter().any(|&g| g < 1.0 && ad.iter().any(|a| a.is_at_most(g))) {
            bad += 1;
        }
    }
    let r = bad as f64 / reps as f64;
    assert!(r <= 0.5 + 3.0 * (0.25f64 / reps as f64).sqrt(), "{r}");
}

#[test]
fn null_pvalues_are_uniform() {
    let mut cfg = ScenarioConfig::new(Dependence::Independent, 1.0, 0.0);
    cfg.m = 4;
    let s = Scenario::new(cfg).unwrap();
    let mut all: Vec<f64> = Vec::with_capacity(100_000);
    for r in 0..25_000 {
        all.extend(s.sample_pvalues(&mut s.replicate_rng(r)).original_order());
    }
    all.sort_by(f64::total_cmp);
    let n = all.len() as f64;
    let d = all
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max);
    // 1% critical value of the Kolmogorov-Smirnov statistic
    assert!(d < 1.63 / n.sqrt(), "D = {d}");
}

fn sample_correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

fn pair_correlations(dep: Dependence, m: usize, sampler: SamplerKind, pairs: &[(usize, usize)], n: u64) -> Vec<f64> {
    let mut cfg = ScenarioConfig::new(dep, 1.0, 0.0);
    cfg.m = m;
    cfg.sampler = sampler;
    let s = Scenario::new(cfg).unwrap();
    let draws: Vec<Vec<f64>> = (0..n).map(|r| s.sample_statistics(&mut s.replicate_rng(r))).collect();
    pairs
        .iter()
        .map(|&(i, j)| {
            let x: Vec<f64> = draws.iter().map(|z| z[i]).collect();
            let y: Vec<f64> = draws.iter().map(|z| z[j]).collect();
            sample_correlation(&x, &y)
        })
        .collect()
}

#[test]
fn homogeneous_correlation_matches() {
    let c = pair_correlations(Dependence::Homogeneous { rho: 0.5 }, 10, SamplerKind::Factor, &[(0, 1), (3, 9)], 100_000);
    for r in c {
        assert!((r - 0.5).abs() < 0.02, "{r}");
    }
}

#[test]
fn negative_block_correlations_match_both_samplers() {
    let dep = Dependence::NegativeBlocks {
        n_blocks: 5,
        rho_within: 0.5,
        rho_between: -0.1,
    };
    let pairs = [(0, 1), (4, 7), (0, 5), (3, 19)];
    let expected = [0.5, 0.5, -0.1, -0.1];
    for sampler in [SamplerKind::Factor, SamplerKind::DenseCholesky] {
        let c = pair_correlations(dep, 20, sampler, &pairs, 50_000);
        for (r, e) in c.iter().zip(expected) {
            assert!((r - e).abs() < 0.02, "{sampler:?}: {r} vs {e}");
        }
    }
}

#[test]
fn block_correlation_is_zero_across_blocks() {
    let c = pair_correlations(Dependence::five_blocks(0.8), 20, SamplerKind::Factor, &[(0, 3), (0, 4)], 50_000);
    assert!((c[0] - 0.8).abs() < 0.02 && c[1].abs() < 0.02, "{c:?}");
}
