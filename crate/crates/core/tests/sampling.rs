mod common;

use common::oracle::{cell, sampler_vs_oracle_p, thin_shell_oracle, two_sample_chi2, E, GRID, N, V_FLOOR};
use nsdi::physics::sym2e::potential_at;
use nsdi::sampling::{derive_stream, sample_initial, EnsembleSpec};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn position_marginal_matches_thin_shell_oracle() {
    let p = sampler_vs_oracle_p(2024);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn momentum_angle_and_phase_are_uniform() {
    let spec = EnsembleSpec::new(E, N as u64, 77);
    let bins = 36;
    let mut angle = vec![0u64; bins];
    let mut phase = vec![0u64; bins];
    let tau = std::f64::consts::TAU;
    for i in 0..spec.n_samples {
        let (s, phi) = sample_initial(&spec, i).unwrap();
        let a = s.p_y.atan2(s.p_x).rem_euclid(tau);
        angle[((a / tau * bins as f64) as usize).min(bins - 1)] += 1;
        phase[((phi / tau * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let expected = N as f64 / bins as f64;
    let dist = ChiSquared::new((bins - 1) as f64).unwrap();
    for counts in [&angle, &phase] {
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(1.0 - dist.cdf(chi2) > 0.01, "chi2 = {chi2}");
    }
}

#[test]
fn sampling_is_order_independent() {
    let spec = EnsembleSpec::new(E, 1000, 5);
    let forward: Vec<_> = (0..1000).map(|i| sample_initial(&spec, i).unwrap()).collect();
    for i in (0..1000).rev().step_by(37) {
        assert_eq!(sample_initial(&spec, i).unwrap(), forward[i as usize]);
    }
}

#[test]
fn oracle_rejects_a_wrong_measure() {
    // Weighting positions by |p| = √(E - V) is what a 3-D momentum shell
    // would give; the comparison must detect it.
    let spec = EnsembleSpec::new(E, 8 * N as u64, 31);
    let region = spec.resolved_region().unwrap();
    let mut rng = derive_stream(0xbad, 0);
    let w_max = (E - V_FLOOR).sqrt();
    let mut counts = vec![0u64; GRID * GRID];
    let (mut kept, mut i) = (0, 0);
    while kept < N {
        let (s, _) = sample_initial(&spec, i).unwrap();
        i += 1;
        let v = potential_at(s.x, s.y, 0.0).unwrap();
        if v < V_FLOOR || rng.random::<f64>() * w_max > (E - v).sqrt() {
            continue;
        }
        counts[cell(&region, s.x, s.y)] += 1;
        kept += 1;
    }
    let (chi2, p) = two_sample_chi2(&counts, &thin_shell_oracle(&region, N));
    assert!(p < 0.01, "chi2 = {chi2}, p = {p}");
}
