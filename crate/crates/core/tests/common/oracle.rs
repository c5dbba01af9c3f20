//! Thin-shell rejection oracle for the microcanonical sampler.

use nsdi::physics::sym2e::potential_at;
use nsdi::sampling::{derive_stream, sample_initial, EnsembleSpec, SamplingRegion};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub const E: f64 = -0.58;
pub const N: usize = 100_000;
pub const GRID: usize = 20;
/// Both samplers are compared on `{V ≥ V_FLOOR}`, where the oracle's
/// momentum box stays bounded.
pub const V_FLOOR: f64 = -8.0;
pub const SHELL: f64 = 0.01;

pub fn cell(region: &SamplingRegion, x: f64, y: f64) -> usize {
    let fx = ((x - region.x_min) / (region.x_max - region.x_min) * GRID as f64) as usize;
    let fy = (y / region.y_max * GRID as f64) as usize;
    fx.min(GRID - 1) * GRID + fy.min(GRID - 1)
}

/// Brute-force 4-D rejection: uniform in a phase-space box, kept when the
/// energy falls inside a thin shell around `E`.
pub fn thin_shell_oracle(region: &SamplingRegion, n: usize) -> Vec<u64> {
    let mut rng = derive_stream(0xface, 0);
    let p_max = (E - V_FLOOR).sqrt();
    let mut counts = vec![0u64; GRID * GRID];
    let mut kept = 0;
    while kept < n {
        let x = region.x_min + (region.x_max - region.x_min) * rng.random::<f64>();
        let y = region.y_max * (1.0 - rng.random::<f64>());
        let v = potential_at(x, y, 0.0).unwrap();
        if !(V_FLOOR..=E).contains(&v) {
            continue;
        }
        let px = p_max * (2.0 * rng.random::<f64>() - 1.0);
        let py = p_max * (2.0 * rng.random::<f64>() - 1.0);
        let h = px * px + py * py + v;
        if (h - E).abs() <= 0.5 * SHELL {
            counts[cell(region, x, y)] += 1;
            kept += 1;
        }
    }
    counts
}

/// Two-sample χ² statistic and its p-value over the non-empty cells.
pub fn two_sample_chi2(a: &[u64], b: &[u64]) -> (f64, f64) {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let mut chi2 = 0.0;
    let mut cells = 0;
    for (&r, &s) in a.iter().zip(b) {
        if r + s == 0 {
            continue;
        }
        let d = ka * r as f64 - kb * s as f64;
        chi2 += d * d / (r + s) as f64;
        cells += 1;
    }
    let dist = ChiSquared::new((cells - 1) as f64).unwrap();
    (chi2, 1.0 - dist.cdf(chi2))
}

/// Sampler position counts on the oracle grid, `N` samples with `V ≥ V_FLOOR`.
pub fn sampler_counts(master_seed: u64) -> Vec<u64> {
    let spec = EnsembleSpec::new(E, 4 * N as u64, master_seed);
    let region = spec.resolved_region().unwrap();
    let mut counts = vec![0u64; GRID * GRID];
    let mut kept = 0;
    let mut i = 0;
    while kept < N {
        let (s, _) = sample_initial(&spec, i).unwrap();
        i += 1;
        if potential_at(s.x, s.y, 0.0).unwrap() < V_FLOOR {
            continue;
        }
        counts[cell(&region, s.x, s.y)] += 1;
        kept += 1;
    }
    counts
}

/// p-value of the sampler against the oracle.
pub fn sampler_vs_oracle_p(master_seed: u64) -> f64 {
    let region = EnsembleSpec::new(E, 1, master_seed).resolved_region().unwrap();
    two_sample_chi2(&sampler_counts(master_seed), &thin_shell_oracle(&region, N)).1
}
