//! Outcome classification, momentum histograms and the double-hump metric.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldParams;
use crate::integrator::{Termination, TrajectoryRecord};
use crate::physics::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeTag {
    DoubleIonized,
    BoundComplex,
    /// Numerical failure (deep encounter or step underflow).
    Rejected,
}

/// Final-state summary of one symmetric-subspace trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub index: u64,
    pub phi: f64,
    pub tag: OutcomeTag,
    /// Ion recoil along the field, `-2 p_x`.
    pub p_parallel_ion: f64,
    /// Transverse momentum `p_y` of the electron at `y > 0`.
    pub p_perp_electron: f64,
    #[serde(rename = "final_H")]
    pub final_h: f64,
    /// Time of the first outward crossing of the downfield saddle.
    pub escape_crossing_time: Option<f64>,
}

/// Classifies a finished symmetric-subspace run.
///
/// Double ionization needs positive final energy with the complex beyond the
/// escape radius and still receding.
pub fn classify<M: Model<4>>(
    model: &M,
    record: &TrajectoryRecord<4>,
    escape_radius: f64,
    index: u64,
    phi: f64,
) -> Outcome {
    let last = record.last();
    let y = &last.state;
    let tag = match record.termination {
        Termination::DeepEncounterAbort | Termination::StepUnderflow => OutcomeTag::Rejected,
        Termination::Completed => {
            let r = model.escape_distance(y);
            if last.energy > 0.0 && r >= escape_radius && model.radial_velocity(y) > 0.0 {
                OutcomeTag::DoubleIonized
            } else {
                OutcomeTag::BoundComplex
            }
        }
    };
    Outcome {
        index,
        phi,
        tag,
        p_parallel_ion: -2.0 * y[2],
        p_perp_electron: y[3],
        final_h: last.energy,
        escape_crossing_time: record.escape_crossing().map(|e| e.t),
    }
}

/// Uniform binning on `[lo, hi)`; the last bin is closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub lo: f64,
    pub hi: f64,
    pub n_bins: usize,
}

impl BinSpec {
    pub const PARALLEL: Self = Self {
        lo: -5.0,
        hi: 5.0,
        n_bins: 100,
    };
    pub const PERPENDICULAR: Self = Self {
        lo: 0.0,
        hi: 3.0,
        n_bins: 60,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || self.n_bins == 0 || !self.hi.is_finite() || !self.lo.is_finite() {
            return Err(Error::InvalidParameter(format!("bad binning {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn new(bins: BinSpec) -> Result<Self> {
        bins.validate()?;
        let w = (bins.hi - bins.lo) / bins.n_bins as f64;
        let mut edges: Vec<f64> = (0..=bins.n_bins).map(|i| bins.lo + w * i as f64).collect();
        edges[bins.n_bins] = bins.hi;
        Ok(Self {
            edges,
            counts: vec![0; bins.n_bins],
            underflow: 0,
            overflow: 0,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn push(&mut self, v: f64) {
        let (lo, hi) = (self.edges[0], self.edges[self.n_bins()]);
        if v < lo || v.is_nan() {
            self.underflow += 1;
        } else if v > hi {
            self.overflow += 1;
        } else {
            let w = (hi - lo) / self.n_bins() as f64;
            let i = (((v - lo) / w) as usize).min(self.n_bins() - 1);
            self.counts[i] += 1;
        }
    }

    /// Adds the counts of a histogram with identical edges.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.edges != other.edges {
            return Err(Error::InvalidParameter("histogram edges differ".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        Ok(())
    }

    pub fn in_range(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.in_range() + self.underflow + self.overflow
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    /// Probability density over the in-range entries; integrates to one.
    pub fn density(&self) -> Vec<f64> {
        let n = self.in_range() as f64;
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, e)| if n > 0.0 { c as f64 / (n * (e[1] - e[0])) } else { 0.0 })
            .collect()
    }

    /// Standard error of each density bin under Poisson counting.
    pub fn density_error(&self) -> Vec<f64> {
        let n = self.in_range() as f64;
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, e)| {
                if n > 0.0 {
                    (c as f64).sqrt() / (n * (e[1] - e[0]))
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "bin_left,bin_right,count,density")?;
        for ((e, c), d) in self.edges.windows(2).zip(&self.counts).zip(self.density()) {
            writeln!(out, "{:.6},{:.6},{},{:.9e}", e[0], e[1], c, d)?;
        }
        Ok(())
    }
}

fn double_ionized(outcomes: &[Outcome]) -> impl Iterator<Item = &Outcome> {
    outcomes.iter().filter(|o| o.tag == OutcomeTag::DoubleIonized)
}

fn histogram_of(outcomes: &[Outcome], bins: BinSpec, f: impl Fn(&Outcome) -> f64) -> Result<Histogram> {
    let mut h = Histogram::new(bins)?;
    let mut any = false;
    for o in double_ionized(outcomes) {
        h.push(f(o));
        any = true;
    }
    if any {
        Ok(h)
    } else {
        Err(Error::EmptyEnsemble)
    }
}

/// Ion momentum along the field for the double-ionized outcomes.
pub fn ion_parallel_histogram(outcomes: &[Outcome], bins: BinSpec) -> Result<Histogram> {
    histogram_of(outcomes, bins, |o| o.p_parallel_ion)
}

/// Signed transverse momentum of one electron.
pub fn perp_electron_histogram(outcomes: &[Outcome], bins: BinSpec) -> Result<Histogram> {
    histogram_of(outcomes, bins, |o| o.p_perp_electron)
}

/// Transverse momentum magnitude `|p_y|` of one electron.
pub fn perp_electron_magnitude_histogram(outcomes: &[Outcome], bins: BinSpec) -> Result<Histogram> {
    histogram_of(outcomes, bins, |o| o.p_perp_electron.abs())
}

/// Width of the centered moving average applied before peak finding.
pub const SMOOTHING_BINS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumpMetric {
    pub n_local_maxima: usize,
    /// Smoothed density at zero momentum over the mean smoothed peak height.
    pub valley_depth_ratio: f64,
    pub peak_positions: Vec<f64>,
}

/// Centered moving average; windows are truncated at the edges.
pub fn smooth(values: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    (0..values.len())
        .map(|i| {
            let a = i.saturating_sub(half);
            let b = (i + half + 1).min(values.len());
            values[a..b].iter().sum::<f64>() / (b - a) as f64
        })
        .collect()
}

/// Counts strict interior maxima of the smoothed density and measures the
/// dip at zero momentum. The ratio is NaN when zero lies outside the range
/// or no maximum exists.
pub fn hump_metric(h: &Histogram) -> HumpMetric {
    let s = smooth(&h.density(), SMOOTHING_BINS);
    let centers = h.centers();
    let peaks: Vec<usize> = (1..s.len().saturating_sub(1))
        .filter(|&i| s[i] > s[i - 1] && s[i] > s[i + 1])
        .collect();
    let at_zero = interpolate(&centers, &s, 0.0);
    let mean_peak = peaks.iter().map(|&i| s[i]).sum::<f64>() / peaks.len() as f64;
    HumpMetric {
        n_local_maxima: peaks.len(),
        valley_depth_ratio: at_zero / mean_peak,
        peak_positions: peaks.iter().map(|&i| centers[i]).collect(),
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if xs.is_empty() || x < xs[0] || x > xs[xs.len() - 1] {
        return f64::NAN;
    }
    let j = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[j - 1], xs[j]);
    if x1 == x0 {
        return ys[j - 1];
    }
    ys[j - 1] + (ys[j] - ys[j - 1]) * (x - x0) / (x1 - x0)
}

/// Times in `(0, T_d)` where `ε(t)` has a local extremum.
pub fn field_extrema(params: &FieldParams) -> Vec<f64> {
    let n = 20_000;
    let dt = params.t_d / n as f64;
    let rate = |t: f64| params.effective_field_rate(t);
    let mut out = Vec::new();
    for i in 1..n - 1 {
        let (a, b) = (i as f64 * dt, (i + 1) as f64 * dt);
        let (fa, fb) = (rate(a), rate(b));
        if fa == 0.0 {
            out.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = rate(mid);
                if fm * flo > 0.0 {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
    }
    out
}

/// Distance in time from `t` to the nearest entry of `extrema`.
pub fn distance_to_nearest(t: f64, extrema: &[f64]) -> f64 {
    extrema.iter().map(|&e| (t - e).abs()).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n_total: u64,
    pub n_double: u64,
    pub n_bound: u64,
    pub n_rejected: u64,
    pub hump_metric: Option<HumpMetric>,
}

pub fn summarize(outcomes: &[Outcome], bins: BinSpec) -> EnsembleSummary {
    let count = |tag| outcomes.iter().filter(|o| o.tag == tag).count() as u64;
    EnsembleSummary {
        n_total: outcomes.len() as u64,
        n_double: count(OutcomeTag::DoubleIonized),
        n_bound: count(OutcomeTag::BoundComplex),
        n_rejected: count(OutcomeTag::Rejected),
        hump_metric: ion_parallel_histogram(outcomes, bins).ok().map(|h| hump_metric(&h)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian(rng: &mut ChaCha8Rng, mu: f64, sigma: f64) -> f64 {
        use rand::Rng;
        let (u1, u2): (f64, f64) = (1.0 - rng.random::<f64>(), rng.random());
        mu + sigma * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    fn outcomes(values: impl Iterator<Item = f64>) -> Vec<Outcome> {
        values
            .enumerate()
            .map(|(i, v)| Outcome {
                index: i as u64,
                phi: 0.0,
                tag: OutcomeTag::DoubleIonized,
                p_parallel_ion: v,
                p_perp_electron: -v / 2.0,
                final_h: 1.0,
                escape_crossing_time: None,
            })
            .collect()
    }

    #[test]
    fn bimodal_sample_has_two_humps() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v: Vec<f64> = (0..200_000)
            .map(|i| gaussian(&mut rng, if i % 2 == 0 { 2.0 } else { -2.0 }, 0.6))
            .collect();
        let h = ion_parallel_histogram(&outcomes(v.into_iter()), BinSpec::PARALLEL).unwrap();
        let m = hump_metric(&h);
        assert_eq!(m.n_local_maxima, 2);
        assert!(m.valley_depth_ratio < 0.1);
        for (p, want) in m.peak_positions.iter().zip([-2.0, 2.0]) {
            assert!((p - want).abs() < 0.3);
        }
    }

    #[test]
    fn close_humps_are_resolved() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v: Vec<f64> = (0..10_000)
            .map(|i| gaussian(&mut rng, if i % 2 == 0 { 1.0 } else { -1.0 }, 0.3))
            .collect();
        let m = hump_metric(&ion_parallel_histogram(&outcomes(v.into_iter()), BinSpec::PARALLEL).unwrap());
        assert_eq!(m.n_local_maxima, 2);
        assert!(m.valley_depth_ratio < 0.5);
    }

    #[test]
    fn unimodal_sample_has_one_hump() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v: Vec<f64> = (0..200_000).map(|_| gaussian(&mut rng, 0.0, 1.0)).collect();
        let m = hump_metric(&ion_parallel_histogram(&outcomes(v.into_iter()), BinSpec::PARALLEL).unwrap());
        assert_eq!(m.n_local_maxima, 1);
        assert!((m.valley_depth_ratio - 1.0).abs() < 0.05);
    }

    #[test]
    fn density_integrates_to_one_and_counts_are_conserved() {
        let v = [-6.0, -5.0, -0.1, 0.0, 0.1, 4.99, 5.0, 7.0];
        let h = ion_parallel_histogram(&outcomes(v.into_iter()), BinSpec::PARALLEL).unwrap();
        assert_eq!(h.total(), v.len() as u64);
        assert_eq!((h.underflow, h.overflow), (1, 1));
        let mass: f64 = h
            .density()
            .iter()
            .zip(h.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum();
        assert!((mass - 1.0).abs() < 1e-9);
    }

    #[test]
    fn merge_adds_counts() {
        let a = ion_parallel_histogram(&outcomes([0.5, 1.5].into_iter()), BinSpec::PARALLEL).unwrap();
        let b = ion_parallel_histogram(&outcomes([0.5, 9.0].into_iter()), BinSpec::PARALLEL).unwrap();
        let mut m = a.clone();
        m.merge(&b).unwrap();
        assert_eq!(m.total(), 4);
        assert_eq!(m.overflow, 1);
        let other = Histogram::new(BinSpec::PERPENDICULAR).unwrap();
        assert!(m.merge(&other).is_err());
    }

    #[test]
    fn empty_ensemble_is_an_error() {
        let mut o = outcomes([1.0].into_iter());
        o[0].tag = OutcomeTag::BoundComplex;
        assert_eq!(ion_parallel_histogram(&o, BinSpec::PARALLEL), Err(Error::EmptyEnsemble));
        assert!(summarize(&o, BinSpec::PARALLEL).hump_metric.is_none());
    }

    #[test]
    fn magnitude_histogram_folds_sign() {
        let h = perp_electron_magnitude_histogram(&outcomes([-2.0, 2.0].into_iter()), BinSpec::PERPENDICULAR).unwrap();
        assert_eq!(h.in_range(), 2);
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
    }

    #[test]
    fn csv_layout() {
        let h = ion_parallel_histogram(&outcomes([0.05].into_iter()), BinSpec::PARALLEL).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "bin_left,bin_right,count,density");
        assert_eq!(lines.len(), 101);
        assert_eq!(lines[51], "0.000000,0.100000,1,1.000000000e1");
    }

    #[test]
    fn extrema_of_four_cycle_pulse() {
        let p = FieldParams::four_cycle(0.137, 0.057, 0.0).unwrap();
        let ex = field_extrema(&p);
        // Eight half-cycles give close to eight extrema of the carrier.
        assert!((7..=9).contains(&ex.len()), "{}", ex.len());
        for w in ex.windows(2) {
            assert!((w[1] - w[0] - std::f64::consts::PI / 0.057).abs() < 0.25 * std::f64::consts::PI / 0.057);
        }
        assert_eq!(distance_to_nearest(ex[2], &ex), 0.0);
    }

    #[test]
    fn smoothing_preserves_constants() {
        assert_eq!(smooth(&[2.0; 7], 5), vec![2.0; 7]);
        assert_eq!(smooth(&[0.0, 0.0, 5.0, 0.0, 0.0], 5)[2], 1.0);
    }
}
