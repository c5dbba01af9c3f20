//! Laser pulse: sin² envelope times a cosine carrier.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angular frequency of an 800 nm Ti:Sapphire carrier in atomic units.
///
/// This is a configuration default only; nothing in the model fixes ω.
pub const DEFAULT_OMEGA: f64 = 0.057;

/// Pulse parameters in atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    /// Peak field strength.
    pub f_peak: f64,
    /// Carrier angular frequency.
    pub omega: f64,
    /// Carrier phase in radians.
    pub phi: f64,
    /// Pulse duration.
    pub t_d: f64,
}

impl FieldParams {
    pub fn new(f_peak: f64, omega: f64, phi: f64, t_d: f64) -> Result<Self> {
        let params = Self {
            f_peak,
            omega,
            phi,
            t_d,
        };
        params.validate()?;
        Ok(params)
    }

    /// A pulse lasting exactly `cycles` carrier periods, `T_d = 2πn/ω`.
    pub fn n_cycle(f_peak: f64, omega: f64, phi: f64, cycles: u32) -> Result<Self> {
        Self::new(f_peak, omega, phi, 2.0 * PI * f64::from(cycles) / omega)
    }

    /// Four-cycle pulse, `T_d = 8π/ω`.
    pub fn four_cycle(f_peak: f64, omega: f64, phi: f64) -> Result<Self> {
        Self::n_cycle(f_peak, omega, phi, 4)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_peak >= 0.0 && self.f_peak.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "f_peak must be >= 0, got {}",
                self.f_peak
            )));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "omega must be > 0, got {}",
                self.omega
            )));
        }
        if !(self.t_d > 0.0 && self.t_d.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_d must be > 0, got {}", self.t_d)));
        }
        if !self.phi.is_finite() {
            return Err(Error::InvalidParameter("phi must be finite".into()));
        }
        Ok(())
    }

    pub fn with_phase(self, phi: f64) -> Self {
        Self { phi, ..self }
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Effective field `F f(t) cos(ωt + φ)`; exactly zero outside `[0, T_d]`.
    pub fn effective_field(&self, t: f64) -> f64 {
        if !(0.0..=self.t_d).contains(&t) {
            return 0.0;
        }
        self.f_peak * pulse_envelope(t, self) * (self.omega * t + self.phi).cos()
    }

    /// Time derivative of [`Self::effective_field`].
    pub fn effective_field_rate(&self, t: f64) -> f64 {
        if !(0.0..=self.t_d).contains(&t) {
            return 0.0;
        }
        let arg = PI * t / self.t_d;
        let (s, c) = arg.sin_cos();
        let phase = self.omega * t + self.phi;
        let envelope_rate = 2.0 * s * c * PI / self.t_d;
        self.f_peak * (envelope_rate * phase.cos() - s * s * self.omega * phase.sin())
    }

    /// First zero of the carrier `cos(ωt + φ)` strictly after `t + gap`
    /// and inside the pulse window.
    pub fn carrier_zero_after(&self, t: f64, gap: f64) -> Option<f64> {
        let after = t.max(0.0) + gap;
        let mut k = ((self.omega * after + self.phi - 0.5 * PI) / PI).floor();
        loop {
            let tz = ((k + 0.5) * PI - self.phi) / self.omega;
            if tz > self.t_d {
                return None;
            }
            if tz > after {
                return Some(tz);
            }
            k += 1.0;
        }
    }
}

/// `sin²(πt/T_d)`. Callers treat the field as zero outside `[0, T_d]`.
pub fn pulse_envelope(t: f64, params: &FieldParams) -> f64 {
    let s = (PI * t / params.t_d).sin();
    s * s
}

/// `ε(t) = F f(t) cos(ωt + φ)`, zero outside the pulse window.
pub fn effective_field(t: f64, params: &FieldParams) -> f64 {
    params.effective_field(t)
}

/// The field seen by a model: either the time-dependent pulse or a frozen
/// (adiabatic) value of `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Pulse(FieldParams),
    Frozen(f64),
}

impl Field {
    pub fn zero() -> Self {
        Field::Frozen(0.0)
    }

    #[inline]
    pub fn eps(&self, t: f64) -> f64 {
        match self {
            Field::Pulse(p) => p.effective_field(t),
            Field::Frozen(e) => *e,
        }
    }

    #[inline]
    pub fn eps_rate(&self, t: f64) -> f64 {
        match self {
            Field::Pulse(p) => p.effective_field_rate(t),
            Field::Frozen(_) => 0.0,
        }
    }

    /// Next time after `t + gap` where a pulse field passes through zero.
    pub fn next_zero_after(&self, t: f64, gap: f64) -> Option<f64> {
        match self {
            Field::Pulse(p) => p.carrier_zero_after(t, gap),
            Field::Frozen(_) => None,
        }
    }

    /// End of the pulse window, if any.
    pub fn pulse_end(&self) -> Option<f64> {
        match self {
            Field::Pulse(p) => Some(p.t_d),
            Field::Frozen(_) => None,
        }
    }
}

impl From<FieldParams> for Field {
    fn from(p: FieldParams) -> Self {
        Field::Pulse(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> FieldParams {
        FieldParams::four_cycle(0.137, DEFAULT_OMEGA, 0.0).unwrap()
    }

    #[test]
    fn envelope_values() {
        let p = params();
        assert_eq!(pulse_envelope(0.0, &p), 0.0);
        assert!((pulse_envelope(p.t_d / 2.0, &p) - 1.0).abs() < 1e-15);
        assert!((pulse_envelope(p.t_d / 4.0, &p) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn four_cycle_duration() {
        let p = params();
        assert_eq!(p.t_d, 2.0 * PI * 4.0 / DEFAULT_OMEGA);
        assert!((p.t_d - 8.0 * PI / DEFAULT_OMEGA).abs() < 1e-12);
    }

    #[test]
    fn field_at_peak_and_edges() {
        // ω T_d / 2 = 4π, so φ = 0 puts a carrier maximum at the envelope peak.
        let p = params();
        assert!((p.effective_field(p.t_d / 2.0) - 0.137).abs() < 1e-12);
        assert_eq!(p.effective_field(0.0), 0.0);
        assert_eq!(p.effective_field(-1.0), 0.0);
        assert_eq!(p.effective_field(p.t_d + 1e-9), 0.0);
    }

    #[test]
    fn field_third_of_pulse() {
        let p = FieldParams::four_cycle(0.1, 0.057, 0.0).unwrap();
        let t = p.t_d / 3.0;
        // sin²(π/3) = 3/4, ωT_d/3 = 8π/3 → cos = -1/2.
        let expected = 0.1 * 0.75 * (-0.5);
        assert!((p.effective_field(t) - expected).abs() < 1e-14);
    }

    #[test]
    fn rate_matches_finite_difference() {
        let p = params().with_phase(0.7);
        for k in 1..50 {
            let t = p.t_d * f64::from(k) / 50.0;
            let h = 1e-5;
            let fd = (p.effective_field(t + h) - p.effective_field(t - h)) / (2.0 * h);
            assert!((fd - p.effective_field_rate(t)).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(FieldParams::new(-1.0, 0.057, 0.0, 10.0).is_err());
        assert!(FieldParams::new(0.1, 0.0, 0.0, 10.0).is_err());
        assert!(FieldParams::new(0.1, 0.057, 0.0, 0.0).is_err());
    }

    #[test]
    fn bounded_by_peak() {
        let p = params().with_phase(1.3);
        for k in 0..=1000 {
            let t = p.t_d * f64::from(k) / 1000.0;
            assert!(p.effective_field(t).abs() <= p.f_peak);
        }
    }

    #[test]
    fn carrier_zeros_are_zeros_of_the_field() {
        let p = FieldParams::four_cycle(0.137, 0.057, 0.3).unwrap();
        let mut t = 0.0;
        let mut zeros = Vec::new();
        while let Some(tz) = p.carrier_zero_after(t, 1e-12) {
            assert!(p.effective_field(tz).abs() < 1e-14);
            zeros.push(tz);
            t = tz;
        }
        assert_eq!(zeros.len(), 8);
        for w in zeros.windows(2) {
            assert!((w[1] - w[0] - PI / 0.057).abs() < 1e-9);
        }
        assert_eq!(Field::Frozen(0.1).next_zero_after(0.0, 0.0), None);
    }
}
