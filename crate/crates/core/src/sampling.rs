//! Microcanonical initial conditions for the symmetric-subspace complex.
//!
//! For `H = p_x² + p_y² + V(x, y)` the microcanonical density
//! `δ(Ẽ - H)` integrated over the momentum plane is `π`, independent of
//! position. Drawing positions uniformly over the classically allowed region
//! `{V(x, y, 0) ≤ Ẽ}` and the momentum direction uniformly on the circle of
//! radius `√(Ẽ - V)` therefore samples the energy shell exactly.
//!
//! Each sample index owns an independent ChaCha stream, so ensembles can be
//! generated in any order or in parallel with identical results.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::sym2e::{potential_at, SymState2e};

/// Rejections allowed per sample before giving up.
pub const RETRY_BUDGET: u32 = 10_000;

/// Axis-aligned box `[x_min, x_max] × (0, y_max]` enclosing the allowed region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingRegion {
    pub x_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl SamplingRegion {
    /// Smallest box guaranteed to contain `{V(x, y, 0) ≤ Ẽ}` for `Ẽ < 0`.
    ///
    /// Along `y` the potential is lowest on `x = 0`, where `V = -3.5/y`, so
    /// `y ≤ 3.5/|Ẽ|`. Along `x`, `V > -4/|x|` gives `|x| < 4/|Ẽ|`.
    pub fn auto(e_tilde: f64) -> Result<Self> {
        if !(e_tilde < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "automatic region needs E_tilde < 0, got {e_tilde}"
            )));
        }
        let a = e_tilde.abs();
        Ok(Self {
            x_min: -4.0 / a,
            x_max: 4.0 / a,
            y_max: 3.5 / a,
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.x_min < self.x_max && self.y_max > 0.0) || !self.x_max.is_finite() || !self.y_max.is_finite() {
            return Err(Error::InvalidParameter(format!("degenerate sampling region {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(rename = "E_tilde")]
    pub e_tilde: f64,
    pub n_samples: u64,
    pub master_seed: u64,
    /// User-set box; `None` derives it from `E_tilde`.
    pub region: Option<SamplingRegion>,
}

impl EnsembleSpec {
    pub fn new(e_tilde: f64, n_samples: u64, master_seed: u64) -> Self {
        Self {
            e_tilde,
            n_samples,
            master_seed,
            region: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
        }
        if !self.e_tilde.is_finite() {
            return Err(Error::InvalidParameter("E_tilde must be finite".into()));
        }
        self.resolved_region()?.validate()
    }

    pub fn resolved_region(&self) -> Result<SamplingRegion> {
        match self.region {
            Some(r) => Ok(r),
            None => SamplingRegion::auto(self.e_tilde),
        }
    }

    /// Copy with the region filled in, as persisted in run manifests.
    pub fn resolved(&self) -> Result<Self> {
        Ok(Self {
            region: Some(self.resolved_region()?),
            ..*self
        })
    }
}

/// Independent, reproducible random stream for trajectory `index`.
pub fn derive_stream(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Draws the initial state and carrier phase of trajectory `index`.
pub fn sample_initial(spec: &EnsembleSpec, index: u64) -> Result<(SymState2e, f64)> {
    if index >= spec.n_samples {
        return Err(Error::InvalidParameter(format!(
            "index {index} out of range for {} samples",
            spec.n_samples
        )));
    }
    let region = spec.resolved_region()?;
    region.validate()?;
    let mut rng = derive_stream(spec.master_seed, index);
    draw(&mut rng, spec.e_tilde, &region)
}

pub(crate) fn draw<R: Rng>(rng: &mut R, e_tilde: f64, region: &SamplingRegion) -> Result<(SymState2e, f64)> {
    for _ in 0..RETRY_BUDGET {
        let x = region.x_min + (region.x_max - region.x_min) * rng.random::<f64>();
        // (0, y_max]: y = 0 is excluded.
        let y = region.y_max * (1.0 - rng.random::<f64>());
        let Ok(v) = potential_at(x, y, 0.0) else { continue };
        if v > e_tilde {
            continue;
        }
        let p = (e_tilde - v).sqrt();
        let angle = TAU * rng.random::<f64>();
        let phi = TAU * rng.random::<f64>();
        let (s, c) = angle.sin_cos();
        return Ok((SymState2e::new(x, y, p * c, p * s), phi));
    }
    Err(Error::RejectionOverflow { budget: RETRY_BUDGET })
}
