//! Monte Carlo ensembles of symmetric-subspace trajectories.
//!
//! With the `parallel` feature the trajectories are distributed over a rayon
//! pool; otherwise they run in order on the calling thread. Both paths give
//! bit-identical outcomes because each trajectory owns its random stream.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::analysis::{classify, Outcome};
#[cfg(feature = "parallel")]
use crate::error::Error;
use crate::error::Result;
use crate::field::FieldParams;
use crate::integrator::{integrate, IntegratorConfig, SampleMode, ESCAPE_RADIUS};
use crate::physics::SymModel;
use crate::sampling::{sample_initial, EnsembleSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    /// Pulse shape; the carrier phase is redrawn per trajectory.
    pub field: FieldParams,
    pub sampling: EnsembleSpec,
    pub integrator: IntegratorConfig,
}

impl EnsembleConfig {
    /// Endpoint-only recording over the pulse plus its coda.
    pub fn new(field: FieldParams, sampling: EnsembleSpec) -> Self {
        let integrator = IntegratorConfig {
            sample_mode: SampleMode::Endpoints,
            ..IntegratorConfig::for_pulse(field.t_d)
        };
        Self {
            field,
            sampling,
            integrator,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.field.validate()?;
        self.sampling.validate()?;
        self.integrator.validate()
    }
}

/// Samples, propagates and classifies trajectory `index`.
pub fn simulate_one(config: &EnsembleConfig, index: u64) -> Result<Outcome> {
    let (state, phi) = sample_initial(&config.sampling, index)?;
    let model = SymModel::new(config.field.with_phase(phi));
    let record = integrate(&model, state.to_array(), 0.0, &config.integrator)?;
    let escape = config.integrator.escape_radius.unwrap_or(ESCAPE_RADIUS);
    Ok(classify(&model, &record, escape, index, phi))
}

pub fn run_sequential(config: &EnsembleConfig) -> Result<Vec<Outcome>> {
    config.validate()?;
    (0..config.sampling.n_samples)
        .map(|i| simulate_one(config, i))
        .collect()
}

#[cfg(feature = "parallel")]
pub fn run_parallel(config: &EnsembleConfig) -> Result<Vec<Outcome>> {
    config.validate()?;
    run_range(config, 0..config.sampling.n_samples)
}

/// Outcomes for the trajectory indices in `range`, in index order.
pub fn run_range(config: &EnsembleConfig, range: Range<u64>) -> Result<Vec<Outcome>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        range.into_par_iter().map(|i| simulate_one(config, i)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.map(|i| simulate_one(config, i)).collect()
    }
}

/// Parallel run on a dedicated pool of `threads` workers.
#[cfg(feature = "parallel")]
pub fn run_with_threads(config: &EnsembleConfig, threads: usize) -> Result<Vec<Outcome>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| run_parallel(config))
}

/// Runs the ensemble with the fastest available backend.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<Vec<Outcome>> {
    #[cfg(feature = "parallel")]
    {
        run_parallel(config)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_sequential(config)
    }
}
