//! Full 3-D trajectories launched near the saddle pair, displaced along the
//! symmetry-breaking unstable mode.
//!
//! Launch protocol: at time `t0` the configuration is the frozen-field saddle
//! pair for `ε(t0)`, shifted by `δ` along the unit symmetry-breaking
//! eigenvector. The remaining energy `Ẽ - V` is put into momentum along the
//! (symmetric) reaction coordinate, pointing away from the nucleus.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::stability::saddle_modes_full3d;
use crate::error::{Error, Result};
use crate::field::{Field, FieldParams};
use crate::integrator::{integrate, IntegratorConfig, SampleMode, Termination, TrajectoryRecord};
use crate::physics::full3d::{norm, potential_full3d, FullModel};

/// An electron counts as free when its one-body energy is positive and it
/// is at least this far from the nucleus.
pub const FREE_RADIUS: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EscapeClass {
    /// Both electrons leave on the same side of the nucleus.
    SymmetricDouble,
    /// One electron leaves and the other stays bound.
    SingleRecapture,
    /// Both electrons leave, in opposite directions along the field.
    SequentialDouble,
    NoEscape,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    /// Displacements `δ` along the symmetry-breaking mode (a.u.).
    pub displacements: Vec<f64>,
    /// Total two-electron energy at launch; just above the saddle energy by
    /// default, so the pair starts slowly.
    pub energy: f64,
    /// Launch time; `None` means the envelope peak `T_d/2`.
    pub t0: Option<f64>,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            displacements: (0..=40).map(|k| 0.025 * f64::from(k)).collect(),
            energy: -1.65,
            t0: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PerturbedRun {
    pub displacement: f64,
    pub class: EscapeClass,
    pub record: TrajectoryRecord<12>,
}

/// One-body energy `|p|²/2 - 2/|r|` of electron `i` (0 or 1).
pub fn one_body_energy(y: &[f64; 12], i: usize) -> f64 {
    let r = [y[3 * i], y[3 * i + 1], y[3 * i + 2]];
    let p = [y[6 + 3 * i], y[7 + 3 * i], y[8 + 3 * i]];
    0.5 * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) - 2.0 / norm(&r)
}

pub fn classify_full3d(record: &TrajectoryRecord<12>) -> EscapeClass {
    if record.termination != Termination::Completed {
        return EscapeClass::Rejected;
    }
    let y = record.last().state;
    let free = |i: usize| {
        let r = norm(&[y[3 * i], y[3 * i + 1], y[3 * i + 2]]);
        one_body_energy(&y, i) > 0.0 && r > FREE_RADIUS
    };
    match (free(0), free(1)) {
        (true, true) if y[6] * y[9] > 0.0 => EscapeClass::SymmetricDouble,
        (true, true) => EscapeClass::SequentialDouble,
        (true, false) | (false, true) => EscapeClass::SingleRecapture,
        (false, false) => EscapeClass::NoEscape,
    }
}

/// Initial 12-dimensional state for displacement `delta`.
pub fn launch_state(params: &FieldParams, t0: f64, energy: f64, delta: f64) -> Result<[f64; 12]> {
    let eps = params.effective_field(t0);
    let modes = saddle_modes_full3d(eps)?;
    let q0 = modes.configuration;
    let brk = modes.symmetry_breaking();
    let mut rc = modes.reaction_coordinate();
    // Orient the reaction coordinate away from the nucleus.
    let outward: f64 = (0..6).map(|k| rc[k] * q0[k]).sum();
    if outward < 0.0 {
        rc.iter_mut().for_each(|v| *v = -*v);
    }
    let q: [f64; 6] = std::array::from_fn(|k| q0[k] + delta * brk[k]);
    let kinetic = energy - potential_full3d(&q, eps)?;
    if kinetic < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "displacement {delta} leaves no kinetic energy at E = {energy}"
        )));
    }
    let speed = (2.0 * kinetic).sqrt();
    let mut y = [0.0; 12];
    y[..6].copy_from_slice(&q);
    for k in 0..6 {
        y[6 + k] = speed * rc[k];
    }
    Ok(y)
}

/// Runs and classifies one trajectory per displacement.
pub fn perturbed_saddle_trajectories(
    params: &FieldParams,
    spec: &PerturbationSpec,
    config: &IntegratorConfig,
) -> Result<Vec<PerturbedRun>> {
    let t0 = spec.t0.unwrap_or(0.5 * params.t_d);
    let model = FullModel::new(Field::Pulse(*params));
    spec.displacements
        .iter()
        .map(|&delta| {
            let y0 = launch_state(params, t0, spec.energy, delta)?;
            let record = integrate(&model, y0, t0, config)?;
            let class = classify_full3d(&record);
            Ok(PerturbedRun {
                displacement: delta,
                class,
                record,
            })
        })
        .collect()
}

/// Integrator settings for the perturbation scan: pulse plus coda, every
/// step recorded so the tracks can be plotted.
pub fn default_scan_config(params: &FieldParams) -> IntegratorConfig {
    IntegratorConfig {
        sample_mode: SampleMode::Every,
        ..IntegratorConfig::for_pulse(params.t_d)
    }
}

pub const FULL3D_CSV_HEADER: &str = "t,x1,y1,z1,x2,y2,z2,px1,py1,pz1,px2,py2,pz2,H";

pub fn write_full3d_csv<W: Write>(record: &TrajectoryRecord<12>, mut out: W) -> io::Result<()> {
    writeln!(out, "{FULL3D_CSV_HEADER}")?;
    for s in &record.samples {
        write!(out, "{:.16e}", s.t)?;
        for v in &s.state {
            write!(out, ",{v:.16e}")?;
        }
        writeln!(out, ",{:.16e}", s.energy)?;
    }
    Ok(())
}
