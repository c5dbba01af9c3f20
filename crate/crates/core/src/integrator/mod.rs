//! Adaptive propagation of any [`Model`] through the pulse and a field-free
//! coda, with close-encounter guards and saddle-crossing events.

mod dop853;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::Model;

/// Default escape radius for the field-free coda.
pub const ESCAPE_RADIUS: f64 = 500.0;

/// Step-size controller constants (Hairer's DOP853 defaults with Lund
/// stabilization, i.e. a PI controller).
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;
const BETA: f64 = 0.04;
const EXPO: f64 = 1.0 / 8.0 - BETA * 0.2;

/// Event refinement stops once the bracket is this narrow (a.u.).
const EVENT_TIME_TOL: f64 = 1e-9;
const EVENT_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// Keep every accepted step.
    Every,
    /// Keep only the initial and final states.
    Endpoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub dt_init: f64,
    /// Smallest admissible step before the run is declared a failure.
    pub dt_min: f64,
    /// Particle separations below this flag a deep encounter.
    pub r_min: f64,
    pub t_end: f64,
    /// Stop once the escape distance exceeds this, but only after the pulse.
    pub escape_radius: Option<f64>,
    pub sample_mode: SampleMode,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-12,
            dt_init: 1e-2,
            dt_min: 1e-12,
            r_min: 1e-3,
            t_end: 0.0,
            escape_radius: None,
            sample_mode: SampleMode::Every,
        }
    }
}

impl IntegratorConfig {
    /// Pulse plus a coda of `2 T_d`, stopping early at the escape radius.
    pub fn for_pulse(t_d: f64) -> Self {
        Self {
            t_end: 3.0 * t_d,
            escape_radius: Some(ESCAPE_RADIUS),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be > 0");
        }
        if !(self.dt_init > 0.0 && self.dt_min > 0.0 && self.dt_min < self.dt_init) {
            return bad("need 0 < dt_min < dt_init");
        }
        if !(self.r_min > 0.0) {
            return bad("r_min must be > 0");
        }
        if !self.t_end.is_finite() {
            return bad("t_end must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<const D: usize> {
    pub t: f64,
    pub state: [f64; D],
    /// `H(t)` at this sample.
    pub energy: f64,
    /// Accumulated `∫ ∂H/∂t dt` since the start.
    pub work: f64,
    /// Coordinate compared against the saddle radius.
    pub r: f64,
    /// Instantaneous saddle radius (infinite at zero field).
    pub r_saddle: f64,
}

impl<const D: usize> Sample<D> {
    pub fn saddle_distance(&self) -> f64 {
        self.r - self.r_saddle
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// The saddle coordinate passes the instantaneous saddle radius.
    SaddleCrossing {
        outward: bool,
        downfield: bool,
    },
    DeepEncounter,
    EscapeRadius,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event<const D: usize> {
    pub kind: EventKind,
    pub t: f64,
    pub state: [f64; D],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    DeepEncounterAbort,
    StepUnderflow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord<const D: usize> {
    pub samples: Vec<Sample<D>>,
    pub events: Vec<Event<D>>,
    pub termination: Termination,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl<const D: usize> TrajectoryRecord<D> {
    pub fn first(&self) -> &Sample<D> {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample<D> {
        self.samples.last().expect("record always holds the initial sample")
    }

    /// `|H(t₁) - H(t₀) - ∫∂H/∂t dt|` between the first and last sample.
    pub fn energy_law_residual(&self) -> f64 {
        let (a, b) = (self.first(), self.last());
        (b.energy - a.energy - (b.work - a.work)).abs()
    }

    pub fn saddle_crossings(&self) -> impl Iterator<Item = &Event<D>> {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::SaddleCrossing { .. }))
    }

    /// First outward crossing of the downfield saddle.
    pub fn escape_crossing(&self) -> Option<&Event<D>> {
        self.events.iter().find(|e| {
            matches!(
                e.kind,
                EventKind::SaddleCrossing {
                    outward: true,
                    downfield: true
                }
            )
        })
    }
}

/// Signed saddle predicate `r² |ε(t)| - r_s² |ε(t)|`: negative inside the
/// saddle radius, positive outside. Smooth through field zeros.
fn saddle_predicate<M: Model<D>, const D: usize>(model: &M, k: f64, t: f64, y: &[f64; D]) -> f64 {
    let r = model.saddle_coordinate(y);
    r * r * model.field().eps(t).abs() - k
}

fn is_downfield<M: Model<D>, const D: usize>(model: &M, t: f64, y: &[f64; D]) -> bool {
    model.field_axis(y) * model.field().eps(t) < 0.0
}

fn make_sample<M: Model<D>, const D: usize>(model: &M, t: f64, y: [f64; D], work: f64) -> Result<Sample<D>> {
    Ok(Sample {
        t,
        state: y,
        energy: model.energy(t, &y)?,
        work,
        r: model.saddle_coordinate(&y),
        r_saddle: model.saddle_radius(t),
    })
}

/// Illinois (modified regula falsi) root refinement of `g(τ)` on `[0, h]`,
/// where the state at `τ` comes from a single sub-step of size `τ`.
fn refine<M, G, const D: usize>(
    model: &M,
    t: f64,
    y: &[f64; D],
    k1: &[f64; D],
    g1: f64,
    h: f64,
    config: &IntegratorConfig,
    predicate: &G,
    g_lo: f64,
    g_hi: f64,
) -> Result<(f64, [f64; D])>
where
    M: Model<D>,
    G: Fn(f64, &[f64; D]) -> f64,
{
    let state_at = |tau: f64| -> Result<[f64; D]> {
        if tau == 0.0 {
            return Ok(*y);
        }
        Ok(dop853::step(model, t, y, k1, g1, tau, config.rel_tol, config.abs_tol)?.y)
    };
    let (mut a, mut fa) = (0.0, g_lo);
    let (mut b, mut fb) = (h, g_hi);
    let mut y_b = state_at(h)?;
    let mut side = 0i8;
    for _ in 0..EVENT_MAX_ITER {
        if (b - a).abs() <= EVENT_TIME_TOL {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let y_c = state_at(c)?;
        let fc = predicate(t + c, &y_c);
        if fc == 0.0 {
            return Ok((t + c, y_c));
        }
        if (fc > 0.0) == (fb > 0.0) {
            b = c;
            fb = fc;
            y_b = y_c;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
    }
    Ok((t + b, y_b))
}

/// Integrates `model` from `(t0, y0)` to `config.t_end`.
///
/// Never panics on numerical trouble: singular evaluations and step-size
/// collapse are reported through [`TrajectoryRecord::termination`]. An error
/// is returned only for invalid configuration or a singular initial state.
pub fn integrate<M: Model<D>, const D: usize>(
    model: &M,
    y0: [f64; D],
    t0: f64,
    config: &IntegratorConfig,
) -> Result<TrajectoryRecord<D>> {
    config.validate()?;
    if !(t0 >= 0.0) {
        return Err(Error::InvalidParameter(format!("t0 must be >= 0, got {t0}")));
    }
    let mut k1 = [0.0; D];
    let mut g1 = model.flow(t0, &y0, &mut k1)?;
    let initial = make_sample(model, t0, y0, 0.0)?;

    let saddle_k = model.saddle_constant();
    let pulse_end = model.field().pulse_end().unwrap_or(f64::NEG_INFINITY);
    let keep_all = config.sample_mode == SampleMode::Every;

    let mut record = TrajectoryRecord {
        samples: vec![initial],
        events: Vec::new(),
        termination: Termination::Completed,
        accepted_steps: 0,
        rejected_steps: 0,
    };

    let mut t = t0;
    let mut y = y0;
    let mut work = 0.0;
    let mut h = config.dt_init;
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;
    let mut singular_stage = false;
    let mut g_saddle = saddle_k.map(|k| saddle_predicate(model, k, t, &y));

    loop {
        let remaining = config.t_end - t;
        if remaining <= 0.0 {
            break;
        }
        if h >= remaining {
            h = remaining;
        } else if h < config.dt_min {
            record.termination = if singular_stage {
                Termination::DeepEncounterAbort
            } else {
                Termination::StepUnderflow
            };
            break;
        }

        // Land on every field zero so the saddle predicate, which equals -K
        // there, cannot be stepped over, and on the pulse end, where ε is
        // not smooth.
        let mut stretch = None;
        let zero = saddle_k.and_then(|_| model.field().next_zero_after(t, config.dt_min));
        let end = (pulse_end > t + config.dt_min).then_some(pulse_end);
        if let Some(stop) = [zero, end].into_iter().flatten().reduce(f64::min) {
            if stop < t + h {
                stretch = Some(h);
                h = stop - t;
            }
        }

        let trial = match dop853::step(model, t, &y, &k1, g1, h, config.rel_tol, config.abs_tol) {
            Ok(trial) => trial,
            Err(_) => {
                // A stage landed on a singularity: treat as a hard rejection.
                singular_stage = true;
                record.rejected_steps += 1;
                h *= 0.25;
                last_rejected = true;
                continue;
            }
        };

        let fac11 = trial.err.powf(EXPO);
        if trial.err <= 1.0 {
            let t_new = t + h;
            let y_new = trial.y;
            let mut k_new = [0.0; D];
            let g_new = match model.flow(t_new, &y_new, &mut k_new) {
                Ok(g) => g,
                Err(_) => {
                    record.termination = Termination::DeepEncounterAbort;
                    record.events.push(Event {
                        kind: EventKind::DeepEncounter,
                        t: t_new,
                        state: y_new,
                    });
                    break;
                }
            };

            if let (Some(k), Some(g_old)) = (saddle_k, g_saddle) {
                let g_now = saddle_predicate(model, k, t_new, &y_new);
                if (g_old < 0.0) != (g_now < 0.0) {
                    let pred = |tt: f64, yy: &[f64; D]| saddle_predicate(model, k, tt, yy);
                    let (tc, yc) = refine(model, t, &y, &k1, g1, h, config, &pred, g_old, g_now)?;
                    record.events.push(Event {
                        kind: EventKind::SaddleCrossing {
                            outward: g_now >= 0.0,
                            downfield: is_downfield(model, tc, &yc),
                        },
                        t: tc,
                        state: yc,
                    });
                }
                g_saddle = Some(g_now);
            }

            work += trial.work;
            t = t_new;
            y = y_new;
            k1 = k_new;
            g1 = g_new;
            record.accepted_steps += 1;
            singular_stage = false;

            let mut fac = fac11 / fac_old.powf(BETA);
            fac = (1.0 / FAC_MAX).max((1.0 / FAC_MIN).min(fac / SAFETY));
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            if let (Some(h_prev), false) = (stretch, last_rejected) {
                h_new = h_new.max(h_prev);
            }
            fac_old = trial.err.max(1e-4);
            last_rejected = false;

            if keep_all {
                match make_sample(model, t, y, work) {
                    Ok(s) => record.samples.push(s),
                    Err(_) => {
                        record.termination = Termination::DeepEncounterAbort;
                        break;
                    }
                }
            }

            if model.closest_approach(&y) < config.r_min {
                record.termination = Termination::DeepEncounterAbort;
                record.events.push(Event {
                    kind: EventKind::DeepEncounter,
                    t,
                    state: y,
                });
                break;
            }
            if let Some(r_esc) = config.escape_radius {
                if t >= pulse_end && model.escape_distance(&y) >= r_esc {
                    record.events.push(Event {
                        kind: EventKind::EscapeRadius,
                        t,
                        state: y,
                    });
                    break;
                }
            }
            h = h_new;
        } else {
            h /= (1.0 / FAC_MIN).min(fac11 / SAFETY);
            record.rejected_steps += 1;
            last_rejected = true;
        }
    }

    if record.last().t != t {
        if let Ok(s) = make_sample(model, t, y, work) {
            record.samples.push(s);
        }
    }
    Ok(record)
}

/// Locates where `predicate(t, state)` first changes sign between
/// consecutive samples, refining inside the bracketing step by re-stepping
/// from the earlier sample.
pub fn locate_event<M, G, const D: usize>(
    model: &M,
    record: &TrajectoryRecord<D>,
    predicate: G,
    config: &IntegratorConfig,
) -> Result<(f64, [f64; D])>
where
    M: Model<D>,
    G: Fn(f64, &[f64; D]) -> f64,
{
    for pair in record.samples.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let ga = predicate(a.t, &a.state);
        let gb = predicate(b.t, &b.state);
        if ga == 0.0 {
            return Ok((a.t, a.state));
        }
        if (ga < 0.0) != (gb < 0.0) {
            let mut k1 = [0.0; D];
            let g1 = model.flow(a.t, &a.state, &mut k1)?;
            return refine(model, a.t, &a.state, &k1, g1, b.t - a.t, config, &predicate, ga, gb);
        }
    }
    Err(Error::NoCrossing)
}

pub const TRAJECTORY_CSV_HEADER: &str = "t,x_or_rho,y_or_z,px,py,H,r,r_saddle";

/// Writes a four-dimensional trajectory as CSV with 17 significant digits.
pub fn write_trajectory_csv<W: Write>(record: &TrajectoryRecord<4>, mut out: W) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_CSV_HEADER}")?;
    for s in &record.samples {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.t, s.state[0], s.state[1], s.state[2], s.state[3], s.energy, s.r, s.r_saddle
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
