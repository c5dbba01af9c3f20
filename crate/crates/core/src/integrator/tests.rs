use std::f64::consts::PI;

use super::*;
use crate::field::{Field, FieldParams};
use crate::physics::sym2e::{hamiltonian_sym2e, SymModel, SymState2e};
use crate::saddle::saddle_sym2e;

/// Planar Kepler problem `H = p²/2 - 1/r`, used as a closed-form oracle.
struct Kepler {
    field: Field,
}

impl Model<4> for Kepler {
    fn field(&self) -> &Field {
        &self.field
    }
    fn flow(&self, _t: f64, y: &[f64; 4], dy: &mut [f64; 4]) -> Result<f64> {
        let r = y[0].hypot(y[1]);
        let r3 = r * r * r;
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = -y[0] / r3;
        dy[3] = -y[1] / r3;
        Ok(0.0)
    }
    fn energy(&self, _t: f64, y: &[f64; 4]) -> Result<f64> {
        Ok(0.5 * (y[2] * y[2] + y[3] * y[3]) - 1.0 / y[0].hypot(y[1]))
    }
    fn escape_distance(&self, y: &[f64; 4]) -> f64 {
        y[0].hypot(y[1])
    }
    fn closest_approach(&self, y: &[f64; 4]) -> f64 {
        y[0].hypot(y[1])
    }
    fn radial_velocity(&self, y: &[f64; 4]) -> f64 {
        (y[0] * y[2] + y[1] * y[3]) / y[0].hypot(y[1])
    }
    fn saddle_coordinate(&self, y: &[f64; 4]) -> f64 {
        y[0].hypot(y[1])
    }
    fn field_axis(&self, y: &[f64; 4]) -> f64 {
        y[0]
    }
    fn saddle_constant(&self) -> Option<f64> {
        None
    }
}

/// Closed-form Kepler position for `a = 1`, eccentricity `e`, pericentre on
/// the +x axis at `t = 0`.
fn kepler_position(e: f64, t: f64) -> (f64, f64) {
    let mean = t.rem_euclid(2.0 * PI);
    let mut ecc = mean;
    for _ in 0..100 {
        ecc -= (ecc - e * ecc.sin() - mean) / (1.0 - e * ecc.cos());
    }
    (ecc.cos() - e, (1.0 - e * e).sqrt() * ecc.sin())
}

#[test]
fn kepler_energy_and_phase_over_100_periods() {
    let e: f64 = 0.5;
    // Pericentre r = a(1-e), speed from vis-viva.
    let r_p = 1.0 - e;
    let v_p = ((1.0 + e) / (1.0 - e)).sqrt();
    let model = Kepler { field: Field::zero() };
    let periods = 100.0;
    let config = IntegratorConfig {
        t_end: periods * 2.0 * PI,
        sample_mode: SampleMode::Endpoints,
        ..IntegratorConfig::default()
    };
    let rec = integrate(&model, [r_p, 0.0, 0.0, v_p], 0.0, &config).unwrap();
    assert_eq!(rec.termination, Termination::Completed);
    let h0 = rec.first().energy;
    assert!((h0 + 0.5).abs() < 1e-14);
    let drift = ((rec.last().energy - h0) / h0).abs();
    assert!(drift < 1e-8, "energy drift {drift:e}");
    let (x, y) = kepler_position(e, rec.last().t);
    let s = rec.last().state;
    assert!(
        (s[0] - x).abs() < 1e-6 && (s[1] - y).abs() < 1e-6,
        "{s:?} vs ({x}, {y})"
    );
}

#[test]
fn zero_field_conserves_energy_over_pulse_window() {
    let params = FieldParams::four_cycle(0.0, 0.057, 0.0).unwrap();
    let model = SymModel::new(params);
    let spec = crate::sampling::EnsembleSpec::new(-0.58, 40, 5);
    let config = IntegratorConfig {
        t_end: params.t_d,
        ..IntegratorConfig::default()
    };
    let mut completed = 0;
    for i in 0..spec.n_samples {
        let (s, _) = crate::sampling::sample_initial(&spec, i).unwrap();
        let rec = integrate(&model, s.to_array(), 0.0, &config).unwrap();
        if rec.termination != Termination::Completed {
            continue;
        }
        completed += 1;
        let h0 = rec.first().energy;
        for sample in &rec.samples {
            assert!(((sample.energy - h0) / h0).abs() < 1e-9, "sample {i}");
        }
    }
    assert!(completed >= 20, "{completed}");
}

#[test]
fn energy_law_with_field() {
    let params = FieldParams::four_cycle(0.137, 0.057, 0.4).unwrap();
    let model = SymModel::new(params);
    let s = SymState2e::new(-0.8, 1.1, 0.35, 0.2);
    let config = IntegratorConfig::for_pulse(params.t_d);
    let rec = integrate(&model, s.to_array(), 0.0, &config).unwrap();
    let h = rec.last().energy;
    assert!(rec.energy_law_residual() < 1e-6 * h.abs().max(1.0));
    assert!(rec.samples.windows(2).all(|w| w[1].t > w[0].t));
}

#[test]
fn frozen_saddle_is_stationary() {
    let eps = 0.137;
    let info = saddle_sym2e(eps).unwrap();
    let model = SymModel::new(Field::Frozen(eps));
    let y0 = [info.position[0], info.position[1], 0.0, 0.0];
    let config = IntegratorConfig {
        t_end: 10.0,
        ..IntegratorConfig::default()
    };
    let rec = integrate(&model, y0, 0.0, &config).unwrap();
    for s in &rec.samples {
        let d = (s.state[0] - y0[0]).hypot(s.state[1] - y0[1]);
        assert!(d < 1e-6, "drifted {d:e} at t={}", s.t);
    }
}

#[test]
fn deterministic_records() {
    let params = FieldParams::four_cycle(0.137, 0.057, 1.0).unwrap();
    let model = SymModel::new(params);
    let s = SymState2e::new(0.5, 1.5, -0.1, 0.3);
    let config = IntegratorConfig::for_pulse(params.t_d);
    let a = integrate(&model, s.to_array(), 0.0, &config).unwrap();
    let b = integrate(&model, s.to_array(), 0.0, &config).unwrap();
    assert_eq!(a, b);
}

#[test]
fn linear_predicate_root_is_exact() {
    let model = SymModel::new(Field::zero());
    let s = SymState2e::new(-1.0, 2.0, 0.1, 0.4);
    let config = IntegratorConfig {
        t_end: 5.0,
        ..IntegratorConfig::default()
    };
    let rec = integrate(&model, s.to_array(), 0.0, &config).unwrap();
    let root = 1.234_567_89;
    let (t, _) = locate_event(&model, &rec, |t, _| t - root, &config).unwrap();
    assert!((t - root).abs() < 1e-9, "{t}");
}

#[test]
fn refined_state_matches_dense_integration() {
    // Locate where x(t) crosses -0.9 and check H is still the conserved value.
    let model = SymModel::new(Field::zero());
    let s = SymState2e::new(-1.0, 2.0, 0.1, 0.4);
    let config = IntegratorConfig {
        t_end: 5.0,
        ..IntegratorConfig::default()
    };
    let rec = integrate(&model, s.to_array(), 0.0, &config).unwrap();
    let (_, y) = locate_event(&model, &rec, |_, y| y[0] + 0.9, &config).unwrap();
    assert!((y[0] + 0.9).abs() < 1e-9);
    let h = hamiltonian_sym2e(&SymState2e::from_array(y), 0.0, &Field::zero()).unwrap();
    assert!((h - rec.first().energy).abs() < 1e-10);
}

#[test]
fn constant_predicate_has_no_crossing() {
    let model = SymModel::new(Field::zero());
    let s = SymState2e::new(-1.0, 2.0, 0.1, 0.4);
    let config = IntegratorConfig {
        t_end: 2.0,
        ..IntegratorConfig::default()
    };
    let rec = integrate(&model, s.to_array(), 0.0, &config).unwrap();
    assert_eq!(locate_event(&model, &rec, |_, _| 1.0, &config), Err(Error::NoCrossing));
}

#[test]
fn underflow_is_reported() {
    let model = SymModel::new(Field::zero());
    let s = SymState2e::new(-1.0, 2.0, 0.1, 0.4);
    let config = IntegratorConfig {
        rel_tol: 1e-300,
        abs_tol: 1e-300,
        dt_min: 1e-3,
        t_end: 1.0,
        ..IntegratorConfig::default()
    };
    let rec = integrate(&model, s.to_array(), 0.0, &config).unwrap();
    assert_eq!(rec.termination, Termination::StepUnderflow);
}

#[test]
fn head_on_collision_is_a_deep_encounter() {
    // Both electrons fall straight onto the nucleus along a ray with sinθ > 1/8.
    let model = SymModel::new(Field::zero());
    let s = SymState2e::new(-1.0, 1.0, 0.0, 0.0);
    let config = IntegratorConfig {
        t_end: 50.0,
        ..IntegratorConfig::default()
    };
    let rec = integrate(&model, s.to_array(), 0.0, &config).unwrap();
    assert_eq!(rec.termination, Termination::DeepEncounterAbort);
}

#[test]
fn invalid_config_is_rejected() {
    let model = SymModel::new(Field::zero());
    let y = SymState2e::new(-1.0, 1.0, 0.0, 0.0).to_array();
    let bad = IntegratorConfig {
        dt_min: 1.0,
        dt_init: 0.1,
        t_end: 1.0,
        ..Default::default()
    };
    assert!(integrate(&model, y, 0.0, &bad).is_err());
    let ok = IntegratorConfig {
        t_end: 1.0,
        ..Default::default()
    };
    assert!(integrate(&model, y, -1.0, &ok).is_err());
    assert!(integrate(&model, [0.0, 0.0, 0.0, 0.0], 0.0, &ok).is_err());
}

#[test]
fn csv_has_header_and_full_precision() {
    let model = SymModel::new(Field::zero());
    let s = SymState2e::new(-1.0, 2.0, 0.1, 0.4);
    let config = IntegratorConfig {
        t_end: 0.5,
        ..IntegratorConfig::default()
    };
    let rec = integrate(&model, s.to_array(), 0.0, &config).unwrap();
    let mut buf = Vec::new();
    write_trajectory_csv(&rec, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), TRAJECTORY_CSV_HEADER);
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[1], -1.0);
    assert_eq!(first[5], rec.first().energy);
    assert_eq!(text.lines().count(), rec.samples.len() + 1);
}
