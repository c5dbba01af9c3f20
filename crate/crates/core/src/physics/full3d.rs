//! Full 3-D motion of two electrons around a charge-2 nucleus:
//!
//! `H = |p₁|²/2 + |p₂|²/2 - 2/|r₁| - 2/|r₂| + 1/|r₁ - r₂| + ε(t)(x₁ + x₂)`.
//!
//! Restricted to `r₁ = (x, y, 0)`, `r₂ = (x, -y, 0)` this is exactly the
//! symmetric-subspace Hamiltonian.

use serde::{Deserialize, Serialize};

use super::sym2e::SymState2e;
use super::{finite, Model};
use crate::error::{Error, Result};
use crate::field::Field;

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullState2e {
    pub r1: Vec3,
    pub r2: Vec3,
    pub p1: Vec3,
    pub p2: Vec3,
}

impl FullState2e {
    /// Phase-space layout `[r₁, r₂, p₁, p₂]`.
    pub fn to_array(self) -> [f64; 12] {
        let mut a = [0.0; 12];
        a[0..3].copy_from_slice(&self.r1);
        a[3..6].copy_from_slice(&self.r2);
        a[6..9].copy_from_slice(&self.p1);
        a[9..12].copy_from_slice(&self.p2);
        a
    }

    pub fn from_array(a: [f64; 12]) -> Self {
        Self {
            r1: [a[0], a[1], a[2]],
            r2: [a[3], a[4], a[5]],
            p1: [a[6], a[7], a[8]],
            p2: [a[9], a[10], a[11]],
        }
    }

    /// Embeds a symmetric-subspace state.
    pub fn from_symmetric(s: &SymState2e) -> Self {
        Self {
            r1: [s.x, s.y, 0.0],
            r2: [s.x, -s.y, 0.0],
            p1: [s.p_x, s.p_y, 0.0],
            p2: [s.p_x, -s.p_y, 0.0],
        }
    }
}

#[inline]
pub(crate) fn norm(v: &Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[inline]
fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn distances(r1: &Vec3, r2: &Vec3) -> Result<(f64, f64, f64)> {
    let d1 = norm(r1);
    let d2 = norm(r2);
    let d12 = norm(&sub(r1, r2));
    if d1 == 0.0 || d2 == 0.0 {
        return Err(Error::Singular("full3d: electron at nucleus"));
    }
    if d12 == 0.0 {
        return Err(Error::Singular("full3d: coincident electrons"));
    }
    Ok((d1, d2, d12))
}

/// Potential of the configuration `q = [r₁, r₂]` at frozen field `eps`.
pub fn potential_full3d(q: &[f64; 6], eps: f64) -> Result<f64> {
    let r1 = [q[0], q[1], q[2]];
    let r2 = [q[3], q[4], q[5]];
    let (d1, d2, d12) = distances(&r1, &r2)?;
    finite(
        -2.0 / d1 - 2.0 / d2 + 1.0 / d12 + eps * (q[0] + q[3]),
        "full3d potential",
    )
}

/// `∇V` with respect to `[r₁, r₂]`.
pub fn gradient_full3d(q: &[f64; 6], eps: f64) -> Result<[f64; 6]> {
    let r1 = [q[0], q[1], q[2]];
    let r2 = [q[3], q[4], q[5]];
    let (d1, d2, d12) = distances(&r1, &r2)?;
    let c1 = 2.0 / (d1 * d1 * d1);
    let c2 = 2.0 / (d2 * d2 * d2);
    let c12 = 1.0 / (d12 * d12 * d12);
    let mut g = [0.0; 6];
    for k in 0..3 {
        let dk = r1[k] - r2[k];
        g[k] = c1 * r1[k] - c12 * dk;
        g[3 + k] = c2 * r2[k] + c12 * dk;
    }
    g[0] += eps;
    g[3] += eps;
    for v in &g {
        finite(*v, "full3d gradient")?;
    }
    Ok(g)
}

/// Analytic Hessian of the potential with respect to `[r₁, r₂]`. The linear
/// field term drops out.
pub fn hessian_full3d_analytic(q: &[f64; 6]) -> Result<[[f64; 6]; 6]> {
    let r1 = [q[0], q[1], q[2]];
    let r2 = [q[3], q[4], q[5]];
    let (d1, d2, d12) = distances(&r1, &r2)?;
    let d = sub(&r1, &r2);
    let mut h = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            // Attraction -2/r: 2(δ/r³ - 3 r r^T / r⁵).
            let a1 = 2.0 * (delta / d1.powi(3) - 3.0 * r1[i] * r1[j] / d1.powi(5));
            let a2 = 2.0 * (delta / d2.powi(3) - 3.0 * r2[i] * r2[j] / d2.powi(5));
            // Repulsion 1/|d|: 3 d d^T / d⁵ - δ/d³.
            let m = 3.0 * d[i] * d[j] / d12.powi(5) - delta / d12.powi(3);
            h[i][j] = a1 + m;
            h[3 + i][3 + j] = a2 + m;
            h[i][3 + j] = -m;
            h[3 + i][j] = -m;
        }
    }
    Ok(h)
}

pub fn hamiltonian_full3d(s: &FullState2e, t: f64, field: &Field) -> Result<f64> {
    let a = s.to_array();
    let q: [f64; 6] = a[0..6].try_into().unwrap();
    let kinetic = 0.5 * a[6..12].iter().map(|p| p * p).sum::<f64>();
    Ok(kinetic + potential_full3d(&q, field.eps(t))?)
}

pub fn rhs_full3d(s: &FullState2e, t: f64, field: &Field) -> Result<FullState2e> {
    let y = s.to_array();
    let mut dy = [0.0; 12];
    FullModel::new(*field).flow(t, &y, &mut dy)?;
    Ok(FullState2e::from_array(dy))
}

#[derive(Debug, Clone, Copy)]
pub struct FullModel {
    pub field: Field,
}

impl FullModel {
    pub fn new(field: impl Into<Field>) -> Self {
        Self { field: field.into() }
    }
}

impl Model<12> for FullModel {
    fn field(&self) -> &Field {
        &self.field
    }

    #[inline]
    fn flow(&self, t: f64, y: &[f64; 12], dy: &mut [f64; 12]) -> Result<f64> {
        let q: &[f64; 6] = y[0..6].try_into().unwrap();
        let g = gradient_full3d(q, self.field.eps(t))?;
        for k in 0..6 {
            dy[k] = y[6 + k];
            dy[6 + k] = -g[k];
        }
        Ok((y[0] + y[3]) * self.field.eps_rate(t))
    }

    fn energy(&self, t: f64, y: &[f64; 12]) -> Result<f64> {
        hamiltonian_full3d(&FullState2e::from_array(*y), t, &self.field)
    }

    fn escape_distance(&self, y: &[f64; 12]) -> f64 {
        norm(&[y[0], y[1], y[2]]).min(norm(&[y[3], y[4], y[5]]))
    }

    fn closest_approach(&self, y: &[f64; 12]) -> f64 {
        let d12 = norm(&[y[0] - y[3], y[1] - y[4], y[2] - y[5]]);
        self.escape_distance(y).min(d12)
    }

    /// Radial velocity of the slower-receding electron.
    fn radial_velocity(&self, y: &[f64; 12]) -> f64 {
        let v1 = (y[0] * y[6] + y[1] * y[7] + y[2] * y[8]) / norm(&[y[0], y[1], y[2]]);
        let v2 = (y[3] * y[9] + y[4] * y[10] + y[5] * y[11]) / norm(&[y[3], y[4], y[5]]);
        v1.min(v2)
    }

    /// The leading electron decides when the barrier is crossed.
    fn saddle_coordinate(&self, y: &[f64; 12]) -> f64 {
        norm(&[y[0], y[1], y[2]]).max(norm(&[y[3], y[4], y[5]]))
    }

    fn field_axis(&self, y: &[f64; 12]) -> f64 {
        if norm(&[y[0], y[1], y[2]]) >= norm(&[y[3], y[4], y[5]]) {
            y[0]
        } else {
            y[3]
        }
    }

    fn saddle_constant(&self) -> Option<f64> {
        Some(3f64.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::sym2e::{hamiltonian_sym2e, rhs_sym2e};

    #[test]
    fn symmetric_embedding_reproduces_reduced_energy() {
        let field = Field::Frozen(0.11);
        let s = SymState2e::new(-1.7, 0.8, 0.25, -0.6);
        let full = FullState2e::from_symmetric(&s);
        let a = hamiltonian_full3d(&full, 0.0, &field).unwrap();
        let b = hamiltonian_sym2e(&s, 0.0, &field).unwrap();
        assert!((a - b).abs() <= 1e-12 * b.abs());
    }

    #[test]
    fn symmetric_embedding_reproduces_reduced_flow() {
        let field = Field::Frozen(-0.07);
        let s = SymState2e::new(0.9, 1.4, -0.3, 0.2);
        let full = rhs_full3d(&FullState2e::from_symmetric(&s), 0.0, &field).unwrap();
        let red = rhs_sym2e(&s, 0.0, &field).unwrap();
        let expected = FullState2e::from_symmetric(&red);
        for (a, b) in full.to_array().iter().zip(expected.to_array().iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn coincident_electrons_are_singular() {
        let q = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        assert!(potential_full3d(&q, 0.0).is_err());
        let q = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        assert!(gradient_full3d(&q, 0.0).is_err());
    }

    #[test]
    fn hessian_is_symmetric() {
        let h = hessian_full3d_analytic(&[0.3, -1.1, 0.4, -0.8, 0.6, 1.2]).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!((h[i][j] - h[j][i]).abs() < 1e-14);
            }
        }
    }
}
