//! `N` electrons on a regular polygon perpendicular to the field axis
//! (`C_Nv` symmetry, zero angular momentum about the axis):
//!
//! `H = N (p_ρ² + p_z²)/2 + V`,
//! `V = -N²/√(ρ²+z²) + N(N-1)/(4ρ sin(π/N)) + N z ε(t)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{finite, Model};
use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NGonState {
    pub n: u32,
    pub rho: f64,
    pub z: f64,
    pub p_rho: f64,
    pub p_z: f64,
}

impl NGonState {
    pub fn new(n: u32, rho: f64, z: f64, p_rho: f64, p_z: f64) -> Self {
        Self { n, rho, z, p_rho, p_z }
    }

    /// Phase-space layout `[ρ, z, p_ρ, p_z]`.
    pub fn to_array(self) -> [f64; 4] {
        [self.rho, self.z, self.p_rho, self.p_z]
    }

    pub fn from_array(n: u32, a: [f64; 4]) -> Self {
        Self::new(n, a[0], a[1], a[2], a[3])
    }
}

/// Coefficient of `1/ρ` in the inter-electron repulsion, `N(N-1)/(4 sin(π/N))`.
pub fn repulsion_coefficient(n: u32) -> f64 {
    let nf = f64::from(n);
    nf * (nf - 1.0) / (4.0 * (PI / nf).sin())
}

fn check(n: u32, rho: f64, z: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("ngon needs N >= 2, got {n}")));
    }
    if !(rho > 0.0) {
        return Err(Error::Singular("ngon: rho must be > 0"));
    }
    let r = rho.hypot(z);
    if !r.is_finite() {
        return Err(Error::Singular("ngon: non-finite radius"));
    }
    Ok(r)
}

/// `V` at frozen field `eps`.
pub fn potential_at(n: u32, rho: f64, z: f64, eps: f64) -> Result<f64> {
    let r = check(n, rho, z)?;
    let nf = f64::from(n);
    finite(
        -nf * nf / r + repulsion_coefficient(n) / rho + nf * z * eps,
        "ngon potential",
    )
}

/// `(∂V/∂ρ, ∂V/∂z)` at frozen field.
pub fn gradient_at(n: u32, rho: f64, z: f64, eps: f64) -> Result<[f64; 2]> {
    let r = check(n, rho, z)?;
    let nf = f64::from(n);
    let r3 = r * r * r;
    let g_rho = nf * nf * rho / r3 - repulsion_coefficient(n) / (rho * rho);
    let g_z = nf * nf * z / r3 + nf * eps;
    Ok([finite(g_rho, "ngon gradient")?, finite(g_z, "ngon gradient")?])
}

/// Hessian in `(ρ, z)`; the field term is linear and drops out.
pub fn hessian_at(n: u32, rho: f64, z: f64) -> Result<[[f64; 2]; 2]> {
    let r = check(n, rho, z)?;
    let n2 = f64::from(n).powi(2);
    let r2 = r * r;
    let r3 = r2 * r;
    let r5 = r3 * r2;
    let a = repulsion_coefficient(n);
    let hrr = n2 * (1.0 / r3 - 3.0 * rho * rho / r5) + 2.0 * a / (rho * rho * rho);
    let hrz = -3.0 * n2 * rho * z / r5;
    let hzz = n2 * (1.0 / r3 - 3.0 * z * z / r5);
    Ok([[hrr, hrz], [hrz, hzz]])
}

pub fn potential_ngon(rho: f64, z: f64, t: f64, n: u32, field: &Field) -> Result<f64> {
    potential_at(n, rho, z, field.eps(t))
}

pub fn hamiltonian_ngon(s: &NGonState, t: f64, field: &Field) -> Result<f64> {
    let v = potential_ngon(s.rho, s.z, t, s.n, field)?;
    Ok(f64::from(s.n) * 0.5 * (s.p_rho * s.p_rho + s.p_z * s.p_z) + v)
}

/// `ρ̇ = p_ρ`, `ż = p_z`, `ṗ = -∇V / N`.
pub fn rhs_ngon(s: &NGonState, t: f64, field: &Field) -> Result<NGonState> {
    let [gr, gz] = gradient_at(s.n, s.rho, s.z, field.eps(t))?;
    let nf = f64::from(s.n);
    Ok(NGonState::new(s.n, s.p_rho, s.p_z, -gr / nf, -gz / nf))
}

/// `r_s² |ε|` of the n-gon saddle, when one exists.
///
/// Critical points satisfy `sin³θ = c/N` with `c = (N-1)/(4 sin(π/N))` and
/// `r² |ε| = N |cos θ|`, so a saddle requires `c < N`.
pub fn saddle_constant(n: u32) -> Option<f64> {
    let nf = f64::from(n);
    let c = repulsion_coefficient(n) / nf;
    if n < 2 || c >= nf {
        return None;
    }
    let sin_theta = (c / nf).cbrt();
    let cos_theta = (1.0 - sin_theta * sin_theta).sqrt();
    Some(nf * cos_theta)
}

#[derive(Debug, Clone, Copy)]
pub struct NGonModel {
    pub n: u32,
    pub field: Field,
    spacing: f64,
}

impl NGonModel {
    pub fn new(n: u32, field: impl Into<Field>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("ngon needs N >= 2, got {n}")));
        }
        Ok(Self {
            n,
            field: field.into(),
            spacing: 2.0 * (PI / f64::from(n)).sin(),
        })
    }
}

impl Model<4> for NGonModel {
    fn field(&self) -> &Field {
        &self.field
    }

    #[inline]
    fn flow(&self, t: f64, y: &[f64; 4], dy: &mut [f64; 4]) -> Result<f64> {
        let eps = self.field.eps(t);
        let [gr, gz] = gradient_at(self.n, y[0], y[1], eps)?;
        let nf = f64::from(self.n);
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = -gr / nf;
        dy[3] = -gz / nf;
        Ok(nf * y[1] * self.field.eps_rate(t))
    }

    fn energy(&self, t: f64, y: &[f64; 4]) -> Result<f64> {
        hamiltonian_ngon(&NGonState::from_array(self.n, *y), t, &self.field)
    }

    fn escape_distance(&self, y: &[f64; 4]) -> f64 {
        y[0].hypot(y[1])
    }

    /// Nucleus distance or nearest-neighbour spacing `2ρ sin(π/N)`.
    fn closest_approach(&self, y: &[f64; 4]) -> f64 {
        y[0].hypot(y[1]).min(self.spacing * y[0])
    }

    fn radial_velocity(&self, y: &[f64; 4]) -> f64 {
        (y[0] * y[2] + y[1] * y[3]) / y[0].hypot(y[1])
    }

    fn saddle_coordinate(&self, y: &[f64; 4]) -> f64 {
        y[0].hypot(y[1])
    }

    fn field_axis(&self, y: &[f64; 4]) -> f64 {
        y[1]
    }

    fn saddle_constant(&self) -> Option<f64> {
        saddle_constant(self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::sym2e::potential_sym2e;

    #[test]
    fn two_gon_matches_symmetric_pair() {
        for eps in [0.0, 0.137, -0.05] {
            let f = Field::Frozen(eps);
            let a = potential_ngon(1.5, -2.0, 0.0, 2, &f).unwrap();
            let b = potential_sym2e(-2.0, 1.5, 0.0, &f).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn triangle_value() {
        let v = potential_ngon(2.0, 0.0, 0.0, 3, &Field::zero()).unwrap();
        let expected = -9.0 / 2.0 + 6.0 / (8.0 * (PI / 3.0).sin());
        assert!((v - expected).abs() < 1e-14);
    }

    #[test]
    fn kinetic_term_scales_with_n() {
        for n in 2..10 {
            let s = NGonState::new(n, 3.0, 0.5, 1.0, 1.0);
            let h = hamiltonian_ngon(&s, 0.0, &Field::zero()).unwrap();
            let v = potential_ngon(3.0, 0.5, 0.0, n, &Field::zero()).unwrap();
            assert!((h - v - f64::from(n)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_gon_saddle_constant_is_sqrt3() {
        assert!((saddle_constant(2).unwrap() - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn saddle_constant_boundary() {
        assert!(saddle_constant(13).is_some());
        assert!(saddle_constant(14).is_none());
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(potential_ngon(0.0, 1.0, 0.0, 3, &Field::zero()).is_err());
        assert!(potential_ngon(1.0, 1.0, 0.0, 1, &Field::zero()).is_err());
        assert!(NGonModel::new(1, Field::zero()).is_err());
    }
}
