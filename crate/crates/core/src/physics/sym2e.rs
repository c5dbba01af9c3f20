//! Two electrons mirrored across the field axis: `(x, ±y, 0)` with momenta
//! `(p_x, ±p_y, 0)`.
//!
//! `H = p_x² + p_y² + V(x, y, t)`, `V = -4/r + 1/(2y) + 2 ε(t) x`.

use serde::{Deserialize, Serialize};

use super::{finite, Model};
use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymState2e {
    pub x: f64,
    /// Half the electron separation; strictly positive.
    pub y: f64,
    pub p_x: f64,
    pub p_y: f64,
}

impl SymState2e {
    pub fn new(x: f64, y: f64, p_x: f64, p_y: f64) -> Self {
        Self { x, y, p_x, p_y }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.p_x, self.p_y]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

fn check(x: f64, y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Singular("sym2e: y must be > 0"));
    }
    let r = x.hypot(y);
    if r == 0.0 || !r.is_finite() {
        return Err(Error::Singular("sym2e: r = 0"));
    }
    Ok(r)
}

/// `V(x, y, t) = -4/√(x²+y²) + 1/(2y) + 2ε(t)x`.
pub fn potential_sym2e(x: f64, y: f64, t: f64, field: &Field) -> Result<f64> {
    potential_at(x, y, field.eps(t))
}

/// `V` at frozen field `eps`.
pub fn potential_at(x: f64, y: f64, eps: f64) -> Result<f64> {
    let r = check(x, y)?;
    finite(-4.0 / r + 0.5 / y + 2.0 * eps * x, "sym2e potential")
}

/// `∇V` at frozen field `eps`.
pub fn gradient_at(x: f64, y: f64, eps: f64) -> Result<[f64; 2]> {
    let r = check(x, y)?;
    let r3 = r * r * r;
    let gx = 4.0 * x / r3 + 2.0 * eps;
    let gy = 4.0 * y / r3 - 0.5 / (y * y);
    Ok([finite(gx, "sym2e gradient")?, finite(gy, "sym2e gradient")?])
}

/// Second derivatives of `V` in the `(x, y)` plane.
pub fn hessian_sym2e(x: f64, y: f64) -> Result<[[f64; 2]; 2]> {
    let r = check(x, y)?;
    let r2 = r * r;
    let r3 = r2 * r;
    let r5 = r3 * r2;
    let hxx = 4.0 / r3 - 12.0 * x * x / r5;
    let hxy = -12.0 * x * y / r5;
    let hyy = 4.0 / r3 - 12.0 * y * y / r5 + 1.0 / (y * y * y);
    Ok([[hxx, hxy], [hxy, hyy]])
}

/// Total energy of both electrons.
pub fn hamiltonian_sym2e(s: &SymState2e, t: f64, field: &Field) -> Result<f64> {
    let v = potential_sym2e(s.x, s.y, t, field)?;
    Ok(s.p_x * s.p_x + s.p_y * s.p_y + v)
}

/// Phase-space velocity `(ẋ, ẏ, ṗ_x, ṗ_y)`.
///
/// The momenta are those of one electron, so `ẋ = p_x` and the force on the
/// reduced coordinate is shared between the two electrons: `ṗ = -∇V/2`.
pub fn rhs_sym2e(s: &SymState2e, t: f64, field: &Field) -> Result<SymState2e> {
    let [gx, gy] = gradient_at(s.x, s.y, field.eps(t))?;
    Ok(SymState2e::new(s.p_x, s.p_y, -0.5 * gx, -0.5 * gy))
}

/// Symmetric-subspace model as an integrable system.
#[derive(Debug, Clone, Copy)]
pub struct SymModel {
    pub field: Field,
}

impl SymModel {
    pub fn new(field: impl Into<Field>) -> Self {
        Self { field: field.into() }
    }
}

impl Model<4> for SymModel {
    fn field(&self) -> &Field {
        &self.field
    }

    #[inline]
    fn flow(&self, t: f64, y: &[f64; 4], dy: &mut [f64; 4]) -> Result<f64> {
        let [gx, gy] = gradient_at(y[0], y[1], self.field.eps(t))?;
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = -0.5 * gx;
        dy[3] = -0.5 * gy;
        Ok(2.0 * y[0] * self.field.eps_rate(t))
    }

    fn energy(&self, t: f64, y: &[f64; 4]) -> Result<f64> {
        hamiltonian_sym2e(&SymState2e::from_array(*y), t, &self.field)
    }

    fn escape_distance(&self, y: &[f64; 4]) -> f64 {
        y[0].hypot(y[1])
    }

    fn closest_approach(&self, y: &[f64; 4]) -> f64 {
        y[0].hypot(y[1]).min(2.0 * y[1])
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
        Some(3f64.sqrt())
    }
}
