//! Stark saddle location and frozen-field stability analysis.

pub mod ngon;
pub mod perturb;
pub mod stability;

pub use ngon::{ngon_saddle_criterion, ngon_saddle_scan, NGonSaddle};
pub use perturb::{perturbed_saddle_trajectories, EscapeClass, PerturbationSpec, PerturbedRun};
pub use stability::{
    axial_rotation_generator, classify_stability, classify_stability_modulo, hessian_full3d, hessian_full3d_fd,
    max_relative_difference, saddle_modes_full3d, saddle_stability_full3d, sign_counts, symmetric_eigenvalues,
    SaddleModes, SignCounts, StabilitySpectrum,
};

use std::f64::consts::PI;

use nalgebra::{Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::sym2e;

/// Saddle of the symmetric-subspace potential at frozen field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleInfo {
    pub r_s: f64,
    /// Polar angle from the field axis, `π/6` or `5π/6`.
    pub theta: f64,
    /// `(x_s, y_s)`.
    pub position: [f64; 2],
    pub v_s: f64,
    pub eps: f64,
}

impl SaddleInfo {
    /// Both electrons: `(x_s, ±y_s, 0)`.
    pub fn electron_positions(&self) -> [[f64; 3]; 2] {
        let [x, y] = self.position;
        [[x, y, 0.0], [x, -y, 0.0]]
    }

    /// Configuration vector `[r₁, r₂]` of the saddle pair.
    pub fn configuration(&self) -> [f64; 6] {
        let [x, y] = self.position;
        [x, y, 0.0, x, -y, 0.0]
    }
}

/// Locates the saddle `r_s² = √3/|ε|` on the downfield side: `θ = 5π/6` for
/// `ε > 0` and `π/6` for `ε < 0`, so that the field term `2εx` is negative.
pub fn saddle_sym2e(eps: f64) -> Result<SaddleInfo> {
    if eps == 0.0 || !eps.is_finite() {
        return Err(Error::ZeroField);
    }
    let r_s = (3f64.sqrt() / eps.abs()).sqrt();
    let theta = if eps > 0.0 { 5.0 * PI / 6.0 } else { PI / 6.0 };
    let position = [r_s * theta.cos(), r_s * theta.sin()];
    let v_s = sym2e::potential_at(position[0], position[1], eps)?;
    Ok(SaddleInfo {
        r_s,
        theta,
        position,
        v_s,
        eps,
    })
}

/// Eigenvalues (ascending) of the in-plane Hessian at a point.
pub fn in_plane_eigenvalues(x: f64, y: f64) -> Result<[f64; 2]> {
    let h = sym2e::hessian_sym2e(x, y)?;
    let m = Matrix2::new(h[0][0], h[0][1], h[1][0], h[1][1]);
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok([ev[0], ev[1]])
}

/// Norm of `∇V` of the symmetric-subspace potential.
pub fn gradient_norm_sym2e(x: f64, y: f64, eps: f64) -> Result<f64> {
    let [gx, gy] = sym2e::gradient_at(x, y, eps)?;
    Ok(gx.hypot(gy))
}
