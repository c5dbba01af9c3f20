//! Frozen-field linearization of the full 3-D two-electron potential at the
//! symmetric saddle pair.
//!
//! The potential is invariant under rotations about the field axis, so its
//! Hessian at any critical point has an exact zero mode generated by that
//! rotation. [`classify_stability`] rejects such a spectrum as degenerate;
//! [`classify_stability_modulo`] factors out known symmetry generators and
//! reports them as neutral directions.

use nalgebra::{DMatrix, Matrix6, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::saddle_sym2e;
use crate::error::{Error, Result};
use crate::physics::full3d::{hessian_full3d_analytic, potential_full3d};

pub type Matrix6x6 = [[f64; 6]; 6];

/// Eigenvalues at or below this magnitude count as zero.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Default step of the finite-difference Hessian.
pub const FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySpectrum {
    /// All six eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Negative-curvature directions.
    pub n_unstable: usize,
    /// Positive-curvature directions.
    pub n_stable: usize,
    /// Symmetry zero modes that were factored out.
    pub n_neutral: usize,
}

/// Analytic Hessian of the frozen-field potential at configuration `q`.
pub fn hessian_full3d(q: &[f64; 6], _eps: f64) -> Result<Matrix6x6> {
    hessian_full3d_analytic(q)
}

/// Symmetric central-difference Hessian of the potential with step `h`.
pub fn hessian_full3d_fd(q: &[f64; 6], eps: f64, h: f64) -> Result<Matrix6x6> {
    let v = |dq: &[(usize, f64)]| -> Result<f64> {
        let mut p = *q;
        for &(i, d) in dq {
            p[i] += d;
        }
        potential_full3d(&p, eps)
    };
    let mut m = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in i..6 {
            let pp = v(&[(i, h), (j, h)])?;
            let pm = v(&[(i, h), (j, -h)])?;
            let mp = v(&[(i, -h), (j, h)])?;
            let mm = v(&[(i, -h), (j, -h)])?;
            let hij = (pp - pm - mp + mm) / (4.0 * h * h);
            m[i][j] = hij;
            m[j][i] = hij;
        }
    }
    Ok(m)
}

fn to_nalgebra(m: &Matrix6x6) -> Matrix6<f64> {
    Matrix6::from_fn(|i, j| m[i][j])
}

fn sorted_eigen(m: &Matrix6x6) -> (Vec<f64>, Vec<[f64; 6]>) {
    let eig = SymmetricEigen::new(to_nalgebra(m));
    let mut idx: Vec<usize> = (0..6).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = idx
        .iter()
        .map(|&i| {
            let col = eig.eigenvectors.column(i);
            std::array::from_fn(|k| col[k])
        })
        .collect();
    (values, vectors)
}

/// Eigenvalues of a symmetric 6×6 matrix, ascending.
pub fn symmetric_eigenvalues(m: &Matrix6x6) -> Vec<f64> {
    sorted_eigen(m).0
}

/// Raw sign counts of a spectrum, with `|λ| ≤ DEGENERACY_TOL` counted as zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignCounts {
    pub n_negative: usize,
    pub n_positive: usize,
    pub n_zero: usize,
}

pub fn sign_counts(eigenvalues: &[f64]) -> SignCounts {
    let count = |f: &dyn Fn(f64) -> bool| eigenvalues.iter().filter(|&&v| f(v)).count();
    SignCounts {
        n_negative: count(&|v| v < -DEGENERACY_TOL),
        n_positive: count(&|v| v > DEGENERACY_TOL),
        n_zero: count(&|v| v.abs() <= DEGENERACY_TOL),
    }
}

/// `max |a - b|` over entries, relative to `max |a|`.
pub fn max_relative_difference(a: &Matrix6x6, b: &Matrix6x6) -> f64 {
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            diff = diff.max((a[i][j] - b[i][j]).abs());
            scale = scale.max(a[i][j].abs());
        }
    }
    diff / scale
}

/// Counts negative and positive eigenvalues of a symmetric 6×6 matrix.
pub fn classify_stability(m: &Matrix6x6) -> Result<StabilitySpectrum> {
    let (eigenvalues, _) = sorted_eigen(m);
    if let Some((index, &value)) = eigenvalues.iter().enumerate().find(|(_, v)| v.abs() < DEGENERACY_TOL) {
        return Err(Error::DegenerateSpectrum { index, value });
    }
    let n_unstable = eigenvalues.iter().filter(|v| **v < 0.0).count();
    Ok(StabilitySpectrum {
        n_stable: 6 - n_unstable,
        n_unstable,
        n_neutral: 0,
        eigenvalues,
    })
}

/// Like [`classify_stability`], but first restricts the matrix to the
/// orthogonal complement of the given symmetry generators. Each generator
/// must be a null vector of `m` (to `DEGENERACY_TOL` relative to `‖m‖`).
pub fn classify_stability_modulo(m: &Matrix6x6, generators: &[[f64; 6]]) -> Result<StabilitySpectrum> {
    let (eigenvalues, _) = sorted_eigen(m);
    let hm = to_nalgebra(m);
    let scale = hm.norm().max(1.0);

    // Orthonormal basis: generators first, then the complement.
    let mut basis: Vec<nalgebra::Vector6<f64>> = Vec::new();
    for g in generators {
        let v = nalgebra::Vector6::from_column_slice(g);
        if (hm * v).norm() > DEGENERACY_TOL * scale * v.norm() {
            return Err(Error::InvalidParameter("generator is not a zero mode".into()));
        }
        let mut w = v;
        for b in &basis {
            w -= b * b.dot(&w);
        }
        let n = w.norm();
        if n > 1e-12 {
            basis.push(w / n);
        }
    }
    let n_neutral = basis.len();
    for k in 0..6 {
        let mut w = nalgebra::Vector6::zeros();
        w[k] = 1.0;
        for b in &basis {
            w -= b * b.dot(&w);
        }
        let n = w.norm();
        if n > 1e-8 {
            basis.push(w / n);
        }
        if basis.len() == 6 {
            break;
        }
    }
    let complement = DMatrix::from_fn(6, 6 - n_neutral, |i, j| basis[n_neutral + j][i]);
    let reduced = complement.transpose() * DMatrix::from_fn(6, 6, |i, j| m[i][j]) * &complement;
    let reduced_eig = SymmetricEigen::new(reduced).eigenvalues;
    if let Some((index, &value)) = reduced_eig.iter().enumerate().find(|(_, v)| v.abs() < DEGENERACY_TOL) {
        return Err(Error::DegenerateSpectrum { index, value });
    }
    let n_unstable = reduced_eig.iter().filter(|v| **v < 0.0).count();
    Ok(StabilitySpectrum {
        eigenvalues,
        n_unstable,
        n_stable: reduced_eig.len() - n_unstable,
        n_neutral,
    })
}

/// Generator of a rigid rotation of both electrons about the field (`x`) axis.
pub fn axial_rotation_generator(q: &[f64; 6]) -> [f64; 6] {
    [0.0, -q[2], q[1], 0.0, -q[5], q[4]]
}

/// Eigen-decomposition of the frozen-field Hessian at the symmetric saddle.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleModes {
    pub configuration: [f64; 6],
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors matching `eigenvalues`.
    pub eigenvectors: Vec<[f64; 6]>,
}

impl SaddleModes {
    /// Unstable eigenvector that keeps the mirror symmetry `(x, y) ↔ (x, -y)`.
    pub fn reaction_coordinate(&self) -> [f64; 6] {
        self.unstable_by(|v| (v[0] - v[3]).abs() < 1e-6 && (v[1] + v[4]).abs() < 1e-6)
    }

    /// Unstable eigenvector that breaks the mirror symmetry.
    pub fn symmetry_breaking(&self) -> [f64; 6] {
        self.unstable_by(|v| !((v[0] - v[3]).abs() < 1e-6 && (v[1] + v[4]).abs() < 1e-6))
    }

    fn unstable_by(&self, pred: impl Fn(&[f64; 6]) -> bool) -> [f64; 6] {
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .find(|(l, v)| **l < 0.0 && pred(v))
            .map(|(_, v)| *v)
            .expect("saddle has one symmetric and one antisymmetric unstable mode")
    }
}

pub fn saddle_modes_full3d(eps: f64) -> Result<SaddleModes> {
    let q = saddle_sym2e(eps)?.configuration();
    let (eigenvalues, eigenvectors) = sorted_eigen(&hessian_full3d(&q, eps)?);
    Ok(SaddleModes {
        configuration: q,
        eigenvalues,
        eigenvectors,
    })
}

/// Stability of the symmetric saddle pair with the axial rotation factored out.
pub fn saddle_stability_full3d(eps: f64) -> Result<StabilitySpectrum> {
    let q = saddle_sym2e(eps)?.configuration();
    let m = hessian_full3d(&q, eps)?;
    classify_stability_modulo(&m, &[axial_rotation_generator(&q)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn saddle_config(eps: f64) -> [f64; 6] {
        saddle_sym2e(eps).unwrap().configuration()
    }

    #[test]
    fn analytic_hessian_is_symmetric() {
        let m = hessian_full3d(&saddle_config(0.137), 0.137).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!((m[i][j] - m[j][i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn analytic_and_finite_difference_spectra_agree() {
        for eps in [0.05, 0.137, 0.2] {
            let q = saddle_config(eps);
            let (a, _) = sorted_eigen(&hessian_full3d(&q, eps).unwrap());
            let (b, _) = sorted_eigen(&hessian_full3d_fd(&q, eps, FD_STEP).unwrap());
            let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (x, y) in a.iter().zip(&b) {
                if x.abs() > DEGENERACY_TOL * scale {
                    assert!(((x - y) / x).abs() < 1e-4, "{x} vs {y}");
                } else {
                    assert!(y.abs() < 1e-4 * scale);
                }
            }
        }
    }

    #[test]
    fn rotation_about_field_axis_is_a_zero_mode() {
        let q = saddle_config(0.137);
        let m = hessian_full3d(&q, 0.137).unwrap();
        assert!(matches!(classify_stability(&m), Err(Error::DegenerateSpectrum { .. })));
        let g = axial_rotation_generator(&q);
        let hv: Vec<f64> = (0..6).map(|i| (0..6).map(|j| m[i][j] * g[j]).sum()).collect();
        assert!(hv.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn signature_modulo_rotation() {
        for k in 0..=15 {
            let eps = 0.05 + 0.01 * f64::from(k);
            let s = saddle_stability_full3d(eps).unwrap();
            assert_eq!((s.n_unstable, s.n_stable, s.n_neutral), (2, 3, 1), "eps={eps}");
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn nondegenerate_matrix_is_classified_directly() {
        let mut m = [[0.0; 6]; 6];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = if i < 2 { -1.0 - i as f64 } else { 0.5 * i as f64 };
        }
        let s = classify_stability(&m).unwrap();
        assert_eq!((s.n_unstable, s.n_stable), (2, 4));
        assert_eq!(s.eigenvalues[0], -2.0);
    }

    #[test]
    fn unstable_modes_split_by_symmetry() {
        let modes = saddle_modes_full3d(0.137).unwrap();
        let r = modes.reaction_coordinate();
        let b = modes.symmetry_breaking();
        assert!((r[0] - r[3]).abs() < 1e-6 && (r[1] + r[4]).abs() < 1e-6);
        assert!((b[0] + b[3]).abs() < 1e-6 && (b[1] - b[4]).abs() < 1e-6);
    }
}
