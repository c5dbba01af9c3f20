//! Critical-point search for the `N`-electron polygon potential.
//!
//! Damped Newton on `∇V = 0`, started from 16 seeds around the scaled
//! two-electron saddle. A saddle is reported only when a seed converges to a
//! point whose Hessian has one negative and one positive eigenvalue.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::saddle_sym2e;
use crate::physics::ngon::{gradient_at, hessian_at, potential_at, repulsion_coefficient};

/// Convergence threshold on `‖∇V‖`.
pub const GRADIENT_TOL: f64 = 1e-10;
pub const MAX_ITER: usize = 100;

const RADIAL_SCALES: [f64; 4] = [0.7, 1.0, 1.4, 2.0];
/// Polar angles from the downfield axis direction, in degrees.
const SEED_ANGLES_DEG: [f64; 4] = [30.0, 50.0, 65.0, 80.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NGonSaddle {
    pub n: u32,
    pub eps: f64,
    pub rho_s: f64,
    pub z_s: f64,
    pub v_s: f64,
    pub gradient_norm: f64,
}

/// Algebraic existence criterion: a saddle exists iff
/// `(N-1)/(4 sin(π/N)) < N`.
pub fn ngon_saddle_criterion(n: u32) -> bool {
    n >= 2 && repulsion_coefficient(n) / f64::from(n) < f64::from(n)
}

fn grad_norm(g: [f64; 2]) -> f64 {
    g[0].hypot(g[1])
}

fn newton(n: u32, eps: f64, mut rho: f64, mut z: f64) -> Option<(f64, f64, f64)> {
    let mut g = gradient_at(n, rho, z, eps).ok()?;
    let mut gn = grad_norm(g);
    for _ in 0..MAX_ITER {
        if gn < GRADIENT_TOL {
            return Some((rho, z, gn));
        }
        let h = hessian_at(n, rho, z).ok()?;
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let d_rho = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
        let d_z = -(-h[1][0] * g[0] + h[0][0] * g[1]) / det;
        // Backtrack until the gradient norm decreases and ρ stays positive.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (r_try, z_try) = (rho + lambda * d_rho, z + lambda * d_z);
            if r_try > 0.0 {
                if let Ok(g_try) = gradient_at(n, r_try, z_try, eps) {
                    let gn_try = grad_norm(g_try);
                    if gn_try < gn {
                        rho = r_try;
                        z = z_try;
                        g = g_try;
                        gn = gn_try;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return (gn < GRADIENT_TOL).then_some((rho, z, gn));
        }
    }
    (gn < GRADIENT_TOL).then_some((rho, z, gn))
}

fn is_index_one(n: u32, rho: f64, z: f64) -> bool {
    let Ok(h) = hessian_at(n, rho, z) else { return false };
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    det < 0.0
}

/// Searches for the index-1 critical point of the polygon potential at frozen
/// field `eps`. Returns `None` when no seed converges to a saddle.
pub fn ngon_saddle_scan(n: u32, eps: f64) -> Option<NGonSaddle> {
    if n < 2 || eps == 0.0 || !eps.is_finite() {
        return None;
    }
    let base = saddle_sym2e(eps).ok()?;
    let r_seed = base.r_s * (f64::from(n) / 2.0).sqrt();
    // Downfield direction along z.
    let sign = -eps.signum();
    for scale in RADIAL_SCALES {
        for angle in SEED_ANGLES_DEG {
            let a = angle.to_radians();
            let (rho0, z0) = (r_seed * scale * a.sin(), sign * r_seed * scale * a.cos());
            if let Some((rho, z, gn)) = newton(n, eps, rho0, z0) {
                if is_index_one(n, rho, z) {
                    let v_s = potential_at(n, rho, z, eps).ok()?;
                    return Some(NGonSaddle {
                        n,
                        eps,
                        rho_s: rho,
                        z_s: z,
                        v_s,
                        gradient_norm: gn,
                    });
                }
            }
        }
    }
    None
}

/// Closed-form saddle position `(ρ_s, z_s)` used to cross-check the search:
/// `sin³θ = c/N`, `r² = N|cos θ|/|ε|`, with `c = (N-1)/(4 sin(π/N))`.
pub fn ngon_saddle_closed_form(n: u32, eps: f64) -> Option<(f64, f64)> {
    if !ngon_saddle_criterion(n) || eps == 0.0 {
        return None;
    }
    let nf = f64::from(n);
    let c = (nf - 1.0) / (4.0 * (PI / nf).sin());
    let s = (c / nf).cbrt();
    let cos_abs = (1.0 - s * s).sqrt();
    let r = (nf * cos_abs / eps.abs()).sqrt();
    Some((r * s, -eps.signum() * r * cos_abs))
}

pub const NGON_CSV_HEADER: &str = "N,eps,criterion,exists,rho_s,z_s,V_s";

/// One CSV row per `N`; missing saddles leave the numeric columns empty.
/// `criterion` is the algebraic existence test, `exists` the search result.
pub fn write_ngon_csv<W: Write>(rows: &[(u32, f64, Option<NGonSaddle>)], mut out: W) -> io::Result<()> {
    writeln!(out, "{NGON_CSV_HEADER}")?;
    for (n, eps, s) in rows {
        let crit = ngon_saddle_criterion(*n);
        match s {
            Some(s) => writeln!(
                out,
                "{n},{eps:.16e},{crit},true,{:.16e},{:.16e},{:.16e}",
                s.rho_s, s.z_s, s.v_s
            )?,
            None => writeln!(out, "{n},{eps:.16e},{crit},false,,,")?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_gon_matches_two_electron_saddle() {
        let s = ngon_saddle_scan(2, 0.137).unwrap();
        let e = saddle_sym2e(0.137).unwrap();
        assert!((s.rho_s - e.position[1]).abs() < 1e-8);
        assert!((s.z_s - e.position[0]).abs() < 1e-8);
        assert!((s.v_s - e.v_s).abs() < 1e-10);
    }

    #[test]
    fn existence_boundary() {
        for n in 2..=13 {
            assert!(ngon_saddle_scan(n, 0.137).is_some(), "N={n}");
            assert!(ngon_saddle_criterion(n));
        }
        for n in 14..=20 {
            assert!(ngon_saddle_scan(n, 0.137).is_none(), "N={n}");
            assert!(!ngon_saddle_criterion(n));
        }
    }

    #[test]
    fn search_agrees_with_closed_form() {
        for n in 2..=13 {
            for eps in [0.05, 0.137, -0.2] {
                let s = ngon_saddle_scan(n, eps).unwrap();
                let (rho, z) = ngon_saddle_closed_form(n, eps).unwrap();
                assert!((s.rho_s - rho).abs() < 1e-8 * rho.max(1.0), "N={n} eps={eps}");
                assert!((s.z_s - z).abs() < 1e-8 * rho.max(1.0));
                assert!(s.gradient_norm < GRADIENT_TOL);
            }
        }
    }

    #[test]
    fn csv_rows() {
        let rows = vec![(2, 0.137, ngon_saddle_scan(2, 0.137)), (14, 0.137, None)];
        let mut buf = Vec::new();
        write_ngon_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], NGON_CSV_HEADER);
        assert!(lines[1].starts_with("2,1.3700000000000001e-1,true,true,"));
        assert_eq!(lines[2], "14,1.3700000000000001e-1,false,false,,,");
    }
}
