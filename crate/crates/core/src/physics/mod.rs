//! Potentials, Hamiltonians and equations of motion for the three model
//! geometries. Everything is in atomic units.
//!
//! Momenta are per-electron momenta throughout. For the reduced models the
//! kinetic energy is `n_e · p²/2` (with `n_e` electrons sharing the same
//! momentum), so the equations of motion are `q̇ = p` and `ṗ = -∇V / n_e`.
//! This keeps the reduced models identical to the full 3-D dynamics restricted
//! to their symmetry subspace.

pub mod full3d;
pub mod ngon;
pub mod sym2e;

pub use full3d::{FullModel, FullState2e};
pub use ngon::{NGonModel, NGonState};
pub use sym2e::{SymModel, SymState2e};

use crate::error::{Error, Result};
use crate::field::Field;

/// A classical Hamiltonian system with a `D`-dimensional phase space.
///
/// Implementations must be pure: the integrator calls them from many threads.
pub trait Model<const D: usize>: Sync {
    fn field(&self) -> &Field;

    /// Writes the phase-space velocity into `dy` and returns `∂H/∂t`.
    fn flow(&self, t: f64, y: &[f64; D], dy: &mut [f64; D]) -> Result<f64>;

    fn energy(&self, t: f64, y: &[f64; D]) -> Result<f64>;

    /// Electron–nucleus distance used for the escape test. For several
    /// independent electrons this is the nearest one.
    fn escape_distance(&self, y: &[f64; D]) -> f64;

    /// Smallest particle–particle distance (nucleus included).
    fn closest_approach(&self, y: &[f64; D]) -> f64;

    /// Rate of change of [`Self::escape_distance`].
    fn radial_velocity(&self, y: &[f64; D]) -> f64;

    /// Distance compared against the saddle radius for crossing events.
    fn saddle_coordinate(&self, y: &[f64; D]) -> f64;

    /// Field-axis position of the particle tracked by
    /// [`Self::saddle_coordinate`]. The downfield side has `field_axis · ε < 0`.
    fn field_axis(&self, y: &[f64; D]) -> f64;

    /// `r_s² |ε|` for this geometry, or `None` when no saddle exists.
    fn saddle_constant(&self) -> Option<f64>;

    /// Instantaneous saddle radius; infinite when the field vanishes.
    fn saddle_radius(&self, t: f64) -> f64 {
        let eps = self.field().eps(t).abs();
        match self.saddle_constant() {
            Some(k) if eps > 0.0 => (k / eps).sqrt(),
            _ => f64::INFINITY,
        }
    }
}

#[inline]
pub(crate) fn finite(value: f64, what: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Singular(what))
    }
}
