//! Classical trajectories of a two-electron (and N-electron) complex driven
//! by a strong, few-cycle laser pulse.
//!
//! Atomic units throughout. The field is `ε(t) = F sin²(πt/T_d) cos(ωt + φ)`
//! along `x` (or `z` for the ring geometry).

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments
)]

pub mod analysis;
pub mod ensemble;
pub mod error;
pub mod field;
pub mod integrator;
pub mod physics;
pub mod saddle;
pub mod sampling;

pub use error::{Error, Result};
pub use field::{Field, FieldParams};
