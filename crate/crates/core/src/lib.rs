//! Bi-Hamiltonian structures of three-dimensional vector fields.
//!
//! A field `v` is written as `v = J1 x grad H2 = J2 x grad H1` with two
//! compatible Poisson vectors. Along each streamline the Poisson vectors are
//! expanded in the Serret-Frenet frame as `J = alpha (n + mu b)`, where `mu`
//! solves a Riccati equation driven by the helicity densities of the frame and
//! `alpha` follows from Hamilton's equations.
//!
//! * [`expr`]: field-definition DSL with exact forward-mode derivatives.
//! * [`calc3`]: gradient, curl and directional derivatives.
//! * [`frenet`]: frame, helicity densities and degeneracy detection.
//! * [`riccati`]: streamlines, the Riccati equation and its linear form.
//! * [`poisson`]: Poisson vectors, identities and the two-structure construction.
//! * [`systems`]: catalog of fields with known structure.
//! * [`cli`]: the command-line front end.

// `!(x >= floor)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calc3;
pub mod cli;
pub mod error;
pub mod expr;
pub mod frenet;
mod ode;
pub mod poisson;
pub mod riccati;
pub mod sampling;
pub mod systems;

pub use error::{Error, Result};
