//! Classical simulability of quantum state sets.
//!
//! The library decides whether a finite set of density matrices can be
//! reproduced by measure-and-prepare devices whose outputs commute, and
//! quantifies the answer as the largest isotropic-noise visibility at which
//! such a simulation exists. Around that core sit analytic bounds, witness
//! bounds certified by a small dense SDP, Monte-Carlo checks against Haar
//! averages, and conversions to steering inequalities and joint-measurability
//! problems.
//!
//! Everything numerical is self-contained: dense revised simplex for the LPs,
//! a primal-dual interior-point method for the SDPs, and a cyclic Jacobi
//! eigensolver for the small Hermitian matrices that appear throughout.

pub mod analytic;
pub mod error;
pub mod jsonio;
pub mod linalg;
pub mod model;
pub mod simulation;
pub mod solvers;
pub mod states;
pub mod steering;
pub mod witness;

pub use error::{Error, Result};
