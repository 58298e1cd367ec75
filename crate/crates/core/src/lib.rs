//! Separable singular solutions `u = r^(-β_q) ω(σ)` of the planar
//! quasilinear equation
//! `div(|Du|^(p-2) Du) + |u|^(q-1) u - c |x|^(-p) |u|^(p-2) u = 0`.
//!
//! The angular profile `ω` is reduced to an autonomous second-order equation
//! whose phase plane is integrated in several coordinate charts. Period
//! functions of the closed orbits determine which integer modes exist.

pub mod checks;
pub mod error;
pub mod nlparams;
pub mod numerics;
pub mod odeint;
pub mod orbitlab;
pub mod periodfn;
pub mod solset;
pub mod vfield;

pub use error::{Error, Result};
