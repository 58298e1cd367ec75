//! Numerical building blocks shared by the phase-plane modules.

pub mod interp;
pub mod quad;
pub mod roots;

pub use interp::MonotoneCubic;
pub use quad::{integrate, QuadConfig, QuadResult};
pub use roots::{brent, grow_upper, monotone_inverse};
