//! Numerical machinery for weighted-norm estimates of entire functions of
//! exponential type whose indicator diagram is a bounded convex domain.

pub mod conjugates;
pub mod constants;
pub mod domain;
pub mod error;
pub mod functions;
pub mod norms;
pub mod quad;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
