//! Numerical differential geometry of hypersurfaces in `H^2 x H^2`.

pub mod error;
pub mod hyperdual;
pub mod lorentz;
pub mod product;
pub mod linalg;
pub mod fd;
pub mod surface;
pub mod zoo;
pub mod parallel;
pub mod verify;
pub mod cli;

pub use error::{GeomError, Result};
