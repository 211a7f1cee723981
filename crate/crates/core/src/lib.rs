//! Exact and numerical tools for the periodic Benjamin–Ono hierarchy with a
//! discrete Laplacian, built on a q-deformed Heisenberg Poisson algebra.

pub mod error;
pub mod evolve;
pub mod iom;
pub mod poisson;
pub mod scalar;
pub mod series;
pub mod soliton;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{ParamPoint, Scalar};
