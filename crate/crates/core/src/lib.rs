//! Anisotropic Gaussian measures of geometric sets: mass, perimeter and
//! barycenter, Ehrhard symmetrization along arbitrary directions, and the
//! isoperimetric checks built on them.

pub mod error;
pub mod gaussline;
pub mod linalg;

pub use error::{Error, Result};
pub mod sets;

mod polyhedra;
mod quadrature;
mod graph;
pub mod measures;
pub mod symmetrize;
pub mod isoperimetry;
pub mod oracle;
