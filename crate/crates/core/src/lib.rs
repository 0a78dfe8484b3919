pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod bloch;
pub mod cli;
pub mod greens;
pub mod hamiltonian;
pub mod linalg;
pub mod spectra;
pub mod tightbinding;

pub use error::{Error, Result};
