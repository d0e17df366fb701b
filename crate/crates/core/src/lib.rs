pub mod boundary;
pub mod config;
pub mod current;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod models;
pub mod random;
pub mod scan;
pub mod spectra;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
