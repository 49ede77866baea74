pub mod corpus;
pub mod disk_spectrum;
pub mod error;
pub mod fem;
pub mod functionals;
pub mod geometry;
pub mod output;
pub mod par;
pub mod pauli;
pub mod perturbation;
pub mod quadrature;
pub mod special_fn;
pub mod spectrum;
pub mod svg;
pub mod transplant;

pub use error::{Error, Result};
