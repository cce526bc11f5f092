pub mod error;
pub mod funcspace;
pub mod functionals;
pub mod geometry;
pub mod optimize;
pub mod quadrature;
pub mod weights;

pub use error::{Error, Result};
