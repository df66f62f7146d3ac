pub mod config;
pub mod direct;
pub mod error;
pub mod experiment;
pub mod fractional;
pub mod inverse;
pub mod quadrature;
pub mod spectral;
pub mod special;

pub use error::{Error, Result};
