pub mod approx;
pub mod divergence;
pub mod error;
pub mod harness;
pub mod numeric;
pub mod sampling;
pub mod unbiased;

pub use error::{Error, Result};
