//! Deep residual networks in the large-depth regime: forward and backward
//! passes, gradient descent, numerical certificates for the quantitative
//! bounds that govern training, and scaling analysis of trained weights.

pub mod analysis;
pub mod autograd;
pub mod bounds;
pub mod data;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod network;
pub mod training;

pub use error::{Error, Result};
