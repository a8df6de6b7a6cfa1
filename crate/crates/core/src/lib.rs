pub mod ability;
pub mod baselines;
pub mod clustering;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod math;
pub mod neural;
pub mod oracle;
pub mod segmentation;

pub use error::{Error, Result};
