pub mod error;
pub mod params;
pub mod special_fn;
pub mod fd;
pub mod atoms;
pub mod kernel;
pub mod measure;
pub mod transform;
pub mod convolution;
pub mod schwartz;
pub mod report;
pub mod cli;

pub use error::{Error, Result};
pub use params::Params;
