//! Foveated sensor grids built from a cortical magnification function, kNN
//! convolution tables over them, image resampling, baseline samplers and the
//! analyses that compare them.

pub mod analysis;
pub mod baselines;
pub mod cmf;
pub mod error;
pub mod io;
pub mod kernel_map;
pub mod neighborhoods;
pub mod resampler;
pub mod sampler;

pub use cmf::CmfParams;
pub use error::{Error, Result};
pub use sampler::{GridOptions, IsotropyRule, Layout, SensorGrid, SensorPoint};
