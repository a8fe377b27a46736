//! Darcy flow through heterogeneous tensor permeability, block upscaling
//! (mode-elimination RG, KK, arithmetic mean) and ensemble error surveys.

pub mod error;
pub mod exec;
pub mod field;
pub mod io;
pub mod model_gen;
pub mod solver;
pub mod spectral;
pub mod survey;
pub mod upscale;

pub use error::{Error, Result};
pub use exec::Execution;
pub use field::{GridShape, PressureField, Tensor, TensorField};
