pub mod channel;
pub mod cli;
pub mod detectors;
pub mod distributions;
pub mod error;
pub mod montecarlo;
pub mod presets;
pub mod specfun;
pub mod transition;

pub use error::{Error, Result};
