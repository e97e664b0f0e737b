pub mod decay;
pub mod error;
pub mod experiment;
pub mod gn;
pub mod jmgt;
pub mod limit;
pub mod params;
pub mod propagator;
pub mod roots;
pub mod spectral;

pub use error::{Error, Result};
pub use params::{Params, Regime};
