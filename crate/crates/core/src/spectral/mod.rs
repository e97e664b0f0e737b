//! Grids, fields, transforms and norms shared by every solver.

pub mod field;
pub mod grid;
pub mod norms;
pub mod quadrature;
pub mod synth;
pub mod transform;

pub use field::{FieldTriple, Quantity, Slot, SpectralField};
pub use grid::{Grid, GridKind, GridSpec};
pub use norms::{energy_norm, norm, NormSpec};
pub use quadrature::Rule;
pub use synth::{synthesize_data, DataSpec, Profile};
pub use transform::TorusFft;
