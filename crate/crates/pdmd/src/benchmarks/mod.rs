//! Reproducible benchmark problems at desk scale: a closed-form rank-two
//! parametric wave, a nonlinear heat equation solved by finite differences,
//! and a synthetic linear system with one injected divergent mode.

pub mod heat;
pub mod synthetic;
pub mod toy;

pub use heat::{HeatError, HeatSpec};
pub use synthetic::{SyntheticError, SyntheticUnstable, SyntheticUnstableSpec};
pub use toy::ToySpec;
