//! Parametric dynamic mode decomposition.
//!
//! Reduced-order forecasting of parametrized dynamical systems from snapshot
//! data: snapshots for several parameter values are compressed with a shared
//! POD basis, the evolution of the reduced coordinates is fitted with DMD (or
//! its higher-order variant) either as one monolithic operator or as one
//! operator per parameter, and the forecasted reduced coordinates are
//! interpolated across parameters so the full field can be reconstructed at
//! untested parameter values and future time instants.
//!
//! The numerical core ([`pod`], [`dmd`], [`regression`]) is generic over the
//! complex scalar type through [`Field`]; the data model, benchmark problems
//! and file formats ([`store`], [`parametric`], [`benchmarks`]) are fixed to
//! double precision, matching the on-disk layouts.

pub mod benchmarks;
pub mod dmd;
mod field;
pub mod parametric;
pub mod pod;
pub mod regression;
pub mod store;

pub use field::Field;

/// Double-precision complex scalar, the element type of every on-disk format.
pub type C64 = ndarray_linalg::c64;
/// Single-precision complex scalar.
pub type C32 = ndarray_linalg::c32;

/// POD basis at the precision used by the pipeline.
pub type PodBasis = pod::PodBasis<C64>;
/// DMD model at the precision used by the pipeline.
pub type DmdModel = dmd::DmdModel<C64>;
/// Regressor at the precision used by the pipeline.
pub type Regressor = regression::Regressor<C64>;
