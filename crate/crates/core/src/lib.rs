//! Relative-entropy correlation measures for small multipartite quantum
//! systems: total correlation, discord, entanglement and classical
//! correlation, plus checks of the additivity relations between them.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

pub mod basis;
pub mod discord;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod optim;
pub mod relations;
pub mod scalar;
pub mod scan;
pub mod states;

pub use error::{QcorrError, Result};
pub use optim::OptimizerConfig;
pub use scalar::Real;
pub use states::{FamilySpec, Family, Partition, SamplingMethod};

pub type ComplexMatrix64 = linalg::ComplexMatrix<f64>;
pub type State = states::MultipartiteState<f64>;
pub type State32 = states::MultipartiteState<f32>;
pub type BasisPoint = basis::ProductBasisPoint<f64>;
pub type Discord = discord::DiscordResult<f64>;
pub type Ree = entanglement::ReeResult<f64>;
