//! Simulation of conditional entanglement broadcasting with unbalanced beam
//! splitters and of asymmetric telecloning of an entangled pair, together
//! with the separability, CHSH and teleportation diagnostics used to judge
//! their outputs.

pub mod broadcasting;
pub mod cloning;
pub mod criteria;
pub mod error;
pub mod linalg;
pub mod protocol;
pub mod states;
pub mod telecloning;
pub mod verify;

pub use cloning::{CloneParams, Reflectivity};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use states::{BellKind, DensityOperator, PureState};
