pub mod algebra;
pub mod cli;
pub mod duality;
pub mod error;
pub mod numerics;
pub mod random;
pub mod states;
pub mod toric;

pub use error::{Error, Result};
pub use numerics::{CMatrix, CVector, Tolerances, C64};
