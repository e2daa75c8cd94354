pub mod audit;
pub mod constructions;
pub mod error;
pub mod forms;
pub mod geometry;
pub mod linalg;
pub mod mapexpr;
mod par;

pub use error::{Error, Result};
