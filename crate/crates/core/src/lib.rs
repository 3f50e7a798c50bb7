pub mod arith;
pub mod coeffs;
pub mod error;
pub mod grid;
pub mod hybrid;
pub mod ladder;
pub mod moments;
pub mod special;
pub mod verify;
pub mod zeta;

pub use error::{Error, Result};
