pub mod cutoffs;
pub mod error;
pub mod fields;
pub mod fit;
pub mod fraclap;
pub mod mc;
pub mod quad;
pub mod series;
pub mod sets;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
