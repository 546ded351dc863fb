pub mod cli;
pub mod error;
pub mod exact;
pub mod params;
pub mod problem;
pub mod reconstruction;
pub mod reduced;
pub mod special;
pub mod symmetry;

pub use error::{Error, Result};
