//! Exact fiberwise oscillation over models of fully closed maps.

pub mod approximation;
pub mod check;
pub mod cli;
pub mod error;
pub mod exactnum;
pub mod functions;
pub mod lurlab;
pub mod oscillation;
pub mod quotients;
pub mod spaces;

pub use error::{Error, Result};
