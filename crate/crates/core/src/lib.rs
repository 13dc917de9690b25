//! Channel-aware decision fusion over a Rician multiple-access channel to a
//! multi-antenna fusion center, with and without a jamming source.

pub mod config;
pub mod error;
pub mod jamming;
pub mod linalg;
pub mod montecarlo;
pub mod poly;
pub mod rng;
pub mod rules;
pub mod scenario;
pub mod signal;
pub mod verify;

pub use error::{FusionError, Result};
