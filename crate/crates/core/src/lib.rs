//! Twistorial constructions on H-spaces with numerical verification.

pub mod algebra;
pub mod autodiff;
pub mod calderbank;
pub mod chart;
pub mod config;
pub mod error;
pub mod exprlang;
pub mod geometry;
pub mod maps;
pub mod report;
pub mod sampling;
pub mod suite;
pub mod twistor;
pub mod weyl;

pub use error::{Error, Result};
