//! Intermediate-norm toolkit for Gaussian series on [0,1]: dyadic paths,
//! Schauder/Haar and Karhunen-Loève expansions, certified block schedules,
//! the summed and sup block norms they induce, and Monte Carlo experiments
//! checking the inequalities the construction rests on.

pub mod blocks;
pub mod config;
pub mod error;
pub mod experiments;
pub mod haar;
pub mod models;
pub mod norms;
pub mod paths;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
