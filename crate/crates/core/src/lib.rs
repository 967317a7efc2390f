//! Human-based driving risk estimation and warning evaluation.
//!
//! The risk of a driving situation is the survival-weighted integral of
//! Gaussian collision probabilities along predicted trajectories. The
//! human-based model replaces the constant-velocity ego prediction with the
//! plan a driver would choose from their own, possibly erroneous, perception
//! of the scene, and scales the result with a per-driver risk weight.
//!
//! - [`world`]: paths, motion plans and trajectory prediction
//! - [`risk`]: uncertainty model, collision probability and risk integral
//! - [`planner`]: sampling-based velocity planner
//! - [`perception`]: notice, forecast and inference errors
//! - [`personalization`]: driver types and the parameter file
//! - [`scenarios`]: scripted traffic scenarios and the experiment grid
//! - [`harness`]: episode simulation, comparison and reports

pub mod error;
pub mod harness;
pub mod perception;
pub mod personalization;
pub mod planner;
pub mod risk;
pub mod scenarios;
pub mod world;

pub use error::{Error, Result};
