//! Spectra of `L = -d²/dx² - V` on periodic and Dirichlet 1-D domains by
//! shooting and node counting, and the Morse index of CMC tori of revolution
//! in the 3-sphere built on top of them.
//!
//! The pipeline for a catalog surface is
//!
//! ```text
//! SurfaceSpec -> TorusParams -> SpectralProblem -> Spectrum
//!             -> snap_known -> MorseReport
//! ```
//!
//! and [`analysis::analyze_surface`] runs it end to end.

#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod catalog;
pub mod cli;
pub mod elliptic;
mod error;
pub mod integrator;
pub mod morse;
pub mod oracle;
pub mod potential;
pub mod spectrum;
pub mod torus;

pub use error::{Error, Result};
pub use potential::{ConstantPotential, FnPotential, Potential};
