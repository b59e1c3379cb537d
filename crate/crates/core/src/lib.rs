//! Clustering of binary student-problem (S-P) charts with the basins of
//! attraction of a discrete-time Hopfield-style network.
//!
//! - [`spchart`]: chart model, CSV parsing, rearrangement, curves, caution index
//! - [`hopfield`]: bipolar states, Hebbian learning, asynchronous dynamics
//! - [`clustering`]: attractor clustering, `f1`/`f2`, score baseline, trials
//! - [`datagen`]: synthetic test, drill and pre-test charts
//! - [`cli`], [`report`], [`render`]: command line, JSON reports, renderings

pub mod cli;
pub mod clustering;
pub mod datagen;
mod error;
pub mod fixture;
pub mod hopfield;
pub mod render;
pub mod report;
pub mod spchart;

pub use error::{Error, Result};
