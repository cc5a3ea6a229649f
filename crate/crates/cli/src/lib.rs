//! Experiment harness behind the `bidsynth` binary: synthetic datasets,
//! geometric heuristics, adversarial instances and CSV/SVG emission.

pub mod dataset;
pub mod error;
pub mod experiment;
pub mod heuristics;
pub mod svg;

pub use error::{CliError, CliResult};
