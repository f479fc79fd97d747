//! Thermodynamic pressure for countable Markov shifts and their metric
//! compactifications.

pub mod boundary;
pub mod diff;
pub mod error;
pub mod gallery;
pub mod io;
mod graph;
mod linalg;
pub mod metric;
pub mod potential;
pub mod pressure;
pub mod sectors;
pub mod shift;

pub use error::{Error, Result};
