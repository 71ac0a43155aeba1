//! Weighted Tsetlin Machine classification with a data-fusion toolkit.
//!
//! The [`tm`] module holds the learning engine. [`fusion`] compares learned
//! clause sets to acknowledge and localize changes between data sources,
//! and scores data/model compatibility from per-sample decision statistics.
//! [`booleanize`], [`sampling`] and [`synthgen`] prepare inputs; [`par`]
//! switches batch work between rayon and a sequential fallback.

pub mod data;
pub mod error;
pub mod booleanize;
pub mod fusion;
pub mod io;
pub mod metrics;
pub mod par;
pub mod rng;
pub mod sampling;
pub mod synthgen;
pub mod tm;

pub use data::BinaryDataset;
pub use error::{Error, Result};
pub use rng::Stream;
pub use tm::{GlobalDescription, HyperParams, TsetlinMachine};
