//! Machine-type-communication traffic models and inter-arrival statistics.
//!
//! The crate synthesizes slotted device traces (Poisson event-driven,
//! quasi-periodic and 3GPP access models), fits candidate distributions to
//! inter-arrival samples and scores the fits with goodness-of-fit tests.

pub mod config;
pub mod distributions;
pub mod generators;
pub mod fixture;
pub mod gof;
pub mod histogram;
pub mod ingest;
pub mod error;
pub mod pipeline;
pub mod quad;
pub mod report;
pub mod rng;
pub mod simplex;
pub mod spatial;
pub mod special;
pub mod traffic;

pub use distributions::{DistSpec, Family, FitResult};
pub use error::{Error, Result};
pub use traffic::{MarkovParams, TimeSlot, Trace, Transmission};
