//! Trip-level mode choice engine for advanced air mobility demand studies.
//!
//! Given census tract centroids, hub airports, a demand table, and sampled
//! service data, the engine prices each trip two ways: drive the whole way,
//! or drive to the nearest hub, fly, and drive on from the far hub. Each
//! mode gets a generalized cost (out-of-pocket spend, time valued at the
//! traveler's wage, monetized crash risk); a binary logit turns the cost gap
//! into a choice probability, a decision rule turns the probability into a
//! chosen mode, and aggregations summarize who flies and why.
//!
//! The crate is organized bottom-up:
//! - [`geo`]: coordinates, great-circle distance, nearest-hub assignment
//! - [`ingest`]: the CSV and key=value file formats
//! - [`calibrate`]: least-squares fare and block-time models
//! - [`router`]: ground distance and time, synthetic or remote
//! - [`models`]: per-mode cost, time, and risk
//! - [`choice`]: generalized cost, logit probability, decision rules
//! - [`pipeline`]: the end-to-end run, aggregate tables, distance sweeps
//! - [`cli`]: the command-line entry points

pub mod calibrate;
pub mod choice;
pub mod cli;
pub mod error;
pub mod geo;
pub mod ingest;
pub mod models;
pub mod pipeline;
pub mod router;

pub use error::{Error, Result};
