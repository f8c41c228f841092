//! Term-frequency time series analytics over discipline-labelled
//! bibliographic corpora.
//!
//! The crate follows a concept from its first appearance in one discipline
//! through its growth, decline and migration into others:
//!
//! * [`corpus`] ingests JSON-lines or CSV records into an immutable,
//!   time-binned binary-occurrence index.
//! * [`rank`] ranks a discipline's vocabulary by Poisson percentile against
//!   the pooled background of all other disciplines.
//! * [`measure`] turns expert technical-sense annotations into the M and
//!   M-delta hardness statistics.
//! * [`trend`] builds normalized frequency series and smoothed log growth
//!   rates with low-support masking.
//! * [`diffusion`] is the logistic adoption model: rate law, trajectories
//!   and least-squares fitting.
//! * [`migration`] finds growth peaks, lags, donor/borrower roles and term
//!   succession.
//! * [`synth`] generates seeded synthetic corpora with known ground truth.
//! * [`plot`] renders growth series as standalone SVG.
//! * [`cli`] is the batch front end used by the `termflow` binary.

pub mod cli;
pub mod corpus;
pub mod diffusion;
mod error;
pub mod measure;
pub mod migration;
pub mod plot;
pub mod rank;
pub mod synth;
pub mod trend;

pub use error::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;
