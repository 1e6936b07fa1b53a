//! Genetic-algorithm beam selection for codebook-based multiuser MIMO
//! initial access.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: complex matrices, the system configuration and beam selections
//! - [`channel`]: Rician channel synthesis (LOS construction, NLOS sampling)
//! - [`codebook`]: the DFT codebook and selection materialisation
//! - [`metrics`]: gain matrix, SINR, rates, delay-penalised and
//!   outage-constrained throughput, PA output-power mapping
//! - [`search`]: the genetic beam search plus exhaustive and random baselines
//! - [`harness`]: Monte Carlo experiment runner and CSV/JSON result writers
//! - [`config`]: flat `key=value` experiment files
//! - [`cli`]: command implementations behind the `beamsel` binary

pub mod channel;
pub mod cli;
pub mod codebook;
pub mod config;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod search;

pub use error::{Error, Result};
pub use model::{BeamSelection, ComplexMatrix, PaParams, RicianFactor, SystemConfig};
