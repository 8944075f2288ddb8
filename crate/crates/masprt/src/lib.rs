//! Link-level simulator and design toolkit for diffusive molecular
//! communication with sequential detection.
//!
//! The crate models a point-to-point diffusion channel as a linear
//! time-invariant Poisson channel, implements three receivers for binary
//! signalling over it (a memory-aided truncated SPRT, a fixed-sample ML
//! detector and a max-sample threshold detector), evaluates analytic error
//! and stopping-time bounds for the sequential receiver, designs
//! release-rate sequences under power and detectability constraints, and
//! drives Monte Carlo bit-error-rate experiments with reproducible seeding.
//!
//! Start with the runnable examples: `cargo run --example packet_ber`, or
//! the `masprt` binary for the full experiment CLI.

pub mod channel;
pub mod detectors;
pub mod error;
pub mod math;
pub mod rng;

pub use channel::{ChannelParams, Modulation, SampleMatrix, Symbol, TapVector};
pub use detectors::{DecisionMemory, DetectorOutcome, TruncationMode, WaldThresholds};
pub use error::{Error, Result};
