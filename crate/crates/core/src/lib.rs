//! Simulation and analysis of two-way single-photon secure direct
//! communication with frequency-coded flip modulation.
//!
//! Alice sends random BB84 states to Bob. After an eavesdropping check on
//! part of the received photons, Bob flips the rest on and off periodically
//! at one or more grid frequencies chosen by the message, keeps some back
//! as a second check, and returns them. Alice measures each returning photon
//! in the basis she prepared it in, records whether it was flipped and when,
//! and finds the message frequencies as peaks of the nonuniform DTFT of
//! those records.
//!
//! Modules:
//!
//! - [`quantum`]: the four states, `I`/`U` and projective measurement
//! - [`channel`]: Poisson source, fiber loss, detection probability
//! - [`codec`]: codebook, flip schedule, DTFT and tone detection, capacity
//! - [`protocol`]: block and session simulation with both checks
//! - [`security`]: eavesdropper yields and the distance/μ boundary
//! - [`config`] and [`commands`]: the JSON run configuration and the
//!   operations behind the `qsdc` binary
//!
//! The `examples/` directory has one runnable program per capability.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod codec;
pub mod commands;
pub mod config;
pub mod output;
pub mod protocol;
pub mod quantum;
pub mod rng;
pub mod security;

pub use channel::ChannelParams;
pub use codec::{Bits, Codebook, FrequencyGrid, Spectrum, SymbolStream};
pub use protocol::{run_block, run_session, BlockConfig, BlockTranscript, Verdict};
pub use quantum::{Basis, FlipOp, PhotonState};
pub use security::{evaluate, security_sweep, CodingParams, SecurityReport};
