//! The two-way protocol: preparation, forward check, frequency-coded
//! encoding, backward check and spectral decoding.

mod block;
mod check;
mod session;

use thiserror::Error;

pub use block::{
    run_block, run_block_with_tones, BackwardCheckRecord, BlockConfig, BlockTranscript, Eavesdropper,
    ForwardCheckRecord, NoiseLegs, ProtocolEvent, Verdict, DEFAULT_ERROR_THRESHOLD,
};
pub use check::{
    backward_check, forward_check, BackwardSample, BobSample, CheckResult, InsufficientSamples,
};
pub use session::{
    run_session, BlockSummary, SessionOptions, SessionReport, SessionStatus, DEFAULT_MAX_RETRIES,
};

use crate::channel::ChannelError;
use crate::codec::CodecError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("invalid block parameter `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("the codebook carries zero bits per block")]
    NoCapacity,
}

#[cfg(test)]
mod tests;
