//! Frequency coding: codewords as tone sets, the flip schedule, and spectral
//! decoding of the received symbol stream.

mod capacity;
mod codebook;
mod grid;
mod schedule;
mod spectrum;

use thiserror::Error;

pub use capacity::{
    binomial, combinatorial_capacity, log2_binomial, transmission_rate, transmission_rate_log2,
    Capacity,
};
pub use codebook::{rank, unrank, Bits, Codebook};
pub use grid::FrequencyGrid;
pub use schedule::{flip_indicator, flip_schedule, ModulationPlan, Tone, ToneComposition};
pub use spectrum::{
    detect_tones, dtft, dtft_at, noise_floor, DetectionRecord, Spectrum, SpectrumPoint,
    SymbolStream, ToneDetection,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
    #[error("tone count {tones} must lie in 1..={channels}")]
    InvalidToneCount { tones: usize, channels: usize },
    #[error("C({channels}, {tones}) overflows 128 bits")]
    CapacityOverflow { channels: usize, tones: usize },
    #[error("expected {expected} bits, got {got}")]
    WrongBitLength { expected: usize, got: usize },
    #[error("expected {expected} distinct tones, got {got}")]
    WrongToneCount { expected: usize, got: usize },
    #[error("{0} Hz is not a grid frequency")]
    OffGrid(f64),
    #[error("tone {0} Hz appears twice")]
    DuplicateTone(f64),
    #[error("time span must be positive, got {0}")]
    InvalidTimeSpan(f64),
    #[error("invalid symbol stream: {0}")]
    InvalidStream(String),
    #[error("oversampling factor must be at least 1")]
    InvalidOversample,
    #[error("not a bit string: {0:?}")]
    InvalidBits(String),
    #[error("no tone set clears the SNR threshold (best {best_snr})")]
    AmbiguousDetection { best_snr: f64 },
    #[error("tone set has rank {rank}, outside the codebook")]
    UnmappedCodeword { rank: u128 },
}
