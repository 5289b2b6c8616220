//! Multi-block message delivery with retransmission of undecodable blocks.

use serde::Serialize;

use super::block::{run_block, BlockConfig, BlockTranscript, Verdict};
use super::ProtocolError;
use crate::codec::Bits;
use crate::rng::derive_seed;

pub const DEFAULT_MAX_RETRIES: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SessionStatus {
    Delivered,
    /// An eavesdropping check failed; the session stops at that block.
    Aborted { block: usize, verdict: Verdict },
    /// A block stayed undecodable after all retries.
    DecodeFailed { block: usize, attempts: u32 },
}

/// Compact per-attempt record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSummary {
    pub block: usize,
    pub attempt: u32,
    pub seed: u64,
    pub verdict: Verdict,
    pub stream_len: usize,
    pub sent_bits: Bits,
    pub decoded_bits: Option<Bits>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionReport {
    pub status: SessionStatus,
    pub message_len: usize,
    pub bits_per_block: u32,
    /// Distinct message blocks.
    pub blocks: usize,
    /// Block transmissions including retransmissions.
    pub blocks_sent: usize,
    pub blocks_retransmitted: usize,
    pub blocks_delivered: usize,
    /// Delivered bits that differ from what was sent.
    pub bit_errors: usize,
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    pub throughput_bps: f64,
    /// Hex of the decoded message, when every block was delivered.
    pub decoded_message_hex: Option<String>,
    pub attempts: Vec<BlockSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub transcripts: Vec<BlockTranscript>,
}

impl SessionReport {
    pub fn is_delivered(&self) -> bool {
        self.status == SessionStatus::Delivered
    }

    pub fn decoded_message(&self) -> Option<Vec<u8>> {
        self.decoded_message_hex.as_deref().map(|h| {
            (0..h.len())
                .step_by(2)
                .map(|i| u8::from_str_radix(&h[i..i + 2], 16).expect("hex written by us"))
                .collect()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionOptions {
    pub max_retries: u32,
    /// Keep full block transcripts in the report.
    pub keep_transcripts: bool,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            max_retries: DEFAULT_MAX_RETRIES,
            keep_transcripts: false,
        }
    }
}

/// Sends `message` in blocks of `b` bits. Block `k`, attempt `a` runs with
/// seed `derive_seed(cfg.seed, [k, a])`.
pub fn run_session(
    cfg: &BlockConfig,
    message: &[u8],
    opts: SessionOptions,
) -> Result<SessionReport, ProtocolError> {
    cfg.validate()?;
    let book = cfg.codebook()?;
    let b = book.bits();
    if b == 0 && !message.is_empty() {
        return Err(ProtocolError::NoCapacity);
    }
    let chunks = if message.is_empty() {
        Vec::new()
    } else {
        Bits::chunks_from_bytes(message, b as usize)
    };

    let mut report = SessionReport {
        status: SessionStatus::Delivered,
        message_len: message.len(),
        bits_per_block: b,
        blocks: chunks.len(),
        blocks_sent: 0,
        blocks_retransmitted: 0,
        blocks_delivered: 0,
        bit_errors: 0,
        throughput_bps: 0.0,
        decoded_message_hex: None,
        attempts: Vec::new(),
        transcripts: Vec::new(),
    };
    let mut decoded = Vec::with_capacity(chunks.len());

    'blocks: for (k, bits) in chunks.iter().enumerate() {
        for attempt in 0..=opts.max_retries {
            let seed = derive_seed(cfg.seed, &[k as u64, u64::from(attempt)]);
            let t = run_block(&cfg.with_seed(seed), bits)?;
            report.blocks_sent += 1;
            if attempt > 0 {
                report.blocks_retransmitted += 1;
            }
            report.attempts.push(BlockSummary {
                block: k,
                attempt,
                seed,
                verdict: t.verdict,
                stream_len: t.stream.len(),
                sent_bits: bits.clone(),
                decoded_bits: t.decoded_bits.clone(),
            });
            let verdict = t.verdict;
            let got = t.decoded_bits.clone();
            if opts.keep_transcripts {
                report.transcripts.push(t);
            }
            match verdict {
                Verdict::Delivered => {
                    let got = got.expect("delivered blocks carry bits");
                    report.bit_errors +=
                        got.0.iter().zip(&bits.0).filter(|(a, b)| a != b).count();
                    report.blocks_delivered += 1;
                    decoded.push(got);
                    continue 'blocks;
                }
                Verdict::AbortedForward | Verdict::AbortedBackward => {
                    report.status = SessionStatus::Aborted { block: k, verdict };
                    break 'blocks;
                }
                Verdict::DecodeFailed => {}
            }
        }
        report.status = SessionStatus::DecodeFailed {
            block: k,
            attempts: opts.max_retries + 1,
        };
        break;
    }

    if report.blocks_sent > 0 {
        report.throughput_bps = f64::from(b) * report.blocks_delivered as f64
            / (cfg.t_span_s * report.blocks_sent as f64);
    }
    if report.is_delivered() {
        let bytes = Bits::concat_to_bytes(&decoded, message.len());
        report.decoded_message_hex = Some(bytes.iter().map(|x| format!("{x:02x}")).collect());
    }
    Ok(report)
}
