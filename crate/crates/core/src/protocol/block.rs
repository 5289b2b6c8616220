//! One block of the two-way protocol, end to end.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::check::{
    backward_check, forward_check, BackwardSample, BobSample, CheckResult, InsufficientSamples,
};
use super::ProtocolError;
use crate::channel::{fiber_transmittance, thin, ChannelParams, Leg, PhotonSource};
use crate::codec::{
    detect_tones, dtft, Bits, CodecError, Codebook, DetectionRecord, FrequencyGrid,
    ModulationPlan, Spectrum, SymbolStream, ToneComposition,
};
use crate::quantum::{apply, measure, prepare_random, Basis, FlipOp, PhotonState};
use crate::rng::{derive_seed, seeded, SimRng};

/// Default QBER above which a check aborts the block.
pub const DEFAULT_ERROR_THRESHOLD: f64 = 0.05;

/// Active attacker model for a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Eavesdropper {
    #[default]
    None,
    /// Measures every forward pulse in a random basis and resends the result.
    InterceptResendForward,
    /// Applies `U` to every photon on the way back.
    FlipBackward,
}

/// Which measurements see channel bit-flip noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLegs {
    /// Bob's check measurements only.
    Forward,
    /// Alice's final measurements only.
    Backward,
    #[default]
    Both,
}

impl NoiseLegs {
    fn forward(self) -> bool {
        matches!(self, NoiseLegs::Forward | NoiseLegs::Both)
    }

    fn backward(self) -> bool {
        matches!(self, NoiseLegs::Backward | NoiseLegs::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockConfig {
    /// Pulses Alice prepares per block, one per repetition slot.
    pub n2: usize,
    /// Check QBER above which the block is aborted.
    pub error_threshold: f64,
    pub grid: FrequencyGrid,
    /// Tones per block, `r`.
    pub tones: usize,
    /// How several tones share a block; irrelevant for one tone.
    #[serde(default)]
    pub composition: ToneComposition,
    pub t_span_s: f64,
    /// Spectrum evaluation points per channel spacing.
    pub oversample: usize,
    pub snr_threshold: f64,
    /// Physical link; carries the check fraction `C`.
    pub channel: ChannelParams,
    pub seed: u64,
    #[serde(default)]
    pub eavesdropper: Eavesdropper,
    #[serde(default)]
    pub noise: NoiseLegs,
    /// Every pulse reaches its destination (the `μ → ∞`, lossless limit).
    #[serde(default)]
    pub force_detection: bool,
}

impl BlockConfig {
    /// The experimental operating point: 10 MHz pulses over a 1 ms block,
    /// 16 channels from 25 to 400 kHz, one tone. With μ = 0.1, η_det = 0.32
    /// and C = 1/2 over a short fiber, about 80 photons per block reach
    /// the decoder.
    pub fn operating_point(seed: u64) -> Self {
        Self {
            n2: 10_000,
            error_threshold: DEFAULT_ERROR_THRESHOLD,
            grid: FrequencyGrid::OPERATING_POINT,
            tones: 1,
            composition: ToneComposition::Xor,
            t_span_s: 1e-3,
            oversample: 4,
            snr_threshold: 1.0,
            channel: ChannelParams {
                mu: 0.1,
                alpha_db_per_km: 0.2,
                l1_km: 0.0,
                l2_km: 0.0,
                eta_det: 0.32,
                error_rate: 0.005,
                check_fraction: 0.5,
                f_rep_hz: 10e6,
            },
            seed,
            eavesdropper: Eavesdropper::None,
            noise: NoiseLegs::Both,
            force_detection: false,
        }
    }

    /// Operating point with a noiseless channel that never loses a pulse.
    pub fn ideal(seed: u64) -> Self {
        let mut cfg = Self::operating_point(seed);
        cfg.channel.error_rate = 0.0;
        cfg.channel.alpha_db_per_km = 0.0;
        cfg.force_detection = true;
        cfg
    }

    pub fn check_fraction(&self) -> f64 {
        self.channel.check_fraction
    }

    pub fn codebook(&self) -> Result<Codebook, CodecError> {
        Codebook::new(self.grid, self.tones)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        self.channel.validate()?;
        let invalid = |key: &'static str, reason: String| ProtocolError::InvalidConfig { key, reason };
        if self.n2 == 0 {
            return Err(invalid("n2", "must be at least 1".into()));
        }
        if !(self.error_threshold > 0.0 && self.error_threshold < 1.0) {
            return Err(invalid("error_threshold", "must lie in (0, 1)".into()));
        }
        if self.error_threshold <= self.channel.error_rate {
            return Err(invalid(
                "error_threshold",
                format!(
                    "must exceed the channel error rate {}, otherwise honest blocks abort",
                    self.channel.error_rate
                ),
            ));
        }
        if !(self.t_span_s > 0.0) {
            return Err(invalid("t_span_s", "must be positive".into()));
        }
        let last_slot = (self.n2 - 1) as f64 / self.channel.f_rep_hz;
        if last_slot > self.t_span_s {
            return Err(invalid(
                "n2",
                format!("{} pulses at the repetition rate do not fit in t_span_s", self.n2),
            ));
        }
        if self.oversample == 0 {
            return Err(invalid("oversample", "must be at least 1".into()));
        }
        if !(self.snr_threshold >= 1.0) {
            return Err(invalid("snr_threshold", "must be at least 1".into()));
        }
        self.codebook()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Delivered,
    AbortedForward,
    AbortedBackward,
    DecodeFailed,
}

/// Protocol steps in the order they happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ProtocolEvent {
    Prepared { pulses: usize },
    ForwardTransmitted { received: usize },
    ForwardChecked { pass: bool },
    Encoded { encoding: usize, backward_checks: usize },
    BackwardTransmitted { detected: usize },
    BackwardChecked { pass: bool },
    Decoded { success: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardCheckRecord {
    pub positions: Vec<usize>,
    pub bases: Vec<Basis>,
    pub outcomes: Vec<u8>,
    /// `None` when no sample shared Alice's basis.
    pub result: Option<CheckResult>,
}

impl ForwardCheckRecord {
    pub fn qber(&self) -> Option<f64> {
        self.result.map(|r| r.qber)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackwardCheckRecord {
    pub positions: Vec<usize>,
    pub ops: Vec<FlipOp>,
    /// Alice's flip bit per position; `None` for photons lost on the way back.
    pub outcomes: Vec<Option<bool>>,
    pub result: Option<CheckResult>,
}

impl BackwardCheckRecord {
    pub fn qber(&self) -> Option<f64> {
        self.result.map(|r| r.qber)
    }
}

/// Everything that happened in one block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockTranscript {
    pub seed: u64,
    pub n2: usize,
    /// Pulses that reached Bob.
    pub n1: usize,
    /// Photons Bob modulated with the message, before the return trip.
    pub encoded: usize,
    /// Photons Alice detected, check photons included.
    pub alice_detected: usize,
    /// Photons that survived the return trip and detector efficiency,
    /// summed over every returning pulse.
    pub alice_photons: u64,
    /// The codeword sent, when the block carried one.
    pub message_bits: Option<Bits>,
    #[serde(serialize_with = "crate::output::serde_sig9::vec")]
    pub sent_tones: Vec<f64>,
    pub forward_check: ForwardCheckRecord,
    pub backward_check: Option<BackwardCheckRecord>,
    pub encoding_positions: Vec<usize>,
    /// Alice's `(x_i, τ_i)` records after removing the check photons.
    pub stream: SymbolStream,
    #[serde(serialize_with = "crate::output::serde_sig9::vec")]
    pub decoded_tones: Vec<f64>,
    #[serde(serialize_with = "crate::output::serde_sig9::vec")]
    pub snr: Vec<f64>,
    pub decoded_bits: Option<Bits>,
    pub verdict: Verdict,
    pub events: Vec<ProtocolEvent>,
    /// Spectrum of `stream`, when the block got as far as decoding.
    #[serde(skip)]
    pub spectrum: Option<Spectrum>,
}

impl BlockTranscript {
    /// Decoded correctly, as opposed to merely landing on some codeword.
    pub fn round_trip_ok(&self) -> bool {
        self.verdict == Verdict::Delivered
            && self.message_bits.is_some()
            && self.decoded_bits == self.message_bits
    }

    /// Tone detection cleared the SNR threshold and found the sent tones,
    /// whether or not they form a codeword.
    pub fn tones_recovered(&self) -> bool {
        !self.decoded_tones.is_empty() && self.decoded_tones == self.sent_tones
    }
}

/// Independent random streams for each party.
struct Streams {
    alice: SimRng,
    bob: SimRng,
    channel: SimRng,
    eve: SimRng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        Self {
            alice: seeded(derive_seed(seed, &[1])),
            bob: seeded(derive_seed(seed, &[2])),
            channel: seeded(derive_seed(seed, &[3])),
            eve: seeded(derive_seed(seed, &[4])),
        }
    }
}

/// A pulse Bob holds: its state and how many photons are still in it.
#[derive(Debug, Clone, Copy)]
struct HeldPulse {
    slot: usize,
    state: PhotonState,
    photons: u64,
}

fn ceil_count(fraction: f64, n: usize) -> usize {
    // Guard against 0.5·n landing a hair above an integer.
    let x = fraction * n as f64;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

fn noisy<R: Rng + ?Sized>(bit: u8, error_rate: f64, enabled: bool, rng: &mut R) -> u8 {
    if enabled && error_rate > 0.0 && rng.random::<f64>() < error_rate {
        bit ^ 1
    } else {
        bit
    }
}

/// Runs the four protocol steps for one block carrying `message_bits`.
pub fn run_block(cfg: &BlockConfig, message_bits: &Bits) -> Result<BlockTranscript, ProtocolError> {
    cfg.validate()?;
    let book = cfg.codebook()?;
    let tones = book.encode_bits(message_bits)?;
    simulate(cfg, &book, Some(message_bits.clone()), tones)
}

/// Runs a block modulated with explicit grid `tones`, which need not form a
/// codeword. Used to probe the spectrum of every channel.
pub fn run_block_with_tones(
    cfg: &BlockConfig,
    tones: &[f64],
) -> Result<BlockTranscript, ProtocolError> {
    cfg.validate()?;
    let book = cfg.codebook()?;
    let mut tones = tones.to_vec();
    tones.sort_by(f64::total_cmp);
    let message_bits = book.decode_bits(&tones).ok();
    simulate(cfg, &book, message_bits, tones)
}

fn simulate(
    cfg: &BlockConfig,
    book: &Codebook,
    message_bits: Option<Bits>,
    tones: Vec<f64>,
) -> Result<BlockTranscript, ProtocolError> {
    let ch = &cfg.channel;
    let c = ch.check_fraction;
    let mut rng = Streams::new(cfg.seed);
    let mut events = Vec::with_capacity(7);
    let slot_time = |slot: usize| slot as f64 / ch.f_rep_hz;

    // Step 1: Alice prepares n2 random BB84 states, one per slot.
    let alice_states: Vec<PhotonState> =
        (0..cfg.n2).map(|_| prepare_random(&mut rng.alice)).collect();
    events.push(ProtocolEvent::Prepared { pulses: cfg.n2 });

    // Forward leg.
    let source = PhotonSource::new(ch.mu)?;
    let forward_survival = fiber_transmittance(ch.alpha_db_per_km, Leg::Forward.length_km(ch));
    let mut held = Vec::new();
    for (slot, &state) in alice_states.iter().enumerate() {
        let photons = if cfg.force_detection {
            1
        } else {
            thin(source.emit(&mut rng.channel), forward_survival, &mut rng.channel)
        };
        if photons == 0 {
            continue;
        }
        let state = match cfg.eavesdropper {
            Eavesdropper::InterceptResendForward => {
                let basis = Basis::random(&mut rng.eve);
                PhotonState::new(basis, measure(state, basis, &mut rng.eve))
            }
            _ => state,
        };
        held.push(HeldPulse {
            slot,
            state,
            photons,
        });
    }
    let n1 = held.len();
    events.push(ProtocolEvent::ForwardTransmitted { received: n1 });

    // Step 2: Bob measures ⌈C·n1⌉ random received photons in random bases.
    let mut check_idx = sample(&mut rng.bob, n1, ceil_count(c, n1).min(n1)).into_vec();
    check_idx.sort_unstable();
    let samples: Vec<BobSample> = check_idx
        .iter()
        .map(|&i| {
            let basis = Basis::random(&mut rng.bob);
            let outcome = measure(held[i].state, basis, &mut rng.bob);
            BobSample {
                position: held[i].slot,
                basis,
                outcome: noisy(outcome, ch.error_rate, cfg.noise.forward(), &mut rng.channel),
            }
        })
        .collect();
    let forward = forward_check(&alice_states, &samples, cfg.error_threshold);
    let forward_record = ForwardCheckRecord {
        positions: samples.iter().map(|s| s.position).collect(),
        bases: samples.iter().map(|s| s.basis).collect(),
        outcomes: samples.iter().map(|s| s.outcome).collect(),
        result: forward.ok(),
    };
    let forward_pass = matches!(forward, Ok(r) if r.pass);
    events.push(ProtocolEvent::ForwardChecked { pass: forward_pass });

    let mut transcript = BlockTranscript {
        seed: cfg.seed,
        n2: cfg.n2,
        n1,
        encoded: 0,
        alice_detected: 0,
        alice_photons: 0,
        message_bits,
        sent_tones: tones.clone(),
        forward_check: forward_record,
        backward_check: None,
        encoding_positions: Vec::new(),
        stream: SymbolStream::new(Vec::new(), cfg.t_span_s)?,
        decoded_tones: Vec::new(),
        snr: Vec::new(),
        decoded_bits: None,
        verdict: Verdict::AbortedForward,
        events: Vec::new(),
        spectrum: None,
    };
    if !forward_pass {
        transcript.events = events;
        return Ok(transcript);
    }

    // Step 3: of the rest, ⌈C(1−C)·n1⌉ become backward checks with random
    // I/U; the others carry the frequency-coded message.
    let mut is_forward_check = vec![false; n1];
    for &i in &check_idx {
        is_forward_check[i] = true;
    }
    let remaining: Vec<usize> = (0..n1).filter(|&i| !is_forward_check[i]).collect();
    let n_back = ceil_count(c * (1.0 - c), n1).min(remaining.len());
    let mut back_pick = sample(&mut rng.bob, remaining.len(), n_back).into_vec();
    back_pick.sort_unstable();
    let mut is_back_check = vec![false; remaining.len()];
    for &k in &back_pick {
        is_back_check[k] = true;
    }
    let plan = ModulationPlan::random(&cfg.grid, &tones, cfg.t_span_s, &mut rng.bob)?;
    // (held index, op, is backward check)
    let returning: Vec<(usize, FlipOp, bool)> = remaining
        .iter()
        .zip(&is_back_check)
        .map(|(&i, &check)| {
            let op = if check {
                FlipOp::random(&mut rng.bob)
            } else {
                plan.op_with(cfg.composition, slot_time(held[i].slot), &mut rng.bob)
            };
            (i, op, check)
        })
        .collect();
    transcript.encoded = returning.len() - n_back;
    transcript.encoding_positions = returning
        .iter()
        .filter(|r| !r.2)
        .map(|r| held[r.0].slot)
        .collect();
    events.push(ProtocolEvent::Encoded {
        encoding: transcript.encoded,
        backward_checks: n_back,
    });

    // Step 4: return trip and Alice's measurement in her preparation basis.
    let backward_survival =
        fiber_transmittance(ch.alpha_db_per_km, Leg::Backward.length_km(ch)) * ch.eta_det;
    let mut back_samples = Vec::with_capacity(n_back);
    let mut records = Vec::with_capacity(transcript.encoded);
    for &(i, op, check) in &returning {
        let pulse = held[i];
        let mut state = apply(op, pulse.state);
        if cfg.eavesdropper == Eavesdropper::FlipBackward {
            state = apply(FlipOp::Flip, state);
        }
        let arriving = if cfg.force_detection {
            pulse.photons
        } else {
            thin(pulse.photons, backward_survival, &mut rng.channel)
        };
        transcript.alice_photons += arriving;
        let detected = arriving > 0;
        let flipped = detected.then(|| {
            let prepared = alice_states[pulse.slot];
            let outcome = measure(state, prepared.basis, &mut rng.alice);
            let outcome = noisy(outcome, ch.error_rate, cfg.noise.backward(), &mut rng.channel);
            outcome != prepared.bit
        });
        if check {
            back_samples.push(BackwardSample {
                position: pulse.slot,
                op,
                flipped,
            });
        } else if let Some(x) = flipped {
            records.push(DetectionRecord {
                flipped: x,
                arrival_s: slot_time(pulse.slot),
            });
        }
    }
    transcript.alice_detected =
        records.len() + back_samples.iter().filter(|s| s.flipped.is_some()).count();
    events.push(ProtocolEvent::BackwardTransmitted {
        detected: transcript.alice_detected,
    });

    let backward: Result<CheckResult, InsufficientSamples> =
        backward_check(&back_samples, cfg.error_threshold);
    let backward_pass = matches!(backward, Ok(r) if r.pass);
    transcript.backward_check = Some(BackwardCheckRecord {
        positions: back_samples.iter().map(|s| s.position).collect(),
        ops: back_samples.iter().map(|s| s.op).collect(),
        outcomes: back_samples.iter().map(|s| s.flipped).collect(),
        result: backward.ok(),
    });
    events.push(ProtocolEvent::BackwardChecked {
        pass: backward_pass,
    });
    transcript.stream = SymbolStream::new(records, cfg.t_span_s)?;
    if !backward_pass {
        transcript.verdict = Verdict::AbortedBackward;
        transcript.events = events;
        return Ok(transcript);
    }

    // Spectral decoding.
    let spectrum = dtft(&transcript.stream, &cfg.grid, cfg.oversample)?;
    transcript.verdict = Verdict::DecodeFailed;
    if let Ok(det) = detect_tones(&spectrum, cfg.tones, cfg.snr_threshold) {
        if let Ok(bits) = book.decode_bits(&det.tones) {
            transcript.decoded_bits = Some(bits);
            transcript.verdict = Verdict::Delivered;
        }
        transcript.decoded_tones = det.tones;
        transcript.snr = det.snr;
    }
    events.push(ProtocolEvent::Decoded {
        success: transcript.verdict == Verdict::Delivered,
    });
    transcript.spectrum = Some(spectrum);
    transcript.events = events;
    Ok(transcript)
}
