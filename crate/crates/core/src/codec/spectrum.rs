//! Nonuniform DTFT of detection records and tone detection.

use std::f64::consts::TAU;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{CodecError, FrequencyGrid};
use crate::output::{sig9, write_csv};

/// One detected photon: whether Alice saw a flip, and when.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub flipped: bool,
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    pub arrival_s: f64,
}

/// Detection records of one block, strictly increasing in time.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SymbolStream {
    records: Vec<DetectionRecord>,
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    t_span_s: f64,
}

impl SymbolStream {
    pub fn new(records: Vec<DetectionRecord>, t_span_s: f64) -> Result<Self, CodecError> {
        if !(t_span_s > 0.0) {
            return Err(CodecError::InvalidTimeSpan(t_span_s));
        }
        for (i, r) in records.iter().enumerate() {
            if !(0.0..=t_span_s).contains(&r.arrival_s) {
                return Err(CodecError::InvalidStream(format!(
                    "record {i} at {} s lies outside [0, {t_span_s}]",
                    r.arrival_s
                )));
            }
            if i > 0 && r.arrival_s <= records[i - 1].arrival_s {
                return Err(CodecError::InvalidStream(format!(
                    "arrival times not strictly increasing at record {i}"
                )));
            }
        }
        Ok(Self { records, t_span_s })
    }

    pub fn records(&self) -> &[DetectionRecord] {
        &self.records
    }

    pub fn t_span_s(&self) -> f64 {
        self.t_span_s
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Keeps the records for which `keep` returns true.
    pub fn filtered(&self, mut keep: impl FnMut(usize, &DetectionRecord) -> bool) -> Self {
        Self {
            records: self
                .records
                .iter()
                .enumerate()
                .filter(|(i, r)| keep(*i, r))
                .map(|(_, r)| *r)
                .collect(),
            t_span_s: self.t_span_s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub frequency_hz: f64,
    pub magnitude: f64,
}

/// `|X(f)|` sampled every `f_b / oversample` across the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    points: Vec<SpectrumPoint>,
    oversample: usize,
    record_count: usize,
    /// True when computed from a stream without any records.
    pub empty: bool,
}

impl Spectrum {
    pub fn points(&self) -> &[SpectrumPoint] {
        &self.points
    }

    pub fn oversample(&self) -> usize {
        self.oversample
    }

    pub fn record_count(&self) -> usize {
        self.record_count
    }

    /// Points that fall exactly on grid channels.
    pub fn channels(&self) -> impl Iterator<Item = &SpectrumPoint> {
        self.points.iter().step_by(self.oversample)
    }

    /// On-grid point with the largest magnitude (lowest frequency on ties).
    pub fn argmax_channel(&self) -> Option<SpectrumPoint> {
        self.channels()
            .copied()
            .fold(None, |best: Option<SpectrumPoint>, p| match best {
                Some(b) if b.magnitude >= p.magnitude => Some(b),
                _ => Some(p),
            })
    }

    /// Writes `frequency_hz,magnitude` rows with 9 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        write_csv(
            out,
            &["frequency_hz", "magnitude"],
            self.points
                .iter()
                .map(|p| vec![sig9(p.frequency_hz), sig9(p.magnitude)]),
        )
    }
}

/// `X(f) = Σ x_i e^{−j2πfτ_i}` evaluated by direct summation.
pub fn dtft_at(stream: &SymbolStream, frequency_hz: f64) -> (f64, f64) {
    let mut re = 0.0;
    let mut im = 0.0;
    for r in stream.records.iter().filter(|r| r.flipped) {
        let cycles = frequency_hz * r.arrival_s;
        let phase = TAU * (cycles - cycles.floor());
        let (s, c) = phase.sin_cos();
        re += c;
        im -= s;
    }
    (re, im)
}

/// Magnitude spectrum over the grid at `f_b / oversample` spacing.
pub fn dtft(
    stream: &SymbolStream,
    grid: &FrequencyGrid,
    oversample: usize,
) -> Result<Spectrum, CodecError> {
    if oversample == 0 {
        return Err(CodecError::InvalidOversample);
    }
    let channels = grid.channel_count()?;
    let step = grid.f_b_hz / oversample as f64;
    let count = (channels - 1) * oversample + 1;
    let points = (0..count)
        .map(|k| {
            let f = grid.f_min_hz + k as f64 * step;
            let (re, im) = dtft_at(stream, f);
            SpectrumPoint {
                frequency_hz: f,
                magnitude: re.hypot(im),
            }
        })
        .collect();
    Ok(Spectrum {
        points,
        oversample,
        record_count: stream.len(),
        empty: stream.is_empty(),
    })
}

/// Tones picked out of a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToneDetection {
    /// Detected frequencies, ascending.
    #[serde(serialize_with = "crate::output::serde_sig9::vec")]
    pub tones: Vec<f64>,
    /// Peak magnitude over noise floor, in the same order.
    #[serde(serialize_with = "crate::output::serde_sig9::vec")]
    pub snr: Vec<f64>,
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    pub noise_floor: f64,
}

/// Median of the on-grid channel magnitudes after dropping the `r` largest;
/// zero when nothing is left.
pub fn noise_floor(spec: &Spectrum, r: usize) -> f64 {
    let mut mags: Vec<f64> = spec.channels().map(|p| p.magnitude).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let skip = r.min(mags.len());
    let rest = &mut mags[skip..];
    if rest.is_empty() {
        return 0.0;
    }
    rest.sort_by(f64::total_cmp);
    let m = rest.len();
    if m % 2 == 1 {
        rest[m / 2]
    } else {
        0.5 * (rest[m / 2 - 1] + rest[m / 2])
    }
}

/// Picks the `r` strongest grid channels and accepts them only if every
/// one exceeds `snr_threshold` times the noise floor.
pub fn detect_tones(
    spec: &Spectrum,
    r: usize,
    snr_threshold: f64,
) -> Result<ToneDetection, CodecError> {
    if r == 0 {
        return Err(CodecError::InvalidToneCount { tones: 0, channels: spec.channels().count() });
    }
    let mut chans: Vec<SpectrumPoint> = spec.channels().copied().collect();
    if r > chans.len() {
        return Err(CodecError::InvalidToneCount { tones: r, channels: chans.len() });
    }
    // Stable sort keeps lower frequencies first among equal magnitudes.
    chans.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));
    let floor = noise_floor(spec, r);
    let mut peaks: Vec<SpectrumPoint> = chans[..r].to_vec();
    peaks.sort_by(|a, b| a.frequency_hz.total_cmp(&b.frequency_hz));
    let snr: Vec<f64> = peaks.iter().map(|p| p.magnitude / floor).collect();
    // NaN (0/0) fails the comparison, as it should.
    if snr.iter().all(|&s| s > snr_threshold) {
        Ok(ToneDetection {
            tones: peaks.iter().map(|p| p.frequency_hz).collect(),
            snr,
            noise_floor: floor,
        })
    } else {
        Err(CodecError::AmbiguousDetection {
            best_snr: snr.iter().copied().fold(f64::NAN, f64::max),
        })
    }
}
