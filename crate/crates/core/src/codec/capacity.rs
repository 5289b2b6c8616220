use serde::Serialize;

use super::CodecError;

/// Number of `r`-tone combinations on `N_c` channels and the bits they carry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Capacity {
    pub channels: usize,
    pub tones: usize,
    /// `N_max = N_c! / (r! (N_c − r)!)`
    pub combinations: u128,
    /// `floor(log2 N_max)`, the codeword length.
    pub bits: u32,
    /// `log2 N_max` as a real number.
    pub log2_combinations: f64,
}

/// Exact binomial coefficient, `None` on `u128` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc·(n−i) is divisible by (i+1) at every step.
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// `log2 C(n, k)` computed as a sum of logs, valid far beyond `u128`.
pub fn log2_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64 / (i + 1) as f64).log2())
        .sum()
}

pub fn combinatorial_capacity(channels: usize, tones: usize) -> Result<Capacity, CodecError> {
    if tones == 0 || tones > channels {
        return Err(CodecError::InvalidToneCount { tones, channels });
    }
    let combinations = binomial(channels as u64, tones as u64)
        .ok_or(CodecError::CapacityOverflow { channels, tones })?;
    Ok(Capacity {
        channels,
        tones,
        combinations,
        bits: combinations.ilog2(),
        log2_combinations: log2_binomial(channels as u64, tones as u64),
    })
}

/// `I = log2(N_max) / T_span` in bits per second.
pub fn transmission_rate(combinations: u128, t_span_s: f64) -> f64 {
    if combinations <= 1 {
        return 0.0;
    }
    (combinations as f64).log2() / t_span_s
}

/// Same as [`transmission_rate`] but from `log2 N_max` directly.
pub fn transmission_rate_log2(log2_combinations: f64, t_span_s: f64) -> f64 {
    log2_combinations / t_span_s
}
