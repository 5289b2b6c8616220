use serde::{Deserialize, Serialize};

use super::CodecError;

/// Evenly spaced modulation channels `f_min, f_min + f_b, …, f_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyGrid {
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub f_b_hz: f64,
}

impl FrequencyGrid {
    /// The 16-channel grid used at the experimental operating point:
    /// 25 kHz to 400 kHz in 25 kHz steps.
    pub const OPERATING_POINT: FrequencyGrid = FrequencyGrid {
        f_min_hz: 25e3,
        f_max_hz: 400e3,
        f_b_hz: 25e3,
    };

    pub fn new(f_min_hz: f64, f_max_hz: f64, f_b_hz: f64) -> Result<Self, CodecError> {
        let grid = Self {
            f_min_hz,
            f_max_hz,
            f_b_hz,
        };
        grid.channel_count()?;
        Ok(grid)
    }

    /// `N_c = (f_max − f_min)/f_b + 1`. Fails unless the span is an integer
    /// number of spacings (to 1e-9 relative).
    pub fn channel_count(&self) -> Result<usize, CodecError> {
        let invalid = |reason: &str| CodecError::InvalidGrid(reason.to_string());
        if !(self.f_min_hz > 0.0 && self.f_min_hz.is_finite()) {
            return Err(invalid("f_min_hz must be positive"));
        }
        if !(self.f_max_hz >= self.f_min_hz && self.f_max_hz.is_finite()) {
            return Err(invalid("f_max_hz must be >= f_min_hz"));
        }
        if !(self.f_b_hz > 0.0 && self.f_b_hz.is_finite()) {
            return Err(invalid("f_b_hz must be positive"));
        }
        let steps = (self.f_max_hz - self.f_min_hz) / self.f_b_hz;
        let rounded = steps.round();
        if (steps - rounded).abs() > 1e-9 * rounded.max(1.0) {
            return Err(CodecError::InvalidGrid(format!(
                "(f_max - f_min)/f_b = {steps} is not an integer"
            )));
        }
        Ok(rounded as usize + 1)
    }

    /// Channel count of a grid already known to be valid.
    pub fn len(&self) -> usize {
        self.channel_count().expect("grid validated on construction")
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn frequency(&self, index: usize) -> f64 {
        self.f_min_hz + index as f64 * self.f_b_hz
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.frequency(i)).collect()
    }

    /// Channel index of `f`, if it lies on the grid (within 1e-6 of a spacing).
    pub fn index_of(&self, f: f64) -> Option<usize> {
        let pos = (f - self.f_min_hz) / self.f_b_hz;
        let idx = pos.round();
        if (pos - idx).abs() > 1e-6 || idx < 0.0 || idx as usize >= self.len() {
            return None;
        }
        Some(idx as usize)
    }
}
