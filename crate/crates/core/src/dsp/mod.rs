//! Filter mathematics: equiripple design, frequency response, golden FIR
//! models, coefficient quantization and windowed spectra.

mod coeff_file;
mod golden;
mod quantize;
mod remez;
mod response;
mod spectrum;

pub use coeff_file::{parse_coefficients, read_coefficients, render_coefficients, write_coefficients};
pub use golden::{fir_fixed, fir_real, golden_fir, Arithmetic, GoldenOutput};
pub use quantize::quantize;
pub use remez::{design_equiripple, remez, Band, EquirippleDesign, RemezOptions};
pub use response::{freq_response, magnitude_db, response_at, MAGNITUDE_FLOOR_DB};
pub use spectrum::spectrum;

use thiserror::Error;

use crate::primitives::QFormat;

#[derive(Debug, Error)]
pub enum DspError {
    #[error("invalid filter specification: {0}")]
    InvalidSpec(String),
    #[error("Remez exchange did not converge after {} iterations", .best.iterations)]
    NoConvergence { best: Box<EquirippleDesign> },
    #[error("tap {index} = {value} does not fit {format}")]
    Overflow {
        index: usize,
        value: f64,
        format: QFormat,
    },
    #[error("fixed-point arithmetic requested but coefficients are not quantized")]
    MissingQuantization,
    #[error("signal too short for a spectrum: {0} samples (need at least 16)")]
    SignalTooShort(usize),
    #[error("coefficient file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Low-pass filter requirements, all frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub sample_rate: f64,
    pub passband_edge: f64,
    pub stopband_edge: f64,
    pub passband_ripple_db: f64,
    pub stopband_atten_db: f64,
    pub order: usize,
}

impl FilterSpec {
    /// ECG low-pass: 125 Hz sampling, 35 Hz pass edge, 45 Hz stop edge,
    /// 1 dB ripple, 80 dB attenuation target, order 32.
    pub fn ecg_lowpass() -> Self {
        FilterSpec {
            sample_rate: 125.0,
            passband_edge: 35.0,
            stopband_edge: 45.0,
            passband_ripple_db: 1.0,
            stopband_atten_db: 80.0,
            order: 32,
        }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn validate(&self) -> Result<(), DspError> {
        let nyq = self.sample_rate / 2.0;
        if !(self.passband_edge > 0.0
            && self.passband_edge < self.stopband_edge
            && self.stopband_edge < nyq)
        {
            return Err(DspError::InvalidSpec(format!(
                "need 0 < passband ({}) < stopband ({}) < fs/2 ({nyq})",
                self.passband_edge, self.stopband_edge
            )));
        }
        if !(self.passband_ripple_db > 0.0 && self.stopband_atten_db > 0.0) {
            return Err(DspError::InvalidSpec(
                "ripple and attenuation must be positive".into(),
            ));
        }
        if self.order < 2 || !self.order.is_multiple_of(2) {
            return Err(DspError::InvalidSpec(format!(
                "order {} must be even and at least 2",
                self.order
            )));
        }
        Ok(())
    }

    /// Linear passband deviation implied by the peak-to-peak ripple in dB.
    pub fn passband_deviation(&self) -> f64 {
        let g = 10f64.powf(self.passband_ripple_db / 20.0);
        (g - 1.0) / (g + 1.0)
    }

    pub fn stopband_deviation(&self) -> f64 {
        10f64.powf(-self.stopband_atten_db / 20.0)
    }
}

/// Quantized mirror of a real tap set.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedTaps {
    pub format: QFormat,
    pub raw: Vec<i64>,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub taps: Vec<f64>,
    pub quantized: Option<QuantizedTaps>,
}

impl Coefficients {
    pub fn new(taps: Vec<f64>) -> Self {
        Coefficients {
            taps,
            quantized: None,
        }
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn order(&self) -> usize {
        self.taps.len().saturating_sub(1)
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.taps.len();
        let real = (0..n).all(|k| self.taps[k] == self.taps[n - 1 - k]);
        let raw = self
            .quantized
            .as_ref()
            .is_none_or(|q| (0..n).all(|k| q.raw[k] == q.raw[n - 1 - k]));
        real && raw
    }

    pub fn raw(&self) -> Option<&[i64]> {
        self.quantized.as_ref().map(|q| q.raw.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    /// `(frequency in Hz, magnitude in dB)` pairs.
    pub points: Vec<(f64, f64)>,
}

impl FrequencyResponse {
    /// Magnitude at the grid point nearest to `freq`.
    pub fn at(&self, freq: f64) -> Option<f64> {
        self.points
            .iter()
            .min_by(|a, b| (a.0 - freq).abs().total_cmp(&(b.0 - freq).abs()))
            .map(|p| p.1)
    }
}
