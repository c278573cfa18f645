use std::f64::consts::PI;

use rustfft::{num_complex::Complex64, FftPlanner};

use super::{magnitude_db, DspError, FrequencyResponse};

/// One-sided magnitude spectrum of a Hann-windowed signal.
///
/// Magnitudes are normalized by the window sum, so a full-scale sinusoid of
/// amplitude `A` centred on a bin reads `A / 2`.
pub fn spectrum(x: &[f64], sample_rate: f64) -> Result<FrequencyResponse, DspError> {
    let n = x.len();
    if n < 16 {
        return Err(DspError::SignalTooShort(n));
    }
    let window: Vec<f64> = (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
        .collect();
    let gain: f64 = window.iter().sum();
    let mut buf: Vec<Complex64> = x
        .iter()
        .zip(&window)
        .map(|(&v, &w)| Complex64::new(v * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let points = buf[..=n / 2]
        .iter()
        .enumerate()
        .map(|(k, c)| (k as f64 * sample_rate / n as f64, magnitude_db(c.norm() / gain)))
        .collect();
    Ok(FrequencyResponse { points })
}
