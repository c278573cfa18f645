use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::{Coefficients, FrequencyResponse};

/// Magnitudes at or below zero are reported at this level.
pub const MAGNITUDE_FLOOR_DB: f64 = -300.0;

pub fn magnitude_db(mag: f64) -> f64 {
    if mag > 0.0 {
        (20.0 * mag.log10()).max(MAGNITUDE_FLOOR_DB)
    } else {
        MAGNITUDE_FLOOR_DB
    }
}

/// `sum_k taps[k] * exp(-j 2 pi f k / fs)`.
pub fn response_at(taps: &[f64], freq: f64, sample_rate: f64) -> Complex64 {
    let w = -2.0 * PI * freq / sample_rate;
    taps.iter()
        .enumerate()
        .map(|(k, &t)| Complex64::from_polar(t, w * k as f64))
        .sum()
}

pub fn freq_response(c: &Coefficients, freqs: &[f64], sample_rate: f64) -> FrequencyResponse {
    FrequencyResponse {
        points: freqs
            .iter()
            .map(|&f| (f, magnitude_db(response_at(&c.taps, f, sample_rate).norm())))
            .collect(),
    }
}
