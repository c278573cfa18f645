//! Reproducible stand-in for a noisy ECG recording: a Gaussian-wave heart
//! beat train plus interference tones on a 1 Hz grid above the stopband
//! edge.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SignalFile;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcgParams {
    pub duration_s: f64,
    pub sample_rate: f64,
    /// Peak amplitude of each interference tone, in LSBs.
    pub noise_amplitude: f64,
    pub seed: u64,
    pub bits: u32,
    pub heart_rate_bpm: f64,
    /// Interference tone frequencies span this closed range in 1 Hz steps.
    pub noise_band_hz: (f64, f64),
}

impl Default for EcgParams {
    fn default() -> Self {
        EcgParams {
            duration_s: 80.0,
            sample_rate: 125.0,
            noise_amplitude: 30.0,
            seed: 1,
            bits: 12,
            heart_rate_bpm: 72.0,
            noise_band_hz: (46.0, 62.0),
        }
    }
}

/// (amplitude in LSBs, offset from the R peak in s, width in s)
const WAVES: [(f64, f64, f64); 5] = [
    (120.0, -0.20, 0.025), // P
    (-80.0, -0.035, 0.010), // Q
    (900.0, 0.0, 0.012),   // R
    (-150.0, 0.035, 0.012), // S
    (250.0, 0.30, 0.050),  // T
];

pub fn synth_ecg(p: &EcgParams) -> SignalFile {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let n = (p.duration_s * p.sample_rate).round() as usize;
    let rr = 60.0 / p.heart_rate_bpm;
    // Beat times with a few percent of RR jitter, one beat before the start
    // so the first T wave is present.
    let mut beats = Vec::new();
    let mut t = -rr / 2.0;
    while t < p.duration_s + rr {
        beats.push(t);
        t += rr * (1.0 + rng.gen_range(-0.03..0.03));
    }
    let mut tones = Vec::new();
    if p.noise_amplitude > 0.0 {
        let mut f = p.noise_band_hz.0;
        while f <= p.noise_band_hz.1 && f < p.sample_rate / 2.0 {
            tones.push((f, rng.gen_range(0.0..2.0 * PI)));
            f += 1.0;
        }
    }
    let max = ((1i64 << (p.bits - 1)) - 1) as f64;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / p.sample_rate;
            let mut v = 0.0;
            for &b in &beats {
                let dt = t - b;
                if dt.abs() > 1.0 {
                    continue;
                }
                for (a, off, w) in WAVES {
                    let x = (dt - off) / w;
                    v += a * (-0.5 * x * x).exp();
                }
            }
            for &(f, ph) in &tones {
                v += p.noise_amplitude * (2.0 * PI * f * t + ph).sin();
            }
            v.round().clamp(-max - 1.0, max) as i64
        })
        .collect();
    SignalFile {
        sample_rate: p.sample_rate,
        bits: p.bits,
        samples,
    }
}
