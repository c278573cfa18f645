#![allow(dead_code)]

use std::sync::OnceLock;

use async_fir::dsp::{design_equiripple, quantize, Coefficients, FilterSpec};
use async_fir::primitives::QFormat;

/// Default ECG low-pass design quantized to Q1.15, computed once per test binary.
pub fn ecg_coefficients() -> &'static Coefficients {
    static C: OnceLock<Coefficients> = OnceLock::new();
    C.get_or_init(|| {
        let d = design_equiripple(&FilterSpec::ecg_lowpass()).expect("design converges");
        quantize(&d.coefficients, QFormat::Q1_15).expect("taps fit Q1.15")
    })
}

/// Q1.15 coefficients from raw integers.
pub fn raw_coefficients(raw: &[i64]) -> Coefficients {
    let taps = raw.iter().map(|&r| r as f64 / 32768.0).collect();
    quantize(&Coefficients::new(taps), QFormat::Q1_15).expect("raw values fit")
}
