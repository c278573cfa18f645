//! Designs the ECG low-pass at several orders, quantizes each to Q1.15 and
//! prints achieved attenuation before and after quantization.

use async_fir::dsp::{design_equiripple, magnitude_db, quantize, response_at, FilterSpec};
use async_fir::primitives::QFormat;

fn stopband_peak_db(taps: &[f64], spec: &FilterSpec) -> f64 {
    let (lo, hi) = (spec.stopband_edge, spec.sample_rate / 2.0);
    (0..=2000)
        .map(|k| lo + (hi - lo) * k as f64 / 2000.0)
        .map(|f| magnitude_db(response_at(taps, f, spec.sample_rate).norm()))
        .fold(f64::MIN, f64::max)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("order  iters  ripple_db  atten_db  q15_atten_db");
    for order in [16, 24, 32, 40, 48, 64] {
        let spec = FilterSpec::ecg_lowpass().with_order(order);
        let d = design_equiripple(&spec)?;
        let q = quantize(&d.coefficients, QFormat::Q1_15)?;
        let qt: Vec<f64> = q.raw().unwrap().iter().map(|&r| r as f64 / 32768.0).collect();
        println!(
            "{order:>5}  {:>5}  {:>9.3}  {:>8.2}  {:>12.2}",
            d.iterations,
            d.passband_ripple_db,
            d.stopband_atten_db,
            -stopband_peak_db(&qt, &spec)
        );
    }
    Ok(())
}
