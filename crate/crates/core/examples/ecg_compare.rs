//! Filters a synthetic noisy ECG with the gated asynchronous filter and the
//! clocked reference, then prints the comparison summary.

use async_fir::arch::{DelayConfig, Variant};
use async_fir::dsp::{design_equiripple, quantize, FilterSpec};
use async_fir::io::{run_experiment, synth_ecg, EcgParams, ExperimentConfig, RunOptions};
use async_fir::primitives::QFormat;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let design = design_equiripple(&FilterSpec::ecg_lowpass())?;
    let coefficients = quantize(&design.coefficients, QFormat::Q1_15)?;
    let signal = synth_ecg(&EcgParams::default());
    let started = std::time::Instant::now();
    let report = run_experiment(&ExperimentConfig {
        variants: vec![Variant::ModifiedDff, Variant::SynchronousClocked],
        coefficients,
        signal,
        delays: DelayConfig::default(),
        clock_period: None,
        run: RunOptions::default(),
        parallel: true,
    })?;
    print!("{}", report.summary());
    println!("elapsed: {:.1?}", started.elapsed());
    Ok(())
}
