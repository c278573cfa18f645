//! Runs the same stimulus through the gated pipeline built with
//! flip-flops and with transparent latches, and prints stage registers and
//! monitor findings for both.

use async_fir::arch::{DelayConfig, Variant};
use async_fir::dsp::{quantize, Coefficients};
use async_fir::io::{build_variant, run_stream, RunOptions};
use async_fir::primitives::QFormat;
use async_fir::sim::SimTime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = quantize(&Coefficients::new(vec![0.25, 0.5, 0.25, -0.125]), QFormat::Q1_15)?;
    let stimulus = [10, 20, 30, 40];
    for v in [Variant::ModifiedDff, Variant::ModifiedLatch] {
        let fc = build_variant(v, &c, &DelayConfig::default(), SimTime(0))?;
        let run = run_stream(fc, &stimulus, &RunOptions::default())?;
        println!("{}: registers {:?}, outputs {:?}", v.name(), run.final_registers, run.outputs);
        print!("{}", run.violation_log());
    }
    Ok(())
}
