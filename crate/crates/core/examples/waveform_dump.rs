//! Writes a VCD of the first few handshakes of the gated pipeline to
//! `gated.vcd` in the current directory.

use std::path::Path;

use async_fir::arch::{DelayConfig, Variant};
use async_fir::dsp::{quantize, Coefficients};
use async_fir::io::{build_variant, run_stream, write_vcd, RunOptions};
use async_fir::primitives::QFormat;
use async_fir::sim::SimTime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = quantize(&Coefficients::new(vec![0.5, 0.25, 0.125]), QFormat::Q1_15)?;
    let fc = build_variant(Variant::ModifiedDff, &c, &DelayConfig::default(), SimTime(0))?;
    println!("{}", fc.netlist());
    let opts = RunOptions {
        vcd_samples: Some(4),
        ..RunOptions::default()
    };
    let run = run_stream(fc, &[100, 200, -50, 7, 9], &opts)?;
    let trace = run.vcd.expect("waveforms requested");
    write_vcd(&trace, Path::new("gated.vcd"))?;
    println!("wrote gated.vcd: {} signals, {} changes", trace.vars.len(), trace.changes.len());
    Ok(())
}
