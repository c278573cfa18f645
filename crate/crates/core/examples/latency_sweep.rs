//! Annotates the datapath with random per-level delays and compares the
//! measured asynchronous and clocked latencies with their models.

use async_fir::arch::{DelayConfig, Variant};
use async_fir::dsp::{design_equiripple, quantize, FilterSpec};
use async_fir::io::{build_variant, default_clock_period, latency_report, run_stream, RunOptions};
use async_fir::primitives::QFormat;
use async_fir::sim::SimTime;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = design_equiripple(&FilterSpec::ecg_lowpass())?;
    let c = quantize(&d.coefficients, QFormat::Q1_15)?;
    let depth = DelayConfig::depth(c.len());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples: Vec<i64> = (0..16).map(|_| rng.gen_range(-2048..2048)).collect();
    for trial in 0..5 {
        let levels: Vec<SimTime> = (0..depth).map(|_| SimTime(rng.gen_range(300..6000))).collect();
        let delays = DelayConfig {
            levels: Some(levels.clone()),
            ..DelayConfig::default()
        };
        let period = default_clock_period(&delays, c.len())?;
        println!("trial {trial}: levels {:?} ps, clock {} ps", levels.iter().map(|l| l.0).collect::<Vec<_>>(), period.0);
        for v in [Variant::ModifiedDff, Variant::SynchronousClocked] {
            let fc = build_variant(v, &c, &delays, period)?;
            let run = run_stream(fc.clone(), &samples, &RunOptions::default())?;
            print!("{}", latency_report(&fc, &run)?.render());
        }
    }
    Ok(())
}
