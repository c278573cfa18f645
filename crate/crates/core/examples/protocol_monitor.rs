//! Records the handshake observations of a clean run, then swaps one
//! request/acknowledge pair and replays the trace through a fresh monitor.

use async_fir::arch::{DelayConfig, Variant};
use async_fir::dsp::{quantize, Coefficients};
use async_fir::io::{build_variant, run_stream, RunOptions};
use async_fir::monitor::{ChannelId, MonitorMode, Observation, ProtocolMonitor};
use async_fir::primitives::QFormat;
use async_fir::sim::SimTime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = quantize(&Coefficients::new(vec![0.2, 0.4, 0.2]), QFormat::Q1_15)?;
    let fc = build_variant(Variant::ModifiedDff, &c, &DelayConfig::default(), SimTime(0))?;
    let taps = fc.taps();
    let opts = RunOptions {
        record_observations: true,
        ..RunOptions::default()
    };
    let trace = run_stream(fc, &[5, -3, 8], &opts)?.observations;
    let clean = ProtocolMonitor::replay(MonitorMode::Modified, taps, &trace);
    println!("{} observations, {} violations on replay", trace.len(), clean.len());

    // Exchange stage 0's first request edge with its acknowledge, keeping
    // the timestamps in place.
    let on_stage0 = |o: &Observation| o.is_control() && o.channel == ChannelId::Stage(0);
    let i = trace.iter().position(on_stage0).expect("stage 0 handshakes");
    let j = i + 1 + trace[i + 1..].iter().position(on_stage0).expect("a later edge");
    let mut faulty = trace.clone();
    faulty.swap(i, j);
    (faulty[i].time, faulty[j].time) = (trace[i].time, trace[j].time);
    for v in ProtocolMonitor::replay(MonitorMode::Modified, taps, &faulty) {
        println!("{v}");
    }
    Ok(())
}
