//! Injects one sample into the original micropipeline arrangement, where
//! every stage shares the global request, and shows the word flooding all
//! stage registers.

use async_fir::arch::{DelayConfig, FilterSim, Variant};
use async_fir::dsp::{quantize, Coefficients};
use async_fir::io::build_variant;
use async_fir::monitor::{detect_flood, snapshot_tokens, MonitorMode};
use async_fir::primitives::QFormat;
use async_fir::sim::SimTime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = quantize(&Coefficients::new(vec![0.1, 0.2, 0.3, 0.2, 0.1]), QFormat::Q1_15)?;
    let fc = build_variant(Variant::OriginalMicropipeline, &c, &DelayConfig::default(), SimTime(0))?;
    let mut sim = FilterSim::new(fc)?;
    let before = snapshot_tokens(&mut sim)?;
    sim.inject_sample(777, SimTime(0))?;
    sim.kernel.run_to_quiescence(100_000)?;
    let after = snapshot_tokens(&mut sim)?;
    println!("registers before: {:?}", before.words);
    println!("registers after:  {:?}", after.words);
    println!("tokens after:     {:?}", after.tokens);
    println!("input busy: {}", sim.is_busy());
    if let Some(v) = detect_flood(&before, &after, 777, MonitorMode::Original) {
        println!("{v}");
    }
    Ok(())
}
