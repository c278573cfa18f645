//! Drives a two-input C-element directly through the event kernel and
//! prints every output transition seen by a probe.

use std::sync::{Arc, Mutex};

use async_fir::primitives::CElementState;
use async_fir::sim::{Circuit, ComponentKind, Kernel, Pin, SimTime, Value};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut c = Circuit::new();
    let a = c.add_bit("a");
    let b = c.add_bit("b");
    let y = c.add_bit("y");
    c.add_component(
        "c0",
        SimTime(100),
        ComponentKind::CElement {
            a: Pin::new(a),
            b: Pin::new(b),
            output: y,
            state: CElementState::default(),
        },
    );
    let mut k = Kernel::new(c)?;
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    k.attach_probe(y, move |t, _| log.lock().unwrap().push((t.time, t.to)))?;
    for (net, level, at) in [(a, 1, 0), (b, 1, 500), (a, 0, 1000), (a, 1, 1200), (b, 0, 1300), (a, 0, 1500)] {
        let v = if level == 1 { Value::HIGH } else { Value::LOW };
        k.schedule(net, v, SimTime(at))?;
    }
    k.run_to_quiescence(1_000)?;
    for (t, v) in seen.lock().unwrap().iter() {
        println!("{:>6} ps  y -> {}", t.0, v.level().is_high() as u8);
    }
    Ok(())
}
