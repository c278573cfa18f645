//! Event-kernel properties on random gate networks.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use proptest::prelude::*;

use async_fir::primitives::CElementState;
use async_fir::sim::{Circuit, ComponentKind, Event, Kernel, LogicLevel, NetId, Pin, SimTime, Value};

#[derive(Debug, Clone)]
enum Gate {
    Buf(usize),
    Inv(usize),
    C(usize, bool, usize, bool),
}

#[derive(Debug, Clone)]
struct Network {
    inputs: usize,
    gates: Vec<(Gate, u64)>,
    stimulus: Vec<(usize, u64, bool)>,
}

fn network(allow_c: bool) -> impl Strategy<Value = Network> {
    (1usize..4, 1usize..16).prop_flat_map(move |(inputs, n)| {
        let gates = (0..n)
            .map(|i| {
                let avail = inputs + i;
                let kinds = if allow_c { 3 } else { 2 };
                (0..kinds, 0..avail, any::<bool>(), 0..avail, any::<bool>(), 1u64..50).prop_map(
                    |(k, a, ia, b, ib, d)| {
                        let g = match k {
                            0 => Gate::Buf(a),
                            1 => Gate::Inv(a),
                            _ => Gate::C(a, ia, b, ib),
                        };
                        (g, d)
                    },
                )
            })
            .collect::<Vec<_>>();
        let stim = prop::collection::vec((0..inputs, 0u64..400, any::<bool>()), 0..24);
        (gates, stim).prop_map(move |(gates, mut stimulus)| {
            stimulus.sort_by_key(|s| s.1);
            Network {
                inputs,
                gates,
                stimulus,
            }
        })
    })
}

fn build(n: &Network) -> (Kernel, Vec<NetId>) {
    let mut c = Circuit::new();
    let mut nets: Vec<NetId> = (0..n.inputs).map(|i| c.add_bit(format!("in{i}"))).collect();
    for (i, (g, d)) in n.gates.iter().enumerate() {
        let out = c.add_bit(format!("g{i}"));
        let pin = |net: usize, inv: bool| if inv { Pin::inv(nets[net]) } else { Pin::new(nets[net]) };
        let kind = match *g {
            Gate::Buf(a) => ComponentKind::Buffer { input: nets[a], output: out },
            Gate::Inv(a) => ComponentKind::Inverter { input: nets[a], output: out },
            Gate::C(a, ia, b, ib) => ComponentKind::CElement {
                a: pin(a, ia),
                b: pin(b, ib),
                output: out,
                state: CElementState::default(),
            },
        };
        c.add_component(format!("u{i}"), SimTime(*d), kind);
        nets.push(out);
    }
    let mut k = Kernel::new(c).unwrap();
    k.record_events();
    for &(i, t, v) in &n.stimulus {
        k.schedule(nets[i], Value::Bit(LogicLevel::from_bool(v)), SimTime(t))
            .unwrap();
    }
    (k, nets)
}

fn run(n: &Network) -> (Vec<Event>, Vec<bool>) {
    let (mut k, nets) = build(n);
    k.run_to_quiescence(100_000).unwrap();
    let finals = nets.iter().map(|&x| k.value(x).level().is_high()).collect();
    (k.recorded_events().to_vec(), finals)
}

proptest! {
    #[test]
    fn events_apply_in_time_then_sequence_order(n in network(true)) {
        let (events, _) = run(&n);
        for w in events.windows(2) {
            prop_assert!((w[0].time, w[0].seq) < (w[1].time, w[1].seq), "{:?}", w);
        }
    }

    #[test]
    fn every_applied_event_changes_its_net(n in network(true)) {
        let (k, _) = build(&n);
        let mut shadow: HashMap<NetId, Value> = k
            .circuit()
            .nets()
            .iter()
            .enumerate()
            .map(|(i, info)| (NetId(i), info.initial))
            .collect();
        let (events, _) = run(&n);
        for e in events {
            prop_assert_ne!(shadow[&e.net], e.value, "{:?}", e);
            shadow.insert(e.net, e.value);
        }
    }

    #[test]
    fn runs_are_reproducible(n in network(true)) {
        prop_assert_eq!(run(&n), run(&n));
    }

    #[test]
    fn combinational_networks_settle_to_their_logic_value(n in network(false)) {
        let (_, finals) = run(&n);
        let mut want: Vec<bool> = vec![false; n.inputs];
        for &(i, _, v) in &n.stimulus {
            want[i] = v;
        }
        for (g, _) in &n.gates {
            let v = match *g {
                Gate::Buf(a) => want[a],
                Gate::Inv(a) => !want[a],
                Gate::C(..) => unreachable!(),
            };
            want.push(v);
        }
        prop_assert_eq!(finals, want);
    }

    #[test]
    fn probes_see_exactly_the_applied_events(n in network(true)) {
        let (mut k, nets) = build(&n);
        let seen = Arc::new(Mutex::new(Vec::new()));
        for &net in &nets {
            let seen = Arc::clone(&seen);
            k.attach_probe(net, move |t, v| {
                assert_eq!(v.get(t.net), t.to);
                seen.lock().unwrap().push((t.time, t.seq, t.net, t.to));
            })
            .unwrap();
        }
        k.run_to_quiescence(100_000).unwrap();
        let applied: Vec<_> = k.recorded_events().iter().map(|e| (e.time, e.seq, e.net, e.value)).collect();
        prop_assert_eq!(&*seen.lock().unwrap(), &applied);
    }
}

#[test]
fn ring_oscillator_runs_until_the_horizon() {
    let mut c = Circuit::new();
    let a = c.add_bit("a");
    c.add_component("inv", SimTime(7), ComponentKind::Inverter { input: a, output: a });
    let mut k = Kernel::new(c).unwrap();
    let stats = k.run_until(SimTime(70)).unwrap();
    assert_eq!(stats.events_processed, 10);
    assert!(k.run_to_quiescence(50).is_err());
}
