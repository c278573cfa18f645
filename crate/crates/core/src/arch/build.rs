use super::{
    ArchError, Channel, DelayConfig, FilterCircuit, GlobalHandshake, StageTopology, Variant,
};
use crate::dsp::Coefficients;
use crate::primitives::{ArithBlock, CElementState, FixedPointConfig, RegisterElement, RegisterKind};
use crate::sim::{Circuit, ComponentId, ComponentKind, NetId, Pin, SenderPolicy, SimTime};

fn check_taps(taps: usize, c: &Coefficients) -> Result<(FixedPointConfig, Vec<i64>), ArchError> {
    if taps < 2 {
        return Err(ArchError::InvalidConfig(format!("need at least 2 taps, got {taps}")));
    }
    let q = c.quantized.as_ref().ok_or_else(|| {
        ArchError::InvalidConfig("coefficients must be quantized".into())
    })?;
    if q.raw.len() != taps {
        return Err(ArchError::InvalidConfig(format!(
            "{taps} taps requested but {} coefficients supplied",
            q.raw.len()
        )));
    }
    let format = FixedPointConfig {
        coeff: q.format,
        ..FixedPointConfig::default()
    };
    Ok((format, q.raw.clone()))
}

fn buffer(c: &mut Circuit, name: &str, delay: SimTime, input: NetId, output: NetId) -> ComponentId {
    c.add_component(name, delay, ComponentKind::Buffer { input, output })
}

fn celement(c: &mut Circuit, name: &str, delay: SimTime, a: Pin, b: Pin, output: NetId) -> ComponentId {
    c.add_component(
        name,
        delay,
        ComponentKind::CElement {
            a,
            b,
            output,
            state: CElementState::default(),
        },
    )
}

#[allow(clippy::too_many_arguments)]
fn register(
    c: &mut Circuit,
    name: &str,
    kind: RegisterKind,
    delay: SimTime,
    width: u32,
    data: NetId,
    control: NetId,
    output: NetId,
) -> ComponentId {
    c.add_component(
        name,
        delay,
        ComponentKind::Register {
            data,
            control,
            output,
            reg: RegisterElement::new(kind, width),
            last_control: crate::sim::LogicLevel::Low,
        },
    )
}

/// Balanced C-element tree; returns the root net. The root C-element
/// drives `root` directly.
fn c_tree(c: &mut Circuit, prefix: &str, delay: SimTime, inputs: &[NetId], root: NetId) {
    let mut level = inputs.to_vec();
    let mut rank = 0;
    while level.len() > 1 {
        let last_rank = level.len() <= 2;
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for (j, pair) in level.chunks(2).enumerate() {
            match pair {
                [a, b] => {
                    let out = if last_rank {
                        root
                    } else {
                        c.add_bit(format!("{prefix}{rank}_{j}"))
                    };
                    celement(c, &format!("{prefix}c{rank}_{j}"), delay, Pin::new(*a), Pin::new(*b), out);
                    next.push(out);
                }
                [a] => next.push(*a),
                _ => unreachable!(),
            }
        }
        level = next;
        rank += 1;
    }
}

struct Datapath {
    multipliers: Vec<ComponentId>,
    adders: Vec<ComponentId>,
    /// Final adder-tree node (input of the output register).
    result: NetId,
    width: u32,
}

/// Constant multipliers on each stage output and a balanced adder tree.
/// With `clock`, every level is followed by a register bank.
fn datapath(
    c: &mut Circuit,
    stage_q: &[NetId],
    coeffs: &[i64],
    format: FixedPointConfig,
    levels: &[SimTime],
    clock: Option<(NetId, SimTime)>,
) -> Datapath {
    let mut multipliers = Vec::new();
    let mut adders = Vec::new();
    let mut nodes: Vec<(NetId, u32)> = Vec::new();
    let sample_w = format.sample_bits;
    let coeff_w = format.coeff.width();
    // Registers a node when pipelining; returns the node to feed onward.
    let stage_reg = |c: &mut Circuit, name: String, net: NetId, w: u32| -> NetId {
        match clock {
            Some((clk, clk_to_q)) => {
                let q = c.add_word(format!("{name}_r"), w);
                register(c, &format!("{name}_reg"), RegisterKind::EdgeDff, clk_to_q, w, net, clk, q);
                q
            }
            None => net,
        }
    };
    let mut last_d = None;
    for (i, (&q, &k)) in stage_q.iter().zip(coeffs).enumerate() {
        let block = ArithBlock::multiplier(sample_w, coeff_w, levels[0]);
        let w = block.output_width;
        let p = c.add_word(format!("p{i}"), w);
        multipliers.push(c.add_component(
            format!("mul{i}"),
            levels[0],
            ComponentKind::Multiplier {
                input: q,
                coefficient: k,
                output: p,
                block,
            },
        ));
        last_d = Some(p);
        nodes.push((stage_reg(c, format!("p{i}"), p, w), w));
    }
    let mut rank = 1;
    while nodes.len() > 1 {
        let delay = levels[rank];
        let mut next = Vec::with_capacity(nodes.len().div_ceil(2));
        for (j, pair) in nodes.chunks(2).enumerate() {
            let name = format!("s{rank}_{j}");
            match pair {
                [(a, wa), (b, wb)] => {
                    let block = ArithBlock::adder(*wa, *wb, delay);
                    let w = block.output_width;
                    let s = c.add_word(name.clone(), w);
                    adders.push(c.add_component(
                        format!("add{rank}_{j}"),
                        delay,
                        ComponentKind::Adder {
                            a: *a,
                            b: *b,
                            output: s,
                            block,
                        },
                    ));
                    last_d = Some(s);
                    next.push((stage_reg(c, name, s, w), w));
                }
                [(a, wa)] => {
                    // Odd node passes through; the clocked build still
                    // registers it to keep every path the same depth.
                    last_d = Some(*a);
                    next.push((stage_reg(c, name, *a, *wa), *wa));
                }
                _ => unreachable!(),
            }
        }
        nodes = next;
        rank += 1;
    }
    let (root, width) = nodes[0];
    Datapath {
        multipliers,
        adders,
        // Unpipelined: the root node. Pipelined: the D input of the final
        // register bank, which is what the output register loads.
        result: if clock.is_some() {
            last_d.expect("at least one tap")
        } else {
            root
        },
        width,
    }
}

/// Plain micropipeline control with level latches.
///
/// Stage `i` has one C-element `c_i = C(r_i, ~c_{i+1})`; the request to the
/// next stage is `c_i` delayed by the latch propagation time, and the last
/// stage is acknowledged by an always-ready consumer. The environment holds
/// its request once raised, which freezes the pipeline with every stage
/// occupied.
pub fn build_original_micropipeline(
    taps: usize,
    coefficients: &Coefficients,
    delays: &DelayConfig,
) -> Result<FilterCircuit, ArchError> {
    let (format, raw) = check_taps(taps, coefficients)?;
    delays.validate(taps)?;
    let levels = delays.level_delays(taps)?;
    let d = delays;
    let mut c = Circuit::new();
    let greq = c.add_bit("greq");
    let data_in = c.add_word("data_in", format.sample_bits);
    let ctl: Vec<NetId> = (0..taps).map(|i| c.add_bit(format!("c{i}"))).collect();
    let consumer_ack = c.add_bit("consumer_ack");
    let sender = c.add_component(
        "sender",
        d.env_release,
        ComponentKind::Sender {
            ack: ctl[0],
            req: greq,
            policy: SenderPolicy::Hold,
        },
    );
    let mut stages = Vec::with_capacity(taps);
    let mut prev_q = data_in;
    for i in 0..taps {
        let req = if i == 0 {
            greq
        } else {
            let r = c.add_bit(format!("r{i}"));
            buffer(&mut c, &format!("reqdly{i}"), d.latch_d_to_q, ctl[i - 1], r);
            r
        };
        let next_ack = if i + 1 < taps { ctl[i + 1] } else { consumer_ack };
        let token = celement(&mut c, &format!("ctl{i}"), d.celement, Pin::new(req), Pin::inv(next_ack), ctl[i]);
        let q = c.add_word(format!("q{i}"), format.sample_bits);
        let reg = register(
            &mut c,
            &format!("reg{i}"),
            RegisterKind::LevelLatch,
            d.latch_d_to_q,
            format.sample_bits,
            prev_q,
            ctl[i],
            q,
        );
        stages.push(StageTopology {
            index: i,
            token_celement: Some(token),
            token_net: Some(ctl[i]),
            gate_celement: None,
            data_register: reg,
            register_output: q,
            channel: Some(Channel {
                req,
                ack: ctl[i],
                data: prev_q,
            }),
        });
        prev_q = q;
    }
    buffer(&mut c, "consumer", d.ack, ctl[taps - 1], consumer_ack);
    let qs: Vec<NetId> = stages.iter().map(|s| s.register_output).collect();
    let dp = datapath(&mut c, &qs, &raw, format, &levels, None);
    let y = c.add_word("y", dp.width);
    register(&mut c, "yreg", RegisterKind::EdgeDff, d.clk_to_q, dp.width, dp.result, consumer_ack, y);
    c.validate(&[data_in])?;
    Ok(FilterCircuit {
        circuit: c,
        variant: Variant::OriginalMicropipeline,
        format,
        delays: delays.clone(),
        stages,
        tap_multipliers: dp.multipliers,
        adder_tree: dp.adders,
        data_in,
        handshake: Some(GlobalHandshake {
            req: greq,
            ack: ctl[0],
            sender,
        }),
        clock: None,
        clock_period: None,
        output_data: dp.result,
        output_net: y,
        input_strobe: greq,
        output_strobe: consumer_ack,
        output_depth: 0,
    })
}

/// Pipeline in which every stage is released by the global request.
///
/// Per stage `i`:
/// * `b_i` is the stage request: the global request delayed by one gate on
///   stage 0, and `C(greq, ~z_{i-1})` on later stages, so a stage fires only
///   while the global request is High and its predecessor has returned to
///   zero.
/// * `b_i` clocks (or enables) the stage register.
/// * `k_i = b_i` delayed is the stage acknowledge and `z_i = C(greq, k_i)`
///   holds the stage token until the global request falls.
///
/// The output strobe is a delay chain from `b_0` matched to the register
/// clock-to-output plus the datapath levels. Tokens and the output
/// acknowledge merge through a balanced C-element tree into the global
/// acknowledge, and a four-phase sender withdraws the global request on it.
pub fn build_modified_fir(
    taps: usize,
    coefficients: &Coefficients,
    delays: &DelayConfig,
    register_kind: RegisterKind,
) -> Result<FilterCircuit, ArchError> {
    let (format, raw) = check_taps(taps, coefficients)?;
    delays.validate(taps)?;
    let levels = delays.level_delays(taps)?;
    let d = delays;
    let reg_delay = d.register_delay(register_kind);
    let mut c = Circuit::new();
    let greq = c.add_bit("greq");
    let gack = c.add_bit("gack");
    let data_in = c.add_word("data_in", format.sample_bits);
    let sender = c.add_component(
        "sender",
        d.env_release,
        ComponentKind::Sender {
            ack: gack,
            req: greq,
            policy: SenderPolicy::ReturnToZero,
        },
    );
    let mut stages: Vec<StageTopology> = Vec::with_capacity(taps);
    let mut tokens = Vec::with_capacity(taps + 1);
    let mut prev_q = data_in;
    let mut first_req = None;
    for i in 0..taps {
        let b = c.add_bit(format!("b{i}"));
        let gate = if i == 0 {
            buffer(&mut c, "match0", d.celement, greq, b);
            first_req = Some(b);
            None
        } else {
            let prev_token = stages[i - 1].token_net.expect("gated stage");
            Some(celement(&mut c, &format!("gate{i}"), d.celement, Pin::new(greq), Pin::inv(prev_token), b))
        };
        let k = c.add_bit(format!("k{i}"));
        buffer(&mut c, &format!("ackdly{i}"), d.ack, b, k);
        let z = c.add_bit(format!("z{i}"));
        let token = celement(&mut c, &format!("token{i}"), d.celement, Pin::new(greq), Pin::new(k), z);
        tokens.push(z);
        let q = c.add_word(format!("q{i}"), format.sample_bits);
        let reg = register(&mut c, &format!("reg{i}"), register_kind, reg_delay, format.sample_bits, prev_q, b, q);
        stages.push(StageTopology {
            index: i,
            token_celement: Some(token),
            token_net: Some(z),
            gate_celement: gate,
            data_register: reg,
            register_output: q,
            channel: Some(Channel {
                req: b,
                ack: k,
                data: prev_q,
            }),
        });
        prev_q = q;
    }
    let qs: Vec<NetId> = stages.iter().map(|s| s.register_output).collect();
    let dp = datapath(&mut c, &qs, &raw, format, &levels, None);

    // Output strobe: matched delay chain from the first stage request.
    let chain: Vec<SimTime> = std::iter::once(reg_delay)
        .chain(levels.iter().copied())
        .chain(std::iter::once(d.output_margin))
        .collect();
    let mut tail = first_req.expect("stage 0 exists");
    for (j, &delay) in chain.iter().enumerate() {
        let out = if j + 1 == chain.len() {
            c.add_bit("out_req")
        } else {
            c.add_bit(format!("outdly{j}"))
        };
        buffer(&mut c, &format!("outdly{j}"), delay, tail, out);
        tail = out;
    }
    let out_req = tail;
    let out_ack = c.add_bit("out_ack");
    buffer(&mut c, "consumer", d.ack, out_req, out_ack);
    let z_out = c.add_bit("z_out");
    celement(&mut c, "token_out", d.celement, Pin::new(greq), Pin::new(out_ack), z_out);
    tokens.push(z_out);
    c_tree(&mut c, "gack", d.celement, &tokens, gack);

    let y = c.add_word("y", dp.width);
    register(&mut c, "yreg", RegisterKind::EdgeDff, d.clk_to_q, dp.width, dp.result, out_req, y);
    c.validate(&[data_in])?;
    Ok(FilterCircuit {
        circuit: c,
        variant: match register_kind {
            RegisterKind::EdgeDff => Variant::ModifiedDff,
            RegisterKind::LevelLatch => Variant::ModifiedLatch,
        },
        format,
        delays: delays.clone(),
        stages,
        tap_multipliers: dp.multipliers,
        adder_tree: dp.adders,
        data_in,
        handshake: Some(GlobalHandshake {
            req: greq,
            ack: gack,
            sender,
        }),
        clock: None,
        clock_period: None,
        output_data: dp.result,
        output_net: y,
        input_strobe: greq,
        output_strobe: out_req,
        output_depth: 0,
    })
}

/// Clocked reference: register delay line plus a datapath with a register
/// bank after the multipliers and after every adder rank.
///
/// Rising edges occur at `T/2 + nT`. A sample captured at edge `n` reaches
/// the output register at edge `n + depth`.
pub fn build_sync_fir(
    taps: usize,
    coefficients: &Coefficients,
    clock_period: SimTime,
    delays: &DelayConfig,
) -> Result<FilterCircuit, ArchError> {
    let (format, raw) = check_taps(taps, coefficients)?;
    delays.validate(taps)?;
    let levels = delays.level_delays(taps)?;
    let d = delays;
    let slowest = *levels.iter().max().expect("non-empty");
    let required = slowest + d.clk_to_q;
    if clock_period < required {
        return Err(ArchError::ClockTooFast {
            period: clock_period,
            required,
        });
    }
    if !clock_period.0.is_multiple_of(2) {
        return Err(ArchError::InvalidConfig("clock period must be even".into()));
    }
    if d.bundling_margin.0 > clock_period.0 / 2 {
        return Err(ArchError::InvalidConfig(
            "bundling margin exceeds half the clock period".into(),
        ));
    }
    let mut c = Circuit::new();
    let clk = c.add_bit("clk");
    c.add_component("clock", SimTime(clock_period.0 / 2), ComponentKind::Clock { output: clk });
    let data_in = c.add_word("data_in", format.sample_bits);
    let mut stages = Vec::with_capacity(taps);
    let mut prev_q = data_in;
    for i in 0..taps {
        let q = c.add_word(format!("q{i}"), format.sample_bits);
        let reg = register(&mut c, &format!("reg{i}"), RegisterKind::EdgeDff, d.clk_to_q, format.sample_bits, prev_q, clk, q);
        stages.push(StageTopology {
            index: i,
            token_celement: None,
            token_net: None,
            gate_celement: None,
            data_register: reg,
            register_output: q,
            channel: None,
        });
        prev_q = q;
    }
    let qs: Vec<NetId> = stages.iter().map(|s| s.register_output).collect();
    let dp = datapath(&mut c, &qs, &raw, format, &levels, Some((clk, d.clk_to_q)));
    let y = c
        .net_by_name(&format!("s{}_0_r", levels.len() - 1))
        .expect("final register bank");
    c.validate(&[data_in])?;
    Ok(FilterCircuit {
        circuit: c,
        variant: Variant::SynchronousClocked,
        format,
        delays: delays.clone(),
        stages,
        tap_multipliers: dp.multipliers,
        adder_tree: dp.adders,
        data_in,
        handshake: None,
        clock: Some(clk),
        clock_period: Some(clock_period),
        output_data: dp.result,
        output_net: y,
        input_strobe: clk,
        output_strobe: clk,
        output_depth: levels.len(),
    })
}
