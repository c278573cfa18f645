use std::fmt::Write as _;

use super::{LogicLevel, NetId, SimError, SimTime, Value};
use crate::primitives::{
    arith_eval, register_eval, ArithBlock, CElementState, PrimitiveError, RegisterElement,
    RegisterKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComponentId(pub usize);

/// A component input, optionally through an inverting bubble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pin {
    pub net: NetId,
    pub inverted: bool,
}

impl Pin {
    pub fn new(net: NetId) -> Self {
        Pin {
            net,
            inverted: false,
        }
    }

    pub fn inv(net: NetId) -> Self {
        Pin {
            net,
            inverted: true,
        }
    }

    fn level(self, values: &[Value]) -> LogicLevel {
        let l = values[self.net.0].level();
        if self.inverted {
            l.invert()
        } else {
            l
        }
    }
}

/// How the environment's request port reacts to an acknowledge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SenderPolicy {
    /// Withdraw the request once the acknowledge rises (four-phase sender).
    ReturnToZero,
    /// Keep the request asserted; used to freeze a pipeline mid-handshake.
    Hold,
}

#[derive(Debug, Clone)]
pub enum ComponentKind {
    /// Matched delay element; copies bits or words.
    Buffer { input: NetId, output: NetId },
    Inverter { input: NetId, output: NetId },
    CElement {
        a: Pin,
        b: Pin,
        output: NetId,
        state: CElementState,
    },
    Register {
        data: NetId,
        control: NetId,
        output: NetId,
        reg: RegisterElement,
        last_control: LogicLevel,
    },
    /// Multiplies a word input by a constant coefficient.
    Multiplier {
        input: NetId,
        coefficient: i64,
        output: NetId,
        block: ArithBlock,
    },
    Adder {
        a: NetId,
        b: NetId,
        output: NetId,
        block: ArithBlock,
    },
    /// Environment request port: drives `req`, reacts to `ack`. Rising edges
    /// of `req` come from external stimulus.
    Sender {
        ack: NetId,
        req: NetId,
        policy: SenderPolicy,
    },
    /// Free-running clock: its own output is its only input.
    Clock { output: NetId },
}

#[derive(Debug, Clone)]
pub struct Component {
    pub name: String,
    pub delay: SimTime,
    pub kind: ComponentKind,
}

impl Component {
    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            ComponentKind::Buffer { .. } => "delay",
            ComponentKind::Inverter { .. } => "inv",
            ComponentKind::CElement { .. } => "celement",
            ComponentKind::Register { reg, .. } => reg.kind.name(),
            ComponentKind::Multiplier { .. } => "mul",
            ComponentKind::Adder { .. } => "add",
            ComponentKind::Sender { .. } => "sender",
            ComponentKind::Clock { .. } => "clock",
        }
    }

    pub fn inputs(&self) -> Vec<NetId> {
        match &self.kind {
            ComponentKind::Buffer { input, .. } | ComponentKind::Inverter { input, .. } => {
                vec![*input]
            }
            ComponentKind::CElement { a, b, .. } => vec![a.net, b.net],
            ComponentKind::Register { data, control, .. } => vec![*data, *control],
            ComponentKind::Multiplier { input, .. } => vec![*input],
            ComponentKind::Adder { a, b, .. } => vec![*a, *b],
            ComponentKind::Sender { ack, .. } => vec![*ack],
            ComponentKind::Clock { output } => vec![*output],
        }
    }

    pub fn output(&self) -> NetId {
        match &self.kind {
            ComponentKind::Buffer { output, .. }
            | ComponentKind::Inverter { output, .. }
            | ComponentKind::CElement { output, .. }
            | ComponentKind::Register { output, .. }
            | ComponentKind::Multiplier { output, .. }
            | ComponentKind::Adder { output, .. }
            | ComponentKind::Clock { output } => *output,
            ComponentKind::Sender { req, .. } => *req,
        }
    }

    /// Output word width for word-valued components.
    fn output_width(&self) -> Option<u32> {
        match &self.kind {
            ComponentKind::Register { reg, .. } => Some(reg.width),
            ComponentKind::Multiplier { block, .. } | ComponentKind::Adder { block, .. } => {
                Some(block.output_width)
            }
            _ => None,
        }
    }

    /// Computes the value this component wants on its output, or `None` when
    /// it does not drive anything in response to the current inputs.
    pub(crate) fn evaluate(&mut self, values: &[Value]) -> Result<Option<Value>, SimError> {
        let name = &self.name;
        let map = |e: PrimitiveError| match e {
            PrimitiveError::WidthOverflow { value, width } => SimError::WidthOverflow {
                component: name.clone(),
                value,
                width,
            },
            PrimitiveError::OperandCount { .. } => SimError::Netlist(e.to_string()),
        };
        let out = match &mut self.kind {
            ComponentKind::Buffer { input, .. } => Some(values[input.0]),
            ComponentKind::Inverter { input, .. } => {
                Some(Value::Bit(values[input.0].level().invert()))
            }
            ComponentKind::CElement { a, b, state, .. } => {
                let (la, lb) = (a.level(values), b.level(values));
                Some(Value::Bit(state.eval(la, lb)))
            }
            ComponentKind::Register {
                data,
                control,
                reg,
                last_control,
                ..
            } => {
                let c = values[control.0].level();
                let edge = c != *last_control;
                *last_control = c;
                let stored = register_eval(reg, values[data.0].word(), c, edge).map_err(map)?;
                Some(Value::Word(stored))
            }
            ComponentKind::Multiplier {
                input,
                coefficient,
                block,
                ..
            } => Some(Value::Word(
                arith_eval(block, &[values[input.0].word(), *coefficient]).map_err(map)?,
            )),
            ComponentKind::Adder { a, b, block, .. } => Some(Value::Word(
                arith_eval(block, &[values[a.0].word(), values[b.0].word()]).map_err(map)?,
            )),
            ComponentKind::Sender { ack, policy, .. } => {
                if *policy == SenderPolicy::ReturnToZero && values[ack.0].level().is_high() {
                    Some(Value::LOW)
                } else {
                    None
                }
            }
            ComponentKind::Clock { output } => {
                Some(Value::Bit(values[output.0].level().invert().max_known()))
            }
        };
        Ok(out)
    }
}

impl LogicLevel {
    fn max_known(self) -> LogicLevel {
        if self == LogicLevel::Unknown {
            LogicLevel::High
        } else {
            self
        }
    }
}

#[derive(Debug, Clone)]
pub struct NetInfo {
    pub name: String,
    /// Word width in bits; zero for a single control bit.
    pub width: u32,
    pub initial: Value,
}

impl NetInfo {
    pub fn is_word(&self) -> bool {
        self.width > 0
    }
}

/// A netlist of components connected by nets.
#[derive(Debug, Clone, Default)]
pub struct Circuit {
    nets: Vec<NetInfo>,
    components: Vec<Component>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_bit(&mut self, name: impl Into<String>) -> NetId {
        self.add_bit_init(name, LogicLevel::Low)
    }

    pub fn add_bit_init(&mut self, name: impl Into<String>, level: LogicLevel) -> NetId {
        self.nets.push(NetInfo {
            name: name.into(),
            width: 0,
            initial: Value::Bit(level),
        });
        NetId(self.nets.len() - 1)
    }

    pub fn add_word(&mut self, name: impl Into<String>, width: u32) -> NetId {
        self.nets.push(NetInfo {
            name: name.into(),
            width,
            initial: Value::Word(0),
        });
        NetId(self.nets.len() - 1)
    }

    pub fn add_component(
        &mut self,
        name: impl Into<String>,
        delay: SimTime,
        kind: ComponentKind,
    ) -> ComponentId {
        self.components.push(Component {
            name: name.into(),
            delay,
            kind,
        });
        ComponentId(self.components.len() - 1)
    }

    pub fn nets(&self) -> &[NetInfo] {
        &self.nets
    }

    pub fn net(&self, id: NetId) -> Option<&NetInfo> {
        self.nets.get(id.0)
    }

    pub fn net_by_name(&self, name: &str) -> Option<NetId> {
        self.nets.iter().position(|n| n.name == name).map(NetId)
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, id: ComponentId) -> &Component {
        &self.components[id.0]
    }

    pub(crate) fn components_mut(&mut self) -> &mut [Component] {
        &mut self.components
    }

    pub fn count_kind(&self, kind: &str) -> usize {
        self.components
            .iter()
            .filter(|c| c.kind_name() == kind)
            .count()
    }

    /// Number of components driving each net.
    pub fn driver_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.nets.len()];
        for c in &self.components {
            if let Some(n) = counts.get_mut(c.output().0) {
                *n += 1;
            }
        }
        counts
    }

    /// Checks structural well-formedness: connected pins, positive delays,
    /// word widths that match, and at most one driver per net. Nets listed
    /// in `primary_inputs` are driven by stimulus and must have no driver.
    pub fn validate(&self, primary_inputs: &[NetId]) -> Result<(), SimError> {
        let n = self.nets.len();
        for c in &self.components {
            if c.delay.0 == 0 {
                return Err(SimError::Netlist(format!(
                    "component `{}` has zero delay",
                    c.name
                )));
            }
            for net in c.inputs().into_iter().chain([c.output()]) {
                if net.0 >= n {
                    return Err(SimError::Netlist(format!(
                        "component `{}` references missing net {net}",
                        c.name
                    )));
                }
            }
            let out = &self.nets[c.output().0];
            match c.output_width() {
                Some(w) if !out.is_word() || out.width < w => {
                    return Err(SimError::Netlist(format!(
                        "net `{}` cannot hold the {w}-bit output of `{}`",
                        out.name, c.name
                    )));
                }
                _ => {}
            }
        }
        for (i, count) in self.driver_counts().into_iter().enumerate() {
            let primary = primary_inputs.contains(&NetId(i));
            match (count, primary) {
                (1, false) | (0, true) => {}
                (0, false) => {
                    return Err(SimError::Netlist(format!(
                        "net `{}` has no driver",
                        self.nets[i].name
                    )))
                }
                (_, true) => {
                    return Err(SimError::Netlist(format!(
                        "primary input `{}` is also driven by a component",
                        self.nets[i].name
                    )))
                }
                (k, false) => {
                    return Err(SimError::Netlist(format!(
                        "net `{}` has {k} drivers",
                        self.nets[i].name
                    )))
                }
            }
        }
        Ok(())
    }

    /// Plain-text structural listing, one component per line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let nm = |id: NetId| self.nets[id.0].name.as_str();
        let pin = |p: Pin| {
            if p.inverted {
                format!("~{}", nm(p.net))
            } else {
                nm(p.net).to_string()
            }
        };
        for (i, c) in self.components.iter().enumerate() {
            let _ = write!(s, "c{i} {} delay={} name={}", c.kind_name(), c.delay.0, c.name);
            let ports = match &c.kind {
                ComponentKind::Buffer { input, output }
                | ComponentKind::Inverter { input, output } => {
                    format!(" in={} out={}", nm(*input), nm(*output))
                }
                ComponentKind::CElement { a, b, output, .. } => {
                    format!(" a={} b={} out={}", pin(*a), pin(*b), nm(*output))
                }
                ComponentKind::Register {
                    data,
                    control,
                    output,
                    reg,
                    ..
                } => {
                    let ctl = if reg.kind == RegisterKind::EdgeDff {
                        "clk"
                    } else {
                        "en"
                    };
                    format!(
                        " width={} d={} {ctl}={} q={}",
                        reg.width,
                        nm(*data),
                        nm(*control),
                        nm(*output)
                    )
                }
                ComponentKind::Multiplier {
                    input,
                    coefficient,
                    output,
                    block,
                } => format!(
                    " width={} in={} coeff={coefficient} out={}",
                    block.output_width,
                    nm(*input),
                    nm(*output)
                ),
                ComponentKind::Adder { a, b, output, block } => format!(
                    " width={} a={} b={} out={}",
                    block.output_width,
                    nm(*a),
                    nm(*b),
                    nm(*output)
                ),
                ComponentKind::Sender { ack, req, policy } => {
                    format!(" ack={} req={} policy={policy:?}", nm(*ack), nm(*req))
                }
                ComponentKind::Clock { output } => format!(" out={}", nm(*output)),
            };
            s.push_str(&ports);
            s.push('\n');
        }
        s
    }
}
