//! Netlist builders for the three filter architectures and the stimulus
//! side of their input handshake.
//!
//! * [`build_original_micropipeline`]: a plain micropipeline control chain
//!   with level latches. Used as the negative baseline: one injected sample
//!   propagates into every stage.
//! * [`build_modified_fir`]: every stage is gated by the global request so
//!   the whole delay line advances exactly once per input sample.
//! * [`build_sync_fir`]: clocked delay line with a pipelined datapath.
//!
//! All three share the same multiply-accumulate structure: one constant
//! multiplier per tap followed by a balanced binary adder tree.

mod build;

pub use build::{build_modified_fir, build_original_micropipeline, build_sync_fir};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::primitives::{FixedPointConfig, RegisterKind};
use crate::sim::{Circuit, ComponentId, Kernel, LogicLevel, NetId, SimError, SimTime, Value};

#[derive(Debug, Error)]
pub enum ArchError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("clock period {period} is shorter than the slowest register-to-register path {required}")]
    ClockTooFast { period: SimTime, required: SimTime },
    #[error("previous input handshake still in flight at {0}")]
    HandshakeBusy(SimTime),
    #[error("sample {value} does not fit {bits} bits")]
    SampleRange { value: i64, bits: u32 },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Delay annotation shared by all builders. Defaults are in picoseconds and
/// loosely modeled on an FPGA fabric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayConfig {
    /// C-element propagation; also the matched delay replacing the gate on
    /// the first modified stage.
    pub celement: SimTime,
    /// Stage acknowledge generation.
    pub ack: SimTime,
    pub clk_to_q: SimTime,
    pub latch_d_to_q: SimTime,
    pub multiplier: SimTime,
    pub adder: SimTime,
    /// Sender reaction time from acknowledge to request withdrawal.
    pub env_release: SimTime,
    /// Data is driven this long before the request rises.
    pub bundling_margin: SimTime,
    /// Slack between the settled adder tree and the output strobe.
    pub output_margin: SimTime,
    /// Per-level datapath delays (multiplier level first, then each adder
    /// level). Overrides `multiplier`/`adder` when set.
    pub levels: Option<Vec<SimTime>>,
}

impl Default for DelayConfig {
    fn default() -> Self {
        DelayConfig {
            celement: SimTime(100),
            ack: SimTime(50),
            clk_to_q: SimTime(150),
            latch_d_to_q: SimTime(150),
            multiplier: SimTime(3000),
            adder: SimTime(1000),
            env_release: SimTime(200),
            bundling_margin: SimTime(500),
            output_margin: SimTime(20),
            levels: None,
        }
    }
}

impl DelayConfig {
    /// Datapath depth in levels: the multiplier level plus one level per
    /// adder-tree rank.
    pub fn depth(taps: usize) -> usize {
        1 + crate::primitives::ceil_log2(taps) as usize
    }

    pub fn level_delays(&self, taps: usize) -> Result<Vec<SimTime>, ArchError> {
        let depth = Self::depth(taps);
        match &self.levels {
            Some(l) if l.len() != depth => Err(ArchError::InvalidConfig(format!(
                "{} level delays given, datapath has {depth} levels",
                l.len()
            ))),
            Some(l) => Ok(l.clone()),
            None => {
                let mut v = vec![self.multiplier];
                v.resize(depth, self.adder);
                Ok(v)
            }
        }
    }

    pub fn register_delay(&self, kind: RegisterKind) -> SimTime {
        match kind {
            RegisterKind::EdgeDff => self.clk_to_q,
            RegisterKind::LevelLatch => self.latch_d_to_q,
        }
    }

    fn validate(&self, taps: usize) -> Result<(), ArchError> {
        let fixed = [
            ("celement", self.celement),
            ("ack", self.ack),
            ("clk_to_q", self.clk_to_q),
            ("latch_d_to_q", self.latch_d_to_q),
            ("env_release", self.env_release),
            ("bundling_margin", self.bundling_margin),
            ("output_margin", self.output_margin),
        ];
        for (name, d) in fixed {
            if d.0 == 0 {
                return Err(ArchError::InvalidConfig(format!("{name} delay must be positive")));
            }
        }
        if self.level_delays(taps)?.iter().any(|d| d.0 == 0) {
            return Err(ArchError::InvalidConfig("datapath delays must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    OriginalMicropipeline,
    ModifiedDff,
    ModifiedLatch,
    SynchronousClocked,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::OriginalMicropipeline,
        Variant::ModifiedDff,
        Variant::ModifiedLatch,
        Variant::SynchronousClocked,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::OriginalMicropipeline => "original",
            Variant::ModifiedDff => "modified-dff",
            Variant::ModifiedLatch => "modified-latch",
            Variant::SynchronousClocked => "sync",
        }
    }

    pub fn is_async(self) -> bool {
        self != Variant::SynchronousClocked
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Variant::ALL.iter().map(|v| v.name()).collect();
                format!("unknown variant `{s}` (expected one of {})", names.join(", "))
            })
    }
}

/// Request/acknowledge/data nets of one bundled-data channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Channel {
    pub req: NetId,
    pub ack: NetId,
    pub data: NetId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageTopology {
    pub index: usize,
    /// C-element whose High output marks a token held by this stage.
    pub token_celement: Option<ComponentId>,
    pub token_net: Option<NetId>,
    /// C-element that releases the stage only while the global request is
    /// High. Absent on the first stage and in non-gated builds.
    pub gate_celement: Option<ComponentId>,
    pub data_register: ComponentId,
    pub register_output: NetId,
    /// The stage's input handshake; `None` in the clocked build.
    pub channel: Option<Channel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlobalHandshake {
    pub req: NetId,
    pub ack: NetId,
    pub sender: ComponentId,
}

#[derive(Debug, Clone)]
pub struct FilterCircuit {
    pub circuit: Circuit,
    pub variant: Variant,
    pub format: FixedPointConfig,
    pub delays: DelayConfig,
    pub stages: Vec<StageTopology>,
    pub tap_multipliers: Vec<ComponentId>,
    pub adder_tree: Vec<ComponentId>,
    /// Input sample bus.
    pub data_in: NetId,
    pub handshake: Option<GlobalHandshake>,
    pub clock: Option<NetId>,
    pub clock_period: Option<SimTime>,
    /// Settled adder-tree result, sampled by the output register.
    pub output_data: NetId,
    /// Output register.
    pub output_net: NetId,
    /// Rising edges mark acceptance of an input sample.
    pub input_strobe: NetId,
    /// Rising edges mark a valid value on `output_data`.
    pub output_strobe: NetId,
    /// Output strobes between accepting a sample and presenting its result.
    pub output_depth: usize,
}

/// Analytic latency of a filter build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatencyModel {
    /// Sum of the datapath level delays.
    pub stage_sum: SimTime,
    /// Control-path delay on top of `stage_sum`: the gate, the register
    /// clock-to-output and the output margin. Zero for the clocked build.
    pub control_overhead: SimTime,
    pub predicted: SimTime,
}

impl FilterCircuit {
    pub fn taps(&self) -> usize {
        self.stages.len()
    }

    pub fn register_kind(&self) -> RegisterKind {
        match self.variant {
            Variant::OriginalMicropipeline | Variant::ModifiedLatch => RegisterKind::LevelLatch,
            _ => RegisterKind::EdgeDff,
        }
    }

    pub fn netlist(&self) -> String {
        self.circuit.dump()
    }

    /// Rising-edge time of clock cycle `n` in the clocked build.
    pub fn edge_time(&self, n: u64) -> Option<SimTime> {
        self.clock_period.map(|t| SimTime(t.0 / 2 + n * t.0))
    }

    /// Predicted sample-to-output latency; `None` for the original
    /// micropipeline, whose output timing is not a filter latency.
    pub fn latency_model(&self) -> Option<LatencyModel> {
        let stage_sum = SimTime(
            self.delays
                .level_delays(self.taps())
                .ok()?
                .iter()
                .map(|d| d.0)
                .sum(),
        );
        match self.variant {
            Variant::OriginalMicropipeline => None,
            Variant::ModifiedDff | Variant::ModifiedLatch => {
                let d = &self.delays;
                let control_overhead =
                    d.celement + d.register_delay(self.register_kind()) + d.output_margin;
                Some(LatencyModel {
                    stage_sum,
                    control_overhead,
                    predicted: stage_sum + control_overhead,
                })
            }
            Variant::SynchronousClocked => Some(LatencyModel {
                stage_sum,
                control_overhead: SimTime::ZERO,
                predicted: SimTime(self.output_depth as u64 * self.clock_period?.0),
            }),
        }
    }
}

/// A filter circuit loaded into its own kernel.
#[derive(Debug)]
pub struct FilterSim {
    pub kernel: Kernel,
    /// Topology of the loaded circuit. `fc.circuit` is the as-built copy;
    /// live state lives in the kernel.
    pub fc: FilterCircuit,
}

impl FilterSim {
    pub fn new(fc: FilterCircuit) -> Result<Self, ArchError> {
        let kernel = Kernel::new(fc.circuit.clone())?;
        Ok(FilterSim { kernel, fc })
    }

    /// True while an asynchronous input handshake is in flight.
    pub fn is_busy(&self) -> bool {
        let Some(h) = self.fc.handshake else {
            return false;
        };
        let high = |v: Value| v.level() == LogicLevel::High;
        high(self.kernel.projected(h.req))
            || high(self.kernel.value(h.ack))
            || high(self.kernel.projected(h.ack))
    }

    /// Drives `sample` onto the input bus at `at`.
    ///
    /// Asynchronous builds raise the global request one bundling margin
    /// later; the clocked build only drives the bus, and the next rising
    /// clock edge captures it.
    pub fn inject_sample(&mut self, sample: i64, at: SimTime) -> Result<(), ArchError> {
        let bits = self.fc.format.sample_bits;
        if !crate::primitives::fits(sample as i128, bits) {
            return Err(ArchError::SampleRange { value: sample, bits });
        }
        if self.is_busy() {
            return Err(ArchError::HandshakeBusy(self.kernel.now()));
        }
        self.kernel
            .schedule(self.fc.data_in, Value::Word(sample), at)?;
        if let Some(h) = self.fc.handshake {
            self.kernel
                .schedule(h.req, Value::HIGH, at + self.fc.delays.bundling_margin)?;
        }
        Ok(())
    }

    /// Current stage register contents, stage 0 first.
    pub fn register_words(&self) -> Vec<i64> {
        self.fc
            .stages
            .iter()
            .map(|s| self.kernel.value(s.register_output).word())
            .collect()
    }
}
