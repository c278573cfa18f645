//! Passive four-phase handshake checker.
//!
//! The monitor is fed [`Observation`]s, either live through kernel probes
//! ([`attach`]) or by replaying a recorded trace. Each channel's phase is a
//! function of its current Req/Ack levels, so the legal cycle is
//! `Idle -> ReqHigh -> AckHigh -> ReqLow -> Idle` and every other edge is
//! classified as a violation. In gated mode stage channels are additionally
//! checked against the global request: stage Req and Ack may rise only while
//! it is High, and may fall only once it is Low.

mod tokens;

pub use tokens::{detect_flood, snapshot_tokens, TokenMap};

use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::arch::{FilterSim, Variant};
use crate::sim::{LogicLevel, NetId, ProbeId, SimError, SimTime, Value};

#[derive(Debug, Error)]
pub enum MonitorError {
    #[error("token snapshot requested at {0} with events still pending")]
    NotQuiescent(SimTime),
    #[error("the clocked build has no handshake channels to monitor")]
    NoHandshake,
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitorMode {
    /// Plain four-phase checking on every channel.
    Original,
    /// Four-phase checking plus gating against the global request.
    Modified,
}

impl MonitorMode {
    pub fn for_variant(v: Variant) -> Option<Self> {
        match v {
            Variant::OriginalMicropipeline => Some(MonitorMode::Original),
            Variant::ModifiedDff | Variant::ModifiedLatch => Some(MonitorMode::Modified),
            Variant::SynchronousClocked => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelId {
    /// The environment's input handshake (global Req / global Ack).
    Global,
    Stage(usize),
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelId::Global => f.write_str("global"),
            ChannelId::Stage(i) => write!(f, "{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signal {
    Req,
    Ack,
    /// The global request; equivalent to `Req` on [`ChannelId::Global`].
    GlobalReq,
    Data,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub time: SimTime,
    pub channel: ChannelId,
    pub signal: Signal,
    pub value: Value,
}

impl Observation {
    pub fn is_control(&self) -> bool {
        self.signal != Signal::Data
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HandshakePhase {
    Idle,
    ReqHigh,
    AckHigh,
    ReqLow,
}

impl HandshakePhase {
    pub fn from_levels(req: bool, ack: bool) -> Self {
        match (req, ack) {
            (false, false) => HandshakePhase::Idle,
            (true, false) => HandshakePhase::ReqHigh,
            (true, true) => HandshakePhase::AckHigh,
            (false, true) => HandshakePhase::ReqLow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    AckWithoutReq,
    ReqDroppedEarly,
    AckDroppedEarly,
    StepOrderViolation,
    DataChangedDuringReq,
    TokenFlood,
    DataCorruption,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::AckWithoutReq => "AckWithoutReq",
            ViolationKind::ReqDroppedEarly => "ReqDroppedEarly",
            ViolationKind::AckDroppedEarly => "AckDroppedEarly",
            ViolationKind::StepOrderViolation => "StepOrderViolation",
            ViolationKind::DataChangedDuringReq => "DataChangedDuringReq",
            ViolationKind::TokenFlood => "TokenFlood",
            ViolationKind::DataCorruption => "DataCorruption",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolViolation {
    pub kind: ViolationKind,
    pub channel: ChannelId,
    /// Time of the first offending transition.
    pub time: SimTime,
    pub detail: String,
}

impl fmt::Display for ProtocolViolation {
    /// `time_ps stage kind detail`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.time.0, self.channel, self.kind, self.detail)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ChannelState {
    req: bool,
    ack: bool,
}

impl ChannelState {
    fn phase(self) -> HandshakePhase {
        HandshakePhase::from_levels(self.req, self.ack)
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolMonitor {
    mode: MonitorMode,
    global: ChannelState,
    stages: Vec<ChannelState>,
    violations: Vec<ProtocolViolation>,
    trace: Option<Vec<Observation>>,
}

impl ProtocolMonitor {
    pub fn new(mode: MonitorMode, stages: usize) -> Self {
        ProtocolMonitor {
            mode,
            global: ChannelState::default(),
            stages: vec![ChannelState::default(); stages],
            violations: Vec::new(),
            trace: None,
        }
    }

    pub fn mode(&self) -> MonitorMode {
        self.mode
    }

    /// Keeps every observation for later replay.
    pub fn record_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> &[Observation] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn phase(&self, channel: ChannelId) -> HandshakePhase {
        match channel {
            ChannelId::Global => self.global.phase(),
            ChannelId::Stage(i) => self.stages[i].phase(),
        }
    }

    pub fn violations(&self) -> &[ProtocolViolation] {
        &self.violations
    }

    /// Adds an externally detected violation (flood checks) to the log.
    pub fn push(&mut self, v: ProtocolViolation) {
        self.violations.push(v);
    }

    /// Violation log, one `time_ps stage kind detail` line per entry.
    pub fn log(&self) -> String {
        self.violations.iter().map(|v| format!("{v}\n")).collect()
    }

    /// Advances the channel's phase machine; returns the violations raised
    /// by this observation (they are also kept in the log).
    pub fn observe(&mut self, obs: Observation) -> Vec<ProtocolViolation> {
        if let Some(t) = &mut self.trace {
            t.push(obs);
        }
        let (channel, signal) = match obs.signal {
            Signal::GlobalReq => (ChannelId::Global, Signal::Req),
            s => (obs.channel, s),
        };
        let high = obs.value.level() == LogicLevel::High;
        let global_high = self.global.req;
        let gated = self.mode == MonitorMode::Modified && channel != ChannelId::Global;
        let state = match channel {
            ChannelId::Global => &mut self.global,
            ChannelId::Stage(i) => &mut self.stages[i],
        };
        let mut out = Vec::new();
        let mut flag = |kind, detail: String| {
            out.push(ProtocolViolation {
                kind,
                channel,
                time: obs.time,
                detail,
            })
        };
        let before = state.phase();
        match signal {
            Signal::Data => {
                if before == HandshakePhase::ReqHigh {
                    flag(
                        ViolationKind::DataChangedDuringReq,
                        format!("data changed to {} before ack", obs.value.word()),
                    );
                }
            }
            Signal::Req if high == state.req => {}
            Signal::Ack if high == state.ack => {}
            Signal::Req => {
                state.req = high;
                match (before, high) {
                    (HandshakePhase::ReqLow, true) => flag(
                        ViolationKind::StepOrderViolation,
                        "req rose before ack returned to zero".into(),
                    ),
                    (HandshakePhase::ReqHigh, false) => flag(
                        ViolationKind::ReqDroppedEarly,
                        "req fell before ack rose".into(),
                    ),
                    _ => {}
                }
                if gated && high && !global_high {
                    flag(
                        ViolationKind::StepOrderViolation,
                        "stage req rose while global req low".into(),
                    );
                }
                if gated && !high && global_high {
                    flag(
                        ViolationKind::StepOrderViolation,
                        "stage req fell while global req high".into(),
                    );
                }
            }
            Signal::Ack => {
                state.ack = high;
                match (before, high) {
                    (HandshakePhase::Idle, true) => flag(
                        ViolationKind::AckWithoutReq,
                        "ack rose while req low".into(),
                    ),
                    (HandshakePhase::AckHigh, false) => flag(
                        ViolationKind::AckDroppedEarly,
                        "ack fell while req high".into(),
                    ),
                    _ => {}
                }
                if gated && high && !global_high {
                    flag(
                        ViolationKind::StepOrderViolation,
                        "stage ack rose while global req low".into(),
                    );
                }
                if gated && !high && global_high {
                    flag(
                        ViolationKind::StepOrderViolation,
                        "stage ack fell while global req high".into(),
                    );
                }
            }
            Signal::GlobalReq => unreachable!("mapped to Req above"),
        }
        self.violations.extend(out.iter().cloned());
        out
    }

    /// Replays `trace` through a fresh monitor and returns its violations.
    pub fn replay(mode: MonitorMode, stages: usize, trace: &[Observation]) -> Vec<ProtocolViolation> {
        let mut m = ProtocolMonitor::new(mode, stages);
        for &o in trace {
            m.observe(o);
        }
        m.violations
    }
}

/// Observed nets of a filter build, in the order probes are attached.
pub fn watched_nets(sim: &FilterSim) -> Result<Vec<(NetId, ChannelId, Signal)>, MonitorError> {
    let h = sim.fc.handshake.ok_or(MonitorError::NoHandshake)?;
    let mut nets = vec![
        (h.req, ChannelId::Global, Signal::Req),
        (h.ack, ChannelId::Global, Signal::Ack),
        (sim.fc.data_in, ChannelId::Global, Signal::Data),
    ];
    for s in &sim.fc.stages {
        let ch = s.channel.expect("asynchronous stage");
        let id = ChannelId::Stage(s.index);
        nets.push((ch.req, id, Signal::Req));
        nets.push((ch.ack, id, Signal::Ack));
        nets.push((ch.data, id, Signal::Data));
    }
    Ok(nets)
}

/// Attaches a shared monitor to every handshake net of `sim`.
///
/// A net may feed several channels (the original pipeline's global request
/// is also stage 0's request); the probe forwards each transition once per
/// role, in the order returned by [`watched_nets`].
pub fn attach(
    sim: &mut FilterSim,
    monitor: Arc<Mutex<ProtocolMonitor>>,
) -> Result<Vec<ProbeId>, MonitorError> {
    let nets = watched_nets(sim)?;
    let mut by_net: Vec<(NetId, Vec<(ChannelId, Signal)>)> = Vec::new();
    for (net, ch, sig) in nets {
        match by_net.iter_mut().find(|(n, _)| *n == net) {
            Some((_, roles)) => roles.push((ch, sig)),
            None => by_net.push((net, vec![(ch, sig)])),
        }
    }
    let mut ids = Vec::new();
    for (net, roles) in by_net {
        let m = Arc::clone(&monitor);
        ids.push(sim.kernel.attach_probe(net, move |tr, _| {
            let mut m = m.lock().expect("monitor poisoned");
            for &(channel, signal) in &roles {
                m.observe(Observation {
                    time: tr.time,
                    channel,
                    signal,
                    value: tr.to,
                });
            }
        })?);
    }
    Ok(ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(t: u64, channel: ChannelId, signal: Signal, high: bool) -> Observation {
        Observation {
            time: SimTime(t),
            channel,
            signal,
            value: if high { Value::HIGH } else { Value::LOW },
        }
    }

    const S0: ChannelId = ChannelId::Stage(0);

    #[test]
    fn legal_cycle_is_clean() {
        let mut m = ProtocolMonitor::new(MonitorMode::Original, 1);
        for (t, sig, h) in [(1, Signal::Req, true), (2, Signal::Ack, true), (3, Signal::Req, false), (4, Signal::Ack, false)] {
            assert!(m.observe(obs(t, S0, sig, h)).is_empty());
        }
        assert_eq!(m.phase(S0), HandshakePhase::Idle);
    }

    #[test]
    fn ack_without_req() {
        let mut m = ProtocolMonitor::new(MonitorMode::Original, 1);
        let v = m.observe(obs(7, S0, Signal::Ack, true));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::AckWithoutReq);
        assert_eq!(v[0].to_string(), "7 0 AckWithoutReq ack rose while req low");
    }

    #[test]
    fn gated_stage_needs_global_request() {
        let mut m = ProtocolMonitor::new(MonitorMode::Modified, 1);
        let v = m.observe(obs(5, S0, Signal::Req, true));
        assert_eq!(v[0].kind, ViolationKind::StepOrderViolation);
        // The same edge is legal once the global request is High.
        let mut m = ProtocolMonitor::new(MonitorMode::Modified, 1);
        m.observe(obs(1, S0, Signal::GlobalReq, true));
        assert!(m.observe(obs(5, S0, Signal::Req, true)).is_empty());
        assert!(m.observe(obs(6, S0, Signal::Ack, true)).is_empty());
        // A stage falling before the global request is withdrawn is out of order.
        let v = m.observe(obs(7, S0, Signal::Req, false));
        assert_eq!(v[0].kind, ViolationKind::StepOrderViolation);
    }

    #[test]
    fn early_drops_and_data_changes() {
        let mut m = ProtocolMonitor::new(MonitorMode::Original, 1);
        m.observe(obs(1, S0, Signal::Req, true));
        let v = m.observe(Observation {
            time: SimTime(2),
            channel: S0,
            signal: Signal::Data,
            value: Value::Word(3),
        });
        assert_eq!(v[0].kind, ViolationKind::DataChangedDuringReq);
        assert_eq!(m.observe(obs(3, S0, Signal::Req, false))[0].kind, ViolationKind::ReqDroppedEarly);
        m.observe(obs(4, S0, Signal::Req, true));
        m.observe(obs(5, S0, Signal::Ack, true));
        assert_eq!(m.observe(obs(6, S0, Signal::Ack, false))[0].kind, ViolationKind::AckDroppedEarly);
        assert_eq!(m.violations().len(), 3);
        assert_eq!(m.log().lines().count(), 3);
    }

    #[test]
    fn global_channel_is_not_gated() {
        let mut m = ProtocolMonitor::new(MonitorMode::Modified, 0);
        let g = ChannelId::Global;
        for (t, sig, h) in [(1, Signal::Req, true), (2, Signal::Ack, true), (3, Signal::Req, false), (4, Signal::Ack, false)] {
            assert!(m.observe(obs(t, g, sig, h)).is_empty());
        }
        assert_eq!(ChannelId::Global.to_string(), "global");
    }
}
