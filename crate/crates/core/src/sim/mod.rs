//! Deterministic discrete-event simulation of word/bit level netlists.
//!
//! Time is an integer number of picoseconds. Events are applied in
//! `(time, seq)` order where `seq` is the schedule insertion counter, so two
//! runs of the same netlist under the same stimulus produce the same applied
//! event sequence.

mod circuit;
mod kernel;

pub use circuit::{Circuit, Component, ComponentId, ComponentKind, NetInfo, Pin, SenderPolicy};
pub use kernel::{Event, Kernel, NetValues, ProbeId, RunStats, Transition};

use std::fmt;
use std::ops::{Add, Sub};

use thiserror::Error;

/// Simulation time in picoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn ps(v: u64) -> Self {
        SimTime(v)
    }

    pub const fn ns(v: u64) -> Self {
        SimTime(v * 1_000)
    }

    pub const fn as_ps(self) -> u64 {
        self.0
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ps", self.0)
    }
}

/// Net identifier, an index into the circuit's net table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NetId(pub usize);

impl fmt::Display for NetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogicLevel {
    Low,
    High,
    /// Only legal before the first driven transition of a net.
    Unknown,
}

impl LogicLevel {
    pub fn from_bool(b: bool) -> Self {
        if b {
            LogicLevel::High
        } else {
            LogicLevel::Low
        }
    }

    pub fn is_high(self) -> bool {
        self == LogicLevel::High
    }

    pub fn invert(self) -> Self {
        match self {
            LogicLevel::Low => LogicLevel::High,
            LogicLevel::High => LogicLevel::Low,
            LogicLevel::Unknown => LogicLevel::Unknown,
        }
    }
}

impl fmt::Display for LogicLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogicLevel::Low => "0",
            LogicLevel::High => "1",
            LogicLevel::Unknown => "x",
        })
    }
}

/// Value carried by a net: a single control bit or a whole data word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Value {
    Bit(LogicLevel),
    Word(i64),
}

impl Value {
    pub const LOW: Value = Value::Bit(LogicLevel::Low);
    pub const HIGH: Value = Value::Bit(LogicLevel::High);

    pub fn level(self) -> LogicLevel {
        match self {
            Value::Bit(l) => l,
            Value::Word(w) => LogicLevel::from_bool(w != 0),
        }
    }

    pub fn word(self) -> i64 {
        match self {
            Value::Word(w) => w,
            Value::Bit(LogicLevel::High) => 1,
            Value::Bit(_) => 0,
        }
    }

    pub fn is_word(self) -> bool {
        matches!(self, Value::Word(_))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bit(l) => write!(f, "{l}"),
            Value::Word(w) => write!(f, "{w}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("cannot schedule at {at} when simulation time is {now}")]
    SchedulingInPast { at: SimTime, now: SimTime },
    #[error("unknown net {0}")]
    UnknownNet(NetId),
    #[error("unknown probe {0}")]
    UnknownProbe(usize),
    #[error("value {value} does not match the kind of net {net}")]
    ValueKind { net: NetId, value: Value },
    #[error("component `{component}` produced {value}, which does not fit in {width} bits")]
    WidthOverflow {
        component: String,
        value: i128,
        width: u32,
    },
    #[error("invalid netlist: {0}")]
    Netlist(String),
    #[error("event budget of {0} exhausted before quiescence")]
    EventBudget(u64),
}
