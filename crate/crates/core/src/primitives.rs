//! Behavioral models of the circuit vocabulary: Muller C-element, level
//! latch, edge-triggered D flip-flop and word-level multiply/add blocks.
//!
//! These are pure evaluation functions. The simulation kernel wraps them in
//! [`crate::sim::ComponentKind`] and owns the state between evaluations.

use thiserror::Error;

use crate::sim::{LogicLevel, SimTime};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PrimitiveError {
    #[error("value {value} does not fit in a {width}-bit signed word")]
    WidthOverflow { value: i128, width: u32 },
    #[error("expected {expected} operands, got {got}")]
    OperandCount { expected: usize, got: usize },
}

/// Muller C-element: follows its inputs when they agree, holds otherwise.
///
/// An `Unknown` input never agrees with anything, so the output holds.
pub fn c_element_eval(held: LogicLevel, a: LogicLevel, b: LogicLevel) -> LogicLevel {
    match (a, b) {
        (LogicLevel::High, LogicLevel::High) => LogicLevel::High,
        (LogicLevel::Low, LogicLevel::Low) => LogicLevel::Low,
        _ => held,
    }
}

/// Two-input C-element with its last applied inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CElementState {
    pub output: LogicLevel,
    pub inputs: (LogicLevel, LogicLevel),
}

impl Default for CElementState {
    fn default() -> Self {
        CElementState {
            output: LogicLevel::Low,
            inputs: (LogicLevel::Low, LogicLevel::Low),
        }
    }
}

impl CElementState {
    pub fn eval(&mut self, a: LogicLevel, b: LogicLevel) -> LogicLevel {
        self.inputs = (a, b);
        self.output = c_element_eval(self.output, a, b);
        self.output
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegisterKind {
    /// Transparent while the enable is High, holds while Low.
    LevelLatch,
    /// Captures only on a Low to High transition of the clock.
    EdgeDff,
}

impl RegisterKind {
    pub fn name(self) -> &'static str {
        match self {
            RegisterKind::LevelLatch => "latch",
            RegisterKind::EdgeDff => "dff",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterElement {
    pub kind: RegisterKind,
    pub width: u32,
    pub stored: i64,
}

impl RegisterElement {
    pub fn new(kind: RegisterKind, width: u32) -> Self {
        RegisterElement {
            kind,
            width,
            stored: 0,
        }
    }
}

/// Evaluates a register for one input event.
///
/// `control_edge` is true when this evaluation was triggered by a transition
/// of the control net; together with `control == High` it marks a rising edge.
pub fn register_eval(
    reg: &mut RegisterElement,
    data_in: i64,
    control: LogicLevel,
    control_edge: bool,
) -> Result<i64, PrimitiveError> {
    check_width(data_in as i128, reg.width)?;
    let capture = match reg.kind {
        RegisterKind::EdgeDff => control_edge && control == LogicLevel::High,
        RegisterKind::LevelLatch => control == LogicLevel::High,
    };
    if capture {
        reg.stored = data_in;
    }
    Ok(reg.stored)
}

pub fn fits(value: i128, width: u32) -> bool {
    if width >= 128 {
        return true;
    }
    let half = 1i128 << (width - 1);
    value >= -half && value < half
}

pub fn check_width(value: i128, width: u32) -> Result<(), PrimitiveError> {
    if fits(value, width) {
        Ok(())
    } else {
        Err(PrimitiveError::WidthOverflow { value, width })
    }
}

/// Signed fixed-point format `Q<int_bits>.<frac_bits>`; the sign bit is
/// counted in `int_bits`, so Q1.15 is a 16-bit word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QFormat {
    pub int_bits: u32,
    pub frac_bits: u32,
}

impl QFormat {
    pub const Q1_15: QFormat = QFormat {
        int_bits: 1,
        frac_bits: 15,
    };

    pub fn new(int_bits: u32, frac_bits: u32) -> Self {
        QFormat {
            int_bits,
            frac_bits,
        }
    }

    pub fn width(self) -> u32 {
        self.int_bits + self.frac_bits
    }

    pub fn scale(self) -> f64 {
        (1u64 << self.frac_bits) as f64
    }

    pub fn max_raw(self) -> i64 {
        (1i64 << (self.width() - 1)) - 1
    }

    pub fn min_raw(self) -> i64 {
        -(1i64 << (self.width() - 1))
    }

    /// Raw word that represents 1.0, if the format can hold it.
    pub fn one(self) -> Option<i64> {
        let one = 1i64 << self.frac_bits;
        (one <= self.max_raw()).then_some(one)
    }
}

impl std::fmt::Display for QFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Q{}.{}", self.int_bits, self.frac_bits)
    }
}

impl std::str::FromStr for QFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s
            .strip_prefix('Q')
            .ok_or_else(|| format!("Q-format `{s}` must start with `Q`"))?;
        let (i, f) = body
            .split_once('.')
            .ok_or_else(|| format!("Q-format `{s}` must look like Q1.15"))?;
        let int_bits: u32 = i.parse().map_err(|_| format!("bad integer bits in `{s}`"))?;
        let frac_bits: u32 = f.parse().map_err(|_| format!("bad fraction bits in `{s}`"))?;
        if int_bits == 0 || int_bits + frac_bits > 32 {
            return Err(format!("unsupported Q-format `{s}`"));
        }
        Ok(QFormat::new(int_bits, frac_bits))
    }
}

/// Word formats used by the filter datapath.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedPointConfig {
    pub sample_bits: u32,
    pub coeff: QFormat,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig {
            sample_bits: 12,
            coeff: QFormat::Q1_15,
        }
    }
}

impl FixedPointConfig {
    pub fn product_width(&self) -> u32 {
        self.sample_bits + self.coeff.width()
    }

    /// Width that cannot overflow when summing `taps` full-scale products.
    pub fn accumulator_width(&self, taps: usize) -> u32 {
        self.product_width() + ceil_log2(taps)
    }
}

pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithKind {
    Multiplier,
    Adder,
}

/// Word-level arithmetic block with fixed operand and result widths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArithBlock {
    pub kind: ArithKind,
    pub input_widths: Vec<u32>,
    pub output_width: u32,
    pub delay: SimTime,
}

impl ArithBlock {
    pub fn multiplier(a_width: u32, b_width: u32, delay: SimTime) -> Self {
        ArithBlock {
            kind: ArithKind::Multiplier,
            input_widths: vec![a_width, b_width],
            output_width: a_width + b_width,
            delay,
        }
    }

    pub fn adder(a_width: u32, b_width: u32, delay: SimTime) -> Self {
        ArithBlock {
            kind: ArithKind::Adder,
            input_widths: vec![a_width, b_width],
            output_width: a_width.max(b_width) + 1,
            delay,
        }
    }
}

/// Exact two's-complement product or sum, checked against the block's widths.
pub fn arith_eval(block: &ArithBlock, operands: &[i64]) -> Result<i64, PrimitiveError> {
    if operands.len() != block.input_widths.len() {
        return Err(PrimitiveError::OperandCount {
            expected: block.input_widths.len(),
            got: operands.len(),
        });
    }
    for (&op, &w) in operands.iter().zip(&block.input_widths) {
        check_width(op as i128, w)?;
    }
    let wide: i128 = match block.kind {
        ArithKind::Multiplier => operands.iter().map(|&v| v as i128).product(),
        ArithKind::Adder => operands.iter().map(|&v| v as i128).sum(),
    };
    check_width(wide, block.output_width)?;
    Ok(wide as i64)
}
