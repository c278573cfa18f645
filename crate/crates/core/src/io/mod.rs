//! File formats, synthetic input and the end-to-end experiment runner.

mod ecg;
mod experiment;
mod report;
mod signal;
mod vcd;

pub use ecg::{synth_ecg, EcgParams};
pub use experiment::{
    build_variant, default_clock_period, latency_report, run_experiment, run_stream, Comparison,
    ExperimentConfig, ExperimentReport, LatencyReport, RunOptions, StreamRun,
};
pub use report::{comparison_csv, spectrum_csv};
pub use signal::{load_signal, parse_signal, render_signal, write_signal, SignalFile};
pub use vcd::{parse_vcd, render_vcd, write_vcd, VcdDocument, VcdTrace, VcdVar};

use thiserror::Error;

use crate::arch::ArchError;
use crate::dsp::DspError;
use crate::monitor::MonitorError;
use crate::sim::SimError;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: sample {value} does not fit {bits} bits")]
    ResolutionViolation { line: usize, value: i64, bits: u32 },
    #[error("trace has no complete input/output pair: {0}")]
    IncompleteTrace(String),
    #[error("VCD line {line}: {message}")]
    Vcd { line: usize, message: String },
    #[error("invalid experiment: {0}")]
    Config(String),
    #[error(transparent)]
    File(#[from] std::io::Error),
    #[error(transparent)]
    Arch(#[from] ArchError),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Sim(#[from] SimError),
}
