//! Discrete-event simulation and verification of a globally gated
//! asynchronous FIR filter against a clocked reference.
//!
//! The crate is layered bottom-up:
//!
//! * [`sim`]: deterministic event-driven kernel over bit and word nets.
//! * [`primitives`]: C-element, latch, flip-flop and fixed-point arithmetic.
//! * [`dsp`]: equiripple design, golden FIR models, spectra.
//! * [`arch`]: netlist builders for the pipelined filter variants.
//! * [`monitor`]: online four-phase handshake checker and flood detection.
//! * [`io`]: signal files, synthetic ECG, VCD/CSV output, experiment runner.
//! * [`cli`]: the `asyncfir` command-line interface.

pub mod arch;
pub mod cli;
pub mod dsp;
pub mod io;
pub mod monitor;
pub mod primitives;
pub mod sim;
