//! Command-line front end used by the `asyncfir` binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::arch::{DelayConfig, Variant};
use crate::dsp::{
    design_equiripple, quantize, read_coefficients, spectrum, write_coefficients, DspError,
    FilterSpec,
};
use crate::io::{
    load_signal, run_experiment, spectrum_csv, synth_ecg, write_signal, EcgParams,
    ExperimentConfig, ExperimentReport, IoError, RunOptions,
};
use crate::primitives::QFormat;
use crate::sim::SimTime;

#[derive(Debug, Parser)]
#[command(name = "asyncfir", version, about = "Gated asynchronous FIR filter simulator")]
pub struct Cli {
    /// Exit with status 2 on any protocol violation, output mismatch or
    /// non-converged design.
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Design equiripple low-pass coefficients and write a coefficient file.
    Design(DesignArgs),
    /// Simulate one filter variant on a signal file.
    Simulate(SimulateArgs),
    /// Run an asynchronous variant and the clocked reference side by side.
    Compare(CompareArgs),
    /// Hann-windowed magnitude spectrum of a signal file as CSV.
    Spectrum(SpectrumArgs),
    /// Generate a synthetic noisy ECG signal file.
    SynthEcg(SynthArgs),
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long, default_value_t = 125.0)]
    pub rate: f64,
    #[arg(long, default_value_t = 35.0)]
    pub pass: f64,
    #[arg(long, default_value_t = 45.0)]
    pub stop: f64,
    /// Peak-to-peak passband ripple in dB.
    #[arg(long, default_value_t = 1.0)]
    pub ripple: f64,
    /// Target stopband attenuation in dB.
    #[arg(long, default_value_t = 80.0)]
    pub atten: f64,
    #[arg(long, default_value_t = 32)]
    pub order: usize,
    #[arg(long, default_value = "Q1.15")]
    pub format: QFormat,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DelayArgs {
    #[arg(long, default_value_t = 100)]
    pub celement_ps: u64,
    #[arg(long, default_value_t = 50)]
    pub ack_ps: u64,
    #[arg(long, default_value_t = 150)]
    pub clk_to_q_ps: u64,
    #[arg(long, default_value_t = 150)]
    pub latch_ps: u64,
    #[arg(long, default_value_t = 3000)]
    pub mult_ps: u64,
    #[arg(long, default_value_t = 1000)]
    pub add_ps: u64,
    #[arg(long, default_value_t = 500)]
    pub margin_ps: u64,
    /// Comma-separated per-level datapath delays (multiplier level first);
    /// overrides --mult-ps/--add-ps.
    #[arg(long, value_delimiter = ',')]
    pub levels_ps: Option<Vec<u64>>,
    /// Clock period of the clocked reference; defaults to the fastest legal
    /// period.
    #[arg(long)]
    pub clock_ps: Option<u64>,
}

impl DelayArgs {
    fn config(&self) -> DelayConfig {
        DelayConfig {
            celement: SimTime(self.celement_ps),
            ack: SimTime(self.ack_ps),
            clk_to_q: SimTime(self.clk_to_q_ps),
            latch_d_to_q: SimTime(self.latch_ps),
            multiplier: SimTime(self.mult_ps),
            adder: SimTime(self.add_ps),
            bundling_margin: SimTime(self.margin_ps),
            levels: self
                .levels_ps
                .as_ref()
                .map(|l| l.iter().map(|&d| SimTime(d)).collect()),
            ..DelayConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Coefficient file written by `design`.
    #[arg(long)]
    pub coeffs: PathBuf,
    /// Input signal file.
    #[arg(long)]
    pub signal: PathBuf,
    /// Output directory for reports.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Write a VCD covering the first N samples.
    #[arg(long)]
    pub vcd_samples: Option<usize>,
    #[command(flatten)]
    pub delays: DelayArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// original, modified-dff, modified-latch or sync.
    #[arg(long, default_value = "modified-dff")]
    pub variant: Variant,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Asynchronous variant compared against the clocked reference.
    #[arg(long, default_value = "modified-dff")]
    pub variant: Variant,
    /// Simulate both variants on one thread.
    #[arg(long)]
    pub serial: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub signal: PathBuf,
    /// Divide samples by 2^N first (15 for raw Q1.15 filter outputs).
    #[arg(long, default_value_t = 0)]
    pub scale_bits: u32,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 80.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 125.0)]
    pub rate: f64,
    /// Peak amplitude of each interference tone in LSBs.
    #[arg(long, default_value_t = 30.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error("{0}")]
    Usage(String),
}

/// Outcome of a successful command: whether `--strict` should fail it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub clean: bool,
    pub message: String,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Design(a) => design(a),
        Command::SynthEcg(a) => synth(a),
        Command::Spectrum(a) => spectrum_cmd(a),
        Command::Simulate(a) => experiment(&a.run, vec![a.variant], false),
        Command::Compare(a) => {
            if !a.variant.is_async() {
                return Err(CliError::Usage(
                    "compare needs an asynchronous variant".into(),
                ));
            }
            experiment(&a.run, vec![a.variant, Variant::SynchronousClocked], !a.serial)
        }
    }
}

fn design(a: &DesignArgs) -> Result<Outcome, CliError> {
    let spec = FilterSpec {
        sample_rate: a.rate,
        passband_edge: a.pass,
        stopband_edge: a.stop,
        passband_ripple_db: a.ripple,
        stopband_atten_db: a.atten,
        order: a.order,
    };
    let (d, converged) = match design_equiripple(&spec) {
        Ok(d) => (d, true),
        Err(DspError::NoConvergence { best }) => (*best, false),
        Err(e) => return Err(e.into()),
    };
    let q = quantize(&d.coefficients, a.format)?;
    write_coefficients(&q, &a.output)?;
    let max_err = q.quantized.as_ref().map_or(0.0, |q| q.max_error);
    Ok(Outcome {
        clean: converged,
        message: format!(
            "taps={} iterations={} converged={converged} passband_ripple_db={:.4} stopband_atten_db={:.2} max_quant_error={max_err:e}",
            q.len(),
            d.iterations,
            d.passband_ripple_db,
            d.stopband_atten_db
        ),
    })
}

fn synth(a: &SynthArgs) -> Result<Outcome, CliError> {
    if a.duration <= 0.0 || a.rate <= 0.0 {
        return Err(CliError::Usage("duration and rate must be positive".into()));
    }
    let s = synth_ecg(&EcgParams {
        duration_s: a.duration,
        sample_rate: a.rate,
        noise_amplitude: a.noise,
        seed: a.seed,
        ..EcgParams::default()
    });
    write_signal(&s, &a.output)?;
    Ok(Outcome {
        clean: true,
        message: format!("samples={} rate={} bits={}", s.len(), s.sample_rate, s.bits),
    })
}

fn spectrum_cmd(a: &SpectrumArgs) -> Result<Outcome, CliError> {
    let s = load_signal(&a.signal)?;
    let scale = 2f64.powi(a.scale_bits as i32);
    let x: Vec<f64> = s.samples.iter().map(|&v| v as f64 / scale).collect();
    let sp = spectrum(&x, s.sample_rate)?;
    let bins = sp.points.len();
    std::fs::write(&a.output, spectrum_csv(&[("magnitude_db".into(), sp)])).map_err(IoError::from)?;
    Ok(Outcome {
        clean: true,
        message: format!("bins={bins}"),
    })
}

fn experiment(a: &RunArgs, variants: Vec<Variant>, parallel: bool) -> Result<Outcome, CliError> {
    let coefficients = read_coefficients(&a.coeffs)?;
    let signal = load_signal(&a.signal)?;
    let report = run_experiment(&ExperimentConfig {
        variants,
        coefficients,
        signal,
        delays: a.delays.config(),
        clock_period: a.delays.clock_ps.map(SimTime),
        run: RunOptions {
            vcd_samples: a.vcd_samples,
            ..RunOptions::default()
        },
        parallel,
    })?;
    report.write_to(&a.out)?;
    Ok(Outcome {
        clean: is_clean(&report),
        message: report.summary().trim_end().to_string(),
    })
}

/// No violations, no stalled input, every run matching the golden model
/// and, when compared, identical asynchronous and clocked outputs.
pub fn is_clean(report: &ExperimentReport) -> bool {
    report.total_violations() == 0
        && report.runs.iter().all(|r| r.stalled_at.is_none())
        && report.golden_mismatches.iter().all(|g| g.1 == 0)
        && report.comparison.as_ref().is_none_or(|c| c.is_equal())
}

/// Parses arguments, runs the command and maps the outcome to an exit code:
/// 0 success, 1 error, 2 strict-mode failure.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(o) => {
            println!("{}", o.message);
            if cli.strict && !o.clean {
                eprintln!("strict: violations or mismatches found");
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
