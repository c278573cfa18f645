use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use super::{comparison_csv, spectrum_csv, write_vcd, IoError, SignalFile, VcdTrace};
use crate::arch::{
    build_modified_fir, build_original_micropipeline, build_sync_fir, DelayConfig, FilterCircuit,
    FilterSim, LatencyModel, Variant,
};
use crate::dsp::{golden_fir, spectrum, Arithmetic, Coefficients, GoldenOutput};
use crate::monitor::{
    attach, detect_flood, snapshot_tokens, MonitorMode, Observation, ProtocolMonitor,
    ProtocolViolation,
};
use crate::primitives::RegisterKind;
use crate::sim::{Event, NetId, SimTime};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    /// Attach the protocol monitor (asynchronous builds only).
    pub monitor: bool,
    /// Keep the monitor's observation stream in the result.
    pub record_observations: bool,
    /// Compare stage registers around every injection.
    pub flood_check: bool,
    /// Dump waveforms covering the first `n` samples.
    pub vcd_samples: Option<usize>,
    /// Keep the kernel's applied-event log.
    pub record_events: bool,
    /// Upper bound on kernel events for one asynchronous handshake.
    pub events_per_sample: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            monitor: true,
            record_observations: false,
            flood_check: true,
            vcd_samples: None,
            record_events: false,
            events_per_sample: 1_000_000,
        }
    }
}

/// Result of streaming samples through one filter build.
#[derive(Debug, Clone)]
pub struct StreamRun {
    pub variant: Variant,
    pub output_bits: u32,
    /// One output per accepted sample.
    pub outputs: Vec<i64>,
    /// When each sample was accepted (global request or capturing edge).
    pub accept_times: Vec<SimTime>,
    /// When each sample's result became valid at the output register input.
    pub valid_times: Vec<SimTime>,
    pub violations: Vec<ProtocolViolation>,
    pub observations: Vec<Observation>,
    pub vcd: Option<VcdTrace>,
    /// Index of the first sample that could not be injected because the
    /// input handshake never completed.
    pub stalled_at: Option<usize>,
    pub events_processed: u64,
    pub final_time: SimTime,
    pub final_registers: Vec<i64>,
    pub events: Vec<Event>,
}

impl StreamRun {
    pub fn violation_log(&self) -> String {
        self.violations.iter().map(|v| format!("{v}\n")).collect()
    }
}

fn vcd_nets(fc: &FilterCircuit) -> Vec<NetId> {
    let mut nets: Vec<NetId> = fc
        .circuit
        .nets()
        .iter()
        .enumerate()
        .filter(|(_, n)| !n.is_word())
        .map(|(i, _)| NetId(i))
        .collect();
    nets.push(fc.data_in);
    nets.extend(fc.stages.iter().map(|s| s.register_output));
    nets.push(fc.output_data);
    nets.push(fc.output_net);
    nets
}

#[derive(Default)]
struct Strobes {
    accept: Vec<SimTime>,
    valid: Vec<(SimTime, i64)>,
}

/// Builds a simulation of `fc`, streams `samples` through it and collects
/// outputs, strobe times and monitor findings.
///
/// Asynchronous builds inject each sample as soon as the previous input
/// handshake has completed and the circuit is quiescent. The clocked build
/// drives sample `n` one bundling margin before rising edge `n`.
pub fn run_stream(
    fc: FilterCircuit,
    samples: &[i64],
    opts: &RunOptions,
) -> Result<StreamRun, IoError> {
    let variant = fc.variant;
    let output_bits = fc.circuit.net(fc.output_data).map_or(0, |n| n.width);
    let mut sim = FilterSim::new(fc)?;
    if opts.record_events {
        sim.kernel.record_events();
    }
    let mode = MonitorMode::for_variant(variant);
    let monitor = match mode {
        Some(m) if opts.monitor => {
            let mut mon = ProtocolMonitor::new(m, sim.fc.taps());
            if opts.record_observations {
                mon.record_trace();
            }
            let mon = Arc::new(Mutex::new(mon));
            attach(&mut sim, Arc::clone(&mon))?;
            Some(mon)
        }
        _ => None,
    };
    let mut vcd = match opts.vcd_samples {
        Some(_) => {
            let nets = vcd_nets(&sim.fc);
            Some(VcdTrace::attach(variant.name(), &mut sim, &nets)?)
        }
        None => None,
    };
    let strobes = Arc::new(Mutex::new(Strobes::default()));
    {
        let s = Arc::clone(&strobes);
        let clocked = !variant.is_async();
        let data = sim.fc.output_data;
        sim.kernel.attach_probe(sim.fc.input_strobe, move |tr, values| {
            if tr.rising() {
                let mut s = s.lock().expect("strobes poisoned");
                s.accept.push(tr.time);
                if clocked {
                    s.valid.push((tr.time, values.get(data).word()));
                }
            }
        })?;
        if variant.is_async() {
            let s = Arc::clone(&strobes);
            sim.kernel.attach_probe(sim.fc.output_strobe, move |tr, values| {
                if tr.rising() {
                    s.lock()
                        .expect("strobes poisoned")
                        .valid
                        .push((tr.time, values.get(data).word()));
                }
            })?;
        }
    }
    let mut flood = Vec::new();
    let mut stalled_at = None;
    let mut events_processed = 0;
    let mut stop_vcd = |sim: &mut FilterSim, n: usize| -> Result<(), IoError> {
        if opts.vcd_samples == Some(n + 1) {
            if let Some((_, ids)) = &mut vcd {
                for id in ids.drain(..) {
                    sim.kernel.detach_probe(id)?;
                }
            }
        }
        Ok(())
    };
    if variant.is_async() {
        let mode = mode.expect("asynchronous build");
        for (n, &x) in samples.iter().enumerate() {
            if sim.is_busy() {
                stalled_at = Some(n);
                break;
            }
            let before = if opts.flood_check {
                Some(snapshot_tokens(&mut sim)?)
            } else {
                None
            };
            let now = sim.kernel.now();
            sim.inject_sample(x, now)?;
            events_processed += sim
                .kernel
                .run_to_quiescence(opts.events_per_sample)?
                .events_processed;
            if let Some(before) = before {
                let after = snapshot_tokens(&mut sim)?;
                flood.extend(detect_flood(&before, &after, x, mode));
            }
            stop_vcd(&mut sim, n)?;
        }
    } else {
        let margin = sim.fc.delays.bundling_margin;
        let depth = sim.fc.output_depth as u64;
        for (n, &x) in samples.iter().enumerate() {
            let edge = sim.fc.edge_time(n as u64).expect("clocked build");
            sim.inject_sample(x, edge - margin)?;
            events_processed += sim.kernel.run_until(edge)?.events_processed;
            stop_vcd(&mut sim, n)?;
        }
        if !samples.is_empty() {
            let last = sim
                .fc
                .edge_time(samples.len() as u64 - 1 + depth)
                .expect("clocked build");
            events_processed += sim.kernel.run_until(last)?.events_processed;
        }
    }

    let strobes = std::mem::take(&mut *strobes.lock().expect("strobes poisoned"));
    let (outputs, accept_times, valid_times) = if variant.is_async() {
        let n = strobes.valid.len().min(strobes.accept.len());
        (
            strobes.valid[..n].iter().map(|v| v.1).collect(),
            strobes.accept[..n].to_vec(),
            strobes.valid[..n].iter().map(|v| v.0).collect(),
        )
    } else {
        let depth = sim.fc.output_depth;
        let n = samples.len().min(strobes.valid.len().saturating_sub(depth));
        (
            (0..n).map(|i| strobes.valid[i + depth].1).collect(),
            strobes.accept[..n].to_vec(),
            (0..n).map(|i| strobes.valid[i + depth].0).collect(),
        )
    };
    let (mut violations, observations) = match monitor {
        Some(m) => {
            let m = m.lock().expect("monitor poisoned");
            (m.violations().to_vec(), m.trace().to_vec())
        }
        None => (Vec::new(), Vec::new()),
    };
    violations.extend(flood);
    violations.sort_by_key(|v| v.time);
    Ok(StreamRun {
        variant,
        output_bits,
        outputs,
        accept_times,
        valid_times,
        violations,
        observations,
        vcd: vcd.map(|(t, _)| std::mem::take(&mut *t.lock().expect("trace poisoned"))),
        stalled_at,
        events_processed,
        final_time: sim.kernel.now(),
        final_registers: sim.register_words(),
        events: sim.kernel.recorded_events().to_vec(),
    })
}

/// Measured versus predicted input-to-output latency of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyReport {
    pub variant: Variant,
    pub per_sample: Vec<SimTime>,
    pub model: LatencyModel,
    pub mean_ps: f64,
    pub min: SimTime,
    pub max: SimTime,
}

impl LatencyReport {
    pub fn render(&self) -> String {
        format!(
            "variant={}\nsamples={}\nstage_sum_ps={}\ncontrol_overhead_ps={}\npredicted_ps={}\nmeasured_mean_ps={:.3}\nmeasured_min_ps={}\nmeasured_max_ps={}\n",
            self.variant,
            self.per_sample.len(),
            self.model.stage_sum.0,
            self.model.control_overhead.0,
            self.model.predicted.0,
            self.mean_ps,
            self.min.0,
            self.max.0
        )
    }
}

/// Latency from sample acceptance (global request rise, or capturing clock
/// edge) to output-valid (output strobe rise, or the edge that loads the
/// output register).
pub fn latency_report(fc: &FilterCircuit, run: &StreamRun) -> Result<LatencyReport, IoError> {
    let model = fc.latency_model().ok_or_else(|| {
        IoError::IncompleteTrace(format!("no latency model for {}", fc.variant))
    })?;
    let per_sample: Vec<SimTime> = run
        .accept_times
        .iter()
        .zip(&run.valid_times)
        .map(|(&a, &v)| v - a)
        .collect();
    if per_sample.is_empty() {
        return Err(IoError::IncompleteTrace(format!(
            "{} produced no output strobe",
            fc.variant
        )));
    }
    let mean_ps = per_sample.iter().map(|t| t.0 as f64).sum::<f64>() / per_sample.len() as f64;
    Ok(LatencyReport {
        variant: fc.variant,
        min: *per_sample.iter().min().expect("non-empty"),
        max: *per_sample.iter().max().expect("non-empty"),
        per_sample,
        model,
        mean_ps,
    })
}

/// Sample-by-sample asynchronous versus clocked outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    /// `(index, input, async output, sync output)`
    pub rows: Vec<(usize, i64, i64, i64)>,
    pub mismatches: usize,
}

impl Comparison {
    pub fn new(input: &[i64], async_out: &[i64], sync_out: &[i64]) -> Self {
        let n = input.len().max(async_out.len()).max(sync_out.len());
        let get = |v: &[i64], i: usize| v.get(i).copied();
        let mut rows = Vec::with_capacity(n);
        let mut mismatches = 0;
        for i in 0..n {
            let (a, s) = (get(async_out, i), get(sync_out, i));
            if a.is_none() || a != s {
                mismatches += 1;
            }
            rows.push((
                i,
                get(input, i).unwrap_or(0),
                a.unwrap_or(0),
                s.unwrap_or(0),
            ));
        }
        Comparison { rows, mismatches }
    }

    pub fn is_equal(&self) -> bool {
        self.mismatches == 0
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub variants: Vec<Variant>,
    pub coefficients: Coefficients,
    pub signal: SignalFile,
    pub delays: DelayConfig,
    /// Defaults to [`default_clock_period`].
    pub clock_period: Option<SimTime>,
    pub run: RunOptions,
    /// Simulate variants on separate threads.
    pub parallel: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub signal: SignalFile,
    pub golden: Vec<i64>,
    pub runs: Vec<StreamRun>,
    pub latency: Vec<LatencyReport>,
    pub netlists: Vec<(Variant, String)>,
    /// Present when an asynchronous filter and the clocked one both ran.
    pub comparison: Option<Comparison>,
    /// Output samples differing from the fixed-point golden model, per run.
    pub golden_mismatches: Vec<(Variant, usize)>,
    pub coefficient_frac_bits: u32,
}

/// Smallest even clock period meeting the register-to-register constraint
/// and leaving room for the input bundling margin.
pub fn default_clock_period(delays: &DelayConfig, taps: usize) -> Result<SimTime, IoError> {
    let levels = delays.level_delays(taps)?;
    let need = levels.iter().max().map_or(0, |d| d.0) + delays.clk_to_q.0;
    let need = need.max(2 * delays.bundling_margin.0);
    Ok(SimTime(need + need % 2))
}

pub fn build_variant(
    variant: Variant,
    coefficients: &Coefficients,
    delays: &DelayConfig,
    clock_period: SimTime,
) -> Result<FilterCircuit, IoError> {
    let taps = coefficients.len();
    Ok(match variant {
        Variant::OriginalMicropipeline => build_original_micropipeline(taps, coefficients, delays)?,
        Variant::ModifiedDff => build_modified_fir(taps, coefficients, delays, RegisterKind::EdgeDff)?,
        Variant::ModifiedLatch => {
            build_modified_fir(taps, coefficients, delays, RegisterKind::LevelLatch)?
        }
        Variant::SynchronousClocked => build_sync_fir(taps, coefficients, clock_period, delays)?,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, IoError> {
    if cfg.variants.is_empty() {
        return Err(IoError::Config("no variant requested".into()));
    }
    if cfg.signal.bits > crate::primitives::FixedPointConfig::default().sample_bits {
        return Err(IoError::Config(format!(
            "{}-bit signal exceeds the 12-bit filter input",
            cfg.signal.bits
        )));
    }
    let period = match cfg.clock_period {
        Some(p) => p,
        None => default_clock_period(&cfg.delays, cfg.coefficients.len())?,
    };
    let circuits: Vec<FilterCircuit> = cfg
        .variants
        .iter()
        .map(|&v| build_variant(v, &cfg.coefficients, &cfg.delays, period))
        .collect::<Result<_, _>>()?;
    let samples = &cfg.signal.samples;
    let results: Vec<Result<StreamRun, IoError>> = if cfg.parallel && circuits.len() > 1 {
        std::thread::scope(|scope| {
            let handles: Vec<_> = circuits
                .iter()
                .map(|fc| scope.spawn(|| run_stream(fc.clone(), samples, &cfg.run)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("simulation thread panicked"))
                .collect()
        })
    } else {
        circuits
            .iter()
            .map(|fc| run_stream(fc.clone(), samples, &cfg.run))
            .collect()
    };
    let runs: Vec<StreamRun> = results.into_iter().collect::<Result<_, _>>()?;

    let golden = match golden_fir(&cfg.coefficients, samples, Arithmetic::FixedPoint)? {
        GoldenOutput::Fixed(y) => y,
        GoldenOutput::Real(_) => unreachable!("fixed-point mode"),
    };
    let mut latency = Vec::new();
    for (fc, run) in circuits.iter().zip(&runs) {
        if fc.latency_model().is_some() {
            latency.push(latency_report(fc, run)?);
        }
    }
    let golden_mismatches = runs
        .iter()
        .map(|r| {
            let diff = golden
                .iter()
                .enumerate()
                .filter(|&(i, g)| r.outputs.get(i) != Some(g))
                .count();
            (r.variant, diff)
        })
        .collect();
    let find = |want: &[Variant]| {
        want.iter()
            .find_map(|w| runs.iter().find(|r| r.variant == *w))
    };
    let comparison = match (
        find(&[Variant::ModifiedDff, Variant::ModifiedLatch]),
        find(&[Variant::SynchronousClocked]),
    ) {
        (Some(a), Some(s)) => Some(Comparison::new(samples, &a.outputs, &s.outputs)),
        _ => None,
    };
    Ok(ExperimentReport {
        signal: cfg.signal.clone(),
        golden,
        latency,
        netlists: circuits.iter().map(|fc| (fc.variant, fc.netlist())).collect(),
        comparison,
        golden_mismatches,
        coefficient_frac_bits: cfg
            .coefficients
            .quantized
            .as_ref()
            .map_or(0, |q| q.format.frac_bits),
        runs,
    })
}

impl ExperimentReport {
    pub fn total_violations(&self) -> usize {
        self.runs.iter().map(|r| r.violations.len()).sum()
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "samples={}", self.signal.len());
        for r in &self.runs {
            let golden = self
                .golden_mismatches
                .iter()
                .find(|g| g.0 == r.variant)
                .map_or(0, |g| g.1);
            let _ = writeln!(
                s,
                "{}: outputs={} golden_mismatches={} violations={} events={} final_time_ps={}{}",
                r.variant,
                r.outputs.len(),
                golden,
                r.violations.len(),
                r.events_processed,
                r.final_time.0,
                match r.stalled_at {
                    Some(n) => format!(" stalled_at={n}"),
                    None => String::new(),
                }
            );
        }
        for l in &self.latency {
            let _ = writeln!(
                s,
                "{}: latency predicted_ps={} measured_mean_ps={:.3}",
                l.variant, l.model.predicted.0, l.mean_ps
            );
        }
        if let Some(c) = &self.comparison {
            let verdict = if c.is_equal() { "equal" } else { "different" };
            let _ = writeln!(s, "comparison: {verdict} mismatches={}", c.mismatches);
        }
        s
    }

    /// Input and per-run output spectra; outputs are scaled back by the
    /// coefficient fraction bits so all columns share the input's units.
    pub fn spectra(&self) -> Result<String, IoError> {
        let scale = (1u64 << self.coefficient_frac_bits) as f64;
        let mut cols = vec![(
            "input_db".to_string(),
            spectrum(&self.signal.as_f64(), self.signal.sample_rate)?,
        )];
        for r in &self.runs {
            if r.outputs.len() < 16 {
                continue;
            }
            let y: Vec<f64> = r.outputs.iter().map(|&v| v as f64 / scale).collect();
            cols.push((
                format!("{}_db", r.variant),
                spectrum(&y, self.signal.sample_rate)?,
            ));
        }
        Ok(spectrum_csv(&cols))
    }

    /// Writes every report file into `dir` and returns their paths in a
    /// fixed order.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, IoError> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: String, text: &str| -> Result<(), IoError> {
            let p = dir.join(name);
            std::fs::write(&p, text)?;
            written.push(p);
            Ok(())
        };
        put("summary.txt".into(), &self.summary())?;
        for r in &self.runs {
            let v = r.variant.name();
            put(format!("{v}.violations.log"), &r.violation_log())?;
            let out = SignalFile {
                sample_rate: self.signal.sample_rate,
                bits: r.output_bits.max(1),
                samples: r.outputs.clone(),
            };
            put(format!("{v}.out"), &super::render_signal(&out))?;
        }
        for (v, netlist) in &self.netlists {
            put(format!("{v}.netlist"), netlist)?;
        }
        for l in &self.latency {
            put(format!("{}.latency.txt", l.variant), &l.render())?;
        }
        if let Some(c) = &self.comparison {
            put("compare.csv".into(), &comparison_csv(c))?;
        }
        if self.signal.len() >= 16 {
            put("spectrum.csv".into(), &self.spectra()?)?;
        }
        for r in &self.runs {
            if let Some(vcd) = &r.vcd {
                let p = dir.join(format!("{}.vcd", r.variant));
                write_vcd(vcd, &p)?;
                written.push(p);
            }
        }
        Ok(written)
    }
}
