//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use async_fir::arch::{DelayConfig, Variant};
use async_fir::dsp::{
    design_equiripple, freq_response, magnitude_db, response_at, spectrum, Coefficients,
    FilterSpec,
};
use async_fir::io::{
    build_variant, default_clock_period, latency_report, run_experiment, run_stream, synth_ecg,
    EcgParams, ExperimentConfig, ExperimentReport, RunOptions,
};
use async_fir::monitor::{MonitorMode, Observation, ProtocolMonitor, ViolationKind};
use async_fir::sim::SimTime;

use common::{ecg_coefficients, raw_coefficients};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn full_run() -> ExperimentReport {
    run_experiment(&ExperimentConfig {
        variants: vec![Variant::ModifiedDff, Variant::SynchronousClocked],
        coefficients: ecg_coefficients().clone(),
        signal: synth_ecg(&EcgParams::default()),
        delays: DelayConfig::default(),
        clock_period: None,
        run: RunOptions::default(),
        parallel: true,
    })
    .expect("experiment runs")
}

fn functional_equivalence(r: &ExperimentReport) -> Outcome {
    let n = r.signal.len();
    let a = &r.runs[0];
    let s = &r.runs[1];
    let golden_a = r.golden_mismatches[0].1;
    let golden_s = r.golden_mismatches[1].1;
    let cmp = r.comparison.as_ref().expect("both variants ran");
    check(
        n == 10_000
            && r.signal.sample_rate == 125.0
            && r.signal.bits == 12
            && a.outputs.len() == n
            && s.outputs.len() == n
            && golden_a == 0
            && golden_s == 0
            && cmp.mismatches == 0,
        format!(
            "{n} samples; async vs golden {golden_a}, sync vs golden {golden_s}, async vs sync {} mismatches",
            cmp.mismatches
        ),
    )
}

fn token_flood() -> Outcome {
    let c = raw_coefficients(&[1000, 2000, 3000, 2000, 1000]);
    let fc = build_variant(Variant::OriginalMicropipeline, &c, &DelayConfig::default(), SimTime(0))
        .expect("original build");
    let run = run_stream(fc, &[777], &RunOptions::default()).expect("runs");
    let flood = run
        .violations
        .iter()
        .any(|v| v.kind == ViolationKind::TokenFlood);
    let all = run.final_registers.iter().all(|&w| w == 777);
    check(
        flood && all,
        format!(
            "TokenFlood reported: {flood}; registers at quiescence {:?}",
            run.final_registers
        ),
    )
}

fn latch_corruption() -> Outcome {
    let c = raw_coefficients(&[1000, 2000, 3000, 2000, 1000]);
    let stimulus = [11, 22, 33, 44, 55];
    let run = |v| {
        let fc = build_variant(v, &c, &DelayConfig::default(), SimTime(0)).expect("builds");
        run_stream(fc, &stimulus, &RunOptions::default()).expect("runs")
    };
    let latch = run(Variant::ModifiedLatch);
    let dff = run(Variant::ModifiedDff);
    let corrupt = latch
        .violations
        .iter()
        .filter(|v| v.kind == ViolationKind::DataCorruption)
        .count();
    check(
        corrupt > 0 && dff.violations.is_empty() && dff.final_registers == [55, 44, 33, 22, 11],
        format!(
            "latch: {corrupt} DataCorruption (registers {:?}); dff: {} violations (registers {:?})",
            latch.final_registers,
            dff.violations.len(),
            dff.final_registers
        ),
    )
}

/// Swaps a random Req/Ack observation with the next Req/Ack observation on
/// the same channel.
fn reorder_one(trace: &[Observation], rng: &mut ChaCha8Rng) -> Vec<Observation> {
    let control: Vec<usize> = (0..trace.len()).filter(|&i| trace[i].is_control()).collect();
    loop {
        let i = control[rng.gen_range(0..control.len())];
        let same = |o: &Observation| o.is_control() && o.channel == trace[i].channel;
        if let Some(j) = (i + 1..trace.len()).find(|&j| same(&trace[j])) {
            let mut t = trace.to_vec();
            let (ti, tj) = (t[i].time, t[j].time);
            t.swap(i, j);
            t[i].time = ti;
            t[j].time = tj;
            return t;
        }
    }
}

fn protocol_conformance(r: &ExperimentReport) -> Outcome {
    let full_clean = r.runs[0].violations.is_empty();
    let fc = build_variant(Variant::ModifiedDff, ecg_coefficients(), &DelayConfig::default(), SimTime(0))
        .expect("builds");
    let taps = fc.taps();
    let samples: Vec<i64> = r.signal.samples[..40].to_vec();
    let run = run_stream(
        fc,
        &samples,
        &RunOptions {
            record_observations: true,
            ..RunOptions::default()
        },
    )
    .expect("runs");
    let trace = run.observations;
    let replay_clean = ProtocolMonitor::replay(MonitorMode::Modified, taps, &trace).is_empty();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let injections = 200;
    let caught = (0..injections)
        .filter(|_| {
            let faulty = reorder_one(&trace, &mut rng);
            !ProtocolMonitor::replay(MonitorMode::Modified, taps, &faulty).is_empty()
        })
        .count();
    check(
        full_clean && replay_clean && caught == injections,
        format!(
            "10000-sample run: {} violations; recorded trace of {} observations replays clean: {replay_clean}; {caught}/{injections} reorderings detected",
            r.runs[0].violations.len(),
            trace.len()
        ),
    )
}

fn equiripple_designer() -> Outcome {
    let text = include_str!("fixtures/remez_oracle.txt");
    let lines: Vec<&str> = text.lines().collect();
    let mut worst_db = 0.0f64;
    let mut attens = Vec::new();
    let mut ok = true;
    let mut alternations = 0;
    for pair in lines.chunks(2) {
        let order: usize = pair[0].split_whitespace().next().unwrap()["order=".len()..]
            .parse()
            .unwrap();
        let theirs: Vec<f64> = pair[1].split_whitespace().map(|t| t.parse().unwrap()).collect();
        let spec = FilterSpec::ecg_lowpass().with_order(order);
        let d = design_equiripple(&spec).expect("converges");
        attens.push((order, d.stopband_atten_db));
        // 16x the design grid density over the passband.
        let grid: Vec<f64> = (0..=16 * 16 * (order / 2 + 1))
            .map(|k| 35.0 * k as f64 / (16 * 16 * (order / 2 + 1)) as f64)
            .collect();
        let a = freq_response(&d.coefficients, &grid, 125.0);
        let b = freq_response(&Coefficients::new(theirs.clone()), &grid, 125.0);
        for (x, y) in a.points.iter().zip(&b.points) {
            worst_db = worst_db.max((x.1 - y.1).abs());
        }
        // Stopband: achieved attenuation against the oracle's.
        let stop: Vec<f64> = (0..=4000).map(|k| 45.0 + 17.5 * k as f64 / 4000.0).collect();
        let peak = |taps: &[f64]| {
            stop.iter()
                .map(|&f| magnitude_db(response_at(taps, f, 125.0).norm()))
                .fold(f64::MIN, f64::max)
        };
        let diff = (peak(&d.coefficients.taps) - peak(&theirs)).abs();
        worst_db = worst_db.max(diff);
        if order == 32 {
            alternations = count_alternations(&d.coefficients.taps, d.delta, &spec);
            ok &= d.coefficients.len() == 33 && d.coefficients.is_symmetric();
            ok &= alternations >= 32 / 2 + 2;
        }
    }
    let monotone = attens.windows(2).all(|w| w[1].1 >= w[0].1);
    let list: Vec<String> = attens.iter().map(|(o, a)| format!("{o}:{a:.2}dB")).collect();
    check(
        ok && worst_db <= 0.5 && monotone,
        format!(
            "max deviation from reference {worst_db:.4} dB; {alternations} alternations at order 32; attenuation by order {}",
            list.join(" ")
        ),
    )
}

fn count_alternations(taps: &[f64], delta: f64, spec: &FilterSpec) -> usize {
    let half = taps.len() / 2;
    let w = spec.passband_deviation() / spec.stopband_deviation();
    let amp = |f: f64| {
        taps[half]
            + 2.0
                * (1..=half)
                    .map(|k| taps[half + k] * (2.0 * std::f64::consts::PI * f * k as f64).cos())
                    .sum::<f64>()
    };
    let mut signs: Vec<f64> = Vec::new();
    let bands = [
        (0.0, spec.passband_edge / spec.sample_rate, 1.0, 1.0),
        (spec.stopband_edge / spec.sample_rate, 0.5, 0.0, w),
    ];
    for (lo, hi, desired, weight) in bands {
        let n = 16 * 16 * (half + 1);
        let e: Vec<f64> = (0..=n)
            .map(|k| weight * (desired - amp(lo + (hi - lo) * k as f64 / n as f64)))
            .collect();
        for k in 0..e.len() {
            let left = k == 0 || e[k].abs() >= e[k - 1].abs();
            let right = k + 1 == e.len() || e[k].abs() >= e[k + 1].abs();
            if left && right && e[k].abs() >= 0.99 * delta && signs.last() != Some(&e[k].signum()) {
                signs.push(e[k].signum());
            }
        }
    }
    signs.len()
}

fn latency_mechanism() -> Outcome {
    let c = ecg_coefficients();
    let taps = c.len();
    let depth = DelayConfig::depth(taps);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let samples: Vec<i64> = (0..24).map(|_| rng.gen_range(-2048..2048)).collect();
    let mut lines = Vec::new();
    let mut ok = true;
    for _ in 0..4 {
        let levels: Vec<SimTime> = (0..depth).map(|_| SimTime(rng.gen_range(300..6000))).collect();
        let delays = DelayConfig {
            levels: Some(levels.clone()),
            ..DelayConfig::default()
        };
        let period = default_clock_period(&delays, taps).unwrap();
        let measure = |v| {
            let fc = build_variant(v, c, &delays, period).unwrap();
            let run = run_stream(fc.clone(), &samples, &RunOptions::default()).unwrap();
            latency_report(&fc, &run).unwrap()
        };
        let a = measure(Variant::ModifiedDff);
        let s = measure(Variant::SynchronousClocked);
        let sum: u64 = levels.iter().map(|d| d.0).sum();
        let overhead = a.model.control_overhead.0;
        let async_ok = a
            .per_sample
            .iter()
            .all(|t| t.0.abs_diff(sum + overhead) <= 1);
        let sync_ok = s.per_sample.iter().all(|t| t.0 == depth as u64 * period.0);
        let faster = a.max < s.min;
        ok &= async_ok && sync_ok && faster && a.per_sample.len() == samples.len();
        lines.push(format!(
            "sum={sum}+{overhead}ps async={}ps sync={}x{}={}ps",
            a.max.0,
            depth,
            period.0,
            s.max.0
        ));
    }
    check(ok, lines.join("; "))
}

fn hash_dir(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let digest = Sha256::digest(std::fs::read(&p).unwrap());
                let name = p.strip_prefix(dir).unwrap().display().to_string();
                out.insert(name, format!("{digest:x}"));
            }
        }
    }
    out
}

fn cli_session(root: &Path) -> BTreeMap<String, String> {
    let bin = env!("CARGO_BIN_EXE_asyncfir");
    std::fs::create_dir_all(root).unwrap();
    let run = |args: &[&str]| {
        let st = Command::new(bin)
            .args(args)
            .current_dir(root)
            .output()
            .expect("binary runs");
        assert!(st.status.success(), "{args:?}: {}", String::from_utf8_lossy(&st.stderr));
        // Keep stdout as an output too.
        let name = format!("stdout-{}.txt", args[0]);
        std::fs::write(root.join(name), &st.stdout).unwrap();
    };
    run(&["design", "-o", "coeffs.txt"]);
    run(&["synth-ecg", "--duration", "8", "--seed", "5", "-o", "ecg.sig"]);
    run(&["spectrum", "--signal", "ecg.sig", "-o", "ecg-spectrum.csv"]);
    run(&[
        "simulate", "--variant", "modified-latch", "--coeffs", "coeffs.txt", "--signal", "ecg.sig",
        "-o", "latch", "--vcd-samples", "4",
    ]);
    run(&[
        "compare", "--coeffs", "coeffs.txt", "--signal", "ecg.sig", "-o", "cmp", "--vcd-samples",
        "4",
    ]);
    hash_dir(root)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let a = cli_session(&tmp.path().join("a"));
    let b = cli_session(&tmp.path().join("b"));
    let kinds = ["vcd", "csv", "log", "out", "txt", "sig"];
    let covered = kinds
        .iter()
        .all(|k| a.keys().any(|name| name.ends_with(&format!(".{k}"))));
    check(
        a == b && covered && a.len() > 20,
        format!("{} files hashed per run, identical: {}", a.len(), a == b),
    )
}

fn filtering_effect(r: &ExperimentReport) -> Outcome {
    let fs = r.signal.sample_rate;
    let x = r.signal.as_f64();
    let y: Vec<f64> = r.runs[0].outputs.iter().map(|&v| v as f64 / 32768.0).collect();
    let sx = spectrum(&x, fs).unwrap();
    let sy = spectrum(&y, fs).unwrap();
    let measured = sy.at(50.0).unwrap() - sx.at(50.0).unwrap();
    let c = ecg_coefficients();
    let taps: Vec<f64> = c.raw().unwrap().iter().map(|&r| r as f64 / 32768.0).collect();
    let designed = magnitude_db(response_at(&taps, 50.0, fs).norm());
    check(
        (measured - designed).abs() <= 3.0,
        format!("50 Hz suppression measured {measured:.2} dB, designed response {designed:.2} dB"),
    )
}

#[test]
fn acceptance() {
    let report = full_run();
    let results = [
        ("1 functional equivalence", functional_equivalence(&report)),
        ("2 token flood (original pipeline)", token_flood()),
        ("3 latch corruption vs flip-flops", latch_corruption()),
        ("4 protocol conformance", protocol_conformance(&report)),
        ("5 equiripple designer", equiripple_designer()),
        ("6 latency mechanism", latency_mechanism()),
        ("7 CLI determinism", determinism()),
        ("8 filtering effect at 50 Hz", filtering_effect(&report)),
    ];
    // Written to the process stdout directly so the lines survive test
    // output capture.
    let mut out = std::io::stdout().lock();
    for (name, o) in &results {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        writeln!(out, "{verdict} {name}: {}", o.detail).unwrap();
    }
    drop(out);
    let failed: Vec<&str> = results.iter().filter(|r| !r.1.pass).map(|r| r.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
