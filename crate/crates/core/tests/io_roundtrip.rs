//! File formats: signals, coefficients, VCD and experiment reports.

mod common;

use proptest::prelude::*;

use async_fir::arch::{DelayConfig, Variant};
use async_fir::dsp::{parse_coefficients, render_coefficients};
use async_fir::io::{
    build_variant, load_signal, parse_signal, parse_vcd, render_signal, render_vcd, run_experiment,
    run_stream, synth_ecg, write_signal, EcgParams, ExperimentConfig, IoError, RunOptions,
    SignalFile,
};

use common::{ecg_coefficients, raw_coefficients};

#[test]
fn synthetic_ecg_round_trips_byte_identical() {
    let sig = synth_ecg(&EcgParams::default());
    assert_eq!(sig.len(), 10_000);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ecg.sig");
    write_signal(&sig, &path).unwrap();
    let first = std::fs::read(&path).unwrap();
    let back = load_signal(&path).unwrap();
    assert_eq!(back, sig);
    write_signal(&back, &path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), first);
}

#[test]
fn out_of_range_sample_is_rejected_with_its_line() {
    let text = "rate=125\nbits=12\ncount=3\n0\n2048\n1\n";
    match parse_signal(text) {
        Err(IoError::ResolutionViolation { line, value, bits }) => {
            assert_eq!((line, value, bits), (5, 2048, 12));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(parse_signal("rate=125\nbits=12\ncount=2\n0\n").is_err());
}

proptest! {
    #[test]
    fn signal_text_round_trips(samples in prop::collection::vec(-2048i64..2048, 0..200)) {
        let s = SignalFile { sample_rate: 125.0, bits: 12, samples };
        let text = render_signal(&s);
        let back = parse_signal(&text).unwrap();
        prop_assert_eq!(render_signal(&back), text);
        prop_assert_eq!(back, s);
    }

    #[test]
    fn coefficient_file_round_trips(raw in prop::collection::vec(-32768i64..32768, 1..40)) {
        let c = raw_coefficients(&raw);
        let text = render_coefficients(&c).unwrap();
        let back = parse_coefficients(&text).unwrap();
        prop_assert_eq!(back.raw().unwrap(), &raw[..]);
        prop_assert_eq!(render_coefficients(&back).unwrap(), text);
    }
}

#[test]
fn waveform_dump_reparses() {
    let c = raw_coefficients(&[300, -200, 100, 50]);
    for v in Variant::ALL {
        let d = DelayConfig::default();
        let period = async_fir::io::default_clock_period(&d, 4).unwrap();
        let fc = build_variant(v, &c, &d, period).unwrap();
        let opts = RunOptions {
            vcd_samples: Some(3),
            ..RunOptions::default()
        };
        let run = run_stream(fc, &[100, -7, 42, 5], &opts).unwrap();
        let trace = run.vcd.expect("vcd requested");
        let text = render_vcd(&trace);
        let doc = parse_vcd(&text).unwrap();
        assert_eq!(doc.timescale, "1ps", "{}", v.name());
        assert_eq!(doc.vars.len(), trace.vars.len());
        assert!(doc.changes.len() > trace.vars.len(), "{}", v.name());
        assert!(doc.changes.windows(2).all(|w| w[0].0 <= w[1].0));
    }
    assert!(parse_vcd("$timescale 1ps $end\n$enddefinitions $end\n#5\n1!\n").is_err());
}

#[test]
fn experiment_writes_every_report() {
    let params = EcgParams {
        duration_s: 2.0,
        ..EcgParams::default()
    };
    let report = run_experiment(&ExperimentConfig {
        variants: vec![Variant::ModifiedDff, Variant::SynchronousClocked],
        coefficients: ecg_coefficients().clone(),
        signal: synth_ecg(&params),
        delays: DelayConfig::default(),
        clock_period: None,
        run: RunOptions {
            vcd_samples: Some(2),
            ..RunOptions::default()
        },
        parallel: false,
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    report.write_to(dir.path()).unwrap();
    for name in [
        "summary.txt",
        "compare.csv",
        "spectrum.csv",
        "modified-dff.violations.log",
        "modified-dff.out",
        "modified-dff.netlist",
        "modified-dff.latency.txt",
        "modified-dff.vcd",
        "sync.out",
        "sync.vcd",
    ] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    let csv = std::fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("sample_index,input,async_out,sync_out,match"));
    assert_eq!(csv.lines().count(), 1 + 250);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    let log = std::fs::read_to_string(dir.path().join("modified-dff.violations.log")).unwrap();
    assert!(log.is_empty());
}
