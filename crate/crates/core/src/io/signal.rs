//! Text signal files:
//!
//! ```text
//! rate=125
//! bits=12
//! count=3
//! 10
//! -4
//! 7
//! ```

use std::path::Path;

use super::IoError;
use crate::primitives::fits;

#[derive(Debug, Clone, PartialEq)]
pub struct SignalFile {
    pub sample_rate: f64,
    pub bits: u32,
    pub samples: Vec<i64>,
}

impl SignalFile {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.samples.iter().map(|&v| v as f64).collect()
    }
}

pub fn render_signal(s: &SignalFile) -> String {
    let mut out = format!(
        "rate={}\nbits={}\ncount={}\n",
        s.sample_rate,
        s.bits,
        s.samples.len()
    );
    for v in &s.samples {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

pub fn write_signal(s: &SignalFile, path: &Path) -> Result<(), IoError> {
    std::fs::write(path, render_signal(s))?;
    Ok(())
}

pub fn parse_signal(text: &str) -> Result<SignalFile, IoError> {
    let err = |line: usize, message: String| IoError::Parse { line, message };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut header = |key: &str| -> Result<(usize, String), IoError> {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| err(0, format!("missing `{key}=` header")))?;
        l.strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .map(|v| (ln, v.to_string()))
            .ok_or_else(|| err(ln, format!("expected `{key}=`")))
    };
    let (ln, rate) = header("rate")?;
    let sample_rate: f64 = rate
        .parse()
        .ok()
        .filter(|r: &f64| *r > 0.0 && r.is_finite())
        .ok_or_else(|| err(ln, format!("bad sample rate `{rate}`")))?;
    let (ln, bits) = header("bits")?;
    let bits: u32 = bits
        .parse()
        .ok()
        .filter(|b| (1..=63).contains(b))
        .ok_or_else(|| err(ln, format!("bad resolution `{bits}`")))?;
    let (count_line, count) = header("count")?;
    let count: usize = count
        .parse()
        .map_err(|_| err(count_line, format!("bad count `{count}`")))?;
    let mut samples = Vec::with_capacity(count);
    for (ln, l) in lines {
        if l.is_empty() {
            continue;
        }
        let value: i64 = l.parse().map_err(|_| err(ln, format!("bad sample `{l}`")))?;
        if !fits(value as i128, bits) {
            return Err(IoError::ResolutionViolation {
                line: ln,
                value,
                bits,
            });
        }
        samples.push(value);
    }
    if samples.len() != count {
        return Err(err(
            count_line,
            format!("header says {count} samples, found {}", samples.len()),
        ));
    }
    Ok(SignalFile {
        sample_rate,
        bits,
        samples,
    })
}

pub fn load_signal(path: &Path) -> Result<SignalFile, IoError> {
    parse_signal(&std::fs::read_to_string(path)?)
}
