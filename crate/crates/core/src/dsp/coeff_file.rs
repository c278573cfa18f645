//! Text coefficient files:
//!
//! ```text
//! format=Q1.15
//! taps=33
//! <real> <quantized integer>
//! ...
//! ```

use std::path::Path;

use super::{Coefficients, DspError, QuantizedTaps};
use crate::primitives::QFormat;

pub fn render_coefficients(c: &Coefficients) -> Result<String, DspError> {
    let q = c.quantized.as_ref().ok_or(DspError::MissingQuantization)?;
    let mut s = format!("format={}\ntaps={}\n", q.format, c.taps.len());
    for (t, r) in c.taps.iter().zip(&q.raw) {
        s.push_str(&format!("{t:e} {r}\n"));
    }
    Ok(s)
}

pub fn write_coefficients(c: &Coefficients, path: &Path) -> Result<(), DspError> {
    std::fs::write(path, render_coefficients(c)?)?;
    Ok(())
}

pub fn parse_coefficients(text: &str) -> Result<Coefficients, DspError> {
    let err = |line: usize, message: String| DspError::Parse { line, message };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut header = |key: &str| -> Result<String, DspError> {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| err(0, format!("missing `{key}=` header")))?;
        l.strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .map(str::to_string)
            .ok_or_else(|| err(ln, format!("expected `{key}=`")))
    };
    let format: QFormat = header("format")?.parse().map_err(|m| err(1, m))?;
    let count: usize = header("taps")?
        .parse()
        .map_err(|_| err(2, "tap count is not an integer".into()))?;
    let mut taps = Vec::with_capacity(count);
    let mut raw = Vec::with_capacity(count);
    for (ln, l) in lines {
        if l.is_empty() {
            continue;
        }
        let mut f = l.split_whitespace();
        let (Some(t), Some(r), None) = (f.next(), f.next(), f.next()) else {
            return Err(err(ln, "expected `<real> <integer>`".into()));
        };
        taps.push(t.parse::<f64>().map_err(|_| err(ln, format!("bad real `{t}`")))?);
        let r: i64 = r.parse().map_err(|_| err(ln, format!("bad integer `{r}`")))?;
        if r < format.min_raw() || r > format.max_raw() {
            return Err(err(ln, format!("{r} does not fit {format}")));
        }
        raw.push(r);
    }
    if taps.len() != count {
        return Err(err(
            2,
            format!("header says {count} taps, found {}", taps.len()),
        ));
    }
    let max_error = taps
        .iter()
        .zip(&raw)
        .map(|(t, &r)| (r as f64 / format.scale() - t).abs())
        .fold(0.0, f64::max);
    Ok(Coefficients {
        taps,
        quantized: Some(QuantizedTaps {
            format,
            raw,
            max_error,
        }),
    })
}

pub fn read_coefficients(path: &Path) -> Result<Coefficients, DspError> {
    parse_coefficients(&std::fs::read_to_string(path)?)
}
