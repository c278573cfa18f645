//! Direct-form reference models with a zero-filled delay line.

use super::{Coefficients, DspError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arithmetic {
    Real,
    FixedPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GoldenOutput {
    Real(Vec<f64>),
    /// Full-precision accumulator words (coefficient fraction bits retained).
    Fixed(Vec<i64>),
}

/// `y[n] = sum_k taps[k] * x[n - k]`, with `x[m] = 0` for `m < 0`.
pub fn fir_real(taps: &[f64], x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|n| {
            taps.iter()
                .enumerate()
                .take(n + 1)
                .map(|(k, t)| t * x[n - k])
                .sum()
        })
        .collect()
}

/// Integer convolution, exact as long as the result fits an `i64`.
pub fn fir_fixed(raw: &[i64], x: &[i64]) -> Vec<i64> {
    (0..x.len())
        .map(|n| {
            let acc: i128 = raw
                .iter()
                .enumerate()
                .take(n + 1)
                .map(|(k, &c)| c as i128 * x[n - k] as i128)
                .sum();
            acc as i64
        })
        .collect()
}

pub fn golden_fir(
    c: &Coefficients,
    x: &[i64],
    arithmetic: Arithmetic,
) -> Result<GoldenOutput, DspError> {
    match arithmetic {
        Arithmetic::Real => {
            let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
            Ok(GoldenOutput::Real(fir_real(&c.taps, &xf)))
        }
        Arithmetic::FixedPoint => {
            let raw = c.raw().ok_or(DspError::MissingQuantization)?;
            Ok(GoldenOutput::Fixed(fir_fixed(raw, x)))
        }
    }
}
