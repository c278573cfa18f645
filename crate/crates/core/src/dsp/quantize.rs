use super::{Coefficients, DspError, QuantizedTaps};
use crate::primitives::QFormat;

/// Round-to-nearest-even quantization into `format`, keeping the real taps.
pub fn quantize(c: &Coefficients, format: QFormat) -> Result<Coefficients, DspError> {
    let scale = format.scale();
    let mut raw = Vec::with_capacity(c.taps.len());
    let mut max_error = 0.0f64;
    for (index, &t) in c.taps.iter().enumerate() {
        let q = (t * scale).round_ties_even();
        if !q.is_finite() || q > format.max_raw() as f64 || q < format.min_raw() as f64 {
            return Err(DspError::Overflow {
                index,
                value: t,
                format,
            });
        }
        max_error = max_error.max((q / scale - t).abs());
        raw.push(q as i64);
    }
    Ok(Coefficients {
        taps: c.taps.clone(),
        quantized: Some(QuantizedTaps {
            format,
            raw,
            max_error,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_arithmetic() {
        let c = Coefficients::new(vec![0.0, 0.5, -0.25, -1.0]);
        let q = quantize(&c, QFormat::Q1_15).unwrap();
        assert_eq!(q.raw().unwrap(), &[0, 16384, -8192, -32768]);
        assert_eq!(q.quantized.unwrap().max_error, 0.0);
    }

    #[test]
    fn ties_round_to_even() {
        let q = QFormat::new(8, 0);
        let c = Coefficients::new(vec![2.5, 3.5, -2.5]);
        assert_eq!(quantize(&c, q).unwrap().raw().unwrap(), &[2, 4, -2]);
    }

    #[test]
    fn out_of_range_tap_overflows() {
        let c = Coefficients::new(vec![0.1, 1.0]);
        assert!(matches!(
            quantize(&c, QFormat::Q1_15),
            Err(DspError::Overflow { index: 1, .. })
        ));
    }
}
