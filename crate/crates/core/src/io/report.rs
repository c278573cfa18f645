use std::fmt::Write as _;

use super::Comparison;
use crate::dsp::FrequencyResponse;

/// `sample_index,input,async_out,sync_out,match`
pub fn comparison_csv(c: &Comparison) -> String {
    let mut s = String::from("sample_index,input,async_out,sync_out,match\n");
    for &(i, x, a, y) in &c.rows {
        let _ = writeln!(s, "{i},{x},{a},{y},{}", a == y);
    }
    s
}

/// `freq_hz,<column>...` over the frequency grid of the first column.
pub fn spectrum_csv(columns: &[(String, FrequencyResponse)]) -> String {
    let mut s = String::from("freq_hz");
    for (name, _) in columns {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    let Some((_, first)) = columns.first() else {
        return s;
    };
    for (i, (f, _)) in first.points.iter().enumerate() {
        let _ = write!(s, "{f:.6}");
        for (_, col) in columns {
            match col.points.get(i) {
                Some((_, db)) => {
                    let _ = write!(s, ",{db:.4}");
                }
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    s
}
