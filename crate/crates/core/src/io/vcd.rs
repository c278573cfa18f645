//! Value-change dump output and a reader used for syntactic validation.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::{Arc, Mutex};

use super::IoError;
use crate::arch::FilterSim;
use crate::sim::{LogicLevel, NetId, ProbeId, SimError, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcdVar {
    pub id: String,
    pub name: String,
    /// 1 for control bits.
    pub width: u32,
}

/// Transitions of a fixed set of nets, in applied order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VcdTrace {
    pub scope: String,
    pub vars: Vec<VcdVar>,
    pub initial: Vec<Value>,
    /// `(time_ps, var index, value)`
    pub changes: Vec<(u64, usize, Value)>,
}

fn id_code(mut i: usize) -> String {
    const FIRST: u8 = b'!';
    const SPAN: usize = (b'~' - b'!' + 1) as usize;
    let mut s = String::new();
    loop {
        s.push((FIRST + (i % SPAN) as u8) as char);
        i /= SPAN;
        if i == 0 {
            break;
        }
        i -= 1;
    }
    s
}

impl VcdTrace {
    /// Declares `nets` of the simulation and snapshots their current values.
    pub fn new(scope: &str, sim: &FilterSim, nets: &[NetId]) -> Self {
        let circuit = sim.kernel.circuit();
        let vars = nets
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let info = circuit.net(n).expect("net exists");
                VcdVar {
                    id: id_code(i),
                    name: info.name.clone(),
                    width: info.width.max(1),
                }
            })
            .collect();
        VcdTrace {
            scope: scope.to_string(),
            vars,
            initial: nets.iter().map(|&n| sim.kernel.value(n)).collect(),
            changes: Vec::new(),
        }
    }

    /// Records every transition of `nets` into a shared trace.
    pub fn attach(
        scope: &str,
        sim: &mut FilterSim,
        nets: &[NetId],
    ) -> Result<(Arc<Mutex<VcdTrace>>, Vec<ProbeId>), SimError> {
        let trace = Arc::new(Mutex::new(VcdTrace::new(scope, sim, nets)));
        let mut ids = Vec::with_capacity(nets.len());
        for (i, &n) in nets.iter().enumerate() {
            let t = Arc::clone(&trace);
            ids.push(sim.kernel.attach_probe(n, move |tr, _| {
                t.lock()
                    .expect("trace poisoned")
                    .changes
                    .push((tr.time.0, i, tr.to));
            })?);
        }
        Ok((trace, ids))
    }
}

fn value_text(v: Value, width: u32, id: &str) -> String {
    match v {
        Value::Bit(LogicLevel::Low) => format!("0{id}"),
        Value::Bit(LogicLevel::High) => format!("1{id}"),
        Value::Bit(LogicLevel::Unknown) => format!("x{id}"),
        Value::Word(w) => {
            let mask = if width >= 64 { u64::MAX } else { (1u64 << width) - 1 };
            format!("b{:b} {id}", (w as u64) & mask)
        }
    }
}

pub fn render_vcd(trace: &VcdTrace) -> String {
    let mut s = String::new();
    s.push_str("$version asyncfir $end\n$timescale 1ps $end\n");
    let _ = writeln!(s, "$scope module {} $end", trace.scope);
    for v in &trace.vars {
        let _ = writeln!(s, "$var wire {} {} {} $end", v.width, v.id, v.name);
    }
    s.push_str("$upscope $end\n$enddefinitions $end\n#0\n$dumpvars\n");
    for (v, &val) in trace.vars.iter().zip(&trace.initial) {
        let _ = writeln!(s, "{}", value_text(val, v.width, &v.id));
    }
    s.push_str("$end\n");
    let mut last = 0;
    for &(t, i, val) in &trace.changes {
        if t != last {
            let _ = writeln!(s, "#{t}");
            last = t;
        }
        let v = &trace.vars[i];
        let _ = writeln!(s, "{}", value_text(val, v.width, &v.id));
    }
    s
}

pub fn write_vcd(trace: &VcdTrace, path: &Path) -> Result<(), IoError> {
    if trace.vars.is_empty() {
        return Err(IoError::Config("VCD trace declares no variables".into()));
    }
    std::fs::write(path, render_vcd(trace))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcdDocument {
    pub timescale: String,
    pub vars: Vec<VcdVar>,
    /// `(time, id, value text)`, including the `$dumpvars` block at its
    /// timestamp.
    pub changes: Vec<(u64, String, String)>,
}

/// Parses the subset of VCD this crate writes and checks it: declared
/// identifiers, nondecreasing timestamps, value widths.
pub fn parse_vcd(text: &str) -> Result<VcdDocument, IoError> {
    let err = |line: usize, message: String| IoError::Vcd { line, message };
    let mut doc = VcdDocument {
        timescale: String::new(),
        vars: Vec::new(),
        changes: Vec::new(),
    };
    let mut in_defs = true;
    let mut time: Option<u64> = None;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    while let Some((ln, l)) = lines.next() {
        if l.is_empty() {
            continue;
        }
        if in_defs {
            let mut tok: Vec<&str> = l.split_whitespace().collect();
            // Multi-line sections are joined until `$end`.
            while tok.last() != Some(&"$end") {
                let (_, more) = lines
                    .next()
                    .ok_or_else(|| err(ln, "unterminated section".into()))?;
                tok.extend(more.split_whitespace());
            }
            match tok[0] {
                "$timescale" => doc.timescale = tok[1..tok.len() - 1].join(""),
                "$var" => {
                    if tok.len() != 6 {
                        return Err(err(ln, "malformed $var".into()));
                    }
                    let width: u32 = tok[2]
                        .parse()
                        .map_err(|_| err(ln, format!("bad width `{}`", tok[2])))?;
                    if doc.vars.iter().any(|v| v.id == tok[3]) {
                        return Err(err(ln, format!("duplicate id `{}`", tok[3])));
                    }
                    doc.vars.push(VcdVar {
                        id: tok[3].to_string(),
                        name: tok[4].to_string(),
                        width,
                    });
                }
                "$enddefinitions" => in_defs = false,
                "$version" | "$scope" | "$upscope" | "$date" | "$comment" => {}
                other => return Err(err(ln, format!("unknown section `{other}`"))),
            }
            continue;
        }
        if let Some(t) = l.strip_prefix('#') {
            let t: u64 = t.parse().map_err(|_| err(ln, format!("bad time `{l}`")))?;
            if time.is_some_and(|prev| t < prev) {
                return Err(err(ln, "time went backwards".into()));
            }
            time = Some(t);
            continue;
        }
        if l == "$dumpvars" || l == "$end" {
            continue;
        }
        let t = time.ok_or_else(|| err(ln, "value change before first timestamp".into()))?;
        let (value, id) = if let Some(rest) = l.strip_prefix('b') {
            let (bits, id) = rest
                .split_once(' ')
                .ok_or_else(|| err(ln, "vector change without id".into()))?;
            if bits.is_empty() || !bits.chars().all(|c| matches!(c, '0' | '1' | 'x' | 'z')) {
                return Err(err(ln, format!("bad vector `{bits}`")));
            }
            (format!("b{bits}"), id.trim())
        } else {
            let (v, id) = l.split_at(1);
            if !matches!(v, "0" | "1" | "x" | "z") {
                return Err(err(ln, format!("bad scalar `{l}`")));
            }
            (v.to_string(), id)
        };
        let var = doc
            .vars
            .iter()
            .find(|v| v.id == id)
            .ok_or_else(|| err(ln, format!("undeclared id `{id}`")))?;
        let scalar = !value.starts_with('b');
        if scalar != (var.width == 1) || (!scalar && value.len() - 1 > var.width as usize) {
            return Err(err(ln, format!("value `{value}` does not fit `{}`", var.name)));
        }
        doc.changes.push((t, id.to_string(), value));
    }
    if in_defs {
        return Err(err(0, "missing $enddefinitions".into()));
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_codes_are_unique() {
        let ids: std::collections::HashSet<String> = (0..10_000).map(id_code).collect();
        assert_eq!(ids.len(), 10_000);
        assert_eq!(id_code(0), "!");
    }

    #[test]
    fn two_transitions_round_trip() {
        let trace = VcdTrace {
            scope: "top".into(),
            vars: vec![
                VcdVar { id: "!".into(), name: "req".into(), width: 1 },
                VcdVar { id: "\"".into(), name: "d".into(), width: 4 },
            ],
            initial: vec![Value::LOW, Value::Word(-1)],
            changes: vec![(5, 0, Value::HIGH), (9, 0, Value::LOW)],
        };
        let text = render_vcd(&trace);
        let doc = parse_vcd(&text).unwrap();
        assert_eq!(doc.timescale, "1ps");
        assert_eq!(doc.vars.len(), 2);
        let after_dump: Vec<_> = doc.changes.iter().filter(|c| c.0 > 0).collect();
        assert_eq!(after_dump.len(), 2);
        assert!(text.contains("b1111 \"\n"));
    }

    #[test]
    fn reader_rejects_garbage() {
        let base = "$timescale 1ps $end\n$var wire 1 ! a $end\n$enddefinitions $end\n";
        assert!(parse_vcd(&format!("{base}#0\n1!\n")).is_ok());
        assert!(parse_vcd(&format!("{base}#5\n1!\n#4\n0!\n")).is_err());
        assert!(parse_vcd(&format!("{base}#0\n1?\n")).is_err());
        assert!(parse_vcd(&format!("{base}1!\n")).is_err());
        assert!(parse_vcd(&format!("{base}#0\nb10 !\n")).is_err());
        assert!(parse_vcd("$var wire 1 ! a $end\n").is_err());
    }
}
