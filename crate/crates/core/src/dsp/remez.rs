//! Parks-McClellan design of odd-length, even-symmetric (type I) FIR filters.
//!
//! The amplitude response of a type I filter with `2L + 1` taps is a cosine
//! polynomial of degree `L`. The Remez exchange iterates on a set of `L + 2`
//! extremal frequencies: it solves for the polynomial that equioscillates on
//! that set (barycentric form in `x = cos(2 pi f)`), then moves the set to
//! the local maxima of the weighted error on a dense grid.

use std::f64::consts::PI;

use super::{response_at, Coefficients, DspError, FilterSpec};

/// A band with constant desired amplitude and weight. Frequencies are
/// normalized to the sample rate, within `[0, 0.5]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lower: f64,
    pub upper: f64,
    pub desired: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemezOptions {
    /// Grid points per extremal interval.
    pub grid_density: usize,
    /// Relative spread of the extremal errors at which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for RemezOptions {
    fn default() -> Self {
        RemezOptions {
            grid_density: 16,
            tolerance: 1e-6,
            max_iterations: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquirippleDesign {
    pub coefficients: Coefficients,
    /// Weighted equiripple deviation of the final iterate.
    pub delta: f64,
    /// Final extremal set, normalized frequency.
    pub extremal_freqs: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Measured on a dense grid from the returned taps; zero when no
    /// passband/stopband was specified.
    pub passband_ripple_db: f64,
    pub stopband_atten_db: f64,
}

struct Grid {
    freq: Vec<f64>,
    desired: Vec<f64>,
    weight: Vec<f64>,
    /// Band index of each grid point.
    band: Vec<usize>,
}

fn build_grid(bands: &[Band], r: usize, density: usize) -> Grid {
    let spacing = 0.5 / (density * r) as f64;
    let mut g = Grid {
        freq: Vec::new(),
        desired: Vec::new(),
        weight: Vec::new(),
        band: Vec::new(),
    };
    for (bi, b) in bands.iter().enumerate() {
        let n = (((b.upper - b.lower) / spacing).round() as usize).max(1);
        for k in 0..=n {
            let f = b.lower + (b.upper - b.lower) * k as f64 / n as f64;
            g.freq.push(f);
            g.desired.push(b.desired);
            g.weight.push(b.weight);
            g.band.push(bi);
        }
    }
    g
}

/// Barycentric weights `1 / prod_{i != j} (x_j - x_i)`.
fn bary_weights(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let mut p = 1.0;
            for (i, &xi) in x.iter().enumerate() {
                if i != j {
                    // The factor 2 keeps the products near unity for x in [-1, 1].
                    p *= 2.0 * (x[j] - xi);
                }
            }
            1.0 / p
        })
        .collect()
}

struct Interpolant {
    x: Vec<f64>,
    w: Vec<f64>,
    c: Vec<f64>,
}

impl Interpolant {
    fn eval(&self, f: f64) -> f64 {
        let x = (2.0 * PI * f).cos();
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..self.x.len() {
            let d = x - self.x[j];
            if d.abs() < 1e-15 {
                return self.c[j];
            }
            let t = self.w[j] / d;
            num += t * self.c[j];
            den += t;
        }
        num / den
    }
}

/// Equioscillating solution on the current extremal set.
fn solve(grid: &Grid, ext: &[usize]) -> (f64, Interpolant) {
    let x: Vec<f64> = ext.iter().map(|&i| (2.0 * PI * grid.freq[i]).cos()).collect();
    let ad = bary_weights(&x);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut sign = 1.0;
    for (j, &i) in ext.iter().enumerate() {
        num += ad[j] * grid.desired[i];
        den += sign * ad[j] / grid.weight[i];
        sign = -sign;
    }
    let delta = num / den;
    let r = ext.len() - 1;
    let xs = x[..r].to_vec();
    let w = bary_weights(&xs);
    let mut sign = 1.0;
    let c = ext[..r]
        .iter()
        .map(|&i| {
            let v = grid.desired[i] - sign * delta / grid.weight[i];
            sign = -sign;
            v
        })
        .collect();
    (delta, Interpolant { x: xs, w, c })
}

/// Local extrema of the weighted error, alternation-filtered and trimmed to
/// `want` points. Returns `None` when fewer than `want` alternating extrema
/// exist.
fn select_extrema(grid: &Grid, err: &[f64], delta: f64, want: usize) -> Option<Vec<usize>> {
    let n = err.len();
    // Roundoff in the interpolant scales with the largest error, which can
    // dwarf delta on early iterations.
    let peak = err.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let floor = delta.abs() * (1.0 - 1e-9) - peak * 1e-9;
    let mut cand: Vec<usize> = Vec::new();
    for k in 0..n {
        let e = err[k];
        if e.abs() < floor || e == 0.0 {
            continue;
        }
        // Band edges are always candidates; interior points must be local
        // extrema of the signed error, so a lobe next to a sign change still
        // counts.
        let same_band = |j: usize| grid.band[j] == grid.band[k];
        let left_edge = k == 0 || !same_band(k - 1);
        let right_edge = k + 1 == n || !same_band(k + 1);
        let s = e.signum();
        let left_ok = left_edge || s * e >= s * err[k - 1];
        let right_ok = right_edge || s * e >= s * err[k + 1];
        if left_edge || right_edge || (left_ok && right_ok) {
            cand.push(k);
        }
    }
    let merge = |c: Vec<usize>| -> Vec<usize> {
        let mut out: Vec<usize> = Vec::with_capacity(c.len());
        for k in c {
            match out.last() {
                Some(&last) if err[last].signum() == err[k].signum() => {
                    if err[k].abs() > err[last].abs() {
                        *out.last_mut().unwrap() = k;
                    }
                }
                _ => out.push(k),
            }
        }
        out
    };
    let mut set = merge(cand);
    while set.len() > want {
        if set.len() == want + 1 {
            let first = err[set[0]].abs();
            let last = err[*set.last().unwrap()].abs();
            if first < last {
                set.remove(0);
            } else {
                set.pop();
            }
        } else {
            let (pos, _) = set
                .iter()
                .enumerate()
                .min_by(|a, b| err[*a.1].abs().total_cmp(&err[*b.1].abs()))
                .unwrap();
            set.remove(pos);
            set = merge(set);
        }
    }
    (set.len() == want).then_some(set)
}

/// Runs the Remez exchange for a type I filter with `num_taps` (odd) taps.
pub fn remez(
    num_taps: usize,
    bands: &[Band],
    opts: &RemezOptions,
) -> Result<EquirippleDesign, DspError> {
    if num_taps < 3 || num_taps.is_multiple_of(2) {
        return Err(DspError::InvalidSpec(format!(
            "type I design needs an odd tap count >= 3, got {num_taps}"
        )));
    }
    if bands.is_empty()
        || bands
            .iter()
            .any(|b| !(0.0..=0.5).contains(&b.lower) || b.upper > 0.5 || b.lower >= b.upper)
        || bands.windows(2).any(|w| w[0].upper > w[1].lower)
        || bands.iter().any(|b| b.weight <= 0.0)
    {
        return Err(DspError::InvalidSpec(
            "bands must be ordered, disjoint, within [0, 0.5] and positively weighted".into(),
        ));
    }
    let half = (num_taps - 1) / 2;
    let r = half + 1;
    let grid = build_grid(bands, r, opts.grid_density.max(1));
    let ng = grid.freq.len();
    if ng < r + 1 {
        return Err(DspError::InvalidSpec("frequency grid too coarse".into()));
    }
    let mut ext: Vec<usize> = (0..=r).map(|j| j * (ng - 1) / r).collect();
    let mut iterations = 0;
    let mut converged = false;
    let (mut delta, mut interp) = solve(&grid, &ext);
    let mut err = vec![0.0; ng];
    while iterations < opts.max_iterations {
        iterations += 1;
        for (k, e) in err.iter_mut().enumerate() {
            *e = grid.weight[k] * (grid.desired[k] - interp.eval(grid.freq[k]));
        }
        let peak = err.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        if peak < 1e-13 {
            converged = true;
            break;
        }
        let Some(next) = select_extrema(&grid, &err, delta, r + 1) else {
            // No complete alternating set above |delta|: the current set is
            // already optimal up to grid resolution.
            converged = (peak - delta.abs()) / peak < opts.tolerance;
            break;
        };
        let (lo, hi) = next.iter().fold((f64::MAX, 0.0f64), |(lo, hi), &k| {
            (lo.min(err[k].abs()), hi.max(err[k].abs()))
        });
        ext = next;
        (delta, interp) = solve(&grid, &ext);
        if (hi - lo) / hi < opts.tolerance {
            converged = true;
            break;
        }
    }

    // Sample the amplitude response at 2L+1 uniform points and invert the
    // cosine series.
    let n = num_taps;
    let amps: Vec<f64> = (0..=half).map(|m| interp.eval(m as f64 / n as f64)).collect();
    let mut taps = vec![0.0; n];
    for k in 0..=half {
        let mut s = amps[0];
        for (m, a) in amps.iter().enumerate().skip(1) {
            s += 2.0 * a * (2.0 * PI * (m * k) as f64 / n as f64).cos();
        }
        let v = s / n as f64;
        taps[half - k] = v;
        taps[half + k] = v;
    }

    let mut design = EquirippleDesign {
        coefficients: Coefficients::new(taps),
        delta: delta.abs(),
        extremal_freqs: ext.iter().map(|&k| grid.freq[k]).collect(),
        iterations,
        converged,
        passband_ripple_db: 0.0,
        stopband_atten_db: 0.0,
    };
    measure(&mut design, bands, opts.grid_density.max(1) * r);
    if design.converged {
        Ok(design)
    } else {
        Err(DspError::NoConvergence {
            best: Box::new(design),
        })
    }
}

/// Fills the achieved ripple and attenuation from the taps themselves.
fn measure(d: &mut EquirippleDesign, bands: &[Band], points_per_half: usize) {
    let taps = &d.coefficients.taps;
    let mut pass_dev: Option<f64> = None;
    let mut stop_peak: Option<f64> = None;
    for b in bands {
        let n = ((b.upper - b.lower) * 2.0 * points_per_half as f64 * 16.0).ceil() as usize + 1;
        for k in 0..=n {
            let f = b.lower + (b.upper - b.lower) * k as f64 / n as f64;
            let mag = response_at(taps, f, 1.0).norm();
            if b.desired == 0.0 {
                stop_peak = Some(stop_peak.unwrap_or(0.0).max(mag));
            } else {
                let dev = (mag - b.desired).abs() / b.desired;
                pass_dev = Some(pass_dev.unwrap_or(0.0).max(dev));
            }
        }
    }
    if let Some(dev) = pass_dev {
        d.passband_ripple_db = 20.0 * ((1.0 + dev) / (1.0 - dev).max(1e-300)).log10();
    }
    if let Some(peak) = stop_peak {
        d.stopband_atten_db = -20.0 * peak.max(1e-15).log10();
    }
}

/// Designs the low-pass filter described by `spec`. The order is honored
/// as given; the achieved attenuation is reported rather than enforced.
pub fn design_equiripple(spec: &FilterSpec) -> Result<EquirippleDesign, DspError> {
    spec.validate()?;
    let weight = spec.passband_deviation() / spec.stopband_deviation();
    let fs = spec.sample_rate;
    let bands = [
        Band {
            lower: 0.0,
            upper: spec.passband_edge / fs,
            desired: 1.0,
            weight: 1.0,
        },
        Band {
            lower: spec.stopband_edge / fs,
            upper: 0.5,
            desired: 0.0,
            weight,
        },
    ];
    remez(spec.order + 1, &bands, &RemezOptions::default())
}
