//! Norms, monitors and curve-geometry detectors.

use rayon::prelude::*;
use serde::Serialize;

use crate::curve_models::{curvature, CurveState, Vec2};
use crate::error::{Result, WaveError};
use crate::spectral::SpectralField;
use crate::timestep::Trajectory;

/// Largest exponent accepted by [`wiener_norm`] before `e^{ν|k|}` is
/// considered an overflow risk.
pub const WIENER_EXPONENT_BUDGET: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl NormSeries {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, v: f64) {
        self.times.push(t);
        self.values.push(v);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest relative increase between consecutive values.
    pub fn max_relative_increase(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| (w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `(Σ_k (1+κ²)^s |f̂(k)|² L)^{1/2}`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    let grid = f.grid();
    let sum: f64 = f
        .spectrum()
        .iter()
        .enumerate()
        .map(|(m, c)| {
            let kappa = grid.physical_wavenumber(grid.wavenumber(m));
            (1.0 + kappa * kappa).powf(s) * c.norm_sqr()
        })
        .sum();
    (sum * grid.length()).sqrt()
}

/// `Σ_k e^{ν|k|} |f̂(k)|` over all resolved modes.
pub fn wiener_norm(f: &SpectralField, nu: f64) -> Result<f64> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(WaveError::Parameter(format!("wiener_norm needs nu >= 0, got {nu}")));
    }
    let grid = f.grid();
    let k_max = (grid.n_nodes() / 2) as f64;
    if nu * k_max > WIENER_EXPONENT_BUDGET {
        return Err(WaveError::Numeric(format!(
            "wiener weight e^(nu*k_max) with nu*k_max = {} exceeds the exponent budget {WIENER_EXPONENT_BUDGET}",
            nu * k_max
        )));
    }
    Ok(f
        .spectrum()
        .iter()
        .enumerate()
        .map(|(m, c)| (nu * grid.wavenumber(m).unsigned_abs() as f64).exp() * c.norm())
        .sum())
}

/// Coefficients at or below this fraction of the largest one are treated as
/// roundoff by [`wiener_norm_resolved`].
pub const WIENER_NOISE_FLOOR: f64 = 1e-14;

/// [`wiener_norm`] restricted to coefficients above `rel_floor · max_k |f̂(k)|`.
///
/// Transform roundoff leaves every mode with a coefficient near `1e-17`
/// relative to the data, and `e^{ν|k|}` amplifies it past the true norm
/// once `ν·k_max` is a few tens.
pub fn wiener_norm_resolved(f: &SpectralField, nu: f64, rel_floor: f64) -> Result<f64> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(WaveError::Parameter(format!("wiener_norm needs nu >= 0, got {nu}")));
    }
    let grid = f.grid();
    let spec = f.spectrum();
    let floor = rel_floor * spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut sum = 0.0;
    for (m, c) in spec.iter().enumerate() {
        let a = c.norm();
        if a <= floor {
            continue;
        }
        let x = nu * grid.wavenumber(m).unsigned_abs() as f64;
        if x > WIENER_EXPONENT_BUDGET {
            return Err(WaveError::Numeric(format!(
                "wiener weight e^(nu*|k|) with nu*|k| = {x} exceeds the exponent budget {WIENER_EXPONENT_BUDGET}"
            )));
        }
        sum += x.exp() * a;
    }
    Ok(sum)
}

/// Shrinking analyticity strip `ν(t) = ν₀ - rate·t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StripMonitor {
    pub nu0: f64,
    pub shrink_rate: f64,
    pub horizon: f64,
}

impl StripMonitor {
    pub fn for_initial(f0: &SpectralField) -> Result<Self> {
        let a1 = wiener_norm_resolved(f0, 1.0, WIENER_NOISE_FLOOR)?;
        let shrink_rate = 4.0 * a1;
        let horizon = if shrink_rate > 0.0 { 1.0 / shrink_rate } else { f64::INFINITY };
        Ok(Self {
            nu0: 1.0,
            shrink_rate,
            horizon,
        })
    }

    pub fn nu(&self, t: f64) -> f64 {
        self.nu0 - self.shrink_rate * t
    }
}

/// `t ↦ ‖f(t)‖_{𝔸_{ν(t)}}` over the sampled times before the horizon,
/// ignoring coefficients below [`WIENER_NOISE_FLOOR`].
/// Trajectory states are the nodal values of `f` on the grid of `f0`.
pub fn strip_monitor(traj: &Trajectory, f0: &SpectralField) -> Result<NormSeries> {
    let mon = StripMonitor::for_initial(f0)?;
    let mut series = NormSeries::new("wiener-strip");
    for (&t, y) in traj.times.iter().zip(&traj.states) {
        if t >= mon.horizon {
            break;
        }
        let f = SpectralField::new(f0.grid(), y.clone())?;
        series.push(t, wiener_norm_resolved(&f, mon.nu(t), WIENER_NOISE_FLOOR)?);
    }
    Ok(series)
}

fn torus_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).abs() % period;
    d.min(period - d)
}

fn dist(p: Vec2, q: Vec2) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

/// `max_{j≠l} |α_j - α_l|_torus / |z_j - z_l|`; `+∞` when two nodes coincide.
pub fn arc_chord(c: &CurveState) -> f64 {
    let n = c.n_nodes();
    let grid = c.grid();
    let pts: Vec<Vec2> = (0..n).map(|j| c.point(j)).collect();
    let row = |j: usize| -> f64 {
        let mut best = 0.0f64;
        for l in (j + 1)..n {
            let chord = dist(pts[j], pts[l]);
            let arc = torus_distance(grid.node(j), grid.node(l), grid.length());
            if chord == 0.0 {
                return f64::INFINITY;
            }
            best = best.max(arc / chord);
        }
        best
    };
    if n >= 256 {
        (0..n).into_par_iter().map(row).reduce(|| 0.0, f64::max)
    } else {
        (0..n).map(row).fold(0.0, f64::max)
    }
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Closed-segment intersection test; touching counts.
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Whether two non-adjacent edges of the closed node polygon meet.
///
/// Edges are swept in order of their smallest x-coordinate, so only pairs
/// with overlapping x-extents are tested.
pub fn self_intersects(c: &CurveState) -> bool {
    let n = c.n_nodes();
    let pts: Vec<Vec2> = (0..n).map(|j| c.point(j)).collect();
    let edge = |i: usize| (pts[i], pts[(i + 1) % n]);
    let lo: Vec<f64> = (0..n).map(|i| pts[i][0].min(pts[(i + 1) % n][0])).collect();
    let hi: Vec<f64> = (0..n).map(|i| pts[i][0].max(pts[(i + 1) % n][0])).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lo[a].total_cmp(&lo[b]).then(a.cmp(&b)));
    let adjacent = |i: usize, j: usize| (i + 1) % n == j || (j + 1) % n == i;
    for (idx, &i) in order.iter().enumerate() {
        let (a, b) = edge(i);
        for &j in &order[idx + 1..] {
            if lo[j] > hi[i] {
                break;
            }
            if adjacent(i, j) {
                continue;
            }
            let (p, q) = edge(j);
            if segments_intersect(a, b, p, q) {
                return true;
            }
        }
    }
    false
}

/// `max_j |𝒦(α_j)|`.
pub fn max_curvature(c: &CurveState) -> Result<f64> {
    Ok(curvature(c)?.max_abs())
}

/// Least-squares fit of `log(value) = log C + rate·t` on `t ∈ [t_a, t_b]`;
/// returns `(rate, r²)`.
pub fn decay_fit(series: &NormSeries, window: (f64, f64)) -> Result<(f64, f64)> {
    let (ta, tb) = window;
    let pts: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(t, _)| **t >= ta && **t <= tb)
        .map(|(&t, &v)| (t, v))
        .collect();
    if pts.len() < 2 {
        return Err(WaveError::Fit(format!(
            "need at least two samples in [{ta}, {tb}], found {}",
            pts.len()
        )));
    }
    if let Some(&(t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(WaveError::Fit(format!("nonpositive value {v} at t = {t}")));
    }
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let lm = pts.iter().map(|p| p.1.ln()).sum::<f64>() / m;
    let (mut stt, mut stl, mut sll) = (0.0, 0.0, 0.0);
    for &(t, v) in &pts {
        let (dt, dl) = (t - tm, v.ln() - lm);
        stt += dt * dt;
        stl += dt * dl;
        sll += dl * dl;
    }
    if stt == 0.0 {
        return Err(WaveError::Fit("window contains a single time".into()));
    }
    let rate = stl / stt;
    let r2 = if sll == 0.0 { 1.0 } else { (stl * stl) / (stt * sll) };
    Ok((rate, r2))
}
