//! Invariant suite behind `wavemodels check`.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curve_models::{br_velocity, kh_rhs, laurent_coeffs, refined_kh_rhs, CurveState, PlanarField};
use crate::diagnostics::{
    arc_chord, decay_fit, self_intersects, sobolev_norm, wiener_norm_resolved, NormSeries, StripMonitor,
    WIENER_NOISE_FLOOR,
};
use crate::error::{Result, WaveError};
use crate::graph_models::{linear_mode_solution, unidirectional_linear_symbol, ModelFamily, ModelParams};
use crate::model::{Model, ModelId};
use crate::spectral::{PeriodicGrid, SpectralField};
use crate::timestep::{integrate, integrate_observed, step_dopri5, step_rk4, IntegratorConfig, Progress, StopReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckLevel {
    Fast,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: String,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub level: CheckLevel,
    pub passed: bool,
    pub entries: Vec<CheckEntry>,
}

impl CheckReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn entry(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// Operators under test; swapping one in lets a deliberately broken build be
/// simulated.
#[derive(Clone, Copy)]
pub struct CheckOps {
    pub hilbert: fn(&SpectralField) -> SpectralField,
}

impl Default for CheckOps {
    fn default() -> Self {
        Self {
            hilbert: |f| f.hilbert(),
        }
    }
}

fn rel_max(a: &SpectralField, b: &SpectralField) -> f64 {
    (a - b).max_abs() / b.max_abs().max(f64::MIN_POSITIVE)
}

/// Random real field with modes `1..=k_max`, mean zero.
pub fn random_band_limited(grid: &PeriodicGrid, k_max: usize, rng: &mut impl Rng) -> SpectralField {
    let n = grid.n_nodes();
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..=k_max as i64 {
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / (k as f64);
        spec[grid.slot(k).unwrap()] = c;
        spec[grid.slot(-k).unwrap()] = c.conj();
    }
    SpectralField::from_spectrum(grid, &spec).expect("finite spectrum")
}

/// Worst relative residual of `2H(fHf) = (Hf)² - f²` over random fields.
pub fn tricomi_residual(ops: &CheckOps, n: usize, fields: usize, seed: u64) -> Result<f64> {
    let grid = PeriodicGrid::standard(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = ops.hilbert;
    let mut worst: f64 = 0.0;
    for _ in 0..fields {
        let f = random_band_limited(&grid, n / 8, &mut rng).remove_mean();
        let hf = h(&f);
        let lhs = h(&f.dealiased_mul(&hf)).scale(2.0);
        let rhs = &hf.dealiased_mul(&hf) - &f.dealiased_mul(&f);
        worst = worst.max(rel_max(&lhs, &rhs));
    }
    Ok(worst)
}

fn entry(name: &str, measured: f64, passed: bool, tolerance: impl Into<String>, started: Instant) -> CheckEntry {
    CheckEntry {
        name: name.to_string(),
        passed,
        measured,
        tolerance: tolerance.into(),
        seconds: started.elapsed().as_secs_f64(),
        detail: None,
    }
}

fn failed(name: &str, e: WaveError, started: Instant) -> CheckEntry {
    CheckEntry {
        detail: Some(e.to_string()),
        ..entry(name, f64::NAN, false, "-", started)
    }
}

fn at_most(name: &str, tol: f64, f: impl FnOnce() -> Result<f64>) -> CheckEntry {
    let started = Instant::now();
    match f() {
        Ok(v) => entry(name, v, v <= tol, format!("<= {tol:e}"), started),
        Err(e) => failed(name, e, started),
    }
}

fn within(name: &str, lo: f64, hi: f64, f: impl FnOnce() -> Result<f64>) -> CheckEntry {
    let started = Instant::now();
    match f() {
        Ok(v) => entry(name, v, (lo..=hi).contains(&v), format!("in [{lo}, {hi}]"), started),
        Err(e) => failed(name, e, started),
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

fn decay(_t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
    dy[0] = -y[0];
    Ok(())
}

/// Observed order of fixed-step Dormand–Prince and RK4 on `y' = -y` over `[0, 1]`.
pub fn integrator_orders() -> Result<(f64, f64)> {
    let dts = [0.5, 0.25, 0.125, 0.0625];
    let exact = (-1f64).exp();
    let mut e5 = Vec::new();
    let mut e4 = Vec::new();
    for &dt in &dts {
        let steps = (1.0 / dt) as usize;
        let (mut y5, mut y4) = (vec![1.0], vec![1.0]);
        for i in 0..steps {
            let t = i as f64 * dt;
            y5 = step_dopri5(decay, &y5, t, dt)?.0;
            y4 = step_rk4(decay, &y4, t, dt)?;
        }
        e5.push((y5[0] - exact).abs());
        e4.push((y4[0] - exact).abs());
    }
    Ok((loglog_slope(&dts, &e5), loglog_slope(&dts, &e4)))
}

/// Relative error of a single-mode linear run against the exact mode solution.
pub fn linear_dispersion_error(family: ModelFamily, k: i64, p: &ModelParams, n: usize) -> Result<f64> {
    let id = match family {
        ModelFamily::Viscous => ModelId::ViscousBi,
        ModelFamily::Odd => ModelId::OddBi,
        ModelFamily::Inviscid => ModelId::InviscidBi,
        ModelFamily::Internal => ModelId::InternalBi,
    };
    let grid = PeriodicGrid::standard(n)?;
    let m = Model::new(id, *p, grid.clone())?;
    let kf = k as f64;
    // the internal-wave nonlinearity carries no ε: shrink the data instead,
    // with the absolute tolerance scaled along (same run in units of `amp`)
    let amp = if family == ModelFamily::Internal { 1e-9 } else { 1.0 };
    let cfg = IntegratorConfig {
        abs_tol: IntegratorConfig::default().abs_tol * amp,
        ..IntegratorConfig::default()
    };
    let h0 = grid.sample(|x| amp * (kf * x).cos());
    let y0 = m.join(&[h0, grid.zeros()])?;
    let tr = integrate(|t, y, dy| m.rhs(t, y, dy), &y0, 0.0, 1.0, &cfg, &[], 1.0)?;
    let (_, y) = tr.last().expect("final state");
    // cos(kx) = (e^{ikx} + e^{-ikx})/2 with real data on both modes
    let (hk, _) = linear_mode_solution(family, k, p, 1.0, 1.0, 0.0)?;
    let (hm, _) = linear_mode_solution(family, -k, p, 1.0, 1.0, 0.0)?;
    let exact = grid.sample(|x| {
        let e = Complex64::from_polar(1.0, kf * x);
        (0.5 * (hk * e + hm * e.conj())).re
    });
    let h = SpectralField::new(&grid, y[..n].to_vec())?.scale(1.0 / amp);
    Ok(rel_max(&h, &exact))
}

/// Measured exponential growth rate of the Rayleigh–Taylor mode of
/// internal-bi (pure growing mode initial data).
pub fn rayleigh_taylor_rate(atwood: f64, k: i64, n: usize) -> Result<f64> {
    let grid = PeriodicGrid::standard(n)?;
    let p = ModelParams {
        epsilon: 0.0,
        atwood,
        beta: 0.0,
        ..ModelParams::default()
    };
    let m = Model::new(ModelId::InternalBi, p, grid.clone())?;
    let kf = k as f64;
    let sigma = (atwood * kf.abs()).sqrt();
    let amp = 1e-9;
    let cfg = IntegratorConfig {
        abs_tol: IntegratorConfig::default().abs_tol * amp,
        ..IntegratorConfig::default()
    };
    let y0 = m.join(&[
        grid.sample(|x| amp * (kf * x).cos()),
        grid.sample(|x| sigma * amp * (kf * x).cos()),
    ])?;
    let tr = integrate(|t, y, dy| m.rhs(t, y, dy), &y0, 0.0, 1.0, &cfg, &[], 1.0)?;
    let (_, y) = tr.last().expect("final state");
    let h = SpectralField::new(&grid, y[..n].to_vec())?;
    let ratio = h.coefficient(k).re / (0.5 * amp);
    Ok(ratio.ln())
}

fn ellipse(grid: &PeriodicGrid, a: f64, b: f64) -> CurveState {
    CurveState::new(grid.sample(|s| a * s.cos()), grid.sample(|s| b * s.sin()), grid.zeros())
        .expect("ellipse is regular")
}

fn normal_component(c: &CurveState, v: &PlanarField) -> SpectralField {
    // unit normal n = -∂z^⊥/|∂z|
    let dz = c.position().deriv(1);
    let speed = dz.dot(&dz).map(f64::sqrt);
    let nrm = dz.perp().times(&speed.map(|s| -1.0 / s));
    v.dot(&nrm)
}

/// `max|n·(BR - kh)| / max|n·kh|` on an ellipse for `ϖ = cos(mα)`, one
/// value per mode number.
pub fn br_kh_normal_gap(modes: &[u32], n: usize) -> Result<Vec<f64>> {
    let grid = PeriodicGrid::standard(n)?;
    let c = ellipse(&grid, 1.0, 0.6);
    modes
        .iter()
        .map(|&m| {
            let w = grid.sample(|a| (m as f64 * a).cos());
            let br = normal_component(&c, &br_velocity(&c, &w)?);
            let kh = normal_component(&c, &kh_rhs(&c, &w)?);
            Ok((&br - &kh).max_abs() / kh.max_abs())
        })
        .collect()
}

/// Largest change of the Birkhoff–Rott velocity at shared nodes when `n`
/// doubles (ellipse, smooth sheet strength).
pub fn br_refinement_change(n: usize) -> Result<f64> {
    let vel = |n: usize| -> Result<PlanarField> {
        let g = PeriodicGrid::standard(n)?;
        let c = ellipse(&g, 1.0, 0.6);
        br_velocity(&c, &g.sample(|a| 1.0 + 0.5 * a.cos() + 0.25 * (2.0 * a).sin()))
    };
    let (coarse, fine) = (vel(n)?, vel(2 * n)?);
    let mut d: f64 = 0.0;
    for j in 0..n {
        let (a, b) = (coarse.at(j), fine.at(2 * j));
        d = d.max((a[0] - b[0]).abs()).max((a[1] - b[1]).abs());
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayMonitor {
    /// Largest relative increase of ‖f‖_{H¹} between accepted steps.
    pub max_step_increase: f64,
    pub fitted_rate: f64,
    pub r_squared: f64,
    pub linear_rate: f64,
}

/// Viscous-uni H¹ decay monitor (ε = α₁ = α₂ = 1).
pub fn theorem1_monitor(beta: f64, delta: f64, n: usize, t_max: f64) -> Result<DecayMonitor> {
    let grid = PeriodicGrid::standard(n)?;
    let p = ModelParams {
        epsilon: 1.0,
        alpha1: 1.0,
        alpha2: 1.0,
        beta,
        ..ModelParams::default()
    };
    let m = Model::new(ModelId::ViscousUni, p, grid.clone())?;
    let y0 = grid.sample(|x| delta * x.sin()).into_values();
    let mut last = sobolev_norm(&SpectralField::new(&grid, y0.clone())?, 1.0);
    let mut worst = f64::NEG_INFINITY;
    let mut series = NormSeries::new("h1");
    series.push(0.0, last);
    let out = integrate_observed(
        |t, y, dy| m.rhs(t, y, dy),
        &y0,
        0.0,
        t_max,
        &IntegratorConfig::monitor(),
        &[],
        t_max,
        |pr| {
            if let Progress::Step { t, y, .. } = pr {
                let v = sobolev_norm(&SpectralField::new(&grid, y.to_vec()).expect("finite state"), 1.0);
                worst = worst.max((v - last) / last);
                last = v;
                series.push(t, v);
            }
        },
    )?;
    if out.stop_reason != StopReason::ReachedTmax {
        return Err(WaveError::Numeric(format!("theorem 1 run stopped: {}", out.stop_reason)));
    }
    let (rate, r2) = decay_fit(&series, (0.0, t_max))?;
    Ok(DecayMonitor {
        max_step_increase: worst,
        fitted_rate: rate,
        r_squared: r2,
        linear_rate: unidirectional_linear_symbol(ModelFamily::Viscous, 1.0, &p).re,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StripReport {
    pub horizon: f64,
    pub t_end: f64,
    pub max_step_increase: f64,
    pub spectral_tail: f64,
}

/// Internal-uni analytic-strip monitor (ε = A = 1, β = 0), up to
/// `fraction · horizon`.
pub fn theorem2_monitor(delta: f64, n: usize, fraction: f64) -> Result<StripReport> {
    let grid = PeriodicGrid::standard(n)?;
    let p = ModelParams {
        epsilon: 1.0,
        atwood: 1.0,
        beta: 0.0,
        ..ModelParams::default()
    };
    let m = Model::new(ModelId::InternalUni, p, grid.clone())?;
    let f0 = grid.sample(|x| delta * x.sin());
    let mon = StripMonitor::for_initial(&f0)?;
    let t_end = fraction * mon.horizon;
    let mut last = wiener_norm_resolved(&f0, mon.nu(0.0), WIENER_NOISE_FLOOR)?;
    let mut worst = f64::NEG_INFINITY;
    let mut tail: f64 = 0.0;
    let mut err = None;
    let cfg = IntegratorConfig::monitor();
    let out = integrate_observed(|t, y, dy| m.rhs(t, y, dy), f0.values(), 0.0, t_end, &cfg, &[], t_end, |pr| {
        if let Progress::Step { t, y, .. } = pr {
            let f = SpectralField::new(&grid, y.to_vec()).expect("finite state");
            match wiener_norm_resolved(&f, mon.nu(t), WIENER_NOISE_FLOOR) {
                Ok(v) => {
                    worst = worst.max((v - last) / last);
                    last = v;
                }
                Err(e) => err = Some(e),
            }
            tail = tail.max(f.coefficient(grid.dealias_cutoff()).norm());
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    if out.stop_reason != StopReason::ReachedTmax {
        return Err(WaveError::Numeric(format!("theorem 2 run stopped: {}", out.stop_reason)));
    }
    Ok(StripReport {
        horizon: mon.horizon,
        t_end,
        max_step_increase: worst,
        spectral_tail: tail,
    })
}

pub fn check(level: CheckLevel) -> CheckReport {
    check_with(level, &CheckOps::default())
}

pub fn check_with(level: CheckLevel, ops: &CheckOps) -> CheckReport {
    let h = ops.hilbert;
    let mut entries = Vec::new();

    entries.push(at_most("tricomi", 1e-10, || tricomi_residual(ops, 256, 100, 7)));
    entries.push(at_most("hilbert-involution", 1e-12, || {
        let g = PeriodicGrid::standard(256)?;
        let f = random_band_limited(&g, 100, &mut ChaCha8Rng::seed_from_u64(11));
        Ok(rel_max(&h(&h(&f)), &(-&f)))
    }));
    entries.push(at_most("lambda-equals-hilbert-derivative", 1e-12, || {
        let g = PeriodicGrid::standard(256)?;
        let f = random_band_limited(&g, 100, &mut ChaCha8Rng::seed_from_u64(12));
        Ok(rel_max(&h(&f.deriv(1)), &f.lambda()))
    }));
    entries.push(at_most("fourier-round-trip", 1e-14, || {
        let g = PeriodicGrid::standard(128)?;
        let f = g.sample(|x| (x.sin() * 2.0).exp());
        let back = SpectralField::from_spectrum(&g, f.spectrum())?;
        Ok(rel_max(&back, &f))
    }));
    entries.push(at_most("dealiased-product", 1e-13, || {
        let g = PeriodicGrid::standard(64)?;
        let a = g.sample(|x| (3.0 * x).cos());
        let b = g.sample(|x| (5.0 * x).sin());
        let exact = g.sample(|x| 0.5 * ((8.0 * x).sin() + (2.0 * x).sin()));
        Ok((&a.dealiased_mul(&b) - &exact).max_abs())
    }));

    let fam = [
        ("viscous", ModelFamily::Viscous, ModelParams { alpha1: 0.3, alpha2: 0.2, beta: 0.5, ..ModelParams::default() }),
        ("odd", ModelFamily::Odd, ModelParams { alpha: 0.4, beta: 0.5, ..ModelParams::default() }),
        ("inviscid", ModelFamily::Inviscid, ModelParams { beta: 0.5, ..ModelParams::default() }),
        ("internal", ModelFamily::Internal, ModelParams { atwood: -0.5, beta: 0.5, ..ModelParams::default() }),
    ];
    for (name, family, p) in fam {
        let p = ModelParams { epsilon: 0.0, ..p };
        entries.push(at_most(&format!("linear-dispersion-{name}"), 1e-6, || {
            let mut worst: f64 = 0.0;
            for k in 1..=3 {
                worst = worst.max(linear_dispersion_error(family, k, &p, 64)?);
            }
            Ok(worst)
        }));
    }
    entries.push(at_most("rayleigh-taylor-growth", 1e-4, || {
        let mut worst: f64 = 0.0;
        for k in 1..=3 {
            let r = rayleigh_taylor_rate(1.0, k, 64)?;
            worst = worst.max((r - (k as f64).sqrt()).abs() / (k as f64).sqrt());
        }
        Ok(worst)
    }));

    let orders = integrator_orders();
    {
        let started = Instant::now();
        entries.push(match &orders {
            Ok((o5, _)) => entry("order-dormand-prince", *o5, *o5 >= 4.8, ">= 4.8", started),
            Err(e) => failed("order-dormand-prince", e.clone(), started),
        });
    }
    entries.push(within("order-rk4", 3.8, 4.2, || orders.clone().map(|o| o.1)));

    entries.push(at_most("laurent-unit-circle", 1e-10, || {
        let g = PeriodicGrid::standard(64)?;
        let c = CurveState::circle(&g, 1.0);
        let lc = laurent_coeffs(&c)?;
        let z = c.position();
        let o0 = PlanarField {
            x: g.sample(|a| 0.5 * a.sin()),
            y: g.sample(|a| -0.5 * a.cos()),
        };
        Ok(lc.o_minus1.max_diff(&z.scale(-1.0))
            .max(lc.o_zero.max_diff(&o0))
            .max(lc.o_one.max_diff(&z.scale(1.0 / 12.0))))
    }));
    entries.push(at_most("refined-kh-even", 1e-12, || {
        let g = PeriodicGrid::standard(64)?;
        let c = ellipse(&g, 1.5, 1.0);
        let w = g.sample(|a| a.cos() + 0.3 * (2.0 * a).cos());
        Ok(refined_kh_rhs(&c, &w)?.max_diff(&kh_rhs(&c, &w)?))
    }));
    entries.push(at_most("refined-kh-sine", 1e-12, || {
        let g = PeriodicGrid::standard(64)?;
        let c = ellipse(&g, 1.5, 1.0);
        let w = g.sample(f64::sin);
        let corr = refined_kh_rhs(&c, &w)?.add(&kh_rhs(&c, &w)?.scale(-1.0));
        Ok(corr.max_diff(&laurent_coeffs(&c)?.o_one.scale(-1.0)))
    }));
    entries.push(at_most("br-uniform-circle", 1e-10, || {
        let g = PeriodicGrid::standard(128)?;
        let c = CurveState::circle(&g, 1.0);
        let cst = 0.8;
        let v = br_velocity(&c, &g.constant(cst))?;
        let z = c.position();
        let normal = v.dot(&z).max_abs();
        let tangent = v.dot(&z.deriv(1));
        Ok(normal.max((&tangent - &g.constant(cst / 2.0)).max_abs()))
    }));
    entries.push(at_most("arc-chord-circle", 1e-12, || {
        let c = CurveState::circle(&PeriodicGrid::standard(64)?, 1.0);
        Ok((arc_chord(&c) - std::f64::consts::FRAC_PI_2).abs())
    }));
    entries.push(at_most("self-intersection", 0.0, || {
        let g = PeriodicGrid::standard(128)?;
        let eight = CurveState::new(g.sample(f64::sin), g.sample(|a| 0.5 * (2.0 * a).sin()), g.zeros())?;
        let ok = !self_intersects(&CurveState::circle(&g, 1.0)) && self_intersects(&eight);
        Ok(if ok { 0.0 } else { 1.0 })
    }));

    if level == CheckLevel::Full {
        entries.push(at_most("br-refinement", 1e-8, || br_refinement_change(256)));
        {
            let started = Instant::now();
            entries.push(match br_kh_normal_gap(&[4, 8, 16, 32], 256) {
                Ok(g) => {
                    let mono = g.windows(2).all(|w| w[1] < w[0]);
                    CheckEntry {
                        detail: Some(format!("{g:?}")),
                        ..entry("br-kh-normal-convergence", g[g.len() - 1], mono, "strictly decreasing over m = 4, 8, 16, 32", started)
                    }
                }
                Err(e) => failed("br-kh-normal-convergence", e, started),
            });
        }
        for beta in [0.0, 1.0] {
            let started = Instant::now();
            let name = format!("theorem1-beta{beta}");
            entries.push(match theorem1_monitor(beta, 0.01, 128, 10.0) {
                Ok(r) => {
                    let rel = (r.fitted_rate - r.linear_rate).abs() / r.linear_rate.abs();
                    CheckEntry {
                        detail: Some(format!("{r:?}")),
                        ..entry(&name, r.max_step_increase, r.max_step_increase <= 1e-8 && rel <= 0.2, "step increase <= 1e-8 and rate within 20%", started)
                    }
                }
                Err(e) => failed(&name, e, started),
            });
        }
        {
            let started = Instant::now();
            entries.push(match theorem2_monitor(0.05, 128, 0.9) {
                Ok(r) => CheckEntry {
                    detail: Some(format!("{r:?}")),
                    ..entry("theorem2-strip", r.max_step_increase, r.max_step_increase <= 1e-6, "step increase <= 1e-6", started)
                },
                Err(e) => failed("theorem2-strip", e, started),
            });
        }
    }

    let passed = entries.iter().all(|e| e.passed);
    CheckReport { level, passed, entries }
}
