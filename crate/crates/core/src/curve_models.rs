//! Closed-curve interface dynamics.
//!
//! Conventions: `a^⊥ = (a₂, -a₁)`; the curve is parametrized by `α ∈ [-π, π)`
//! on a standard [`PeriodicGrid`]; a counterclockwise unit circle has
//! curvature `+1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, WaveError};
use crate::graph_models::ModelParams;
use crate::spectral::{PeriodicGrid, SpectralField};

pub type Vec2 = [f64; 2];

pub fn perp(v: Vec2) -> Vec2 {
    [v[1], -v[0]]
}

/// A pair of fields forming a planar vector at every node.
#[derive(Debug, Clone)]
pub struct PlanarField {
    pub x: SpectralField,
    pub y: SpectralField,
}

impl PlanarField {
    pub fn at(&self, j: usize) -> Vec2 {
        [self.x.values()[j], self.y.values()[j]]
    }

    pub fn perp(&self) -> PlanarField {
        PlanarField {
            x: self.y.clone(),
            y: -&self.x,
        }
    }

    pub fn scale(&self, c: f64) -> PlanarField {
        PlanarField {
            x: self.x.scale(c),
            y: self.y.scale(c),
        }
    }

    /// Componentwise `self * s` for a scalar field `s` (no dealiasing).
    pub fn times(&self, s: &SpectralField) -> PlanarField {
        PlanarField {
            x: self.x.pointwise(s),
            y: self.y.pointwise(s),
        }
    }

    pub fn dot(&self, other: &PlanarField) -> SpectralField {
        self.x.pointwise(&other.x) + self.y.pointwise(&other.y)
    }

    pub fn add(&self, other: &PlanarField) -> PlanarField {
        PlanarField {
            x: &self.x + &other.x,
            y: &self.y + &other.y,
        }
    }

    pub fn deriv(&self, m: u32) -> PlanarField {
        PlanarField {
            x: self.x.deriv(m),
            y: self.y.deriv(m),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.x.max_abs().max(self.y.max_abs())
    }

    pub fn max_diff(&self, other: &PlanarField) -> f64 {
        (&self.x - &other.x).max_abs().max((&self.y - &other.y).max_abs())
    }
}

/// Closed curve `z = (z₁, z₂)` carrying a vortex sheet of strength `ϖ`.
#[derive(Debug, Clone)]
pub struct CurveState {
    pub z1: SpectralField,
    pub z2: SpectralField,
    pub vorticity: SpectralField,
}

impl CurveState {
    pub fn new(z1: SpectralField, z2: SpectralField, vorticity: SpectralField) -> Result<Self> {
        if !(z1.same_grid(&z2) && z1.same_grid(&vorticity)) {
            return Err(WaveError::Usage("curve fields live on different grids".into()));
        }
        let c = Self { z1, z2, vorticity };
        c.check_tangent()?;
        Ok(c)
    }

    /// Circle of radius `r` centred at the origin, zero sheet strength.
    pub fn circle(grid: &PeriodicGrid, radius: f64) -> Self {
        Self {
            z1: grid.sample(|a| radius * a.cos()),
            z2: grid.sample(|a| radius * a.sin()),
            vorticity: grid.zeros(),
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.z1.grid()
    }

    pub fn n_nodes(&self) -> usize {
        self.z1.len()
    }

    pub fn point(&self, j: usize) -> Vec2 {
        [self.z1.values()[j], self.z2.values()[j]]
    }

    pub fn position(&self) -> PlanarField {
        PlanarField {
            x: self.z1.clone(),
            y: self.z2.clone(),
        }
    }

    pub fn with_vorticity(&self, vorticity: SpectralField) -> Self {
        Self {
            z1: self.z1.clone(),
            z2: self.z2.clone(),
            vorticity,
        }
    }

    fn check_tangent(&self) -> Result<()> {
        let dz = self.position().deriv(1);
        let scale = self.z1.max_abs().max(self.z2.max_abs()).max(1.0);
        let speed2 = dz.dot(&dz);
        if let Some(j) = speed2
            .values()
            .iter()
            .position(|&s| !(s.sqrt() > 1e-12 * scale))
        {
            return Err(WaveError::Geometry(format!(
                "degenerate tangent at node {j} (|∂z|² = {:e})",
                speed2.values()[j]
            )));
        }
        Ok(())
    }
}

/// Spectral derivatives of the curve up to third order.
struct Frame {
    dz: PlanarField,
    d2z: PlanarField,
    speed2: SpectralField,
}

impl Frame {
    fn of(c: &CurveState) -> Result<Self> {
        c.check_tangent()?;
        let z = c.position();
        let dz = z.deriv(1);
        let d2z = z.deriv(2);
        let speed2 = dz.dot(&dz);
        Ok(Self { dz, d2z, speed2 })
    }

    /// `-∂z^⊥ / |∂z|²`, the leading Laurent coefficient of the kernel.
    fn principal(&self) -> PlanarField {
        let inv = self.speed2.map(|s| -1.0 / s);
        self.dz.perp().times(&inv)
    }
}

/// Signed curvature `(z₁' z₂'' - z₂' z₁'') / |z'|³`.
pub fn curvature(c: &CurveState) -> Result<SpectralField> {
    let fr = Frame::of(c)?;
    Ok(curvature_of(&fr))
}

fn curvature_of(fr: &Frame) -> SpectralField {
    // -(∂z^⊥ · ∂²z) with a^⊥ = (a₂, -a₁)
    let cross = -fr.dz.perp().dot(&fr.d2z);
    cross.zip_map(&fr.speed2, |k, s| k / s.powf(1.5))
}

/// `½ Hϖ · O₋₁`, dealiased.
fn sheet_velocity(fr: &Frame, w: &SpectralField) -> PlanarField {
    let hw = w.hilbert().scale(0.5);
    let o = fr.principal();
    PlanarField {
        x: hw.dealiased_mul(&o.x),
        y: hw.dealiased_mul(&o.y),
    }
}

/// z-model: returns `(z_t, ϖ_t)`.
pub fn zmodel_rhs(c: &CurveState, p: &ModelParams) -> Result<(PlanarField, SpectralField)> {
    let fr = Frame::of(c)?;
    let rho = p.density_sum();
    if !(rho > 0.0) {
        return Err(WaveError::Parameter("rho_plus + rho_minus must be > 0".into()));
    }
    let w = &c.vorticity;
    let zt = sheet_velocity(&fr, w);

    let a = p.atwood;
    let mut bracket = c.z2.scale(-2.0 * a * p.gravity);
    if a != 0.0 {
        let inv_speed2 = fr.speed2.map(|s| 1.0 / s);
        let quad = w.dealiased_mul(&w.hilbert()).hilbert().dealiased_mul(&inv_speed2);
        bracket = bracket + quad.scale(0.5 * a);
    }
    if p.surface_tension != 0.0 {
        // jump pressure γ𝒦
        let k = curvature_of(&fr);
        bracket = bracket - k.scale(2.0 * p.surface_tension / rho);
    }
    Ok((zt, -bracket.deriv(1)))
}

/// Kelvin–Helmholtz z-model with the sheet strength frozen at `w0`.
pub fn kh_rhs(c: &CurveState, w0: &SpectralField) -> Result<PlanarField> {
    let fr = Frame::of(c)?;
    if !w0.same_grid(&c.z1) {
        return Err(WaveError::Usage("vorticity lives on a different grid".into()));
    }
    Ok(sheet_velocity(&fr, w0))
}

/// Coefficients of `BR(α, β) = O₋₁/β + O₀ + O₁β + …`.
#[derive(Debug, Clone)]
pub struct LaurentCoeffs {
    pub o_minus1: PlanarField,
    pub o_zero: PlanarField,
    pub o_one: PlanarField,
}

pub fn laurent_coeffs(c: &CurveState) -> Result<LaurentCoeffs> {
    let fr = Frame::of(c)?;
    let d3z = c.position().deriv(3);
    let s = &fr.speed2;
    let inv2 = s.map(|v| 1.0 / v);
    let inv4 = s.map(|v| 1.0 / (v * v));
    let inv6 = s.map(|v| 1.0 / (v * v * v));
    let tp = fr.dz.perp();
    let d1d2 = fr.dz.dot(&fr.d2z);
    let d1d3 = fr.dz.dot(&d3z);
    let d2d2 = fr.d2z.dot(&fr.d2z);

    let o_minus1 = fr.principal();

    // Constant term in the form used by the refined model's derivation; the
    // second summand carries the opposite sign to the kernel's own β⁰ term
    // (which only matters where O₀ is used on its own).
    let o_zero = tp
        .times(&d1d2.pointwise(&inv4))
        .scale(-1.0)
        .add(&fr.d2z.perp().times(&inv2).scale(-0.5));

    let o_one = d3z
        .perp()
        .times(&inv2)
        .scale(-1.0 / 6.0)
        .add(&tp.times(&d1d3.pointwise(&inv4)).scale(1.0 / 3.0))
        .add(&fr.d2z.perp().times(&d1d2.pointwise(&inv4)).scale(0.5))
        .add(&tp.times(&d2d2.pointwise(&inv4)).scale(0.25))
        .add(&tp.times(&d1d2.pointwise(&d1d2).pointwise(&inv6)).scale(-1.0));

    Ok(LaurentCoeffs {
        o_minus1,
        o_zero,
        o_one,
    })
}

/// `(1/2π) ∫_{-π}^{π} ϖ(β) β dβ`, evaluated exactly from the Fourier
/// coefficients: `∫ β e^{ikβ} dβ = 2π (-1)^k / (ik)` for `k ≠ 0`.
pub fn first_moment(w: &SpectralField) -> f64 {
    let grid = w.grid();
    let nyq = grid.nyquist_slot();
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, &c) in w.spectrum().iter().enumerate() {
        let k = grid.wavenumber(m);
        if k == 0 || m == nyq {
            continue;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += c * sign / Complex64::new(0.0, k as f64);
    }
    acc.re
}

/// Refined Kelvin–Helmholtz model: `z_t = ½Hϖ₀ O₋₁ - O₁ m₁` with
/// `m₁ = (1/2π) ∫ ϖ₀(β) β dβ`. Requires `∫ϖ₀ = 0`.
pub fn refined_kh_rhs(c: &CurveState, w0: &SpectralField) -> Result<PlanarField> {
    let mean = w0.mean();
    if mean.abs() > 1e-10 * w0.max_abs().max(1.0) {
        return Err(WaveError::Precondition(format!(
            "refined KH model needs zero-mean vorticity (mean = {mean:e})"
        )));
    }
    let base = kh_rhs(c, w0)?;
    let m1 = first_moment(w0);
    if m1 == 0.0 {
        return Ok(base);
    }
    let lc = laurent_coeffs(c)?;
    Ok(base.add(&lc.o_one.scale(-m1)))
}

/// Principal-value Birkhoff–Rott velocity by the alternating-point
/// trapezoidal rule.
pub fn br_velocity(c: &CurveState, w: &SpectralField) -> Result<PlanarField> {
    if !w.same_grid(&c.z1) {
        return Err(WaveError::Usage("vorticity lives on a different grid".into()));
    }
    let n = c.n_nodes();
    let z1 = c.z1.values();
    let z2 = c.z2.values();
    let wv = w.values();
    let weight = 2.0 * c.grid().spacing() / (2.0 * PI);

    let target = |j: usize| -> std::result::Result<Vec2, (usize, usize)> {
        let (xj, yj) = (z1[j], z2[j]);
        let (mut u, mut v) = (0.0, 0.0);
        let mut l = (j + 1) % 2;
        while l < n {
            let dx = xj - z1[l];
            let dy = yj - z2[l];
            let r2 = dx * dx + dy * dy;
            if r2.sqrt() < 1e-12 {
                return Err((j, l));
            }
            u -= wv[l] * dy / r2;
            v += wv[l] * dx / r2;
            l += 2;
        }
        Ok([u * weight, v * weight])
    };

    let rows: Vec<std::result::Result<Vec2, (usize, usize)>> = if n >= 256 {
        (0..n).into_par_iter().map(target).collect()
    } else {
        (0..n).map(target).collect()
    };
    let mut ux = Vec::with_capacity(n);
    let mut uy = Vec::with_capacity(n);
    for r in rows {
        match r {
            Ok([a, b]) => {
                ux.push(a);
                uy.push(b);
            }
            Err((j, l)) => {
                return Err(WaveError::Geometry(format!(
                    "nodes {j} and {l} coincide in the Birkhoff-Rott sum"
                )))
            }
        }
    }
    let grid = c.grid();
    Ok(PlanarField {
        x: SpectralField::new(grid, ux)?,
        y: SpectralField::new(grid, uy)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::standard(n).unwrap()
    }

    fn ellipse(g: &PeriodicGrid, a: f64, b: f64) -> CurveState {
        CurveState {
            z1: g.sample(|s| a * s.cos()),
            z2: g.sample(|s| b * s.sin()),
            vorticity: g.zeros(),
        }
    }

    #[test]
    fn perp_examples() {
        assert_eq!(perp([1.0, 0.0]), [0.0, -1.0]);
        assert_eq!(perp([0.0, 0.0]), [0.0, 0.0]);
        let v = [0.3, -1.7];
        assert_eq!(perp(perp(v)), [-0.3, 1.7]);
    }

    #[test]
    fn curvature_examples() {
        let g = grid(64);
        let k = curvature(&CurveState::circle(&g, 1.0)).unwrap();
        assert!((&k - &g.constant(1.0)).max_abs() < 1e-11);
        for r in [0.5, 2.0] {
            let k = curvature(&CurveState::circle(&g, r)).unwrap();
            assert!((&k - &g.constant(1.0 / r)).max_abs() < 1e-11);
        }
        let e = ellipse(&g, 2.0, 1.0);
        let k = curvature(&e).unwrap();
        // node 32 sits at α = 0; closed form ab/(a²sin²+b²cos²)^{3/2}
        assert!((k.values()[32] - 2.0).abs() < 1e-12);
        for (j, &a) in g.nodes().iter().enumerate() {
            let exact = 2.0 / (4.0 * a.sin().powi(2) + a.cos().powi(2)).powf(1.5);
            assert!((k.values()[j] - exact).abs() < 1e-11);
        }
    }

    #[test]
    fn degenerate_curve_is_rejected() {
        let g = grid(16);
        let c = CurveState::new(g.constant(1.0), g.constant(2.0), g.zeros());
        assert!(matches!(c, Err(WaveError::Geometry(_))));
    }

    #[test]
    fn zmodel_examples() {
        let g = grid(64);
        let circle = CurveState::circle(&g, 1.0);
        let p = ModelParams {
            atwood: 1.0 / 3.0,
            gravity: 9.8,
            surface_tension: 0.0,
            ..ModelParams::default()
        };
        let (zt, wt) = zmodel_rhs(&circle, &p).unwrap();
        assert!(zt.max_abs() < 1e-15);
        let expected = g.sample(|a| 19.6 / 3.0 * a.cos());
        assert!((&wt - &expected).max_abs() < 1e-12);

        let p0 = ModelParams { atwood: 0.5, gravity: 0.0, surface_tension: 0.0, ..p };
        let (zt, wt) = zmodel_rhs(&ellipse(&g, 2.0, 0.7), &p0).unwrap();
        assert!(zt.max_abs() == 0.0 && wt.max_abs() == 0.0);

        let pt = ModelParams { atwood: 0.0, gravity: 0.0, surface_tension: 1.0, ..p };
        let (_, wt) = zmodel_rhs(&circle, &pt).unwrap();
        assert!(wt.max_abs() < 1e-9);
    }

    #[test]
    fn kh_examples() {
        let g = grid(64);
        let circle = CurveState::circle(&g, 1.0);
        assert!(kh_rhs(&circle, &g.zeros()).unwrap().max_abs() == 0.0);
        let zt = kh_rhs(&circle, &g.sample(f64::cos)).unwrap();
        let ex = g.sample(|a| -0.5 * a.sin() * a.cos());
        let ey = g.sample(|a| -0.5 * a.sin() * a.sin());
        assert!((&zt.x - &ex).max_abs() < 1e-14);
        assert!((&zt.y - &ey).max_abs() < 1e-14);

        // same path as the z-model velocity when A = γ = g = 0
        let e = ellipse(&g, 1.5, 0.8).with_vorticity(g.sample(|a| (2.0 * a).sin()));
        let p = ModelParams { atwood: 0.0, gravity: 0.0, surface_tension: 0.0, ..ModelParams::default() };
        let (zt_z, _) = zmodel_rhs(&e, &p).unwrap();
        let zt_kh = kh_rhs(&e, &e.vorticity).unwrap();
        assert_eq!(zt_z.max_diff(&zt_kh), 0.0);
    }

    #[test]
    fn laurent_on_unit_circle() {
        let g = grid(64);
        let lc = laurent_coeffs(&CurveState::circle(&g, 1.0)).unwrap();
        let (c, s) = (g.sample(f64::cos), g.sample(f64::sin));
        assert!((&lc.o_minus1.x + &c).max_abs() < 1e-11);
        assert!((&lc.o_minus1.y + &s).max_abs() < 1e-11);
        assert!((&lc.o_zero.x - &s.scale(0.5)).max_abs() < 1e-11);
        assert!((&lc.o_zero.y + &c.scale(0.5)).max_abs() < 1e-11);
        assert!((&lc.o_one.x - &c.scale(1.0 / 12.0)).max_abs() < 1e-11);
        assert!((&lc.o_one.y - &s.scale(1.0 / 12.0)).max_abs() < 1e-11);
    }

    /// Oracle: fit the Laurent expansion of the exact kernel
    /// `-(z(α) - z(α-β))^⊥ / |z(α) - z(α-β)|²` at small β.
    #[test]
    fn laurent_matches_kernel_expansion() {
        let g = grid(64);
        let za = |a: f64| [2.0 * a.cos() + 0.3 * (2.0 * a).cos(), a.sin() + 0.2 * (3.0 * a).sin()];
        let c = CurveState {
            z1: g.sample(|a| za(a)[0]),
            z2: g.sample(|a| za(a)[1]),
            vorticity: g.zeros(),
        };
        let lc = laurent_coeffs(&c).unwrap();
        for j in [5usize, 20, 41] {
            let a = g.node(j);
            let br = |b: f64| {
                let (p, q) = (za(a), za(a - b));
                let d = [p[0] - q[0], p[1] - q[1]];
                let r2 = d[0] * d[0] + d[1] * d[1];
                let dp = perp(d);
                [-dp[0] / r2, -dp[1] / r2]
            };
            let om = lc.o_minus1.at(j);
            let o1 = lc.o_one.at(j);
            // symmetric/antisymmetric parts isolate O₋₁/β + O₁β and O₀
            for i in 0..2 {
                let odd = |b: f64| 0.5 * (br(b)[i] - br(-b)[i]);
                let b = 1e-2;
                let c1 = (odd(b) - om[i] / b) / b;
                let c1h = (odd(b / 2.0) - om[i] / (b / 2.0)) / (b / 2.0);
                let richardson = (4.0 * c1h - c1) / 3.0;
                assert!((richardson - o1[i]).abs() < 1e-6, "O1 node {j}: {richardson} vs {}", o1[i]);
                let b = 1e-3;
                assert!((odd(b) * b - om[i]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn first_moment_values() {
        let g = grid(64);
        assert!(first_moment(&g.sample(f64::cos)).abs() < 1e-15);
        assert!((first_moment(&g.sample(f64::sin)) - 1.0).abs() < 1e-14);
        // (1/2π) ∫ β sin(2β) dβ = -1/2
        assert!((first_moment(&g.sample(|b| (2.0 * b).sin())) + 0.5).abs() < 1e-14);
    }

    #[test]
    fn refined_kh_examples() {
        let g = grid(64);
        let circle = CurveState::circle(&g, 1.0);
        assert!(refined_kh_rhs(&circle, &g.zeros()).unwrap().max_abs() == 0.0);

        let even = g.sample(f64::cos);
        let r = refined_kh_rhs(&circle, &even).unwrap();
        assert!(r.max_diff(&kh_rhs(&circle, &even).unwrap()) < 1e-12);

        let odd = g.sample(f64::sin);
        let r = refined_kh_rhs(&circle, &odd).unwrap();
        let base = kh_rhs(&circle, &odd).unwrap();
        let lc = laurent_coeffs(&circle).unwrap();
        let corr = PlanarField { x: &r.x - &base.x, y: &r.y - &base.y };
        assert!(corr.max_diff(&lc.o_one.scale(-1.0)) < 1e-14);

        assert!(matches!(
            refined_kh_rhs(&circle, &g.sample(|a| 1.0 + a.sin())),
            Err(WaveError::Precondition(_))
        ));
    }

    #[test]
    fn br_uniform_sheet_on_circle() {
        let g = grid(128);
        let circle = CurveState::circle(&g, 1.0);
        let c = 0.8;
        let u = br_velocity(&circle, &g.constant(c)).unwrap();
        for (j, a) in g.nodes().into_iter().enumerate() {
            let v = u.at(j);
            let normal = v[0] * a.cos() + v[1] * a.sin();
            let tangential = -v[0] * a.sin() + v[1] * a.cos();
            assert!(normal.abs() < 1e-10);
            assert!((tangential - c / 2.0).abs() < 1e-10);
        }
        assert!(br_velocity(&circle, &g.zeros()).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn br_normal_matches_hilbert_on_circle() {
        // on the unit circle the kernel's normal part is -½cot((α-β)/2)
        let g = grid(128);
        let circle = CurveState::circle(&g, 1.0);
        for m in [1, 5, 17] {
            let w = g.sample(|a| (m as f64 * a).cos());
            let normal = circle.position();
            let br = br_velocity(&circle, &w).unwrap().dot(&normal);
            let kh = kh_rhs(&circle, &w).unwrap().dot(&normal);
            assert!((&br - &kh).max_abs() < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn br_rejects_coincident_nodes() {
        let g = grid(16);
        // nodes 0 and 1 (opposite parity) coincide
        let mut z1 = g.sample(f64::cos).into_values();
        let mut z2 = g.sample(f64::sin).into_values();
        z1[1] = z1[0];
        z2[1] = z2[0];
        let c = CurveState {
            z1: SpectralField::new(&g, z1).unwrap(),
            z2: SpectralField::new(&g, z2).unwrap(),
            vorticity: g.zeros(),
        };
        assert!(matches!(br_velocity(&c, &g.constant(1.0)), Err(WaveError::Geometry(_))));
    }
}
