//! Periodic collocation grid, Fourier representation of real fields and
//! the multiplier-operator calculus used by every model.
//!
//! Coefficients follow `f̂(k) = (1/n) Σ_j f(x_j) e^{-iκ_k x_j}` with
//! `x_j = -L/2 + jL/n` and physical wavenumber `κ_k = 2πk/L`, so a single
//! mode `cos(x)` has coefficients `½` at `k = ±1`. Spectra are stored in FFT
//! order: slot `m` holds wavenumber `m` for `m < n/2` and `m - n` otherwise.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Result, WaveError};

struct GridInner {
    n: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform grid on `[-L/2, L/2)` with a power-of-two node count.
///
/// Cloning is cheap; FFT plans are shared between clones.
#[derive(Clone)]
pub struct PeriodicGrid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("n_nodes", &self.inner.n)
            .field("length", &self.inner.length)
            .finish()
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n && self.inner.length == other.inner.length)
    }
}

/// Builds a grid of `n_nodes` points with period `length`.
pub fn make_grid(n_nodes: usize, length: f64) -> Result<PeriodicGrid> {
    PeriodicGrid::new(n_nodes, length)
}

impl PeriodicGrid {
    pub fn new(n_nodes: usize, length: f64) -> Result<Self> {
        if n_nodes < 8 || !n_nodes.is_power_of_two() {
            return Err(WaveError::config(
                "n_nodes",
                format!("{n_nodes} is not a power of two >= 8"),
            ));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(WaveError::config("length", format!("{length} must be > 0")));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_nodes);
        let inverse = planner.plan_fft_inverse(n_nodes);
        Ok(Self {
            inner: Arc::new(GridInner {
                n: n_nodes,
                length,
                forward,
                inverse,
            }),
        })
    }

    /// Grid on `[-π, π)`.
    pub fn standard(n_nodes: usize) -> Result<Self> {
        Self::new(n_nodes, 2.0 * PI)
    }

    pub fn n_nodes(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    pub fn spacing(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -0.5 * self.inner.length + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.inner.n).map(|j| self.node(j)).collect()
    }

    /// Integer wavenumber stored in FFT slot `m`.
    pub fn wavenumber(&self, m: usize) -> i64 {
        let n = self.inner.n;
        if m < n / 2 {
            m as i64
        } else {
            m as i64 - n as i64
        }
    }

    /// FFT slot holding integer wavenumber `k`, if it is resolved.
    pub fn slot(&self, k: i64) -> Option<usize> {
        let half = (self.inner.n / 2) as i64;
        if k >= -half && k < half {
            Some(if k >= 0 { k as usize } else { (k + 2 * half) as usize })
        } else {
            None
        }
    }

    /// `κ = 2πk/L`.
    pub fn physical_wavenumber(&self, k: i64) -> f64 {
        2.0 * PI * k as f64 / self.inner.length
    }

    /// Largest |k| kept by the two-thirds dealiasing rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.inner.n / 3) as i64
    }

    pub fn nyquist_slot(&self) -> usize {
        self.inner.n / 2
    }

    pub fn zeros(&self) -> SpectralField {
        SpectralField::from_raw(self.clone(), vec![0.0; self.inner.n])
    }

    pub fn constant(&self, c: f64) -> SpectralField {
        SpectralField::from_raw(self.clone(), vec![c; self.inner.n])
    }

    /// Samples `f` at the grid nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> SpectralField {
        let values = (0..self.inner.n).map(|j| f(self.node(j))).collect();
        SpectralField::from_raw(self.clone(), values)
    }

    fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let n = self.inner.n;
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.inner.forward.process(&mut buf);
        let scale = 1.0 / n as f64;
        for (m, c) in buf.iter_mut().enumerate() {
            // (-1)^k shifts the phase origin from x = 0 to x = -L/2.
            let sign = if m % 2 == 0 { scale } else { -scale };
            *c *= sign;
        }
        buf
    }

    fn inverse(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = spectrum
            .iter()
            .enumerate()
            .map(|(m, &c)| if m % 2 == 0 { c } else { -c })
            .collect();
        self.inner.inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// Real scalar field on a [`PeriodicGrid`] with a lazily computed spectrum.
#[derive(Clone)]
pub struct SpectralField {
    grid: PeriodicGrid,
    values: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralField")
            .field("grid", &self.grid)
            .field("values", &self.values)
            .finish()
    }
}

impl SpectralField {
    /// Wraps nodal values; rejects wrong lengths and non-finite entries.
    pub fn new(grid: &PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(WaveError::Usage(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(WaveError::Numeric(format!(
                "non-finite value {} at node {j}",
                values[j]
            )));
        }
        Ok(Self::from_raw(grid.clone(), values))
    }

    pub(crate) fn from_raw(grid: PeriodicGrid, values: Vec<f64>) -> Self {
        Self {
            grid,
            values,
            spectrum: OnceLock::new(),
        }
    }

    /// Builds a field from FFT-ordered coefficients, projecting onto the
    /// Hermitian-symmetric part so the field is real.
    pub fn from_spectrum(grid: &PeriodicGrid, spectrum: &[Complex64]) -> Result<Self> {
        let n = grid.n_nodes();
        if spectrum.len() != n {
            return Err(WaveError::Usage(format!(
                "spectrum has {} coefficients, grid has {} nodes",
                spectrum.len(),
                n
            )));
        }
        if spectrum.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(WaveError::Numeric("non-finite spectral coefficient".into()));
        }
        let mut sym = vec![Complex64::new(0.0, 0.0); n];
        for m in 0..n {
            let mirror = (n - m) % n;
            sym[m] = 0.5 * (spectrum[m] + spectrum[mirror].conj());
        }
        Ok(Self::from_hermitian(grid.clone(), sym))
    }

    /// Caller guarantees Hermitian symmetry.
    pub(crate) fn from_hermitian(grid: PeriodicGrid, spectrum: Vec<Complex64>) -> Self {
        let values = grid.inverse(&spectrum);
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        Self {
            grid,
            values,
            spectrum: cell,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// FFT-ordered coefficients.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| self.grid.forward(&self.values))
    }

    /// Coefficient at integer wavenumber `k` (zero if unresolved).
    pub fn coefficient(&self, k: i64) -> Complex64 {
        self.grid
            .slot(k)
            .map(|m| self.spectrum()[m])
            .unwrap_or_default()
    }

    pub fn same_grid(&self, other: &SpectralField) -> bool {
        self.grid == other.grid
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn remove_mean(&self) -> SpectralField {
        let m = self.mean();
        self.map(|v| v - m)
    }

    /// Zeroes every coefficient below `rel · max|f̂|` (Krasny filter).
    pub fn noise_filter(&self, rel: f64) -> SpectralField {
        let spec = self.spectrum();
        let cut = rel * spec.iter().fold(0.0_f64, |a, c| a.max(c.norm()));
        if !(cut > 0.0) || spec.iter().all(|c| c.norm() == 0.0 || c.norm() >= cut) {
            return self.clone();
        }
        let kept = spec
            .iter()
            .map(|&c| if c.norm() < cut { Complex64::new(0.0, 0.0) } else { c })
            .collect();
        SpectralField::from_hermitian(self.grid.clone(), kept)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SpectralField {
        SpectralField::from_raw(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &SpectralField, f: impl Fn(f64, f64) -> f64) -> SpectralField {
        assert!(self.same_grid(other), "fields live on different grids");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        SpectralField::from_raw(self.grid.clone(), values)
    }

    /// Pointwise product without dealiasing.
    pub fn pointwise(&self, other: &SpectralField) -> SpectralField {
        self.zip_map(other, |a, b| a * b)
    }

    /// Applies an arbitrary multiplier given as a function of `κ`.
    ///
    /// The Nyquist coefficient is multiplied by the real part of the symbol,
    /// which keeps the result real for odd symbols.
    pub fn multiplier(&self, symbol: impl Fn(f64) -> Complex64) -> SpectralField {
        let grid = &self.grid;
        let nyq = grid.nyquist_slot();
        let out: Vec<Complex64> = self
            .spectrum()
            .iter()
            .enumerate()
            .map(|(m, &c)| {
                let s = symbol(grid.physical_wavenumber(grid.wavenumber(m)));
                if m == nyq {
                    c * s.re
                } else {
                    c * s
                }
            })
            .collect();
        SpectralField::from_hermitian(grid.clone(), out)
    }

    pub fn apply(&self, symbol: &MultiplierSymbol) -> SpectralField {
        self.multiplier(|kappa| symbol.eval(kappa))
    }

    pub fn hilbert(&self) -> SpectralField {
        self.apply(&MultiplierSymbol::Hilbert)
    }

    pub fn lambda(&self) -> SpectralField {
        self.apply(&MultiplierSymbol::LambdaPow(1.0))
    }

    pub fn lambda_pow(&self, s: f64) -> SpectralField {
        self.apply(&MultiplierSymbol::LambdaPow(s))
    }

    pub fn deriv(&self, m: u32) -> SpectralField {
        self.apply(&MultiplierSymbol::Derivative(m))
    }

    /// Zeroes every mode with |k| above the two-thirds cutoff.
    pub fn dealias_filter(&self) -> SpectralField {
        let cutoff = self.grid.dealias_cutoff();
        let grid = &self.grid;
        let out: Vec<Complex64> = self
            .spectrum()
            .iter()
            .enumerate()
            .map(|(m, &c)| {
                if grid.wavenumber(m).abs() > cutoff {
                    Complex64::new(0.0, 0.0)
                } else {
                    c
                }
            })
            .collect();
        SpectralField::from_hermitian(grid.clone(), out)
    }

    /// Two-thirds-rule product; panics on mismatched grids.
    pub fn dealiased_mul(&self, other: &SpectralField) -> SpectralField {
        let a = self.dealias_filter();
        let b = other.dealias_filter();
        a.pointwise(&b).dealias_filter()
    }

    pub fn scale(&self, c: f64) -> SpectralField {
        self.map(|v| c * v)
    }
}

macro_rules! field_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&SpectralField> for &SpectralField {
            type Output = SpectralField;
            fn $method(self, rhs: &SpectralField) -> SpectralField {
                self.zip_map(rhs, |a, b| a $op b)
            }
        }
        impl $tr<SpectralField> for SpectralField {
            type Output = SpectralField;
            fn $method(self, rhs: SpectralField) -> SpectralField {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&SpectralField> for SpectralField {
            type Output = SpectralField;
            fn $method(self, rhs: &SpectralField) -> SpectralField {
                (&self).$method(rhs)
            }
        }
    };
}

field_binop!(Add, add, +);
field_binop!(Sub, sub, -);

impl Mul<&SpectralField> for f64 {
    type Output = SpectralField;
    fn mul(self, rhs: &SpectralField) -> SpectralField {
        rhs.scale(self)
    }
}

impl Mul<SpectralField> for f64 {
    type Output = SpectralField;
    fn mul(self, rhs: SpectralField) -> SpectralField {
        rhs.scale(self)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

impl Neg for SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

/// Fourier multipliers, evaluated at physical wavenumber `κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MultiplierSymbol {
    /// `-i sgn(κ)`, with `sgn(0) = 0`.
    Hilbert,
    /// `|κ|^s`; the zero mode is annihilated for every `s`.
    LambdaPow(f64),
    /// `(iκ)^m`.
    Derivative(u32),
    /// `(1 + c²κ²)^{-1} (1 - icκ)` with `c = (α₁+α₂)/2`.
    ResolventN { alpha1: f64, alpha2: f64 },
    /// `1 / (2 + α|κ|)`.
    ResolventM { alpha: f64 },
    /// `1 / (1 + κ²)`.
    ResolventP,
}

impl MultiplierSymbol {
    pub fn eval(&self, kappa: f64) -> Complex64 {
        match *self {
            MultiplierSymbol::Hilbert => {
                if kappa > 0.0 {
                    Complex64::new(0.0, -1.0)
                } else if kappa < 0.0 {
                    Complex64::new(0.0, 1.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            MultiplierSymbol::LambdaPow(s) => {
                if kappa == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(kappa.abs().powf(s), 0.0)
                }
            }
            MultiplierSymbol::Derivative(m) => Complex64::new(0.0, kappa).powu(m),
            MultiplierSymbol::ResolventN { alpha1, alpha2 } => {
                let c = 0.5 * (alpha1 + alpha2);
                Complex64::new(1.0, -c * kappa) / (1.0 + c * c * kappa * kappa)
            }
            MultiplierSymbol::ResolventM { alpha } => {
                Complex64::new(1.0 / (2.0 + alpha * kappa.abs()), 0.0)
            }
            MultiplierSymbol::ResolventP => Complex64::new(1.0 / (1.0 + kappa * kappa), 0.0),
        }
    }
}

/// Checked multiplier application.
pub fn apply_symbol(f: &SpectralField, s: &MultiplierSymbol) -> Result<SpectralField> {
    if !f.is_finite() {
        return Err(WaveError::Numeric("apply_symbol: non-finite input".into()));
    }
    if let MultiplierSymbol::LambdaPow(p) = s {
        if !p.is_finite() {
            return Err(WaveError::Parameter(format!("lambda power {p} is not finite")));
        }
    }
    let out = f.apply(s);
    if !out.is_finite() {
        return Err(WaveError::Numeric("apply_symbol: non-finite result".into()));
    }
    Ok(out)
}

/// Checked two-thirds-rule product.
pub fn dealiased_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    if !f.same_grid(g) {
        return Err(WaveError::Usage("dealiased_product: mismatched grids".into()));
    }
    Ok(f.dealiased_mul(g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommutatorKind {
    Hilbert,
    SecondDerivative,
}

/// `[T, a] b = T(ab) - a T(b)` with `T = H` or `∂²`.
pub fn commutator(kind: CommutatorKind, a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    if !a.same_grid(b) {
        return Err(WaveError::Usage("commutator: mismatched grids".into()));
    }
    Ok(commute(kind, a, b))
}

pub(crate) fn commute(kind: CommutatorKind, a: &SpectralField, b: &SpectralField) -> SpectralField {
    let op = |f: &SpectralField| match kind {
        CommutatorKind::Hilbert => f.hilbert(),
        CommutatorKind::SecondDerivative => f.deriv(2),
    };
    op(&a.dealiased_mul(b)) - a.dealiased_mul(&op(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::standard(n).unwrap()
    }

    fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        (a - b).max_abs()
    }

    #[test]
    fn grid_nodes_are_equispaced_from_minus_pi() {
        let g = grid(8);
        let nodes = g.nodes();
        for (j, x) in nodes.iter().enumerate() {
            assert!((x - (-PI + j as f64 * PI / 4.0)).abs() < 1e-15);
        }
        assert_eq!(nodes[0], -PI);
        assert!((nodes[7] - 3.0 * PI / 4.0).abs() < 1e-15);
        assert_eq!(grid(2048).n_nodes(), 2048);
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(matches!(PeriodicGrid::standard(7), Err(WaveError::Config { .. })));
        assert!(PeriodicGrid::standard(4).is_err());
        assert!(PeriodicGrid::standard(96).is_err());
        assert!(PeriodicGrid::new(16, 0.0).is_err());
    }

    #[test]
    fn single_mode_coefficients() {
        let g = grid(16);
        let f = g.sample(f64::cos);
        assert!((f.coefficient(1) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((f.coefficient(-1) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let s = g.sample(f64::sin);
        assert!((s.coefficient(1) - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn symbol_examples() {
        let g = grid(32);
        let hs = g.sample(f64::sin).hilbert();
        assert!(max_diff(&hs, &g.sample(|x| -x.cos())) < 1e-14);

        let l3 = g.sample(|x| (2.0 * x).sin()).lambda_pow(3.0);
        // roundoff in high modes is amplified by |k|³
        assert!(max_diff(&l3, &g.sample(|x| 8.0 * (2.0 * x).sin())) < 1e-11);

        let m = g.sample(f64::cos).apply(&MultiplierSymbol::ResolventM { alpha: 2.0 });
        assert!(max_diff(&m, &g.sample(|x| x.cos() / 4.0)) < 1e-15);

        assert!(g.constant(1.0).hilbert().max_abs() < 1e-15);
    }

    #[test]
    fn symbol_table_values() {
        let h = MultiplierSymbol::Hilbert;
        assert_eq!(h.eval(0.0), Complex64::new(0.0, 0.0));
        assert_eq!(h.eval(3.0), Complex64::new(0.0, -1.0));
        assert_eq!(MultiplierSymbol::LambdaPow(-1.0).eval(0.0), Complex64::new(0.0, 0.0));
        assert_eq!(MultiplierSymbol::Derivative(2).eval(3.0), Complex64::new(-9.0, 0.0));
        let n = MultiplierSymbol::ResolventN { alpha1: 1.0, alpha2: 1.0 }.eval(1.0);
        assert!((n - Complex64::new(0.5, -0.5)).norm() < 1e-15);
        assert_eq!(MultiplierSymbol::ResolventP.eval(2.0), Complex64::new(0.2, 0.0));
    }

    #[test]
    fn apply_symbol_rejects_non_finite() {
        let g = grid(8);
        let mut f = g.zeros();
        f.values[3] = f64::NAN;
        assert!(matches!(
            apply_symbol(&f, &MultiplierSymbol::Hilbert),
            Err(WaveError::Numeric(_))
        ));
    }

    #[test]
    fn field_constructor_validates() {
        let g = grid(8);
        assert!(SpectralField::new(&g, vec![0.0; 7]).is_err());
        assert!(SpectralField::new(&g, vec![f64::INFINITY; 8]).is_err());
        assert!(SpectralField::new(&g, vec![1.0; 8]).is_ok());
    }

    #[test]
    fn dealiased_product_examples() {
        let g = grid(64);
        let p = dealiased_product(&g.sample(f64::sin), &g.sample(f64::cos)).unwrap();
        assert!(max_diff(&p, &g.sample(|x| 0.5 * (2.0 * x).sin())) < 1e-14);

        // identity up to the filter
        let rough = g.sample(|x| (5.0 * x).cos() + 0.3 * (30.0 * x).sin());
        let p = dealiased_product(&g.constant(1.0), &rough).unwrap();
        assert!(max_diff(&p, &g.sample(|x| (5.0 * x).cos())) < 1e-14);

        let other = grid(32);
        assert!(matches!(
            dealiased_product(&g.zeros(), &other.zeros()),
            Err(WaveError::Usage(_))
        ));
    }

    #[test]
    fn dealiased_product_matches_fine_grid_oracle() {
        let n = 64;
        let g = grid(n);
        let k = (n / 3) as f64;
        let f = g.sample(|x| (k * x).cos());
        let p = dealiased_product(&f, &f).unwrap();

        // Oracle: exact product on a 2n grid, truncated to |k| <= n/3.
        let fine = grid(2 * n);
        let exact = fine.sample(|x| (k * x).cos().powi(2));
        let cutoff = g.dealias_cutoff();
        let mut coarse = vec![Complex64::new(0.0, 0.0); n];
        for (m, c) in coarse.iter_mut().enumerate() {
            let kk = g.wavenumber(m);
            if kk.abs() <= cutoff {
                *c = exact.coefficient(kk);
            }
        }
        let oracle = SpectralField::from_spectrum(&g, &coarse).unwrap();
        assert!(max_diff(&p, &oracle) < 1e-12);
        assert!((p.mean() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn commutator_examples() {
        let g = grid(64);
        let c = g.sample(f64::cos);
        let r = commutator(CommutatorKind::Hilbert, &c, &c).unwrap();
        assert!(r.max_abs() < 1e-14);

        let b = g.sample(|x| (3.0 * x).sin() + 0.2 * (7.0 * x).cos());
        let r = commutator(CommutatorKind::Hilbert, &g.constant(2.5), &b).unwrap();
        assert!(r.max_abs() < 1e-13);
        let r = commutator(CommutatorKind::SecondDerivative, &g.constant(2.5), &b).unwrap();
        assert!(r.max_abs() < 1e-12);
    }

    #[test]
    fn from_spectrum_projects_to_hermitian() {
        let g = grid(8);
        let mut spec = vec![Complex64::new(0.0, 0.0); 8];
        spec[1] = Complex64::new(1.0, 0.0); // only +1 supplied
        let f = SpectralField::from_spectrum(&g, &spec).unwrap();
        assert!(max_diff(&f, &g.sample(|x| x.cos())) < 1e-15);
    }
}
