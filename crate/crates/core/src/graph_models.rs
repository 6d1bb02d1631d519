//! Right-hand sides of the graph-based interface models.
//!
//! Bidirectional equations are second order in time and are advanced as
//! first-order systems in `(h, v = h_t)`. Unidirectional equations evolve a
//! single zero-mean profile `f`. Every quadratic term uses the two-thirds
//! dealiased product.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};
use crate::spectral::{commute, CommutatorKind, MultiplierSymbol, SpectralField};

use CommutatorKind::{Hilbert as H, SecondDerivative as D2};

/// Physical and dimensionless constants shared by all models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub epsilon: f64,
    pub beta: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha: f64,
    pub atwood: f64,
    pub gravity: f64,
    pub surface_tension: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_plus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_minus: Option<f64>,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            beta: 0.0,
            alpha1: 0.0,
            alpha2: 0.0,
            alpha: 0.0,
            atwood: -1.0,
            gravity: 1.0,
            surface_tension: 0.0,
            rho_plus: None,
            rho_minus: None,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("params.epsilon", self.epsilon),
            ("params.beta", self.beta),
            ("params.alpha1", self.alpha1),
            ("params.alpha2", self.alpha2),
            ("params.alpha", self.alpha),
            ("params.gravity", self.gravity),
            ("params.surface_tension", self.surface_tension),
        ];
        for (key, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(WaveError::config(key, format!("{v} must be finite and >= 0")));
            }
        }
        if !self.atwood.is_finite() || self.atwood.abs() > 1.0 {
            return Err(WaveError::config(
                "params.atwood",
                format!("{} must lie in [-1, 1]", self.atwood),
            ));
        }
        for (key, v) in [("params.rho_plus", self.rho_plus), ("params.rho_minus", self.rho_minus)] {
            if let Some(v) = v {
                if !v.is_finite() || v < 0.0 {
                    return Err(WaveError::config(key, format!("{v} must be finite and >= 0")));
                }
            }
        }
        if let (Some(rp), Some(rm)) = (self.rho_plus, self.rho_minus) {
            if rp + rm <= 0.0 {
                return Err(WaveError::config("params.rho_plus", "densities sum to zero"));
            }
            let a = (rp - rm) / (rp + rm);
            if (a - self.atwood).abs() > 1e-12 {
                return Err(WaveError::config(
                    "params.atwood",
                    format!("{} inconsistent with densities (expected {a})", self.atwood),
                ));
            }
        }
        Ok(())
    }

    /// `ρ⁺ + ρ⁻`; when densities are not given, `ρ± = 1 ± A`.
    pub fn density_sum(&self) -> f64 {
        match (self.rho_plus, self.rho_minus) {
            (Some(rp), Some(rm)) => rp + rm,
            _ => 2.0,
        }
    }
}

/// Elevation and its time derivative.
#[derive(Debug, Clone)]
pub struct GraphState {
    pub h: SpectralField,
    pub v: SpectralField,
}

/// Profile of a unidirectional model.
#[derive(Debug, Clone)]
pub struct WaveProfile {
    pub f: SpectralField,
}

/// Elevation and vortex-sheet strength of the first-order internal-wave system.
#[derive(Debug, Clone)]
pub struct SheetGraph {
    pub h: SpectralField,
    pub vorticity: SpectralField,
}

/// Any state a graph model can consume or produce.
#[derive(Debug, Clone)]
pub enum GraphModelState {
    Bidirectional(GraphState),
    Unidirectional(WaveProfile),
    FirstOrderSystem(SheetGraph),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViscousForm {
    Bidirectional,
    Unidirectional,
    UnidirectionalFull,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasicForm {
    Bidirectional,
    Unidirectional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InternalForm {
    Bidirectional,
    Unidirectional,
    FirstOrderSystem,
}

/// Families sharing a linear bidirectional operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFamily {
    Viscous,
    Odd,
    Inviscid,
    Internal,
}

fn wrong_state(expected: &str) -> WaveError {
    WaveError::Usage(format!("this form expects a {expected} state"))
}

pub fn rhs_viscous(state: &GraphModelState, p: &ModelParams, form: ViscousForm) -> Result<GraphModelState> {
    match (form, state) {
        (ViscousForm::Bidirectional, GraphModelState::Bidirectional(s)) => {
            viscous_bi(s, p).map(GraphModelState::Bidirectional)
        }
        (ViscousForm::Unidirectional, GraphModelState::Unidirectional(w)) => {
            viscous_uni(w, p, false).map(GraphModelState::Unidirectional)
        }
        (ViscousForm::UnidirectionalFull, GraphModelState::Unidirectional(w)) => {
            viscous_uni(w, p, true).map(GraphModelState::Unidirectional)
        }
        (ViscousForm::Bidirectional, _) => Err(wrong_state("bidirectional (h, v)")),
        _ => Err(wrong_state("unidirectional profile")),
    }
}

pub fn rhs_odd(state: &GraphModelState, p: &ModelParams, form: BasicForm) -> Result<GraphModelState> {
    match (form, state) {
        (BasicForm::Bidirectional, GraphModelState::Bidirectional(s)) => {
            odd_bi(s, p).map(GraphModelState::Bidirectional)
        }
        (BasicForm::Unidirectional, GraphModelState::Unidirectional(w)) => {
            odd_uni(w, p).map(GraphModelState::Unidirectional)
        }
        (BasicForm::Bidirectional, _) => Err(wrong_state("bidirectional (h, v)")),
        _ => Err(wrong_state("unidirectional profile")),
    }
}

pub fn rhs_inviscid(state: &GraphModelState, p: &ModelParams, form: BasicForm) -> Result<GraphModelState> {
    match (form, state) {
        (BasicForm::Bidirectional, GraphModelState::Bidirectional(s)) => {
            inviscid_bi(s, p).map(GraphModelState::Bidirectional)
        }
        (BasicForm::Unidirectional, GraphModelState::Unidirectional(w)) => {
            inviscid_uni(w, p).map(GraphModelState::Unidirectional)
        }
        (BasicForm::Bidirectional, _) => Err(wrong_state("bidirectional (h, v)")),
        _ => Err(wrong_state("unidirectional profile")),
    }
}

pub fn rhs_internal(state: &GraphModelState, p: &ModelParams, form: InternalForm) -> Result<GraphModelState> {
    match (form, state) {
        (InternalForm::Bidirectional, GraphModelState::Bidirectional(s)) => {
            internal_bi(s, p).map(GraphModelState::Bidirectional)
        }
        (InternalForm::Unidirectional, GraphModelState::Unidirectional(w)) => {
            internal_uni(w, p).map(GraphModelState::Unidirectional)
        }
        (InternalForm::FirstOrderSystem, GraphModelState::FirstOrderSystem(s)) => {
            internal_system(s, p).map(GraphModelState::FirstOrderSystem)
        }
        (InternalForm::Bidirectional, _) => Err(wrong_state("bidirectional (h, v)")),
        (InternalForm::Unidirectional, _) => Err(wrong_state("unidirectional profile")),
        _ => Err(wrong_state("(h, vorticity)")),
    }
}

/// Running sum that skips terms whose coefficient is exactly zero.
struct Terms(SpectralField);

impl Terms {
    fn new(first: SpectralField) -> Self {
        Terms(first)
    }

    fn add(&mut self, c: f64, term: impl FnOnce() -> SpectralField) {
        if c != 0.0 {
            let t = term();
            self.0 = if c == 1.0 { &self.0 + &t } else { self.0.zip_map(&t, |a, b| a + c * b) };
        }
    }

    fn done(self) -> SpectralField {
        self.0
    }
}

fn check_bi(s: &GraphState) -> Result<()> {
    if !s.h.same_grid(&s.v) {
        return Err(WaveError::Usage("h and v live on different grids".into()));
    }
    if !(s.h.is_finite() && s.v.is_finite()) {
        return Err(WaveError::Numeric("non-finite graph state".into()));
    }
    Ok(())
}

/// Validates a unidirectional profile and returns it with its mean projected out.
fn check_uni(w: &WaveProfile, p: &ModelParams) -> Result<SpectralField> {
    if !(p.epsilon > 0.0) {
        return Err(WaveError::Parameter(
            "unidirectional models need epsilon > 0".into(),
        ));
    }
    if !w.f.is_finite() {
        return Err(WaveError::Numeric("non-finite profile".into()));
    }
    let mean = w.f.mean();
    if mean.abs() > 1e-9 * w.f.max_abs().max(1.0) {
        return Err(WaveError::Precondition(format!(
            "unidirectional profile must have zero mean (mean = {mean:e})"
        )));
    }
    Ok(w.f.remove_mean())
}

fn check_atwood(p: &ModelParams) -> Result<()> {
    if !p.atwood.is_finite() || p.atwood.abs() > 1.0 {
        return Err(WaveError::Parameter(format!("|A| = {} exceeds 1", p.atwood.abs())));
    }
    Ok(())
}

/// `-Λh - βΛ³h + ε[-Λ((Hv)²) + ∂([H,h]Λh)] + εβ∂[H,h]Λ³h`, shared by the
/// viscous, odd and inviscid bidirectional models.
fn inviscid_part(h: &SpectralField, p: &ModelParams, hv: &SpectralField) -> Terms {
    let mut acc = Terms::new(-h.lambda());
    acc.add(-p.beta, || h.lambda_pow(3.0));
    acc.add(p.epsilon, || {
        -hv.dealiased_mul(hv).lambda() + commute(H, h, &h.lambda()).deriv(1)
    });
    acc.add(p.epsilon * p.beta, || commute(H, h, &h.lambda_pow(3.0)).deriv(1));
    acc
}

pub fn viscous_bi(s: &GraphState, p: &ModelParams) -> Result<GraphState> {
    check_bi(s)?;
    let (h, v) = (&s.h, &s.v);
    let (a1, a2, e) = (p.alpha1, p.alpha2, p.epsilon);
    let hv = v.hilbert();
    let mut acc = inviscid_part(h, p, &hv);
    acc.add(a1 + a2, || v.deriv(2));
    acc.add(-a1 * a2, || h.deriv(4));
    let h2 = h.deriv(2);
    acc.add(e * a2, || commute(H, &hv, &h2.hilbert()).deriv(1));
    acc.add(e * a2, || hv.dealiased_mul(&h2.hilbert()).lambda());
    acc.add(e * a1 * a2, || commute(D2, h, &h.deriv(1).lambda()).deriv(1));
    acc.add(-e * a1, || commute(D2, h, &hv).deriv(1));
    acc.add(-e * a2 * a2, || commute(H, &h2, &h2).deriv(1));
    Ok(GraphState {
        h: v.clone(),
        v: acc.done(),
    })
}

pub fn odd_bi(s: &GraphState, p: &ModelParams) -> Result<GraphState> {
    check_bi(s)?;
    let (h, v) = (&s.h, &s.v);
    let (a, e) = (p.alpha, p.epsilon);
    let hv = v.hilbert();
    let mut acc = inviscid_part(h, p, &hv);
    acc.add(a, || v.deriv(1).lambda());
    acc.add(-e * a, || commute(H, h, &v.deriv(1).lambda()).deriv(1));
    Ok(GraphState {
        h: v.clone(),
        v: acc.done(),
    })
}

pub fn inviscid_bi(s: &GraphState, p: &ModelParams) -> Result<GraphState> {
    check_bi(s)?;
    let hv = s.v.hilbert();
    Ok(GraphState {
        h: s.v.clone(),
        v: inviscid_part(&s.h, p, &hv).done(),
    })
}

pub fn internal_bi(s: &GraphState, p: &ModelParams) -> Result<GraphState> {
    check_bi(s)?;
    check_atwood(p)?;
    let (h, v) = (&s.h, &s.v);
    let mut acc = Terms::new(p.atwood * &h.lambda());
    acc.add(-p.beta, || h.lambda_pow(3.0));
    acc.add(-p.atwood, || v.hilbert().dealiased_mul(v).deriv(1));
    Ok(GraphState {
        h: v.clone(),
        v: acc.done(),
    })
}

/// Linear symbol `σ(κ)` of a unidirectional model: `f̂_t = σ f̂` for
/// infinitesimal data.
pub fn unidirectional_linear_symbol(family: ModelFamily, kappa: f64, p: &ModelParams) -> Complex64 {
    let ik = Complex64::new(0.0, kappa);
    let hil = MultiplierSymbol::Hilbert.eval(kappa);
    let e = p.epsilon;
    match family {
        ModelFamily::Viscous => {
            let n = MultiplierSymbol::ResolventN {
                alpha1: p.alpha1,
                alpha2: p.alpha2,
            }
            .eval(kappa);
            let inner = ik + (p.alpha1 + p.alpha2) * ik * ik + hil - p.beta * hil * ik * ik
                + p.alpha1 * p.alpha2 * ik * ik * ik;
            n * inner / (2.0 * e)
        }
        ModelFamily::Odd => {
            let m = MultiplierSymbol::ResolventM { alpha: p.alpha }.eval(kappa);
            m * (ik + hil + (p.alpha - p.beta) * hil * ik * ik) / e
        }
        ModelFamily::Inviscid => (ik + hil - p.beta * hil * ik * ik) / (2.0 * e),
        ModelFamily::Internal => (ik - p.atwood * hil - p.beta * hil * ik * ik) / (2.0 * e),
    }
}

pub fn viscous_uni(w: &WaveProfile, p: &ModelParams, full: bool) -> Result<WaveProfile> {
    let f = check_uni(w, p)?;
    let (a1, a2, b, e) = (p.alpha1, p.alpha2, p.beta, p.epsilon);
    let nsym = MultiplierSymbol::ResolventN {
        alpha1: a1,
        alpha2: a2,
    };
    let lin = f.multiplier(|k| unidirectional_linear_symbol(ModelFamily::Viscous, k, p) * (2.0 * e));

    let fx = f.deriv(1);
    let inv = f.lambda_pow(-1.0);
    let mut br = Terms::new(2.0 * &f.dealiased_mul(&fx));
    br.add(1.0, || commute(H, &inv, &f).lambda());
    br.add(b, || commute(H, &inv, &f.lambda_pow(2.0)).lambda());
    br.add(-a2, || commute(H, &f, &fx).lambda());
    br.add(a2, || f.dealiased_mul(&fx).deriv(1));
    br.add(a1, || commute(D2, &inv, &f).lambda());
    if full {
        br.add(a1 * a2, || commute(D2, &inv, &fx).lambda());
        let lf = f.lambda();
        br.add(-a2 * a2, || commute(H, &lf, &lf).lambda());
    }
    let rhs = lin.zip_map(&br.done().apply(&nsym), |l, n| l - e * n);
    Ok(WaveProfile {
        f: rhs.scale(0.5 / e),
    })
}

pub fn odd_uni(w: &WaveProfile, p: &ModelParams) -> Result<WaveProfile> {
    let f = check_uni(w, p)?;
    let (a, b, e) = (p.alpha, p.beta, p.epsilon);
    let msym = MultiplierSymbol::ResolventM { alpha: a };
    let lin = f.multiplier(|k| unidirectional_linear_symbol(ModelFamily::Odd, k, p) * e);
    let inv = f.lambda_pow(-1.0);
    let mut br = Terms::new(-2.0 * &f.dealiased_mul(&f.deriv(1)));
    br.add(-1.0, || commute(H, &inv, &f).lambda());
    br.add(a - b, || commute(H, &inv, &f.lambda_pow(2.0)).lambda());
    let rhs = lin.zip_map(&br.done().apply(&msym), |l, n| l + e * n);
    Ok(WaveProfile {
        f: rhs.scale(1.0 / e),
    })
}

pub fn inviscid_uni(w: &WaveProfile, p: &ModelParams) -> Result<WaveProfile> {
    let f = check_uni(w, p)?;
    let (b, e) = (p.beta, p.epsilon);
    let lin = f.multiplier(|k| unidirectional_linear_symbol(ModelFamily::Inviscid, k, p) * (2.0 * e));
    let inv = f.lambda_pow(-1.0);
    let mut br = Terms::new(2.0 * &f.dealiased_mul(&f.deriv(1)));
    br.add(1.0, || commute(H, &inv, &f).lambda());
    br.add(b, || commute(H, &inv, &f.lambda_pow(2.0)).lambda());
    let rhs = lin.zip_map(&br.done(), |l, n| l - e * n);
    Ok(WaveProfile {
        f: rhs.scale(0.5 / e),
    })
}

pub fn internal_uni(w: &WaveProfile, p: &ModelParams) -> Result<WaveProfile> {
    check_atwood(p)?;
    let f = check_uni(w, p)?;
    let (a, e) = (p.atwood, p.epsilon);
    let lin = f.multiplier(|k| unidirectional_linear_symbol(ModelFamily::Internal, k, p) * (2.0 * e));
    let mut acc = Terms::new(lin);
    acc.add(a * e, || f.hilbert().dealiased_mul(&f).deriv(1));
    Ok(WaveProfile {
        f: acc.done().scale(0.5 / e),
    })
}

/// `h_t = ½Hϖ`, `ϖ_t = -∂[(A/4)(Hϖ)² - (A/4)ϖ² - 2Agh]`.
pub fn internal_system(s: &SheetGraph, p: &ModelParams) -> Result<SheetGraph> {
    check_atwood(p)?;
    if !s.h.same_grid(&s.vorticity) {
        return Err(WaveError::Usage("h and vorticity live on different grids".into()));
    }
    let a = p.atwood;
    let hw = s.vorticity.hilbert();
    let mut bracket = Terms::new((-2.0 * a * p.gravity) * &s.h);
    bracket.add(0.25 * a, || hw.dealiased_mul(&hw));
    bracket.add(-0.25 * a, || s.vorticity.dealiased_mul(&s.vorticity));
    Ok(SheetGraph {
        h: hw.scale(0.5),
        vorticity: -bracket.done().deriv(1),
    })
}

fn sinhc_times(delta: Complex64, t: f64) -> Complex64 {
    // sinh(δt)/δ, continuous through δ = 0
    let x = delta * t;
    if x.norm() < 1e-4 {
        let x2 = x * x;
        t * (1.0 + x2 / 6.0 + x2 * x2 / 120.0)
    } else {
        x.sinh() / delta
    }
}

/// Exact single-mode solution of a linearized bidirectional model.
///
/// Returns the `e^{ikx}` amplitudes `(ĥ(t), v̂(t))` for initial amplitudes
/// `(h0, v0)`, where the mode obeys `λ² + Dλ + Ω = 0`.
pub fn linear_mode_solution(
    family: ModelFamily,
    k: i64,
    p: &ModelParams,
    t: f64,
    h0: f64,
    v0: f64,
) -> Result<(Complex64, Complex64)> {
    if k == 0 {
        return Err(WaveError::Parameter("linear_mode_solution needs k != 0".into()));
    }
    let (d, omega) = characteristic(family, k as f64, p);
    let lam = -0.5 * d;
    let delta = (0.25 * d * d - omega).sqrt();
    let s = sinhc_times(delta, t);
    let ch = (delta * t).cosh();
    let growth = (lam * t).exp();
    let h0c = Complex64::new(h0, 0.0);
    let rest = Complex64::new(v0, 0.0) - lam * h0c;
    let h = growth * (h0c * ch + rest * s);
    let v = lam * h + growth * (h0c * delta * delta * s + rest * ch);
    Ok((h, v))
}

/// Damping coefficient `D` and stiffness `Ω` of mode `κ`.
pub fn characteristic(family: ModelFamily, kappa: f64, p: &ModelParams) -> (Complex64, Complex64) {
    let ak = kappa.abs();
    match family {
        ModelFamily::Viscous => (
            Complex64::new((p.alpha1 + p.alpha2) * kappa * kappa, 0.0),
            Complex64::new(ak + p.beta * ak.powi(3) + p.alpha1 * p.alpha2 * kappa.powi(4), 0.0),
        ),
        ModelFamily::Odd => (
            Complex64::new(0.0, -p.alpha * ak * kappa),
            Complex64::new(ak + p.beta * ak.powi(3), 0.0),
        ),
        ModelFamily::Inviscid => (
            Complex64::new(0.0, 0.0),
            Complex64::new(ak + p.beta * ak.powi(3), 0.0),
        ),
        ModelFamily::Internal => (
            Complex64::new(0.0, 0.0),
            Complex64::new(-p.atwood * ak + p.beta * ak.powi(3), 0.0),
        ),
    }
}
