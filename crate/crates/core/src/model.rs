//! Model identifiers and right-hand sides over flat state vectors.
//!
//! A flat state is the concatenation of the model's fields (see
//! [`ModelId::fields`]), each holding one value per grid node.

use std::fmt;
use std::str::FromStr;

use crate::curve_models::{br_velocity, kh_rhs, refined_kh_rhs, zmodel_rhs, CurveState, PlanarField};
use crate::error::{Result, WaveError};
use crate::graph_models::{
    internal_bi, internal_system, internal_uni, inviscid_bi, inviscid_uni, odd_bi, odd_uni, viscous_bi, viscous_uni,
    GraphState, ModelFamily, ModelParams, SheetGraph, WaveProfile,
};
use crate::spectral::{PeriodicGrid, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    ViscousBi,
    ViscousUni,
    ViscousUniFull,
    OddBi,
    OddUni,
    InviscidBi,
    InviscidUni,
    InternalBi,
    InternalUni,
    InternalSys,
    ZModel,
    Kh,
    KhRefined,
    BrReference,
}

/// Layout of a model's state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    /// `(h, v)` with `v = h_t`.
    Bidirectional,
    /// `f`.
    Unidirectional,
    /// `(h, vorticity)`.
    SheetGraph,
    /// `(z1, z2, vorticity)`.
    Curve,
}

impl ModelId {
    pub const ALL: [ModelId; 14] = [
        ModelId::ViscousBi,
        ModelId::ViscousUni,
        ModelId::ViscousUniFull,
        ModelId::OddBi,
        ModelId::OddUni,
        ModelId::InviscidBi,
        ModelId::InviscidUni,
        ModelId::InternalBi,
        ModelId::InternalUni,
        ModelId::InternalSys,
        ModelId::ZModel,
        ModelId::Kh,
        ModelId::KhRefined,
        ModelId::BrReference,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::ViscousBi => "viscous-bi",
            ModelId::ViscousUni => "viscous-uni",
            ModelId::ViscousUniFull => "viscous-uni-full",
            ModelId::OddBi => "odd-bi",
            ModelId::OddUni => "odd-uni",
            ModelId::InviscidBi => "inviscid-bi",
            ModelId::InviscidUni => "inviscid-uni",
            ModelId::InternalBi => "internal-bi",
            ModelId::InternalUni => "internal-uni",
            ModelId::InternalSys => "internal-sys",
            ModelId::ZModel => "zmodel",
            ModelId::Kh => "kh",
            ModelId::KhRefined => "kh-refined",
            ModelId::BrReference => "br-reference",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ModelId::ViscousBi => "bidirectional h-model with shear viscosity",
            ModelId::ViscousUni => "unidirectional viscous model",
            ModelId::ViscousUniFull => "unidirectional viscous model with the alpha1*alpha2 and alpha2^2 terms",
            ModelId::OddBi => "bidirectional h-model with odd viscosity",
            ModelId::OddUni => "unidirectional odd-viscosity model",
            ModelId::InviscidBi => "bidirectional inviscid h-model",
            ModelId::InviscidUni => "unidirectional inviscid model",
            ModelId::InternalBi => "second-order internal-wave equation",
            ModelId::InternalUni => "unidirectional internal-wave model",
            ModelId::InternalSys => "first-order (h, vorticity) internal-wave system",
            ModelId::ZModel => "closed-curve z-model with gravity and surface tension",
            ModelId::Kh => "Kelvin-Helmholtz z-model, frozen vorticity",
            ModelId::KhRefined => "refined Kelvin-Helmholtz model, frozen zero-mean vorticity",
            ModelId::BrReference => "Birkhoff-Rott quadrature, frozen vorticity (A = gamma = 0)",
        }
    }

    pub fn kind(self) -> StateKind {
        match self {
            ModelId::ViscousBi | ModelId::OddBi | ModelId::InviscidBi | ModelId::InternalBi => StateKind::Bidirectional,
            ModelId::ViscousUni
            | ModelId::ViscousUniFull
            | ModelId::OddUni
            | ModelId::InviscidUni
            | ModelId::InternalUni => StateKind::Unidirectional,
            ModelId::InternalSys => StateKind::SheetGraph,
            ModelId::ZModel | ModelId::Kh | ModelId::KhRefined | ModelId::BrReference => StateKind::Curve,
        }
    }

    pub fn fields(self) -> &'static [&'static str] {
        match self.kind() {
            StateKind::Bidirectional => &["h", "v"],
            StateKind::Unidirectional => &["f"],
            StateKind::SheetGraph => &["h", "vorticity"],
            StateKind::Curve => &["z1", "z2", "vorticity"],
        }
    }

    pub fn is_curve(self) -> bool {
        self.kind() == StateKind::Curve
    }

    /// Linear family of a graph model.
    pub fn family(self) -> Option<ModelFamily> {
        match self {
            ModelId::ViscousBi | ModelId::ViscousUni | ModelId::ViscousUniFull => Some(ModelFamily::Viscous),
            ModelId::OddBi | ModelId::OddUni => Some(ModelFamily::Odd),
            ModelId::InviscidBi | ModelId::InviscidUni => Some(ModelFamily::Inviscid),
            ModelId::InternalBi | ModelId::InternalUni | ModelId::InternalSys => Some(ModelFamily::Internal),
            _ => None,
        }
    }

    /// Whether the sheet strength is carried unchanged through time.
    pub fn freezes_vorticity(self) -> bool {
        matches!(self, ModelId::Kh | ModelId::KhRefined | ModelId::BrReference)
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = WaveError;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = ModelId::ALL.iter().map(|m| m.as_str()).collect();
                WaveError::config("model", format!("unknown model id `{s}` (known: {})", known.join(", ")))
            })
    }
}

/// A model bound to its parameters and grid.
#[derive(Debug, Clone)]
pub struct Model {
    pub id: ModelId,
    pub params: ModelParams,
    pub grid: PeriodicGrid,
    /// Relative Krasny threshold applied to curve states before evaluating
    /// the right-hand side; `0` disables it.
    pub noise_filter: f64,
}

impl Model {
    pub fn new(id: ModelId, params: ModelParams, grid: PeriodicGrid) -> Result<Self> {
        params.validate()?;
        if id.kind() == StateKind::Unidirectional && !(params.epsilon > 0.0) {
            return Err(WaveError::config("params.epsilon", "unidirectional models need epsilon > 0"));
        }
        if id == ModelId::BrReference && (params.atwood != 0.0 || params.surface_tension != 0.0) {
            return Err(WaveError::config(
                "params.atwood",
                "br-reference needs atwood = 0 and surface_tension = 0",
            ));
        }
        Ok(Self {
            id,
            params,
            grid,
            noise_filter: 0.0,
        })
    }

    pub fn with_noise_filter(mut self, rel: f64) -> Self {
        self.noise_filter = rel;
        self
    }

    pub fn n_fields(&self) -> usize {
        self.id.fields().len()
    }

    pub fn state_len(&self) -> usize {
        self.n_fields() * self.grid.n_nodes()
    }

    /// Splits a flat state into fields.
    pub fn split(&self, y: &[f64]) -> Result<Vec<SpectralField>> {
        if y.len() != self.state_len() {
            return Err(WaveError::Usage(format!(
                "{} state needs {} values, got {}",
                self.id,
                self.state_len(),
                y.len()
            )));
        }
        y.chunks(self.grid.n_nodes())
            .map(|c| SpectralField::new(&self.grid, c.to_vec()))
            .collect()
    }

    pub fn join(&self, fields: &[SpectralField]) -> Result<Vec<f64>> {
        if fields.len() != self.n_fields() || fields.iter().any(|f| f.grid() != &self.grid) {
            return Err(WaveError::Usage(format!("{} state needs {} fields on the model grid", self.id, self.n_fields())));
        }
        Ok(fields.iter().flat_map(|f| f.values().iter().copied()).collect())
    }

    /// The curve of a curve-model state.
    pub fn curve(&self, y: &[f64]) -> Result<CurveState> {
        if !self.id.is_curve() {
            return Err(WaveError::Usage(format!("{} is not a curve model", self.id)));
        }
        let mut f = self.split(y)?.into_iter();
        let (z1, z2, w) = (f.next().unwrap(), f.next().unwrap(), f.next().unwrap());
        CurveState::new(z1, z2, w)
    }

    /// Elevation `h` (or profile `f`) of a graph-model state.
    pub fn primary(&self, y: &[f64]) -> Result<SpectralField> {
        if self.id.is_curve() {
            return Err(WaveError::Usage(format!("{} has no graph profile", self.id)));
        }
        let n = self.grid.n_nodes();
        if y.len() != self.state_len() {
            return Err(WaveError::Usage(format!("state length {} != {}", y.len(), self.state_len())));
        }
        SpectralField::new(&self.grid, y[..n].to_vec())
    }

    /// Validates an initial state against the model's preconditions.
    pub fn check_initial(&self, y: &[f64]) -> Result<()> {
        let fields = self.split(y)?;
        match self.id {
            id if id.kind() == StateKind::Unidirectional => {
                let f = &fields[0];
                if f.mean().abs() > 1e-9 * f.max_abs().max(1.0) {
                    return Err(WaveError::config("initial.f", "unidirectional profile must have zero mean"));
                }
            }
            ModelId::KhRefined => {
                let w = &fields[2];
                if w.mean().abs() > 1e-10 * w.max_abs().max(1.0) {
                    return Err(WaveError::config("initial.vorticity", "kh-refined needs zero-mean vorticity"));
                }
            }
            _ => {}
        }
        if self.id.is_curve() {
            self.curve(y).map_err(|e| WaveError::config("initial", e.to_string()))?;
        }
        Ok(())
    }

    /// `dy = F(y)`.
    pub fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        if dy.len() != y.len() {
            return Err(WaveError::Usage("derivative buffer has the wrong length".into()));
        }
        let p = &self.params;
        let mut f = self.split(y)?.into_iter();
        let out: Vec<SpectralField> = match self.id.kind() {
            StateKind::Bidirectional => {
                let s = GraphState {
                    h: f.next().unwrap(),
                    v: f.next().unwrap(),
                };
                let d = match self.id {
                    ModelId::ViscousBi => viscous_bi(&s, p)?,
                    ModelId::OddBi => odd_bi(&s, p)?,
                    ModelId::InviscidBi => inviscid_bi(&s, p)?,
                    _ => internal_bi(&s, p)?,
                };
                vec![d.h, d.v]
            }
            StateKind::Unidirectional => {
                let w = WaveProfile { f: f.next().unwrap() };
                let d = match self.id {
                    ModelId::ViscousUni => viscous_uni(&w, p, false)?,
                    ModelId::ViscousUniFull => viscous_uni(&w, p, true)?,
                    ModelId::OddUni => odd_uni(&w, p)?,
                    ModelId::InviscidUni => inviscid_uni(&w, p)?,
                    _ => internal_uni(&w, p)?,
                };
                vec![d.f]
            }
            StateKind::SheetGraph => {
                let s = SheetGraph {
                    h: f.next().unwrap(),
                    vorticity: f.next().unwrap(),
                };
                let d = internal_system(&s, p)?;
                vec![d.h, d.vorticity]
            }
            StateKind::Curve => {
                let mut next = || {
                    let g = f.next().unwrap();
                    if self.noise_filter > 0.0 {
                        g.noise_filter(self.noise_filter)
                    } else {
                        g
                    }
                };
                let c = CurveState::new(next(), next(), next())?;
                let (zt, wt): (PlanarField, SpectralField) = match self.id {
                    ModelId::ZModel => zmodel_rhs(&c, p)?,
                    ModelId::Kh => (kh_rhs(&c, &c.vorticity)?, self.grid.zeros()),
                    ModelId::KhRefined => (refined_kh_rhs(&c, &c.vorticity)?, self.grid.zeros()),
                    _ => (br_velocity(&c, &c.vorticity)?, self.grid.zeros()),
                };
                vec![zt.x, zt.y, wt]
            }
        };
        let n = self.grid.n_nodes();
        for (chunk, field) in dy.chunks_mut(n).zip(&out) {
            chunk.copy_from_slice(field.values());
        }
        Ok(())
    }
}
