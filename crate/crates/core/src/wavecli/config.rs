//! Run configuration: TOML schema, preset expansion, validation and
//! initial-data construction.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};
use crate::graph_models::ModelParams;
use crate::model::{Model, ModelId, StateKind};
use crate::spectral::PeriodicGrid;
use crate::timestep::IntegratorConfig;

use super::presets;

/// Largest grid used for viscous bidirectional runs unless the config
/// explicitly asks for more with `allow_stiff = true`.
pub const VISCOUS_BI_NODE_CAP: usize = 512;

/// One Fourier mode `(k, cosine amplitude, sine amplitude)`.
pub type Mode = [f64; 3];

fn one() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

fn is_false(v: &bool) -> bool {
    !*v
}

fn default_nodes() -> usize {
    256
}

fn default_sample_every() -> f64 {
    0.1
}

/// Initial data: an optional named profile plus added Fourier modes per
/// field, all multiplied by `scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<Mode>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<Mode>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<Mode>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z1: Option<Vec<Mode>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z2: Option<Vec<Mode>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vorticity: Option<Vec<Mode>>,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self {
            preset: None,
            scale: 1.0,
            h: None,
            v: None,
            f: None,
            z1: None,
            z2: None,
            vorticity: None,
        }
    }
}

impl InitialSpec {
    fn modes(&self, field: &str) -> Option<&Vec<Mode>> {
        match field {
            "h" => self.h.as_ref(),
            "v" => self.v.as_ref(),
            "f" => self.f.as_ref(),
            "z1" => self.z1.as_ref(),
            "z2" => self.z2.as_ref(),
            "vorticity" => self.vorticity.as_ref(),
            _ => None,
        }
    }

    fn listed_fields(&self) -> Vec<&'static str> {
        ["h", "v", "f", "z1", "z2", "vorticity"]
            .into_iter()
            .filter(|f| self.modes(f).is_some())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: String,
    #[serde(default = "default_nodes")]
    pub n_nodes: usize,
    #[serde(default = "one")]
    pub t_max: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: f64,
    #[serde(default)]
    pub diagnostics: Vec<String>,
    #[serde(default)]
    pub events: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub allow_stiff: bool,
    /// Relative Krasny threshold for curve models (0 = off).
    #[serde(default)]
    pub noise_filter: f64,
    #[serde(default)]
    pub params: ModelParams,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub initial: InitialSpec,
}

/// A diagnostic written to `diagnostics.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiagnosticLabel {
    H1,
    Hs(f64),
    Wiener(f64),
    WienerStrip,
    ArcChord,
    MaxCurvature,
    SelfIntersect,
}

impl DiagnosticLabel {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let arg = |prefix: &str| -> Option<Result<f64>> {
            let inner = s.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
            Some(
                inner
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite() && *v >= 0.0)
                    .ok_or_else(|| WaveError::config("diagnostics", format!("bad argument in `{s}`"))),
            )
        };
        match s {
            "h1" => return Ok(DiagnosticLabel::H1),
            "wiener-strip" => return Ok(DiagnosticLabel::WienerStrip),
            "arc-chord" => return Ok(DiagnosticLabel::ArcChord),
            "max-curvature" => return Ok(DiagnosticLabel::MaxCurvature),
            "self-intersect" => return Ok(DiagnosticLabel::SelfIntersect),
            _ => {}
        }
        if let Some(v) = arg("hs") {
            return v.map(DiagnosticLabel::Hs);
        }
        if let Some(v) = arg("wiener") {
            return v.map(DiagnosticLabel::Wiener);
        }
        Err(WaveError::config(
            "diagnostics",
            format!("unknown norm label `{s}` (known: h1, hs(s), wiener(nu), wiener-strip, arc-chord, max-curvature, self-intersect)"),
        ))
    }

    pub fn for_curves(self) -> bool {
        matches!(
            self,
            DiagnosticLabel::ArcChord | DiagnosticLabel::MaxCurvature | DiagnosticLabel::SelfIntersect
        )
    }
}

impl fmt::Display for DiagnosticLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagnosticLabel::H1 => write!(f, "h1"),
            DiagnosticLabel::Hs(s) => write!(f, "hs({s})"),
            DiagnosticLabel::Wiener(nu) => write!(f, "wiener({nu})"),
            DiagnosticLabel::WienerStrip => write!(f, "wiener-strip"),
            DiagnosticLabel::ArcChord => write!(f, "arc-chord"),
            DiagnosticLabel::MaxCurvature => write!(f, "max-curvature"),
            DiagnosticLabel::SelfIntersect => write!(f, "self-intersect"),
        }
    }
}

/// A stopping condition for curve runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventSpec {
    MaxCurvatureAbove(f64),
    ArcChordAbove(f64),
    SelfIntersect,
}

impl EventSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "self-intersect" {
            return Ok(EventSpec::SelfIntersect);
        }
        let bad = || {
            WaveError::config(
                "events",
                format!("unknown event `{t}` (known: `max-curvature > X`, `arc-chord > X`, `self-intersect`)"),
            )
        };
        let (lhs, rhs) = t.split_once('>').ok_or_else(bad)?;
        let x: f64 = rhs
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite() && *v > 0.0)
            .ok_or_else(|| WaveError::config("events", format!("bad threshold in `{t}`")))?;
        match lhs.trim() {
            "max-curvature" => Ok(EventSpec::MaxCurvatureAbove(x)),
            "arc-chord" => Ok(EventSpec::ArcChordAbove(x)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for EventSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventSpec::MaxCurvatureAbove(x) => write!(f, "max-curvature > {x}"),
            EventSpec::ArcChordAbove(x) => write!(f, "arc-chord > {x}"),
            EventSpec::SelfIntersect => write!(f, "self-intersect"),
        }
    }
}

/// Best-effort dotted key path for a TOML error span.
fn key_path_at(text: &str, offset: usize) -> String {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let line_end = text[offset..].find('\n').map_or(text.len(), |i| offset + i);
    let line = text[line_start..line_end].trim();
    let header = |l: &str| -> Option<String> {
        let l = l.trim();
        l.strip_prefix('[')
            .and_then(|r| r.split(']').next())
            .map(|s| s.trim_matches(|c| c == '[' || c == ' ').to_string())
    };
    if let Some(h) = header(line) {
        return h;
    }
    let key = line.split('=').next().unwrap_or("").trim().to_string();
    let section = before[..line_start].lines().rev().find_map(header);
    match section {
        Some(s) if !key.is_empty() => format!("{s}.{key}"),
        Some(s) => s,
        None if key.is_empty() => "<root>".into(),
        None => key,
    }
}

fn toml_error(text: &str, e: &toml::de::Error) -> WaveError {
    let key = e.span().map_or_else(|| "<root>".to_string(), |s| key_path_at(text, s.start));
    WaveError::config(key, e.message().to_string())
}

/// Overlays `over` onto `base`, descending into tables.
fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Parses configuration text, expanding a top-level `preset = "..."` (other
/// keys override the preset), and returns the validated, fully resolved
/// configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    Ok(parse_unresolved(text)?.resolve()?.0)
}

/// Parses and expands presets without validating; callers apply overrides
/// and then [`RunConfig::resolve`].
pub fn parse_unresolved(text: &str) -> Result<RunConfig> {
    let mut table: toml::Table = text.parse().map_err(|e| toml_error(text, &e))?;
    let Some(p) = table.remove("preset") else {
        return toml::from_str(text).map_err(|e| toml_error(text, &e));
    };
    let name = p
        .as_str()
        .ok_or_else(|| WaveError::config("preset", "must be a string"))?
        .to_string();
    let preset = presets::find(&name)?;
    let mut base =
        toml::Table::try_from(&preset.config).map_err(|e| WaveError::config("preset", e.to_string()))?;
    merge(&mut base, table);
    // merged tables carry no spans; recover the key from the message
    base.try_into().map_err(|e: toml::de::Error| {
        let key = unknown_field_key(e.message()).unwrap_or_else(|| "<root>".into());
        WaveError::config(key, e.message().to_string())
    })
}

fn unknown_field_key(msg: &str) -> Option<String> {
    let rest = msg.split("unknown field `").nth(1)?;
    Some(rest.split('`').next()?.to_string())
}

impl RunConfig {
    /// Config for `model` with every other knob at its default.
    pub fn for_model(model: ModelId) -> Self {
        Self {
            name: None,
            model: model.as_str().to_string(),
            n_nodes: default_nodes(),
            t_max: 1.0,
            sample_every: default_sample_every(),
            diagnostics: Vec::new(),
            events: Vec::new(),
            output_dir: None,
            seed: 0,
            allow_stiff: false,
            noise_filter: 0.0,
            params: ModelParams::default(),
            integrator: IntegratorConfig::default(),
            initial: InitialSpec::default(),
        }
    }

    pub fn model_id(&self) -> Result<ModelId> {
        self.model.parse()
    }

    /// Output-directory label: the config name, else the model id.
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.model.clone())
    }

    pub fn grid(&self) -> Result<PeriodicGrid> {
        PeriodicGrid::standard(self.n_nodes)
    }

    pub fn build_model(&self) -> Result<Model> {
        Ok(Model::new(self.model_id()?, self.params, self.grid()?)?.with_noise_filter(self.noise_filter))
    }

    pub fn diagnostic_labels(&self) -> Result<Vec<DiagnosticLabel>> {
        self.diagnostics.iter().map(|s| DiagnosticLabel::parse(s)).collect()
    }

    pub fn event_specs(&self) -> Result<Vec<EventSpec>> {
        self.events.iter().map(|s| EventSpec::parse(s)).collect()
    }

    /// Validates and fills defaults; returns the resolved config and any
    /// warnings. Resolving a resolved config is the identity.
    pub fn resolve(mut self) -> Result<(RunConfig, Vec<String>)> {
        let mut warnings = Vec::new();
        let id = self.model_id()?;
        if self.n_nodes < 8 || !self.n_nodes.is_power_of_two() {
            return Err(WaveError::config(
                "n_nodes",
                format!("{} is not a power of two >= 8", self.n_nodes),
            ));
        }
        if id == ModelId::ViscousBi && self.n_nodes > VISCOUS_BI_NODE_CAP && !self.allow_stiff {
            warnings.push(format!(
                "viscous-bi is stiff for explicit integration; n_nodes capped from {} to {VISCOUS_BI_NODE_CAP} (set allow_stiff = true to keep it)",
                self.n_nodes
            ));
            self.n_nodes = VISCOUS_BI_NODE_CAP;
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(WaveError::config("t_max", format!("{} must be > 0", self.t_max)));
        }
        if !(self.sample_every.is_finite() && self.sample_every > 0.0) {
            return Err(WaveError::config(
                "sample_every",
                format!("{} must be > 0", self.sample_every),
            ));
        }
        self.integrator.validate()?;
        if !(self.noise_filter.is_finite() && (0.0..1.0).contains(&self.noise_filter)) {
            return Err(WaveError::config("noise_filter", format!("{} is not in [0, 1)", self.noise_filter)));
        }
        if self.noise_filter > 0.0 && !id.is_curve() {
            return Err(WaveError::config("noise_filter", format!("{id} is not a curve model")));
        }
        if !(self.initial.scale.is_finite()) {
            return Err(WaveError::config("initial.scale", "must be finite"));
        }

        if self.diagnostics.is_empty() {
            self.diagnostics = if id.is_curve() {
                vec!["max-curvature".into(), "arc-chord".into(), "self-intersect".into()]
            } else {
                vec!["h1".into()]
            };
        }
        let grid = self.grid()?;
        for label in self.diagnostic_labels()? {
            if label.for_curves() != id.is_curve() {
                return Err(WaveError::config(
                    "diagnostics",
                    format!("`{label}` does not apply to {id}"),
                ));
            }
            if let DiagnosticLabel::Wiener(nu) = label {
                let x = nu * (self.n_nodes / 2) as f64;
                if x > crate::diagnostics::WIENER_EXPONENT_BUDGET {
                    return Err(WaveError::config(
                        "diagnostics",
                        format!("wiener({nu}) overflows on {} nodes (nu*k_max = {x})", self.n_nodes),
                    ));
                }
            }
            if label == DiagnosticLabel::WienerStrip && id.kind() != StateKind::Unidirectional {
                return Err(WaveError::config(
                    "diagnostics",
                    "wiener-strip applies to unidirectional models",
                ));
            }
        }
        let events = self.event_specs()?;
        if !events.is_empty() && !id.is_curve() {
            return Err(WaveError::config("events", format!("{id} has no curve events")));
        }

        let model = Model::new(id, self.params, grid)?;
        let y0 = self.initial_state(&model)?;
        model.check_initial(&y0)?;
        Ok((self, warnings))
    }

    /// Resolved config as TOML; parsing it back yields the same config.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| WaveError::Io(format!("cannot serialise config: {e}")))
    }

    /// Builds the flat initial state for `model`.
    pub fn initial_state(&self, model: &Model) -> Result<Vec<f64>> {
        let grid = &model.grid;
        let fields = model.id.fields();
        let mut values: Vec<Vec<f64>> = vec![vec![0.0; grid.n_nodes()]; fields.len()];
        let slot = |name: &str| fields.iter().position(|f| *f == name);

        if let Some(name) = &self.initial.preset {
            let profile = presets::initial_profile(name)?;
            for (field, func) in profile {
                let i = slot(field).ok_or_else(|| {
                    WaveError::config(
                        "initial.preset",
                        format!("`{name}` sets `{field}`, which {} does not have", model.id),
                    )
                })?;
                for (j, v) in values[i].iter_mut().enumerate() {
                    *v += func(grid.node(j));
                }
            }
        }
        for field in self.initial.listed_fields() {
            let i = slot(field).ok_or_else(|| {
                WaveError::config(
                    format!("initial.{field}"),
                    format!("{} has no field `{field}` (fields: {})", model.id, fields.join(", ")),
                )
            })?;
            for m in self.initial.modes(field).unwrap() {
                let [k, a, b] = *m;
                if !(k >= 0.0 && k.fract() == 0.0 && k < (grid.n_nodes() / 2) as f64) {
                    return Err(WaveError::config(
                        format!("initial.{field}"),
                        format!("mode number {k} must be an integer in [0, n_nodes/2)"),
                    ));
                }
                if !(a.is_finite() && b.is_finite()) {
                    return Err(WaveError::config(format!("initial.{field}"), "amplitudes must be finite"));
                }
                for (j, v) in values[i].iter_mut().enumerate() {
                    let x = k * grid.node(j);
                    *v += a * x.cos() + b * x.sin();
                }
            }
        }
        let s = self.initial.scale;
        Ok(values.into_iter().flatten().map(|v| s * v).collect())
    }
}
