//! Named scenarios and named initial profiles.

use crate::error::{Result, WaveError};
use crate::graph_models::ModelParams;
use crate::model::ModelId;
use crate::timestep::IntegratorConfig;

use super::config::{InitialSpec, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPreset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: RunConfig,
}

pub type Profile = fn(f64) -> f64;

fn circle_x(a: f64) -> f64 {
    a.cos()
}

fn circle_y(a: f64) -> f64 {
    a.sin()
}

fn circle_cw_y(a: f64) -> f64 {
    -a.sin()
}

fn graph1(x: f64) -> f64 {
    x.sin() / 3.0
}

fn graph2(x: f64) -> f64 {
    0.1 * (2.0 / 5.0 * (0.25 * ((5.0 * x).sin() + 0.1 * (8.0 * x).sin())))
}

pub const INITIAL_PROFILES: [&str; 4] = ["circle", "circle-cw", "graph-1", "graph-2"];

/// Field-wise profiles of a named initial condition.
pub fn initial_profile(name: &str) -> Result<Vec<(&'static str, Profile)>> {
    match name {
        "circle" => Ok(vec![("z1", circle_x as Profile), ("z2", circle_y as Profile)]),
        // clockwise: the rotated tangent points outward, so the `+` fluid is outside
        "circle-cw" => Ok(vec![("z1", circle_x as Profile), ("z2", circle_cw_y as Profile)]),
        "graph-1" => Ok(vec![("h", graph1 as Profile)]),
        "graph-2" => Ok(vec![("h", graph2 as Profile)]),
        _ => Err(WaveError::config(
            "initial.preset",
            format!("unknown initial profile `{name}` (known: {})", INITIAL_PROFILES.join(", ")),
        )),
    }
}

/// Krasny threshold of the bubble and drop runs.
pub const CURVE_NOISE_FILTER: f64 = 1e-11;

fn named(name: &str, model: ModelId) -> RunConfig {
    RunConfig {
        name: Some(name.to_string()),
        ..RunConfig::for_model(model)
    }
}

fn curve_run(name: &str, atwood: f64) -> RunConfig {
    RunConfig {
        n_nodes: 2048,
        t_max: 2.0,
        sample_every: 0.05,
        diagnostics: vec!["max-curvature".into(), "arc-chord".into(), "self-intersect".into()],
        events: vec!["max-curvature > 1000".into(), "self-intersect".into()],
        noise_filter: CURVE_NOISE_FILTER,
        params: ModelParams {
            atwood,
            gravity: 9.8,
            surface_tension: 0.0,
            beta: 0.0,
            ..ModelParams::default()
        },
        initial: InitialSpec {
            preset: Some("circle-cw".into()),
            ..InitialSpec::default()
        },
        ..named(name, ModelId::ZModel)
    }
}

fn graph_run(name: &str, profile: &str) -> RunConfig {
    RunConfig {
        t_max: 5.0,
        diagnostics: vec!["h1".into()],
        params: ModelParams {
            epsilon: 1.0,
            beta: 0.0,
            surface_tension: 0.0,
            ..ModelParams::default()
        },
        initial: InitialSpec {
            preset: Some(profile.into()),
            ..InitialSpec::default()
        },
        ..named(name, ModelId::InviscidBi)
    }
}

pub fn all() -> Vec<ScenarioPreset> {
    vec![
        ScenarioPreset {
            name: "bubble",
            description: "rising bubble: z-model, A = 1/3, g = 9.8, unit circle, zero sheet strength",
            config: curve_run("bubble", 1.0 / 3.0),
        },
        ScenarioPreset {
            name: "drop",
            description: "falling drop: z-model, A = -1/3, g = 9.8, unit circle, zero sheet strength",
            config: curve_run("drop", -1.0 / 3.0),
        },
        ScenarioPreset {
            name: "graph-1",
            description: "inviscid-bi from h = sin(x)/3 at rest",
            config: graph_run("graph-1", "graph-1"),
        },
        ScenarioPreset {
            name: "graph-2",
            description: "inviscid-bi from h = 0.1(2/5)(1/4)(sin 5x + 0.1 sin 8x) at rest",
            config: graph_run("graph-2", "graph-2"),
        },
        ScenarioPreset {
            name: "theorem1",
            description: "viscous-uni H1 decay monitor: eps = alpha1 = alpha2 = 1, f = 0.01 sin x",
            config: RunConfig {
                n_nodes: 128,
                t_max: 10.0,
                params: ModelParams {
                    epsilon: 1.0,
                    alpha1: 1.0,
                    alpha2: 1.0,
                    ..ModelParams::default()
                },
                diagnostics: vec!["h1".into()],
                integrator: IntegratorConfig::monitor(),
                initial: InitialSpec {
                    f: Some(vec![[1.0, 0.0, 0.01]]),
                    ..InitialSpec::default()
                },
                ..named("theorem1", ModelId::ViscousUni)
            },
        },
        ScenarioPreset {
            name: "theorem2",
            description: "internal-uni analytic-strip monitor: eps = A = 1, f = 0.05 sin x, up to 0.9 of the horizon",
            config: RunConfig {
                n_nodes: 128,
                t_max: 1.65,
                sample_every: 0.05,
                params: ModelParams {
                    epsilon: 1.0,
                    atwood: 1.0,
                    ..ModelParams::default()
                },
                diagnostics: vec!["wiener-strip".into(), "h1".into()],
                integrator: IntegratorConfig::monitor(),
                initial: InitialSpec {
                    f: Some(vec![[1.0, 0.0, 0.05]]),
                    ..InitialSpec::default()
                },
                ..named("theorem2", ModelId::InternalUni)
            },
        },
        ScenarioPreset {
            name: "kh-circle",
            description: "refined Kelvin-Helmholtz model on the unit circle with sheet strength sin(alpha)",
            config: RunConfig {
                t_max: 1.0,
                diagnostics: vec!["max-curvature".into(), "arc-chord".into(), "self-intersect".into()],
                initial: InitialSpec {
                    preset: Some("circle".into()),
                    vorticity: Some(vec![[1.0, 0.0, 1.0]]),
                    ..InitialSpec::default()
                },
                ..named("kh-circle", ModelId::KhRefined)
            },
        },
    ]
}

pub fn find(name: &str) -> Result<ScenarioPreset> {
    all().into_iter().find(|p| p.name == name).ok_or_else(|| {
        let known: Vec<&str> = all().iter().map(|p| p.name).collect();
        WaveError::config("preset", format!("unknown preset `{name}` (known: {})", known.join(", ")))
    })
}
