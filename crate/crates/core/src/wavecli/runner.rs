//! Run orchestration and run-directory files.
//!
//! A run directory holds
//! * `config.toml`: the resolved configuration,
//! * `snapshots.csv`: `t,x,<fields>` (graph models) or `t,alpha,z1,z2,vorticity`
//!   (curve models), one row per sample time per node,
//! * `diagnostics.csv`: `t,label,value`, one row per sample time per norm,
//! * `decay_fits.csv`: `label,t_start,t_end,rate,r_squared` over the whole run,
//! * `summary.json`: stop reason, step counts, wall time and exit code.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::diagnostics::{
    arc_chord, decay_fit, max_curvature, self_intersects, sobolev_norm, wiener_norm, NormSeries, StripMonitor,
    WIENER_NOISE_FLOOR,
};
use crate::error::{Result, WaveError};
use crate::model::Model;
use crate::timestep::{integrate_observed, Event, Progress, StopReason};

use super::config::{DiagnosticLabel, EventSpec, RunConfig};

/// Environment variable naming the default output root.
pub const OUTPUT_ENV: &str = "WAVEMODELS_OUTPUT_DIR";

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExitStatus {
    Success = 0,
    ConfigError = 2,
    NumericFailure = 3,
    InvariantFailure = 4,
    EventStop = 5,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn for_error(e: &WaveError) -> Self {
        match e {
            WaveError::Config { .. } | WaveError::Usage(_) | WaveError::Parameter(_) | WaveError::Io(_) => {
                ExitStatus::ConfigError
            }
            WaveError::Numeric(_) | WaveError::Geometry(_) | WaveError::Precondition(_) | WaveError::Fit(_) => {
                ExitStatus::NumericFailure
            }
        }
    }

    pub fn for_stop(r: &StopReason) -> Self {
        match r {
            StopReason::ReachedTmax => ExitStatus::Success,
            StopReason::Event(_) => ExitStatus::EventStop,
            StopReason::DtUnderflow | StopReason::MaxSteps => ExitStatus::NumericFailure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub model: String,
    pub stop_reason: String,
    pub t_final: f64,
    pub t_max: f64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub rhs_evals: u64,
    pub wall_time_s: f64,
    pub exit_code: i32,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub run_dir: PathBuf,
    pub summary: RunSummary,
    pub series: Vec<NormSeries>,
}

impl RunReport {
    pub fn exit_status(&self) -> i32 {
        self.summary.exit_code
    }
}

/// Run directory: `override_dir`, else the config's `output_dir`, else
/// `$WAVEMODELS_OUTPUT_DIR/<label>`, else `runs/<label>`.
pub fn resolve_run_dir(cfg: &RunConfig, override_dir: Option<&Path>) -> PathBuf {
    if let Some(d) = override_dir {
        return d.to_path_buf();
    }
    if let Some(d) = &cfg.output_dir {
        return d.clone();
    }
    let root = std::env::var_os(OUTPUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"));
    root.join(cfg.label())
}

fn io_err(path: &Path, e: std::io::Error) -> WaveError {
    WaveError::Io(format!("{}: {e}", path.display()))
}

pub(crate) fn create_file(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

/// Header of the snapshot table for `model`.
pub fn snapshot_header(model: &Model) -> String {
    let coord = if model.id.is_curve() { "alpha" } else { "x" };
    format!("t,{coord},{}", model.id.fields().join(","))
}

pub(crate) fn write_snapshot_rows(out: &mut impl Write, model: &Model, t: f64, y: &[f64]) -> std::io::Result<()> {
    let n = model.grid.n_nodes();
    let nf = model.n_fields();
    let mut line = String::with_capacity(32 * (nf + 2));
    for j in 0..n {
        line.clear();
        line.push_str(&format!("{t:.16e},{:.16e}", model.grid.node(j)));
        for f in 0..nf {
            line.push_str(&format!(",{:.16e}", y[f * n + j]));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Integrator events for the configured stop conditions.
pub fn build_events(model: &Model, specs: &[EventSpec]) -> Vec<Event> {
    specs
        .iter()
        .map(|&spec| {
            let m = model.clone();
            let name = spec.to_string();
            match spec {
                EventSpec::MaxCurvatureAbove(x) => Event::new(name, move |_, y| {
                    m.curve(y).and_then(|c| max_curvature(&c)).map_or(true, |k| !(k <= x))
                }),
                EventSpec::ArcChordAbove(x) => {
                    Event::new(name, move |_, y| m.curve(y).map_or(true, |c| !(arc_chord(&c) <= x)))
                }
                EventSpec::SelfIntersect => Event::new(name, move |_, y| m.curve(y).map_or(true, |c| self_intersects(&c))),
            }
        })
        .collect()
}

/// Evaluates the configured diagnostics on one state.
pub struct DiagnosticSet {
    model: Model,
    labels: Vec<DiagnosticLabel>,
    strip: Option<StripMonitor>,
}

impl DiagnosticSet {
    pub fn new(model: &Model, labels: Vec<DiagnosticLabel>, y0: &[f64]) -> Result<Self> {
        let strip = if labels.contains(&DiagnosticLabel::WienerStrip) {
            Some(StripMonitor::for_initial(&model.primary(y0)?)?)
        } else {
            None
        };
        Ok(Self {
            model: model.clone(),
            labels,
            strip,
        })
    }

    pub fn labels(&self) -> &[DiagnosticLabel] {
        &self.labels
    }

    /// `(label, value)` pairs at time `t`; the strip norm is omitted past
    /// its horizon.
    pub fn evaluate(&self, t: f64, y: &[f64]) -> Result<Vec<(DiagnosticLabel, f64)>> {
        let mut out = Vec::with_capacity(self.labels.len());
        if self.model.id.is_curve() {
            let c = self.model.curve(y)?;
            for &l in &self.labels {
                let v = match l {
                    DiagnosticLabel::ArcChord => arc_chord(&c),
                    DiagnosticLabel::MaxCurvature => max_curvature(&c)?,
                    DiagnosticLabel::SelfIntersect => f64::from(u8::from(self_intersects(&c))),
                    _ => unreachable!("validated against the model kind"),
                };
                out.push((l, v));
            }
        } else {
            let f = self.model.primary(y)?;
            for &l in &self.labels {
                let v = match l {
                    DiagnosticLabel::H1 => sobolev_norm(&f, 1.0),
                    DiagnosticLabel::Hs(s) => sobolev_norm(&f, s),
                    DiagnosticLabel::Wiener(nu) => wiener_norm(&f, nu)?,
                    DiagnosticLabel::WienerStrip => {
                        let m = self.strip.expect("strip monitor built with the label");
                        if t >= m.horizon {
                            continue;
                        }
                        crate::diagnostics::wiener_norm_resolved(&f, m.nu(t), WIENER_NOISE_FLOOR)?
                    }
                    _ => unreachable!("validated against the model kind"),
                };
                out.push((l, v));
            }
        }
        Ok(out)
    }
}

fn write_decay_fits(path: &Path, series: &[NormSeries]) -> Result<()> {
    let mut out = create_file(path)?;
    let w = |out: &mut BufWriter<File>, s: String| out.write_all(s.as_bytes()).map_err(|e| io_err(path, e));
    w(&mut out, "label,t_start,t_end,rate,r_squared\n".into())?;
    for s in series {
        if s.label == "self-intersect" || s.len() < 3 {
            continue;
        }
        let (ta, tb) = (s.times[0], s.times[s.len() - 1]);
        if let Ok((rate, r2)) = decay_fit(s, (ta, tb)) {
            w(&mut out, format!("{},{ta:.16e},{tb:.16e},{rate:.16e},{r2:.16e}\n", s.label))?;
        }
    }
    out.flush().map_err(|e| io_err(path, e))
}

fn write_summary(dir: &Path, summary: &RunSummary) -> Result<()> {
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(summary).map_err(|e| WaveError::Io(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))
}

/// Runs a resolved configuration, writing the run directory.
///
/// Configuration problems are returned as errors; integration failures are
/// recorded in the summary and reflected in its exit code.
pub fn run(cfg: &RunConfig, run_dir: &Path, warnings: Vec<String>) -> Result<RunReport> {
    let model = cfg.build_model()?;
    let y0 = cfg.initial_state(&model)?;
    model.check_initial(&y0)?;
    let labels = cfg.diagnostic_labels()?;
    let events = build_events(&model, &cfg.event_specs()?);
    let diags = DiagnosticSet::new(&model, labels, &y0)?;

    fs::create_dir_all(run_dir).map_err(|e| io_err(run_dir, e))?;
    let cfg_path = run_dir.join("config.toml");
    fs::write(&cfg_path, cfg.to_toml()?).map_err(|e| io_err(&cfg_path, e))?;

    let snap_path = run_dir.join("snapshots.csv");
    let diag_path = run_dir.join("diagnostics.csv");
    let mut snaps = create_file(&snap_path)?;
    let mut diag_out = create_file(&diag_path)?;
    writeln!(snaps, "{}", snapshot_header(&model)).map_err(|e| io_err(&snap_path, e))?;
    writeln!(diag_out, "t,label,value").map_err(|e| io_err(&diag_path, e))?;

    let mut series: Vec<NormSeries> = diags.labels().iter().map(|l| NormSeries::new(l.to_string())).collect();
    let mut failure: Option<WaveError> = None;

    let started = Instant::now();
    let outcome = {
        let mut observe = |t: f64, y: &[f64]| -> Result<()> {
            write_snapshot_rows(&mut snaps, &model, t, y).map_err(|e| io_err(&snap_path, e))?;
            for (l, v) in diags.evaluate(t, y)? {
                writeln!(diag_out, "{t:.16e},{l},{v:.16e}").map_err(|e| io_err(&diag_path, e))?;
                if let Some(s) = series.iter_mut().find(|s| s.label == l.to_string()) {
                    s.push(t, v);
                }
            }
            Ok(())
        };
        integrate_observed(
            |t, y, dy| model.rhs(t, y, dy),
            &y0,
            0.0,
            cfg.t_max,
            &cfg.integrator,
            &events,
            cfg.sample_every,
            |p| {
                if let Progress::Snapshot { t, y } = p {
                    if failure.is_none() {
                        if let Err(e) = observe(t, y) {
                            failure = Some(e);
                        }
                    }
                }
            },
        )
    };
    let wall = started.elapsed().as_secs_f64();
    snaps.flush().map_err(|e| io_err(&snap_path, e))?;
    diag_out.flush().map_err(|e| io_err(&diag_path, e))?;
    if let Some(e @ WaveError::Io(_)) = failure {
        return Err(e);
    }
    write_decay_fits(&run_dir.join("decay_fits.csv"), &series)?;

    let mut summary = RunSummary {
        name: cfg.label(),
        model: cfg.model.clone(),
        stop_reason: String::new(),
        t_final: 0.0,
        t_max: cfg.t_max,
        accepted_steps: 0,
        rejected_steps: 0,
        rhs_evals: 0,
        wall_time_s: wall,
        exit_code: 0,
        warnings,
        error: None,
    };
    match (outcome, failure) {
        (Ok(o), None) => {
            summary.stop_reason = o.stop_reason.to_string();
            summary.t_final = o.t_final;
            summary.accepted_steps = o.stats.accepted;
            summary.rejected_steps = o.stats.rejected;
            summary.rhs_evals = o.stats.rhs_evals;
            summary.exit_code = ExitStatus::for_stop(&o.stop_reason).code();
        }
        (Ok(o), Some(e)) => {
            summary.stop_reason = "diagnostic_failure".into();
            summary.t_final = o.t_final;
            summary.accepted_steps = o.stats.accepted;
            summary.rejected_steps = o.stats.rejected;
            summary.rhs_evals = o.stats.rhs_evals;
            summary.exit_code = ExitStatus::NumericFailure.code();
            summary.error = Some(e.to_string());
        }
        (Err(e), _) => {
            summary.stop_reason = "error".into();
            summary.exit_code = ExitStatus::for_error(&e).code().max(ExitStatus::NumericFailure.code());
            summary.error = Some(e.to_string());
        }
    }
    write_summary(run_dir, &summary)?;
    Ok(RunReport {
        run_dir: run_dir.to_path_buf(),
        summary,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavecli::config::parse_config;

    #[test]
    fn run_writes_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config(
            "model = \"inviscid-bi\"\nn_nodes = 16\nt_max = 0.3\nsample_every = 0.1\n[initial]\nh = [[1, 0.0, 0.1]]\n",
        )
        .unwrap();
        let rep = run(&cfg, dir.path(), vec![]).unwrap();
        assert_eq!(rep.exit_status(), 0);
        for f in ["config.toml", "snapshots.csv", "diagnostics.csv", "decay_fits.csv", "summary.json"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let snaps = fs::read_to_string(dir.path().join("snapshots.csv")).unwrap();
        let mut lines = snaps.lines();
        assert_eq!(lines.next(), Some("t,x,h,v"));
        assert_eq!(lines.count(), 4 * 16);
        let diags = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
        assert_eq!(diags.lines().count(), 1 + 4);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(ExitStatus::for_stop(&StopReason::Event("x".into())).code(), 5);
        assert_eq!(ExitStatus::for_stop(&StopReason::DtUnderflow).code(), 3);
        assert_eq!(ExitStatus::for_error(&WaveError::config("a", "b")).code(), 2);
        assert_eq!(ExitStatus::for_error(&WaveError::Numeric("x".into())).code(), 3);
    }
}
