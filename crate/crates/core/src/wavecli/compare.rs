//! Side-by-side runs of bidirectional graph models from shared initial data.

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, WaveError};
use crate::model::{Model, StateKind};
use crate::timestep::{integrate, StopReason, Trajectory};

use super::config::RunConfig;
use super::runner::{create_file, snapshot_header, write_snapshot_rows};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub t: f64,
    pub a: String,
    pub b: String,
    pub sup_diff: f64,
}

/// Parsed snapshot table.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotTable {
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    /// `rows[i]` holds the values of every column for sample `times[i]`,
    /// column-major over nodes.
    pub rows: Vec<Vec<Vec<f64>>>,
}

impl SnapshotTable {
    pub fn column(&self, sample: usize, name: &str) -> Option<&[f64]> {
        let c = self.columns.iter().position(|n| n == name)?;
        self.rows.get(sample).map(|r| r[c].as_slice())
    }
}

/// Reads a snapshot file written by a run (or an external reference in the
/// same format).
pub fn read_snapshots(path: &Path) -> Result<SnapshotTable> {
    let text = fs::read_to_string(path).map_err(|e| WaveError::Io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| WaveError::Usage(format!("{}: empty snapshot file", path.display())))?;
    let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    if columns.len() < 3 || columns[0] != "t" {
        return Err(WaveError::Usage(format!("{}: unexpected header `{header}`", path.display())));
    }
    let mut times: Vec<f64> = Vec::new();
    let mut rows: Vec<Vec<Vec<f64>>> = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| WaveError::Usage(format!("{}:{}: {e}", path.display(), ln + 2)))?;
        if vals.len() != columns.len() {
            return Err(WaveError::Usage(format!("{}:{}: wrong column count", path.display(), ln + 2)));
        }
        if times.last() != Some(&vals[0]) {
            if let Some(&last) = times.last() {
                if vals[0] < last {
                    return Err(WaveError::Usage(format!("{}: times not sorted", path.display())));
                }
            }
            times.push(vals[0]);
            rows.push(vec![Vec::new(); columns.len()]);
        }
        let r = rows.last_mut().unwrap();
        for (c, v) in vals.into_iter().enumerate() {
            r[c].push(v);
        }
    }
    Ok(SnapshotTable { columns, times, rows })
}

fn run_one(cfg: &RunConfig, m: &Model, y0: &[f64], dir: &Path) -> Result<Trajectory> {
    let tr = integrate(|t, y, dy| m.rhs(t, y, dy), y0, 0.0, cfg.t_max, &cfg.integrator, &[], cfg.sample_every)?;
    if tr.stop_reason != StopReason::ReachedTmax {
        return Err(WaveError::Numeric(format!("{} stopped early: {}", m.id, tr.stop_reason)));
    }
    fs::create_dir_all(dir).map_err(|e| WaveError::Io(format!("{}: {e}", dir.display())))?;
    fs::write(dir.join("config.toml"), cfg.to_toml()?).map_err(|e| WaveError::Io(e.to_string()))?;
    let path = dir.join("snapshots.csv");
    let mut w = create_file(&path)?;
    let io = |e: std::io::Error| WaveError::Io(format!("{}: {e}", path.display()));
    writeln!(w, "{}", snapshot_header(m)).map_err(io)?;
    for (t, y) in tr.times.iter().zip(&tr.states) {
        write_snapshot_rows(&mut w, m, *t, y).map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(tr)
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Runs every config, writes `<out>/<label>/snapshots.csv` per model and
/// `<out>/comparison.csv` with pairwise sup-norm differences of `h`.
pub fn compare(configs: &[RunConfig], reference: Option<&Path>, out_dir: &Path) -> Result<Vec<ComparisonRow>> {
    if configs.is_empty() {
        return Err(WaveError::Usage("compare needs at least one config".into()));
    }
    let mut models: Vec<Model> = Vec::new();
    let mut initial: Vec<Vec<f64>> = Vec::new();
    for cfg in configs {
        let m = cfg.build_model()?;
        if m.id.kind() != StateKind::Bidirectional {
            return Err(WaveError::Usage(format!(
                "compare covers bidirectional graph models only; {} has a different state space",
                m.id
            )));
        }
        let y0 = cfg.initial_state(&m)?;
        m.check_initial(&y0)?;
        models.push(m);
        initial.push(y0);
    }
    let first = &configs[0];
    let n = first.n_nodes;
    for (cfg, y0) in configs.iter().zip(&initial).skip(1) {
        if cfg.n_nodes != n {
            return Err(WaveError::Usage(format!("incompatible grids: {} vs {} nodes", n, cfg.n_nodes)));
        }
        if cfg.t_max != first.t_max || cfg.sample_every != first.sample_every {
            return Err(WaveError::Usage("configs must share t_max and sample_every".into()));
        }
        if y0[..n] != initial[0][..n] {
            return Err(WaveError::Usage("configs must share the initial elevation".into()));
        }
    }

    let mut labels: Vec<String> = configs.iter().map(|c| c.label()).collect();
    for i in 0..labels.len() {
        if labels.iter().filter(|l| **l == labels[i]).count() > 1 {
            labels[i] = format!("{}-{}", labels[i], i);
        }
    }

    fs::create_dir_all(out_dir).map_err(|e| WaveError::Io(format!("{}: {e}", out_dir.display())))?;
    // one worker per model
    let trajs: Vec<Trajectory> = configs
        .par_iter()
        .zip(models.par_iter())
        .zip(initial.par_iter().zip(labels.par_iter()))
        .map(|((cfg, m), (y0, label))| run_one(cfg, m, y0, &out_dir.join(label)))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let times = &trajs[0].times;
    for (s, &t) in times.iter().enumerate() {
        let pairs: Vec<(usize, usize)> = if trajs.len() == 1 {
            vec![(0, 0)]
        } else {
            (0..trajs.len())
                .flat_map(|i| ((i + 1)..trajs.len()).map(move |j| (i, j)))
                .collect()
        };
        for (i, j) in pairs {
            let d = sup_diff(&trajs[i].states[s][..n], &trajs[j].states[s][..n]);
            rows.push(ComparisonRow {
                t,
                a: labels[i].clone(),
                b: labels[j].clone(),
                sup_diff: d,
            });
        }
    }
    if let Some(path) = reference {
        let table = read_snapshots(path)?;
        for (r, &tr) in table.times.iter().enumerate() {
            let Some(s) = times.iter().position(|&t| (t - tr).abs() <= 1e-9 * tr.abs().max(1.0)) else {
                continue;
            };
            let h = table
                .column(r, "h")
                .ok_or_else(|| WaveError::Usage(format!("{}: no `h` column", path.display())))?;
            if h.len() != n {
                return Err(WaveError::Usage(format!("{}: reference grid has {} nodes, expected {n}", path.display(), h.len())));
            }
            for (i, tr_) in trajs.iter().enumerate() {
                rows.push(ComparisonRow {
                    t: times[s],
                    a: labels[i].clone(),
                    b: "reference".into(),
                    sup_diff: sup_diff(&tr_.states[s][..n], h),
                });
            }
        }
    }

    let path = out_dir.join("comparison.csv");
    let mut w = create_file(&path)?;
    let io = |e: std::io::Error| WaveError::Io(format!("{}: {e}", path.display()));
    writeln!(w, "t,model_a,model_b,sup_diff").map_err(io)?;
    for r in &rows {
        writeln!(w, "{:.16e},{},{},{:.16e}", r.t, r.a, r.b, r.sup_diff).map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(rows)
}
