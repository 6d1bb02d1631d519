use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wavemodels(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavemodels"))
        .args(args)
        .current_dir(cwd)
        .env_remove("WAVEMODELS_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = r#"
model = "inviscid-bi"
n_nodes = 32
t_max = 0.3
sample_every = 0.1

[params]
epsilon = 0.5

[initial]
h = [[1, 0.1, 0.0], [2, 0.0, 0.05]]
"#;

#[test]
fn listings() {
    let dir = tempfile::tempdir().unwrap();
    let o = wavemodels(&["list-models"], dir.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for id in [
        "viscous-bi", "viscous-uni", "viscous-uni-full", "odd-bi", "odd-uni", "inviscid-bi", "inviscid-uni",
        "internal-bi", "internal-uni", "internal-sys", "zmodel", "kh", "kh-refined", "br-reference",
    ] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(id)), "{id}");
    }
    let o = wavemodels(&["list-presets"], dir.path());
    let text = String::from_utf8(o.stdout).unwrap();
    for p in ["bubble", "drop", "graph-1", "graph-2"] {
        assert!(text.contains(p));
    }
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "model = \"bogus\"\n").unwrap();
    let o = wavemodels(&["run", bad.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("model"), "{}", stderr(&o));

    fs::write(&bad, format!("{SMALL}\n[integrator]\nwhatever = 1\n")).unwrap();
    let o = wavemodels(&["run", bad.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("integrator.whatever"), "{}", stderr(&o));

    let o = wavemodels(&["run", "no-such-preset"], dir.path());
    assert_eq!(code(&o), 2);
    let o = wavemodels(&["run", "graph-1", "--nodes", "100"], dir.path());
    assert_eq!(code(&o), 2);
    let o = wavemodels(&["frobnicate"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn reruns_are_byte_identical_and_config_is_a_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    for out in ["a", "b"] {
        let o = wavemodels(&["run", cfg.to_str().unwrap(), "--output-dir", out], dir.path());
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let read = |p: &str| fs::read(dir.path().join(p)).unwrap();
    for f in ["snapshots.csv", "diagnostics.csv", "config.toml", "decay_fits.csv"] {
        assert_eq!(read(&format!("a/{f}")), read(&format!("b/{f}")), "{f}");
    }
    // the resolved echo reproduces the run and itself
    let o = wavemodels(&["run", "a/config.toml", "--output-dir", "c"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["snapshots.csv", "diagnostics.csv", "config.toml"] {
        assert_eq!(read(&format!("a/{f}")), read(&format!("c/{f}")), "{f}");
    }
    let snap = String::from_utf8(read("a/snapshots.csv")).unwrap();
    assert_eq!(snap.lines().next(), Some("t,x,h,v"));
    assert_eq!(snap.lines().count(), 1 + 4 * 32);
    let summary: serde_json::Value = serde_json::from_slice(&read("a/summary.json")).unwrap();
    assert_eq!(summary["stop_reason"], "reached_tmax");
    assert_eq!(summary["exit_code"], 0);
}

#[test]
fn overrides_and_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("root");
    let o = Command::new(env!("CARGO_BIN_EXE_wavemodels"))
        .args(["run", "graph-2", "--nodes", "32", "--tmax", "0.2", "--sample-every", "0.1"])
        .current_dir(dir.path())
        .env("WAVEMODELS_OUTPUT_DIR", &root)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cfg = fs::read_to_string(root.join("graph-2/config.toml")).unwrap();
    assert!(cfg.contains("n_nodes = 32") && cfg.contains("t_max = 0.2"), "{cfg}");
}

#[test]
fn numeric_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.toml");
    fs::write(&cfg, format!("{SMALL}\n[integrator]\nmax_steps = 2\n")).unwrap();
    let o = wavemodels(&["run", cfg.to_str().unwrap(), "--output-dir", "out"], dir.path());
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let summary = fs::read_to_string(dir.path().join("out/summary.json")).unwrap();
    assert!(summary.contains("max_steps"));
}

#[test]
fn event_stop_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ev.toml");
    fs::write(
        &cfg,
        r#"
model = "zmodel"
n_nodes = 64
t_max = 1.0
events = ["arc-chord > 1.5"]

[initial]
preset = "circle"
"#,
    )
    .unwrap();
    let o = wavemodels(&["run", cfg.to_str().unwrap(), "--output-dir", "out"], dir.path());
    assert_eq!(code(&o), 5, "{}", stderr(&o));
}

#[test]
fn viscous_bi_cap_warns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("vb.toml");
    fs::write(&cfg, "model = \"viscous-bi\"\nn_nodes = 1024\nt_max = 0.01\n[initial]\nh = [[1, 0.1, 0]]\n").unwrap();
    let o = wavemodels(&["run", cfg.to_str().unwrap(), "--output-dir", "out"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
    assert!(fs::read_to_string(dir.path().join("out/config.toml")).unwrap().contains("n_nodes = 512"));
}

#[test]
fn compare_single_and_mismatched() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let o = wavemodels(&["compare", cfg.to_str().unwrap(), "--output-dir", "cmp"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = fs::read_to_string(dir.path().join("cmp/comparison.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("t,model_a,model_b,sup_diff"));
    assert!(table.lines().skip(1).all(|l| l.ends_with(",0.0000000000000000e0")));

    let o = wavemodels(&["compare", cfg.to_str().unwrap(), "bubble", "--output-dir", "cmp2"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn check_fast_passes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = wavemodels(&["check", "--report", "report.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(r["passed"], true);
    assert!(r["entries"].as_array().unwrap().iter().any(|e| e["name"] == "tricomi"));
}
