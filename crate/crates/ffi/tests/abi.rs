use std::ffi::{CStr, CString};
use std::f64::consts::PI;
use std::ptr;

use wavemodels_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    unsafe {
        wm_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn grid(n: usize) -> *mut WmGrid {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { wm_grid_new(n, 2.0 * PI, &mut g) }, WmStatus::Ok);
    g
}

fn nodes(g: *const WmGrid) -> Vec<f64> {
    let mut x = vec![0.0; unsafe { wm_grid_n_nodes(g) }];
    assert_eq!(unsafe { wm_grid_nodes(g, x.as_mut_ptr()) }, WmStatus::Ok);
    x
}

type Case = (WmSymbol, f64, f64, Box<dyn Fn(f64) -> f64>);

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(wm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn symbols_on_single_modes() {
    let g = grid(32);
    let x = nodes(g);
    let f: Vec<f64> = x.iter().map(|x| (3.0 * x).cos()).collect();
    let mut out = vec![0.0; 32];
    let cases: [Case; 5] = [
        (WmSymbol::Hilbert, 0.0, 0.0, Box::new(|x| (3.0 * x).sin())),
        (WmSymbol::LambdaPow, 1.0, 0.0, Box::new(|x| 3.0 * (3.0 * x).cos())),
        (WmSymbol::Derivative, 1.0, 0.0, Box::new(|x| -3.0 * (3.0 * x).sin())),
        (WmSymbol::ResolventM, 2.0, 0.0, Box::new(|x| (3.0 * x).cos() / 8.0)),
        (WmSymbol::ResolventP, 0.0, 0.0, Box::new(|x| (3.0 * x).cos() / 10.0)),
    ];
    for (sym, p0, p1, expect) in cases {
        assert_eq!(unsafe { wm_apply_symbol(g, sym, p0, p1, f.as_ptr(), out.as_mut_ptr()) }, WmStatus::Ok);
        let e: Vec<f64> = x.iter().map(|&x| expect(x)).collect();
        assert!(max_diff(&out, &e) < 1e-13, "{sym:?}");
    }
    // in place
    let mut h = f.clone();
    assert_eq!(
        unsafe { wm_apply_symbol(g, WmSymbol::Hilbert, 0.0, 0.0, h.as_ptr(), h.as_mut_ptr()) },
        WmStatus::Ok
    );
    assert!(max_diff(&h, &x.iter().map(|x| (3.0 * x).sin()).collect::<Vec<_>>()) < 1e-13);
    assert_eq!(
        unsafe { wm_apply_symbol(g, WmSymbol::Derivative, 1.5, 0.0, f.as_ptr(), out.as_mut_ptr()) },
        WmStatus::InvalidArgument
    );
    unsafe { wm_grid_free(g) };
}

#[test]
fn product_and_norms() {
    let g = grid(64);
    let x = nodes(g);
    let s: Vec<f64> = x.iter().map(|x| x.sin()).collect();
    let c: Vec<f64> = x.iter().map(|x| x.cos()).collect();
    let mut p = vec![0.0; 64];
    assert_eq!(unsafe { wm_dealiased_product(g, s.as_ptr(), c.as_ptr(), p.as_mut_ptr()) }, WmStatus::Ok);
    assert!(max_diff(&p, &x.iter().map(|x| 0.5 * (2.0 * x).sin()).collect::<Vec<_>>()) < 1e-14);

    // cos(2x): |f̂(±2)| = 1/2
    let f: Vec<f64> = x.iter().map(|x| (2.0 * x).cos()).collect();
    let mut v = 0.0;
    assert_eq!(unsafe { wm_wiener_norm(g, f.as_ptr(), 0.5, &mut v) }, WmStatus::Ok);
    // transform roundoff in the top modes is amplified by e^{νk}
    assert!((v - 1.0f64.exp()).abs() < 1e-8);
    assert_eq!(unsafe { wm_sobolev_norm(g, f.as_ptr(), 1.0, &mut v) }, WmStatus::Ok);
    assert!((v - (2.0 * PI * 0.5 * 5.0f64).sqrt()).abs() < 1e-12, "{v}");
    unsafe { wm_grid_free(g) };
}

#[test]
fn errors_are_reported() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { wm_grid_new(7, 2.0 * PI, &mut g) }, WmStatus::ConfigError);
    assert!(g.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { wm_grid_new(8, 2.0 * PI, ptr::null_mut()) }, WmStatus::NullPointer);
    assert!(last_error().contains("out"));

    let bad = CString::new("model = \"bogus\"\n").unwrap();
    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { wm_simulation_from_config(bad.as_ptr(), &mut sim) }, WmStatus::ConfigError);
    assert!(last_error().contains("model"));
    let name = CString::new("nope").unwrap();
    assert_eq!(unsafe { wm_simulation_from_preset(name.as_ptr(), &mut sim) }, WmStatus::ConfigError);
    assert!(sim.is_null());

    // the message is per thread
    let other = std::thread::spawn(last_error).join().unwrap();
    assert!(other.is_empty());

    unsafe {
        wm_grid_free(ptr::null_mut());
        wm_simulation_free(ptr::null_mut());
        assert_eq!(wm_simulation_state_len(ptr::null()), 0);
    }
}

#[test]
fn truncated_error_message() {
    let mut g = ptr::null_mut();
    unsafe { wm_grid_new(3, 1.0, &mut g) };
    let full = unsafe { wm_last_error(ptr::null_mut(), 0) };
    let mut buf = [1 as std::ffi::c_char; 5];
    assert_eq!(unsafe { wm_last_error(buf.as_mut_ptr(), buf.len()) }, full);
    assert_eq!(buf[4], 0);
}

#[test]
fn simulation_advances_in_steps() {
    let cfg = CString::new(
        "model = \"inviscid-bi\"\nn_nodes = 32\nt_max = 1.0\n[initial]\nh = [[1, 0.1, 0.0]]\n",
    )
    .unwrap();
    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { wm_simulation_from_config(cfg.as_ptr(), &mut sim) }, WmStatus::Ok);
    let n = unsafe { wm_simulation_state_len(sim) };
    assert_eq!(n, 64);
    let mut y0 = vec![0.0; n];
    assert_eq!(unsafe { wm_simulation_copy_state(sim, y0.as_mut_ptr(), n) }, WmStatus::Ok);
    for _ in 0..4 {
        assert_eq!(unsafe { wm_simulation_advance(sim, 0.05) }, WmStatus::Ok);
    }
    assert!((unsafe { wm_simulation_time(sim) } - 0.2).abs() < 1e-12);
    let mut y = vec![0.0; n];
    assert_eq!(unsafe { wm_simulation_copy_state(sim, y.as_mut_ptr(), n) }, WmStatus::Ok);
    assert!(y.iter().all(|v| v.is_finite()));
    assert!(max_diff(&y, &y0) > 1e-4);
    assert_eq!(unsafe { wm_simulation_copy_state(sim, y.as_mut_ptr(), n - 1) }, WmStatus::InvalidArgument);
    assert_eq!(unsafe { wm_simulation_advance(sim, -1.0) }, WmStatus::InvalidArgument);

    // one long step and many short ones agree to the integrator tolerance
    let mut one = ptr::null_mut();
    unsafe { wm_simulation_from_config(cfg.as_ptr(), &mut one) };
    assert_eq!(unsafe { wm_simulation_advance(one, 0.2) }, WmStatus::Ok);
    let mut z = vec![0.0; n];
    unsafe { wm_simulation_copy_state(one, z.as_mut_ptr(), n) };
    assert!(max_diff(&y, &z) < 1e-6);
    unsafe {
        wm_simulation_free(sim);
        wm_simulation_free(one);
    }
}

#[test]
fn preset_events_stop_the_simulation() {
    let cfg = CString::new(
        "model = \"zmodel\"\nn_nodes = 64\nt_max = 1.0\nevents = [\"arc-chord > 1.5\"]\n[initial]\npreset = \"circle\"\n",
    )
    .unwrap();
    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { wm_simulation_from_config(cfg.as_ptr(), &mut sim) }, WmStatus::Ok);
    let mut status = WmStatus::Ok;
    for _ in 0..100 {
        status = unsafe { wm_simulation_advance(sim, 0.05) };
        if status != WmStatus::Ok {
            break;
        }
    }
    assert_eq!(status, WmStatus::EventStop, "{}", last_error());
    assert!(last_error().contains("arc-chord"));
    let t = unsafe { wm_simulation_time(sim) };
    assert_eq!(unsafe { wm_simulation_advance(sim, 0.05) }, WmStatus::EventStop);
    assert_eq!(unsafe { wm_simulation_time(sim) }, t);
    unsafe { wm_simulation_free(sim) };

    let name = CString::new("bubble").unwrap();
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { wm_simulation_from_preset(name.as_ptr(), &mut b) }, WmStatus::Ok);
    assert_eq!(unsafe { wm_simulation_state_len(b) }, 3 * 2048);
    unsafe { wm_simulation_free(b) };
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/wavemodels.h")).unwrap();
    for f in [
        "wm_version", "wm_last_error", "wm_grid_new", "wm_grid_free", "wm_grid_n_nodes", "wm_grid_nodes",
        "wm_apply_symbol", "wm_dealiased_product", "wm_sobolev_norm", "wm_wiener_norm",
        "wm_simulation_from_config", "wm_simulation_from_preset", "wm_simulation_free", "wm_simulation_advance",
        "wm_simulation_time", "wm_simulation_state_len", "wm_simulation_copy_state",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f}");
    }
    assert!(header.contains("typedef struct WmSimulation WmSimulation;"));
}
