//! C ABI over the `wavemodels` solvers.
//!
//! Every entry point returns a [`WmStatus`]; on failure the message is kept
//! in a thread-local slot readable with [`wm_last_error`]. Handles are opaque
//! and owned by the caller until passed to the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wavemodels::diagnostics::{sobolev_norm, wiener_norm};
use wavemodels::model::Model;
use wavemodels::spectral::{apply_symbol, dealiased_product, MultiplierSymbol};
use wavemodels::timestep::{integrate_observed, Event, IntegratorConfig, StopReason};
use wavemodels::wavecli::runner::build_events;
use wavemodels::wavecli::{parse_config, presets};
use wavemodels::{PeriodicGrid, SpectralField, WaveError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    NumericError = 4,
    EventStop = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WmSymbol {
    /// `-i sgn(k)`.
    Hilbert = 0,
    /// `|k|^p0`.
    LambdaPow = 1,
    /// `(ik)^m` with `m = p0` (a non-negative integer).
    Derivative = 2,
    /// Resolvent with `alpha1 = p0`, `alpha2 = p1`.
    ResolventN = 3,
    /// `1 / (2 + p0 |k|)`.
    ResolventM = 4,
    /// `1 / (1 + k²)`.
    ResolventP = 5,
}

/// Periodic collocation grid.
pub struct WmGrid {
    grid: PeriodicGrid,
}

/// A configured model with its current time and state.
pub struct WmSimulation {
    model: Model,
    integrator: IntegratorConfig,
    events: Vec<Event>,
    t: f64,
    y: Vec<f64>,
    stopped: Option<String>,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_for(e: &WaveError) -> WmStatus {
    match e {
        WaveError::Config { .. } | WaveError::Usage(_) | WaveError::Io(_) => WmStatus::ConfigError,
        WaveError::Parameter(_) => WmStatus::InvalidArgument,
        _ => WmStatus::NumericError,
    }
}

fn fail(status: WmStatus, msg: impl Into<String>) -> WmStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> WmStatus) -> WmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == WmStatus::Ok {
                set_error("");
            }
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(WmStatus::Panic, format!("panic: {msg}"))
        }
    }
}

macro_rules! try_wm {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return fail(status_for(&e), e.to_string()),
        }
    };
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(WmStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, WmStatus> {
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(WmStatus::InvalidArgument, format!("`{name}` is not valid UTF-8")))
}

unsafe fn field_arg(g: &PeriodicGrid, values: *const f64) -> Result<SpectralField, WmStatus> {
    let v = std::slice::from_raw_parts(values, g.n_nodes()).to_vec();
    SpectralField::new(g, v).map_err(|e| fail(status_for(&e), e.to_string()))
}

unsafe fn write_field(f: &SpectralField, out: *mut f64) {
    ptr::copy_nonoverlapping(f.values().as_ptr(), out, f.len());
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the full message length
/// in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn wm_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates a grid of `n_nodes` points on a period of `length`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wm_grid_new(n_nodes: usize, length: f64, out: *mut *mut WmGrid) -> WmStatus {
    guard(|| {
        non_null!(out);
        let grid = try_wm!(PeriodicGrid::new(n_nodes, length));
        *out = Box::into_raw(Box::new(WmGrid { grid }));
        WmStatus::Ok
    })
}

/// # Safety
/// `grid` must be null or come from [`wm_grid_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn wm_grid_free(grid: *mut WmGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// # Safety
/// `grid` must be null or a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn wm_grid_n_nodes(grid: *const WmGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.grid.n_nodes())
}

/// Writes the `n_nodes` grid points into `out`.
///
/// # Safety
/// `out` must hold `n_nodes` doubles.
#[no_mangle]
pub unsafe extern "C" fn wm_grid_nodes(grid: *const WmGrid, out: *mut f64) -> WmStatus {
    guard(|| {
        non_null!(grid, out);
        let nodes = (*grid).grid.nodes();
        ptr::copy_nonoverlapping(nodes.as_ptr(), out, nodes.len());
        WmStatus::Ok
    })
}

/// Applies a Fourier multiplier to the nodal values `f`, writing to `out`.
/// `p0` and `p1` are the symbol parameters (ignored where unused).
///
/// # Safety
/// `f` and `out` must each hold `n_nodes` doubles; they may alias.
#[no_mangle]
pub unsafe extern "C" fn wm_apply_symbol(
    grid: *const WmGrid,
    symbol: WmSymbol,
    p0: f64,
    p1: f64,
    f: *const f64,
    out: *mut f64,
) -> WmStatus {
    guard(|| {
        non_null!(grid, f, out);
        let g = &(*grid).grid;
        let sym = match symbol {
            WmSymbol::Hilbert => MultiplierSymbol::Hilbert,
            WmSymbol::LambdaPow => MultiplierSymbol::LambdaPow(p0),
            WmSymbol::Derivative => {
                if !(p0 >= 0.0 && p0.fract() == 0.0 && p0 <= u32::MAX as f64) {
                    return fail(WmStatus::InvalidArgument, format!("derivative order {p0} is not a non-negative integer"));
                }
                MultiplierSymbol::Derivative(p0 as u32)
            }
            WmSymbol::ResolventN => MultiplierSymbol::ResolventN { alpha1: p0, alpha2: p1 },
            WmSymbol::ResolventM => MultiplierSymbol::ResolventM { alpha: p0 },
            WmSymbol::ResolventP => MultiplierSymbol::ResolventP,
        };
        let field = match field_arg(g, f) {
            Ok(v) => v,
            Err(s) => return s,
        };
        let r = try_wm!(apply_symbol(&field, &sym));
        write_field(&r, out);
        WmStatus::Ok
    })
}

/// Two-thirds-rule product of `f` and `g`.
///
/// # Safety
/// `f`, `g` and `out` must each hold `n_nodes` doubles.
#[no_mangle]
pub unsafe extern "C" fn wm_dealiased_product(
    grid: *const WmGrid,
    f: *const f64,
    g: *const f64,
    out: *mut f64,
) -> WmStatus {
    guard(|| {
        non_null!(grid, f, g, out);
        let grid = &(*grid).grid;
        let (a, b) = match (field_arg(grid, f), field_arg(grid, g)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let r = try_wm!(dealiased_product(&a, &b));
        write_field(&r, out);
        WmStatus::Ok
    })
}

/// Sobolev `H^s` norm of `f`.
///
/// # Safety
/// `f` must hold `n_nodes` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wm_sobolev_norm(grid: *const WmGrid, f: *const f64, s: f64, out: *mut f64) -> WmStatus {
    guard(|| {
        non_null!(grid, f, out);
        if !s.is_finite() {
            return fail(WmStatus::InvalidArgument, format!("order {s} is not finite"));
        }
        let field = match field_arg(&(*grid).grid, f) {
            Ok(v) => v,
            Err(s) => return s,
        };
        *out = sobolev_norm(&field, s);
        WmStatus::Ok
    })
}

/// Weighted Wiener norm `Σ e^{ν|k|} |f̂(k)|`.
///
/// # Safety
/// `f` must hold `n_nodes` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wm_wiener_norm(grid: *const WmGrid, f: *const f64, nu: f64, out: *mut f64) -> WmStatus {
    guard(|| {
        non_null!(grid, f, out);
        let field = match field_arg(&(*grid).grid, f) {
            Ok(v) => v,
            Err(s) => return s,
        };
        *out = try_wm!(wiener_norm(&field, nu));
        WmStatus::Ok
    })
}

fn simulation(cfg: wavemodels::wavecli::RunConfig) -> Result<WmSimulation, WaveError> {
    let model = cfg.build_model()?;
    let y = cfg.initial_state(&model)?;
    model.check_initial(&y)?;
    let events = build_events(&model, &cfg.event_specs()?);
    Ok(WmSimulation {
        model,
        integrator: cfg.integrator,
        events,
        t: 0.0,
        y,
        stopped: None,
    })
}

/// Builds a simulation at `t = 0` from TOML configuration text (the same
/// schema the command line reads; `t_max` and sampling are ignored).
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wm_simulation_from_config(config: *const c_char, out: *mut *mut WmSimulation) -> WmStatus {
    guard(|| {
        non_null!(config, out);
        let text = match str_arg(config, "config") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let cfg = try_wm!(parse_config(text));
        let sim = try_wm!(simulation(cfg));
        *out = Box::into_raw(Box::new(sim));
        WmStatus::Ok
    })
}

/// Builds a simulation from a named scenario preset.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wm_simulation_from_preset(name: *const c_char, out: *mut *mut WmSimulation) -> WmStatus {
    guard(|| {
        non_null!(name, out);
        let name = match str_arg(name, "name") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let preset = try_wm!(presets::find(name));
        let (cfg, _) = try_wm!(preset.config.resolve());
        let sim = try_wm!(simulation(cfg));
        *out = Box::into_raw(Box::new(sim));
        WmStatus::Ok
    })
}

/// # Safety
/// `sim` must be null or a live simulation handle, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn wm_simulation_free(sim: *mut WmSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Integrates forward by `dt`. Returns [`WmStatus::EventStop`] when a
/// configured stop condition fires; the state is then left at the stopping
/// time and further calls keep returning `EventStop`.
///
/// # Safety
/// `sim` must be a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn wm_simulation_advance(sim: *mut WmSimulation, dt: f64) -> WmStatus {
    guard(|| {
        non_null!(sim);
        let s = &mut *sim;
        if let Some(name) = &s.stopped {
            return fail(WmStatus::EventStop, format!("stopped by event {name}"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return fail(WmStatus::InvalidArgument, format!("dt must be positive and finite, got {dt}"));
        }
        let m = &s.model;
        let outcome = try_wm!(integrate_observed(
            |t, y, dy| m.rhs(t, y, dy),
            &s.y,
            s.t,
            s.t + dt,
            &s.integrator,
            &s.events,
            dt,
            |_| {}
        ));
        s.t = outcome.t_final;
        s.y = outcome.y_final;
        match outcome.stop_reason {
            StopReason::ReachedTmax => WmStatus::Ok,
            StopReason::Event(name) => {
                let msg = format!("stopped by event {name} at t = {}", s.t);
                s.stopped = Some(name);
                fail(WmStatus::EventStop, msg)
            }
            r => fail(WmStatus::NumericError, format!("integration stopped: {r}")),
        }
    })
}

/// # Safety
/// `sim` must be null or a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn wm_simulation_time(sim: *const WmSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.t)
}

/// Number of doubles in the state vector: the model's fields, each of
/// `n_nodes` values, concatenated in the order of the snapshot columns.
///
/// # Safety
/// `sim` must be null or a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn wm_simulation_state_len(sim: *const WmSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.y.len())
}

/// Copies the current state into `out`, which must hold `len` doubles with
/// `len` equal to [`wm_simulation_state_len`].
///
/// # Safety
/// `sim` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wm_simulation_copy_state(sim: *const WmSimulation, out: *mut f64, len: usize) -> WmStatus {
    guard(|| {
        non_null!(sim, out);
        let s = &*sim;
        if len != s.y.len() {
            return fail(WmStatus::InvalidArgument, format!("buffer holds {len} values, state has {}", s.y.len()));
        }
        ptr::copy_nonoverlapping(s.y.as_ptr(), out, len);
        WmStatus::Ok
    })
}
