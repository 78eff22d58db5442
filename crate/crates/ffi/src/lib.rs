//! C ABI over `spinreg`.
//!
//! Handles are opaque and owned by the caller once returned; free them with
//! the matching `*_free`. Every fallible call returns an [`SrStatus`] and,
//! on failure, leaves a message readable through [`sr_last_error`] on the
//! same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spinreg::analysis::{fit_trace, FitModel};
use spinreg::analytic::{self, ChainBudget, ChainModel};
use spinreg::network::{self, SpinNetwork};
use spinreg::sequence::{run_experiment, ExperimentSpec, RunOptions, SignalTrace, SweepParameter};
use spinreg::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// JSON or CSV that does not parse.
    Parse = 3,
    /// Parsed input that violates a constraint.
    Invalid = 4,
    /// A fit or spectrum could not produce a result.
    Numeric = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrChainModel {
    Hhcp = 0,
    Sedor = 1,
}

/// Per-layer chain cost, times in seconds. Pass `INFINITY` for a channel
/// that does not decay.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SrChainBudget {
    pub t_gate: f64,
    pub t1_rho: f64,
    pub t1: f64,
    pub t2: f64,
    pub eta: f64,
    pub threshold: f64,
}

/// A validated spin network.
pub struct SrNetwork(SpinNetwork);

/// A measured or simulated trace.
pub struct SrTrace(SignalTrace);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SrStatus {
    match e {
        Error::Json(_) | Error::Csv(_) | Error::Schema { .. } => SrStatus::Parse,
        Error::NoConvergence { .. } | Error::Fit(_) | Error::NoPeak | Error::ComplexExpectation(_) => SrStatus::Numeric,
        Error::Io(_) => SrStatus::Io,
        _ => SrStatus::Invalid,
    }
}

enum Fail {
    Status(SrStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SrStatus::Ok,
        Ok(Err(Fail::Status(s, m))) => {
            set_error(m);
            s
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            SrStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Status(SrStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Status(SrStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail::Status(SrStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<T>(out: *mut T) -> Result<(), Fail> {
    if out.is_null() {
        Err(Fail::Status(SrStatus::NullPointer, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

fn budget(b: &SrChainBudget) -> ChainBudget {
    ChainBudget { t_gate: b.t_gate, t1_rho: b.t1_rho, t1: b.t1, t2: b.t2, eta: b.eta, threshold: b.threshold }
}

fn model(m: SrChainModel) -> ChainModel {
    match m {
        SrChainModel::Hhcp => ChainModel::Hhcp,
        SrChainModel::Sedor => ChainModel::Sedor,
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses and validates a network file's JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_network_from_json(json: *const c_char, out: *mut *mut SrNetwork) -> SrStatus {
    guard(|| {
        out_ptr(out)?;
        let net = SpinNetwork::from_json(text(json, "json")?)?;
        *out = Box::into_raw(Box::new(SrNetwork(net)));
        Ok(())
    })
}

/// # Safety
/// `net` must come from [`sr_network_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn sr_network_free(net: *mut SrNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// # Safety
/// `net` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sr_network_spin_count(net: *const SrNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.0.spins().len())
}

/// Runs one experiment spec (JSON) against `net`.
///
/// # Safety
/// `net` must be live, `spec_json` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_run_experiment(
    net: *const SrNetwork,
    spec_json: *const c_char,
    seed: u64,
    noise_sigma: f64,
    out: *mut *mut SrTrace,
) -> SrStatus {
    guard(|| {
        out_ptr(out)?;
        let net = handle(net, "network")?;
        let spec = ExperimentSpec::from_json(text(spec_json, "spec")?)?;
        spec.validate(&net.0)?;
        let opts = RunOptions { seed, noise_sigma, ..RunOptions::default() };
        let run = run_experiment(&net.0, &spec, &opts)?;
        *out = Box::into_raw(Box::new(SrTrace(run.trace)));
        Ok(())
    })
}

/// Copies `n` points into a new trace. `parameter` is one of `echo_time`,
/// `frequency`, `lock_duration`, `pulse_length`, `phase`, `laser_time`.
///
/// # Safety
/// `x` and `y` must point to `n` doubles each; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_trace_new(
    parameter: *const c_char,
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut *mut SrTrace,
) -> SrStatus {
    guard(|| {
        out_ptr(out)?;
        if n > 0 && (x.is_null() || y.is_null()) {
            return Err(Fail::Status(SrStatus::NullPointer, "data pointer is null".into()));
        }
        let p: SweepParameter = serde_json::from_value(serde_json::Value::String(text(parameter, "parameter")?.into()))
            .map_err(Error::from)?;
        let slice = |p: *const f64| if n == 0 { Vec::new() } else { std::slice::from_raw_parts(p, n).to_vec() };
        let tr = SignalTrace::new(p, slice(x), slice(y))?;
        tr.validate()?;
        *out = Box::into_raw(Box::new(SrTrace(tr)));
        Ok(())
    })
}

/// # Safety
/// `tr` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn sr_trace_free(tr: *mut SrTrace) {
    if !tr.is_null() {
        drop(Box::from_raw(tr));
    }
}

/// # Safety
/// `tr` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sr_trace_len(tr: *const SrTrace) -> usize {
    tr.as_ref().map_or(0, |t| t.0.len())
}

/// Borrowed view of the sweep values, `sr_trace_len` long. Valid while
/// `tr` lives.
///
/// # Safety
/// `tr` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sr_trace_abscissa(tr: *const SrTrace) -> *const f64 {
    tr.as_ref().map_or(ptr::null(), |t| t.0.abscissa.as_ptr())
}

/// # Safety
/// `tr` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sr_trace_ordinate(tr: *const SrTrace) -> *const f64 {
    tr.as_ref().map_or(ptr::null(), |t| t.0.ordinate.as_ptr())
}

/// Fits `model` (`lorentzian`, `decaying_cosine`, `exp_decay`, `cosine`,
/// `fft_peak_lorentzian`) and returns the result as a JSON string, to be
/// released with [`sr_string_free`].
///
/// # Safety
/// `tr` must be live, `model` NUL-terminated, `json_out` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_fit(tr: *const SrTrace, model: *const c_char, json_out: *mut *mut c_char) -> SrStatus {
    guard(|| {
        out_ptr(json_out)?;
        let tr = handle(tr, "trace")?;
        let m = FitModel::parse(text(model, "model")?)?;
        let fit = fit_trace(m, &tr.0)?;
        let json = serde_json::to_string(&fit).map_err(Error::from)?;
        *json_out = CString::new(json).unwrap_or_default().into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn sr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn sr_sedor_ramsey_model(d_hz: f64, t: f64) -> f64 {
    analytic::sedor_ramsey_model(d_hz, t)
}

/// Detuning and Rabi frequency in rad/s.
#[no_mangle]
pub extern "C" fn sr_sedor_esr_model(d_hz: f64, t: f64, delta_omega: f64, omega0: f64) -> f64 {
    analytic::sedor_esr_model(d_hz, t, delta_omega, omega0)
}

#[no_mangle]
pub extern "C" fn sr_hyperfine_splitting(a_perp: f64, a_par: f64, theta: f64) -> f64 {
    network::hyperfine_splitting(a_perp, a_par, theta)
}

#[no_mangle]
pub extern "C" fn sr_defects_distinct(candidate: f64, a_perp: f64, a_par: f64, uncertainty: f64) -> bool {
    network::defects_distinct(candidate, a_perp, a_par, uncertainty)
}

/// Metres.
#[no_mangle]
pub extern "C" fn sr_coherence_radius(t2: f64) -> f64 {
    analytic::coherence_radius(t2)
}

/// # Safety
/// `b` must be readable.
#[no_mangle]
pub unsafe extern "C" fn sr_chain_coherence(b: *const SrChainBudget, n: usize, m: SrChainModel) -> f64 {
    b.as_ref().map_or(f64::NAN, |b| analytic::chain_coherence(&budget(b), n, model(m)))
}

/// # Safety
/// `b` must be readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_max_layer(b: *const SrChainBudget, m: SrChainModel, out: *mut usize) -> SrStatus {
    guard(|| {
        out_ptr(out)?;
        let b = budget(handle(b, "budget")?);
        b.validate()?;
        *out = analytic::max_layer(&b, model(m));
        Ok(())
    })
}
