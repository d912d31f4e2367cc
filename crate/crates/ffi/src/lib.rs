//! C ABI over `premax`.
//!
//! Every fallible call returns a [`PremaxStatus`]. On a non-zero status the
//! message is available from [`premax_last_error`] on the same thread until
//! the next failing call. Handles are opaque and must be released with their
//! matching `_free` function; strings returned to the caller are released
//! with [`premax_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use premax::closure::{iterate_closure, ClosureTrace, SetApprox, Verdict};
use premax::io::{to_json, ErrorClass, ExperimentConfig, Failure};
use premax::maximality::local_product_check;
use premax::shadowing::{exact_shadow_linear, newton_shadow, shadow_operator_t, NewtonOptions, PseudoOrbit};
use premax::symbolic::{is_locally_maximal, SubshiftPresentation};
use premax::torus::{HyperbolicMap, System, TorusPoint};

/// Outcome of a call. Values 1 to 3 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PremaxStatus {
    Ok = 0,
    /// Malformed input or config.
    Input = 1,
    /// A mathematical precondition does not hold.
    Refusal = 2,
    /// An iteration budget ran out.
    Budget = 3,
    NullPointer = 4,
    /// A caller buffer is too small; see the `len` out-parameter.
    BufferTooSmall = 5,
    Panic = 6,
}

/// Shadowing method for [`premax_shadow`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PremaxMethod {
    Operator = 0,
    Newton = 1,
    Linear = 2,
}

/// Closure verdict kinds.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PremaxVerdict {
    Stabilized = 0,
    EscapedNeighborhood = 1,
    BudgetExhausted = 2,
}

/// An experiment configuration together with the system it describes.
pub struct PremaxConfig {
    cfg: ExperimentConfig,
    system: System,
}

/// The result of a closure run.
pub struct PremaxTrace {
    trace: ClosureTrace,
}

/// A parsed subshift presentation.
pub struct PremaxSubshift {
    pres: SubshiftPresentation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(class: ErrorClass) -> PremaxStatus {
    match class {
        ErrorClass::Input => PremaxStatus::Input,
        ErrorClass::Refusal => PremaxStatus::Refusal,
        ErrorClass::Budget => PremaxStatus::Budget,
    }
}

enum Fail {
    Core(Failure),
    Null(&'static str),
    Small,
}

impl<E: Into<Failure>> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail::Core(e.into())
    }
}

/// Run `f`, translating errors and panics into a status and the last-error slot.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PremaxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PremaxStatus::Ok,
        Ok(Err(Fail::Core(e))) => {
            set_error(&e.message);
            status_of(e.class)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("{what} is null"));
            PremaxStatus::NullPointer
        }
        Ok(Err(Fail::Small)) => {
            set_error("output buffer too small");
            PremaxStatus::BufferTooSmall
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("panic: {msg}"));
            PremaxStatus::Panic
        }
    }
}

unsafe fn nonnull<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    unsafe { p.as_ref() }.ok_or(Fail::Null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Fail::Core(Failure::new(ErrorClass::Input, format!("{what} is not UTF-8"))))
}

/// `n` points of dimension `dim`, row-major.
unsafe fn points(data: *const f64, n: usize, dim: usize) -> Result<Vec<TorusPoint>, Fail> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if data.is_null() {
        return Err(Fail::Null("points"));
    }
    let flat = unsafe { std::slice::from_raw_parts(data, n * dim) };
    Ok(flat.chunks(dim).map(|c| TorusPoint::new(c.to_vec())).collect())
}

/// Copy `pts` into `out` (capacity `cap` doubles), always reporting the count in `len`.
unsafe fn export(pts: &[TorusPoint], out: *mut f64, cap: usize, len: *mut usize) -> Result<(), Fail> {
    let flat: Vec<f64> = pts.iter().flat_map(|p| p.coords().iter().copied()).collect();
    if !len.is_null() {
        unsafe { *len = flat.len() };
    }
    if out.is_null() {
        return if flat.is_empty() { Ok(()) } else { Err(Fail::Null("out")) };
    }
    if flat.len() > cap {
        return Err(Fail::Small);
    }
    unsafe { ptr::copy_nonoverlapping(flat.as_ptr(), out, flat.len()) };
    Ok(())
}

unsafe fn put<T>(out: *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    unsafe { *out = v };
    Ok(())
}

fn owned(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn premax_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failing call on this thread, or null. Valid until the
/// next failing call.
#[no_mangle]
pub extern "C" fn premax_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Free a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn premax_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

fn config_handle(cfg: ExperimentConfig) -> Result<Box<PremaxConfig>, Fail> {
    cfg.validate()?;
    let system = cfg.build_system()?;
    Ok(Box::new(PremaxConfig { cfg, system }))
}

/// The default configuration (cat map).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn premax_config_default(out: *mut *mut PremaxConfig) -> PremaxStatus {
    guard(|| {
        let h = config_handle(ExperimentConfig::default())?;
        unsafe { put(out, Box::into_raw(h), "out") }
    })
}

/// Parse and validate a TOML configuration.
///
/// # Safety
/// `toml` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn premax_config_from_toml(
    toml: *const c_char,
    out: *mut *mut PremaxConfig,
) -> PremaxStatus {
    guard(|| {
        let cfg = ExperimentConfig::from_toml(unsafe { text(toml, "toml") }?)?;
        let h = config_handle(cfg)?;
        unsafe { put(out, Box::into_raw(h), "out") }
    })
}

/// Dimension of the configured torus, or 0 for a null handle.
///
/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn premax_config_dim(cfg: *const PremaxConfig) -> usize {
    unsafe { cfg.as_ref() }.map_or(0, |c| c.system.dim())
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn premax_config_free(cfg: *mut PremaxConfig) {
    if !cfg.is_null() {
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Shadow the pseudo-orbit `points` (`n` rows of `dim` coordinates) and write
/// the true orbit to `out`. `out_len` receives the number of doubles needed.
///
/// # Safety
/// Pointers must be valid for the stated sizes; `out` may be null to query the size.
#[no_mangle]
pub unsafe extern "C" fn premax_shadow(
    cfg: *const PremaxConfig,
    points: *const f64,
    n: usize,
    periodic: bool,
    method: PremaxMethod,
    out: *mut f64,
    out_cap: usize,
    out_len: *mut usize,
    sup_distance: *mut f64,
) -> PremaxStatus {
    guard(|| {
        let c = unsafe { nonnull(cfg, "cfg") }?;
        let sys = &c.system;
        let pts = unsafe { self::points(points, n, sys.dim()) }?;
        let po = if periodic {
            PseudoOrbit::periodic(sys, 0, pts)?
        } else {
            PseudoOrbit::new(sys, 0, pts)?
        };
        let res = match method {
            PremaxMethod::Operator => shadow_operator_t(sys, &po),
            PremaxMethod::Newton => newton_shadow(sys, &po, NewtonOptions::default()),
            PremaxMethod::Linear => exact_shadow_linear(sys.linear(), &po),
        }?;
        if !sup_distance.is_null() {
            unsafe { *sup_distance = res.sup_distance };
        }
        if out.is_null() && !out_len.is_null() {
            unsafe { *out_len = res.orbit.len() * sys.dim() };
            return Ok(());
        }
        unsafe { export(&res.orbit, out, out_cap, out_len) }
    })
}

/// Iterate the shadowing closure from the `n` points of `lambda0`, using the
/// configured resolution, delta, neighbourhood radius, budget and sampling.
/// A budget-exhausted run still yields a trace and returns `Ok`; inspect the
/// verdict.
///
/// # Safety
/// Pointers must be valid; `points` holds `n * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn premax_closure_run(
    cfg: *const PremaxConfig,
    points: *const f64,
    n: usize,
    out: *mut *mut PremaxTrace,
) -> PremaxStatus {
    guard(|| {
        let c = unsafe { nonnull(cfg, "cfg") }?;
        let pts = unsafe { self::points(points, n, c.system.dim()) }?;
        let lambda0 = SetApprox::new(pts, c.cfg.resolution, "input")?;
        let trace = iterate_closure(&c.system, &lambda0, &c.cfg.closure_params())?;
        unsafe { put(out, Box::into_raw(Box::new(PremaxTrace { trace })), "out") }
    })
}

/// Verdict of a closure run; `at` receives the step index where one applies.
///
/// # Safety
/// `trace` must be a live handle; `at` may be null.
#[no_mangle]
pub unsafe extern "C" fn premax_trace_verdict(
    trace: *const PremaxTrace,
    verdict: *mut PremaxVerdict,
    at: *mut usize,
) -> PremaxStatus {
    guard(|| {
        let t = unsafe { nonnull(trace, "trace") }?;
        let (v, i) = match t.trace.verdict {
            Verdict::Stabilized(i) => (PremaxVerdict::Stabilized, i),
            Verdict::EscapedNeighborhood(i) => (PremaxVerdict::EscapedNeighborhood, i),
            Verdict::BudgetExhausted => (PremaxVerdict::BudgetExhausted, t.trace.nus.len()),
        };
        if !at.is_null() {
            unsafe { *at = i };
        }
        unsafe { put(verdict, v, "verdict") }
    })
}

/// Copy the last iterate's points into `out`, row-major.
///
/// # Safety
/// `out` must hold `out_cap` doubles or be null to query the size.
#[no_mangle]
pub unsafe extern "C" fn premax_trace_final_points(
    trace: *const PremaxTrace,
    out: *mut f64,
    out_cap: usize,
    out_len: *mut usize,
) -> PremaxStatus {
    guard(|| {
        let t = unsafe { nonnull(trace, "trace") }?;
        let pts = t.trace.final_set().points();
        if out.is_null() && !out_len.is_null() {
            unsafe { *out_len = pts.iter().map(|p| p.dim()).sum() };
            return Ok(());
        }
        unsafe { export(pts, out, out_cap, out_len) }
    })
}

/// The whole trace as JSON; free with [`premax_string_free`].
///
/// # Safety
/// `trace` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn premax_trace_json(trace: *const PremaxTrace, out: *mut *mut c_char) -> PremaxStatus {
    guard(|| {
        let t = unsafe { nonnull(trace, "trace") }?;
        let s = to_json(&t.trace)?;
        unsafe { put(out, owned(s), "out") }
    })
}

/// # Safety
/// `trace` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn premax_trace_free(trace: *mut PremaxTrace) {
    if !trace.is_null() {
        drop(unsafe { Box::from_raw(trace) });
    }
}

/// Check local product structure on `n` points at the configured epsilon,
/// delta and membership tolerance. `failures` counts failing and refused pairs.
///
/// # Safety
/// Pointers must be valid; `points` holds `n * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn premax_local_product(
    cfg: *const PremaxConfig,
    points: *const f64,
    n: usize,
    pairs_tested: *mut usize,
    failures: *mut usize,
) -> PremaxStatus {
    guard(|| {
        let c = unsafe { nonnull(cfg, "cfg") }?;
        let pts = unsafe { self::points(points, n, c.system.dim()) }?;
        let set = SetApprox::new(pts, c.cfg.resolution, "input")?;
        let r = local_product_check(&c.system, &set, c.cfg.epsilon, c.cfg.delta, c.cfg.membership_tol());
        if !pairs_tested.is_null() {
            unsafe { *pairs_tested = r.pairs_tested };
        }
        unsafe { put(failures, r.failures.len() + r.refused, "failures") }
    })
}

/// Parse a subshift presentation in the text format the CLI reads.
///
/// # Safety
/// `text` must be nul-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn premax_subshift_parse(
    text: *const c_char,
    out: *mut *mut PremaxSubshift,
) -> PremaxStatus {
    guard(|| {
        let pres: SubshiftPresentation = unsafe { self::text(text, "text") }?.parse()?;
        unsafe { put(out, Box::into_raw(Box::new(PremaxSubshift { pres })), "out") }
    })
}

/// Smallest window `k ≤ kmax` at which the subshift is of finite type, or 0
/// if there is none.
///
/// # Safety
/// `s` must be a live handle and `k` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn premax_subshift_sft_window(
    s: *const PremaxSubshift,
    kmax: usize,
    k: *mut usize,
) -> PremaxStatus {
    guard(|| {
        let s = unsafe { nonnull(s, "subshift") }?;
        let r = is_locally_maximal(&s.pres, kmax)?;
        unsafe { put(k, r.k.unwrap_or(0), "k") }
    })
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn premax_subshift_free(s: *mut PremaxSubshift) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}
