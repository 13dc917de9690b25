//! C ABI over the simulator: opaque scenario handles, status codes and a per-thread
//! error message.
//!
//! Complex vectors cross the boundary as interleaved `[re0, im0, re1, im1, ...]` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::str::FromStr;

use rician_fusion::config::ScenarioFile;
use rician_fusion::jamming::solve_sigma_poly;
use rician_fusion::linalg::{c, CVector};
use rician_fusion::montecarlo::{evaluator_at, run_point, Evaluator, FrozenScenario, RuleId};
use rician_fusion::scenario::{DeploymentConfig, JammerPreset, WsnPreset};
use rician_fusion::signal::Hypothesis;
use rician_fusion::FusionError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnsupportedSize = 3,
    DegenerateWeights = 4,
    Numerical = 5,
    Io = 6,
    Parse = 7,
    Panic = 8,
}

/// Calibrated threshold and detection estimate for one rule.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RfPointResult {
    pub gamma: f64,
    pub achieved_pf0: f64,
    pub pd0: f64,
    pub pd0_stderr: f64,
}

/// Frozen deployment plus the evaluator for its current antenna count and noise power.
pub struct RfScenario {
    frozen: FrozenScenario,
    eval: Evaluator,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: RfStatus, msg: impl Into<String>) -> RfStatus {
    set_error(msg.into());
    status
}

fn status_of(e: FusionError) -> RfStatus {
    let status = match &e {
        FusionError::InvalidArgument(_) => RfStatus::InvalidArgument,
        FusionError::UnsupportedSize(_) => RfStatus::UnsupportedSize,
        FusionError::DegenerateWeights(_) => RfStatus::DegenerateWeights,
        FusionError::Numerical(_) => RfStatus::Numerical,
        FusionError::Io(_) => RfStatus::Io,
        FusionError::Parse(_) => RfStatus::Parse,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), RfStatus>) -> RfStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RfStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(RfStatus::Panic, "internal panic"),
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, RfStatus> {
    if p.is_null() {
        return Err(fail(RfStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(RfStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], RfStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(RfStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a>(h: *const RfScenario) -> Result<&'a RfScenario, RfStatus> {
    h.as_ref().ok_or_else(|| fail(RfStatus::NullPointer, "scenario handle is null"))
}

fn parse_rule(name: &str) -> Result<RuleId, RfStatus> {
    RuleId::from_str(name).map_err(status_of)
}

fn boxed(frozen: FrozenScenario, out: *mut *mut RfScenario) -> Result<(), RfStatus> {
    let n = frozen.wsn.n_antennas();
    let dbm = 10.0 * frozen.wsn.noise_power().log10();
    let eval = evaluator_at(&frozen, n, dbm).map_err(status_of)?;
    unsafe { *out = Box::into_raw(Box::new(RfScenario { frozen, eval })) };
    Ok(())
}

/// Create a scenario from a WSN preset (`los`, `intermediate`, `nlos`) and a jammer
/// preset (`none`, `los-jam`, `weak-los-jam`) with `K` sensors and `N` antennas.
///
/// # Safety
/// `preset` and `jammer` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_scenario_preset(
    preset: *const c_char,
    jammer: *const c_char,
    k_sensors: usize,
    n_antennas: usize,
    seed: u64,
    out: *mut *mut RfScenario,
) -> RfStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(RfStatus::NullPointer, "output pointer is null"));
        }
        let p = text(preset, "preset")?;
        let j = text(jammer, "jammer preset")?;
        let wp = WsnPreset::parse(p).ok_or_else(|| fail(RfStatus::InvalidArgument, format!("unknown preset '{p}'")))?;
        let jp = JammerPreset::parse(j)
            .ok_or_else(|| fail(RfStatus::InvalidArgument, format!("unknown jammer preset '{j}'")))?;
        let cfg = DeploymentConfig::preset(wp, jp, k_sensors, n_antennas, seed);
        let file = ScenarioFile::from_preset(wp, jp, cfg).frozen().map_err(status_of)?;
        boxed(file.frozen_scenario().map_err(status_of)?, out)
    })
}

/// Load a scenario file written by `rician-fusion generate`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_scenario_load(path: *const c_char, out: *mut *mut RfScenario) -> RfStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(RfStatus::NullPointer, "output pointer is null"));
        }
        let p = text(path, "path")?;
        let file = ScenarioFile::load(Path::new(p)).map_err(status_of)?;
        boxed(file.frozen_scenario().map_err(status_of)?, out)
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `h` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rf_scenario_free(h: *mut RfScenario) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Re-target the frozen deployment to `n_antennas` and a noise power in dBm.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rf_scenario_configure(h: *mut RfScenario, n_antennas: usize, sigma_w2_dbm: f64) -> RfStatus {
    guard(|| {
        let s = h.as_mut().ok_or_else(|| fail(RfStatus::NullPointer, "scenario handle is null"))?;
        s.eval = evaluator_at(&s.frozen, n_antennas, sigma_w2_dbm).map_err(status_of)?;
        Ok(())
    })
}

/// Antenna count of the current configuration; 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rf_scenario_n_antennas(h: *const RfScenario) -> usize {
    h.as_ref().map_or(0, |s| s.eval.scenario().n_antennas())
}

/// Number of sensors; 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rf_scenario_k_sensors(h: *const RfScenario) -> usize {
    h.as_ref().map_or(0, |s| s.eval.scenario().k_sensors())
}

/// Whether the scenario carries a jammer.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rf_scenario_has_jammer(h: *const RfScenario) -> bool {
    h.as_ref().is_some_and(|s| s.eval.jammer().is_some())
}

/// Draw trial `trial` of `stream` under H1 (`h1 = true`) or H0 into `y_out` (`2N` doubles).
///
/// # Safety
/// `h` must be a live handle and `y_out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rf_draw_sample(
    h: *const RfScenario,
    h1: bool,
    seed: u64,
    stream: u64,
    trial: u64,
    y_out: *mut f64,
    len: usize,
) -> RfStatus {
    guard(|| {
        let s = handle(h)?;
        let n = s.eval.scenario().n_antennas();
        if len != 2 * n {
            return Err(fail(RfStatus::InvalidArgument, format!("buffer holds {len} doubles, need {}", 2 * n)));
        }
        if y_out.is_null() {
            return Err(fail(RfStatus::NullPointer, "output buffer is null"));
        }
        let hyp = if h1 { Hypothesis::H1 } else { Hypothesis::H0 };
        let sample = s.eval.draw(hyp, seed, stream, trial).map_err(status_of)?;
        let out = std::slice::from_raw_parts_mut(y_out, len);
        for (i, z) in sample.y.iter().enumerate() {
            out[2 * i] = z.re;
            out[2 * i + 1] = z.im;
        }
        Ok(())
    })
}

/// Evaluate rule `rule` (e.g. `"igmm"`, `"is-glrt"`) on `y` (`2N` interleaved doubles).
/// The clairvoyant rule is evaluated with a zero jammer symbol.
///
/// # Safety
/// `h` must be a live handle, `rule` a NUL-terminated string, `y` must hold `len`
/// doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_statistic(
    h: *const RfScenario,
    rule: *const c_char,
    y: *const f64,
    len: usize,
    out: *mut f64,
) -> RfStatus {
    guard(|| {
        let s = handle(h)?;
        let rule = parse_rule(text(rule, "rule")?)?;
        let n = s.eval.scenario().n_antennas();
        if len != 2 * n {
            return Err(fail(RfStatus::InvalidArgument, format!("y holds {len} doubles, need {}", 2 * n)));
        }
        if out.is_null() {
            return Err(fail(RfStatus::NullPointer, "output pointer is null"));
        }
        let raw = slice(y, len, "y")?;
        let yv = CVector::from_fn(n, |i, _| c(raw[2 * i], raw[2 * i + 1]));
        let sample = rician_fusion::signal::ReceivedSample { y: yv, hypothesis: Hypothesis::H0, x: Vec::new(), psi: None };
        s.eval.check(rule).map_err(status_of)?;
        *out = s.eval.statistic(rule, &sample).map_err(status_of)?;
        Ok(())
    })
}

/// Calibrate `rule` at `target_pf0` and estimate its detection probability.
///
/// # Safety
/// `h` must be a live handle, `rule` a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_run_point(
    h: *const RfScenario,
    rule: *const c_char,
    target_pf0: f64,
    trials: usize,
    seed: u64,
    out: *mut RfPointResult,
) -> RfStatus {
    guard(|| {
        let s = handle(h)?;
        let rule = parse_rule(text(rule, "rule")?)?;
        if out.is_null() {
            return Err(fail(RfStatus::NullPointer, "output pointer is null"));
        }
        let r = run_point(&s.eval, &[rule], target_pf0, trials, seed).map_err(status_of)?.remove(0);
        *out = RfPointResult {
            gamma: r.test.gamma,
            achieved_pf0: r.test.achieved_pf0.estimate,
            pd0: r.pd0.estimate,
            pd0_stderr: r.pd0.stderr,
        };
        Ok(())
    })
}

/// Maximum-likelihood jammer variance for eigenvalue lists `lambda_a`, `lambda_c` and
/// squared whitened residuals `v_abs2` (same length as `lambda_c`).
///
/// # Safety
/// Each array must hold its stated number of doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_solve_sigma_poly(
    lambda_a: *const f64,
    n_a: usize,
    lambda_c: *const f64,
    n_c: usize,
    v_abs2: *const f64,
    out: *mut f64,
) -> RfStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(RfStatus::NullPointer, "output pointer is null"));
        }
        let la = slice(lambda_a, n_a, "lambda_a")?;
        let lc = slice(lambda_c, n_c, "lambda_c")?;
        let v = slice(v_abs2, n_c, "v_abs2")?;
        *out = solve_sigma_poly(la, lc, v).map_err(status_of)?;
        Ok(())
    })
}

/// Message for the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn rf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn rf_status_name(status: RfStatus) -> *const c_char {
    let s: &'static CStr = match status {
        RfStatus::Ok => c"ok",
        RfStatus::NullPointer => c"null-pointer",
        RfStatus::InvalidArgument => c"invalid-argument",
        RfStatus::UnsupportedSize => c"unsupported-size",
        RfStatus::DegenerateWeights => c"degenerate-weights",
        RfStatus::Numerical => c"numerical",
        RfStatus::Io => c"io",
        RfStatus::Parse => c"parse",
        RfStatus::Panic => c"panic",
    };
    s.as_ptr()
}
