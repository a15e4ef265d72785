//! C ABI over the `nirgas` sweep engine.
//!
//! Every fallible call returns a [`NirgasStatus`]. On failure the message is
//! kept in a thread-local slot readable through [`nirgas_last_error`].
//! Handles are opaque and must be released with their matching `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nirgas::atomsys::Polarization;
use nirgas::index::{refractive_index, Branch};
use nirgas::response::ResponseCoefficients;
use nirgas::sweep::{self, RunConfig, SweepResult};
use nirgas::Error;
use num_complex::Complex64 as C64;

/// Result codes shared by all fallible functions.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NirgasStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidConfig = 4,
    NumericalFailure = 5,
    Io = 6,
    OutOfRange = 7,
    Panic = 8,
}

/// Opaque run configuration.
pub struct NirgasConfig(RunConfig);

/// Opaque sweep result.
pub struct NirgasResult(SweepResult);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NirgasComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for NirgasComplex {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<NirgasComplex> for C64 {
    fn from(z: NirgasComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

/// Branch of the index root. `None` marks a failed point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NirgasBranch {
    None = 0,
    Principal = 1,
    Negated = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NirgasPolarization {
    SigmaPlus = 0,
    SigmaMinus = 1,
}

/// One sweep row. Optional quantities are NaN when `has_values` is false.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct NirgasRow {
    pub delta21: f64,
    pub pump: f64,
    pub eps: NirgasComplex,
    pub mu: NirgasComplex,
    pub xi_eh: NirgasComplex,
    pub xi_he: NirgasComplex,
    pub n: NirgasComplex,
    pub fom: f64,
    pub r2_e: f64,
    pub r2_m: f64,
    pub branch: NirgasBranch,
    pub has_values: bool,
    pub converged: bool,
    pub nonlinear_regime: bool,
    pub branch_point: bool,
    pub suspicious_jump: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> NirgasStatus {
    match err {
        Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => NirgasStatus::ParseError,
        Error::Validation { .. } | Error::InvalidInput(_) | Error::Unsupported(_) => NirgasStatus::InvalidConfig,
        Error::NumericalFailure(_) | Error::GridPoint { .. } => NirgasStatus::NumericalFailure,
        Error::Io(_) => NirgasStatus::Io,
    }
}

/// Runs `f`, translating errors and panics into a status and the error slot.
fn guard(f: impl FnOnce() -> Result<(), (NirgasStatus, String)>) -> NirgasStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NirgasStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            NirgasStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (NirgasStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (NirgasStatus, String) {
    (NirgasStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (NirgasStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (NirgasStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

/// Message of the most recent failure on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn nirgas_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nirgas_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Allocates the default configuration.
#[no_mangle]
pub extern "C" fn nirgas_config_default() -> *mut NirgasConfig {
    Box::into_raw(Box::new(NirgasConfig(RunConfig::default())))
}

/// Parses and validates a JSON configuration. Empty text yields the defaults.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn nirgas_config_from_json(json: *const c_char, out: *mut *mut NirgasConfig) -> NirgasStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = str_arg(json, "json")?;
        let cfg = sweep::parse_config(text).map_err(core_err)?;
        *out = Box::into_raw(Box::new(NirgasConfig(cfg)));
        Ok(())
    })
}

/// Serializes a configuration to pretty JSON. Release with [`nirgas_string_free`].
///
/// # Safety
/// `cfg` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nirgas_config_to_json(cfg: *const NirgasConfig, out: *mut *mut c_char) -> NirgasStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let text = cfg.0.to_json_pretty();
        *out = CString::new(text)
            .map_err(|e| (NirgasStatus::Panic, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nirgas_config_free(cfg: *mut NirgasConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nirgas_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs the sweep described by `cfg`. `workers` = 0 uses all cores.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nirgas_run(cfg: *const NirgasConfig, workers: usize, out: *mut *mut NirgasResult) -> NirgasStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let res = if workers == 0 {
            sweep::run_sweep(&cfg.0)
        } else {
            sweep::run_sweep_with_workers(&cfg.0, workers)
        }
        .map_err(core_err)?;
        *out = Box::into_raw(Box::new(NirgasResult(res)));
        Ok(())
    })
}

/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nirgas_result_row_count(res: *const NirgasResult) -> usize {
    res.as_ref().map_or(0, |r| r.0.rows.len())
}

/// Rows that did not converge or carry a quality flag.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nirgas_result_flagged_count(res: *const NirgasResult) -> usize {
    res.as_ref().map_or(0, |r| r.0.flagged_count())
}

/// Copies row `index` into `out`.
///
/// # Safety
/// `res` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nirgas_result_row(res: *const NirgasResult, index: usize, out: *mut NirgasRow) -> NirgasStatus {
    guard(|| {
        let res = res.as_ref().ok_or_else(|| null("res"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let row = res.0.rows.get(index).ok_or_else(|| {
            (NirgasStatus::OutOfRange, format!("row {index} out of range (0..{})", res.0.rows.len()))
        })?;
        let nan = NirgasComplex { re: f64::NAN, im: f64::NAN };
        let c = |z: Option<C64>| z.map_or(nan, NirgasComplex::from);
        *out = NirgasRow {
            delta21: row.delta21,
            pump: row.pump,
            eps: c(row.eps),
            mu: c(row.mu),
            xi_eh: c(row.xi_eh),
            xi_he: c(row.xi_he),
            n: c(row.n),
            fom: row.fom.unwrap_or(f64::NAN),
            r2_e: row.r2_e.unwrap_or(f64::NAN),
            r2_m: row.r2_m.unwrap_or(f64::NAN),
            branch: match row.branch {
                None => NirgasBranch::None,
                Some(Branch::Principal) => NirgasBranch::Principal,
                Some(Branch::Negated) => NirgasBranch::Negated,
            },
            has_values: row.n.is_some(),
            converged: row.converged,
            nonlinear_regime: row.nonlinear_regime,
            branch_point: row.branch_point,
            suspicious_jump: row.suspicious_jump,
        };
        Ok(())
    })
}

/// # Safety
/// `res` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nirgas_result_export_csv(res: *const NirgasResult, path: *const c_char) -> NirgasStatus {
    guard(|| {
        let res = res.as_ref().ok_or_else(|| null("res"))?;
        sweep::export_csv(&res.0, str_arg(path, "path")?).map_err(core_err)
    })
}

/// # Safety
/// `res` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nirgas_result_export_json(res: *const NirgasResult, path: *const c_char) -> NirgasStatus {
    guard(|| {
        let res = res.as_ref().ok_or_else(|| null("res"))?;
        sweep::export_json(&res.0, str_arg(path, "path")?).map_err(core_err)
    })
}

/// # Safety
/// `res` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nirgas_result_free(res: *mut NirgasResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Refractive index from ε, μ and the two chiralities. `prev` may be null;
/// otherwise the root nearest to it is selected.
///
/// # Safety
/// `out` must be writable; `prev` must be null or readable.
#[no_mangle]
pub unsafe extern "C" fn nirgas_refractive_index(
    eps: NirgasComplex,
    mu: NirgasComplex,
    xi_eh: NirgasComplex,
    xi_he: NirgasComplex,
    polarization: NirgasPolarization,
    prev: *const NirgasComplex,
    out: *mut NirgasComplex,
) -> NirgasStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let rc = ResponseCoefficients::from_eps_mu(eps.into(), mu.into(), xi_eh.into(), xi_he.into());
        let pol = match polarization {
            NirgasPolarization::SigmaPlus => Polarization::SigmaPlus,
            NirgasPolarization::SigmaMinus => Polarization::SigmaMinus,
        };
        let prev = prev.as_ref().map(|&p| C64::from(p));
        *out = refractive_index(&rc, pol, prev).map_err(core_err)?.n.into();
        Ok(())
    })
}
