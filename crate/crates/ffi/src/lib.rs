//! C ABI for the identification pipeline.
//!
//! Conventions:
//! - Every fallible function returns an [`ArxidStatus`]; out-parameters are
//!   written only when the status is `ARXID_STATUS_OK`.
//! - A failing call stores a human-readable message retrievable with
//!   [`arxid_last_error_message`]; the pointer stays valid until the next
//!   failing call on the same thread.
//! - [`arxid_identify`] allocates an opaque report released with
//!   [`arxid_report_free`]; strings from [`arxid_report_to_json`] are
//!   released with [`arxid_string_free`]. Handles are not thread-safe;
//!   share them across threads only behind external synchronization.
//! - Vector getters use a two-call pattern: query the length, then fill a
//!   caller-owned buffer of at least that capacity.

use std::cell::RefCell;
use std::ffi::CString;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use arxid::types::{DataSet, IdentificationConfig, IdentificationReport};
use arxid::validation::percent_fit;
use arxid::Error;

/// Result of a C API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArxidStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument or configuration value is out of range.
    InvalidArgument = 2,
    /// The record is too short for the requested lag depth.
    InsufficientData = 3,
    /// No equation order in the configured range passed verification.
    OrderSearchFailed = 4,
    /// A numerical step failed (unstable model, degenerate spectrum, ...).
    NumericalFailure = 5,
    /// A provided buffer is smaller than the value being returned.
    BufferTooSmall = 6,
    /// The library caught an internal panic instead of unwinding into C.
    InternalPanic = 7,
}

/// Identification settings, mirroring the library defaults. Obtain a
/// baseline with [`arxid_config_default`] and override fields as needed.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ArxidConfig {
    /// First equation-order guess of the search.
    pub eta_guess_initial: u32,
    /// Last equation-order guess of the search.
    pub eta_max: u32,
    /// Verification stacking lag is the accepted guess plus this offset.
    pub l_verify_offset: u32,
    /// Half-width of the unity band for counting eigenvalues near one.
    pub unity_tol: f64,
    /// Relative parameter-change threshold that stops the inner iteration.
    pub conv_tol: f64,
    /// Inner-iteration budget per guess.
    pub max_inner_iters: u32,
    /// Frequency-grid resolution for autocovariance propagation.
    pub acvf_grid_points: u32,
    /// Bootstrap replicates for parameter spread (0 disables).
    pub bootstrap_reps: u32,
    /// Seed for the bootstrap resampler.
    pub seed: u64,
    /// Remove per-channel sample means before estimation.
    pub detrend: bool,
}

/// Opaque identification result.
pub struct ArxidReport {
    inner: IdentificationReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: ArxidStatus, msg: &str) -> ArxidStatus {
    set_last_error(msg);
    status
}

fn fail_with(e: &Error) -> ArxidStatus {
    let status = match e {
        Error::InvalidArgument(_)
        | Error::DimensionMismatch(_)
        | Error::InvalidPrbs(_)
        | Error::CsvParse { .. } => ArxidStatus::InvalidArgument,
        Error::InsufficientData { .. } => ArxidStatus::InsufficientData,
        Error::OrderSearchFailed { .. } => ArxidStatus::OrderSearchFailed,
        _ => ArxidStatus::NumericalFailure,
    };
    fail(status, &e.to_string())
}

fn guarded<F: FnOnce() -> ArxidStatus>(f: F) -> ArxidStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(ArxidStatus::InternalPanic, "internal panic"),
    }
}

/// Library version as a static, NUL-terminated string.
#[no_mangle]
pub extern "C" fn arxid_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on the calling thread, or an
/// empty string when no failure has occurred yet.
#[no_mangle]
pub extern "C" fn arxid_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Fills `out` with the default identification settings.
///
/// # Safety
///
/// `out` must be null or point to writable memory for one `ArxidConfig`.
#[no_mangle]
pub unsafe extern "C" fn arxid_config_default(out: *mut ArxidConfig) -> ArxidStatus {
    if out.is_null() {
        return fail(ArxidStatus::NullPointer, "out is null");
    }
    let d = IdentificationConfig::default();
    out.write(ArxidConfig {
        eta_guess_initial: d.eta_guess_initial as u32,
        eta_max: d.eta_max as u32,
        l_verify_offset: d.l_verify_offset as u32,
        unity_tol: d.unity_tol,
        conv_tol: d.conv_tol,
        max_inner_iters: d.max_inner_iters as u32,
        acvf_grid_points: d.acvf_grid_points as u32,
        bootstrap_reps: d.bootstrap_reps as u32,
        seed: d.seed,
        detrend: false,
    });
    ArxidStatus::Ok
}

fn native_config(c: &ArxidConfig) -> IdentificationConfig {
    IdentificationConfig {
        eta_guess_initial: c.eta_guess_initial as usize,
        eta_max: c.eta_max as usize,
        l_verify_offset: c.l_verify_offset as usize,
        unity_tol: c.unity_tol,
        conv_tol: c.conv_tol,
        max_inner_iters: c.max_inner_iters as usize,
        acvf_grid_points: c.acvf_grid_points as usize,
        bootstrap_reps: c.bootstrap_reps as usize,
        seed: c.seed,
    }
}

/// Runs the full order/delay/parameter/noise identification on an
/// input-output record of `len` samples. `config` may be null to use the
/// defaults. On success writes a heap-allocated report to `out`; release
/// it with [`arxid_report_free`].
///
/// # Safety
///
/// `u` and `y` must be null or point to `len` readable doubles, `config`
/// must be null or point to a valid `ArxidConfig`, and `out` must be null
/// or point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn arxid_identify(
    u: *const f64,
    y: *const f64,
    len: usize,
    config: *const ArxidConfig,
    out: *mut *mut ArxidReport,
) -> ArxidStatus {
    if u.is_null() || y.is_null() || out.is_null() {
        return fail(ArxidStatus::NullPointer, "u, y and out must be non-null");
    }
    if len == 0 {
        return fail(ArxidStatus::InvalidArgument, "len must be positive");
    }
    let u = slice::from_raw_parts(u, len);
    let y = slice::from_raw_parts(y, len);
    let (native, detrend) = if config.is_null() {
        (IdentificationConfig::default(), false)
    } else {
        (native_config(&*config), (*config).detrend)
    };
    guarded(move || {
        let data = match DataSet::new(u.to_vec(), y.to_vec()) {
            Ok(d) => d,
            Err(e) => return fail_with(&e),
        };
        let data = if detrend { data.detrend() } else { data };
        match arxid::identify(&data, &native) {
            Ok(report) => {
                out.write(Box::into_raw(Box::new(ArxidReport { inner: report })));
                ArxidStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Releases a report produced by [`arxid_identify`]. Null is ignored.
///
/// # Safety
///
/// `report` must be null or a pointer obtained from [`arxid_identify`]
/// that has not been freed yet; the handle is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn arxid_report_free(report: *mut ArxidReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

unsafe fn with_report<T>(
    report: *const ArxidReport,
    out: *mut T,
    read: impl FnOnce(&IdentificationReport) -> T,
) -> ArxidStatus {
    if report.is_null() || out.is_null() {
        return fail(ArxidStatus::NullPointer, "report and out must be non-null");
    }
    out.write(read(&(*report).inner));
    ArxidStatus::Ok
}

/// Estimated equation order (max of output and input lag depth).
///
/// # Safety
///
/// `report` must be null or a live report handle; `out` must be null or
/// point to writable memory for one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn arxid_report_eta(
    report: *const ArxidReport,
    out: *mut usize,
) -> ArxidStatus {
    with_report(report, out, |r| r.eta_hat)
}

/// Number of unity eigenvalues found at the verification lag.
///
/// # Safety
///
/// `report` must be null or a live report handle; `out` must be null or
/// point to writable memory for one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn arxid_report_unity_count(
    report: *const ArxidReport,
    out: *mut usize,
) -> ArxidStatus {
    with_report(report, out, |r| r.d_hat)
}

/// Input delay of the pruned model.
///
/// # Safety
///
/// `report` must be null or a live report handle; `out` must be null or
/// point to writable memory for one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn arxid_report_delay(
    report: *const ArxidReport,
    out: *mut usize,
) -> ArxidStatus {
    with_report(report, out, |r| r.model.delay)
}

/// Largest output lag (`n_y`) and largest input lag (`n_u`) of the pruned
/// model. Either out-pointer may be null to skip that value.
///
/// # Safety
///
/// `report` must be null or a live report handle; each non-null
/// out-pointer must point to writable memory for one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn arxid_report_orders(
    report: *const ArxidReport,
    out_n_y: *mut usize,
    out_n_u: *mut usize,
) -> ArxidStatus {
    if report.is_null() {
        return fail(ArxidStatus::NullPointer, "report must be non-null");
    }
    let model = &(*report).inner.model;
    if !out_n_y.is_null() {
        out_n_y.write(model.n_y);
    }
    if !out_n_u.is_null() {
        out_n_u.write(model.n_u);
    }
    ArxidStatus::Ok
}

/// Estimated innovation variance.
///
/// # Safety
///
/// `report` must be null or a live report handle; `out` must be null or
/// point to writable memory for one double.
#[no_mangle]
pub unsafe extern "C" fn arxid_report_sigma_e2(
    report: *const ArxidReport,
    out: *mut f64,
) -> ArxidStatus {
    with_report(report, out, |r| r.noise.sigma_e2)
}

/// Whether the inner iteration met its convergence threshold.
///
/// # Safety
///
/// `report` must be null or a live report handle; `out` must be null or
/// point to writable memory for one `bool`.
#[no_mangle]
pub unsafe extern "C" fn arxid_report_converged(
    report: *const ArxidReport,
    out: *mut bool,
) -> ArxidStatus {
    with_report(report, out, |r| r.converged)
}

unsafe fn fill_slice(values: &[f64], buf: *mut f64, cap: usize) -> ArxidStatus {
    if buf.is_null() {
        return fail(ArxidStatus::NullPointer, "buf must be non-null");
    }
    if cap < values.len() {
        return fail(
            ArxidStatus::BufferTooSmall,
            &format!("need capacity {}, got {}", values.len(), cap),
        );
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    ArxidStatus::Ok
}

/// Length of the normalized parameter vector `[1, a1.., -b0..]`.
///
/// # Safety
///
/// `report` must be null or a live report handle; `out` must be null or
/// point to writable memory for one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn arxid_report_theta_len(
    report: *const ArxidReport,
    out: *mut usize,
) -> ArxidStatus {
    with_report(report, out, |r| r.theta.len())
}

/// Copies the normalized parameter vector into `buf` (capacity `cap`).
///
/// # Safety
///
/// `report` must be null or a live report handle; `buf` must be null or
/// point to writable memory for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn arxid_report_theta(
    report: *const ArxidReport,
    buf: *mut f64,
    cap: usize,
) -> ArxidStatus {
    if report.is_null() {
        return fail(ArxidStatus::NullPointer, "report must be non-null");
    }
    fill_slice(&(*report).inner.theta, buf, cap)
}

/// Length of the bootstrap standard-deviation vector; zero when the
/// bootstrap was disabled.
///
/// # Safety
///
/// `report` must be null or a live report handle; `out` must be null or
/// point to writable memory for one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn arxid_report_theta_std_len(
    report: *const ArxidReport,
    out: *mut usize,
) -> ArxidStatus {
    with_report(report, out, |r| r.theta_std.len())
}

/// Copies the bootstrap standard deviations into `buf` (capacity `cap`).
///
/// # Safety
///
/// `report` must be null or a live report handle; `buf` must be null or
/// point to writable memory for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn arxid_report_theta_std(
    report: *const ArxidReport,
    buf: *mut f64,
    cap: usize,
) -> ArxidStatus {
    if report.is_null() {
        return fail(ArxidStatus::NullPointer, "report must be non-null");
    }
    fill_slice(&(*report).inner.theta_std, buf, cap)
}

/// Copies the autoregressive coefficients `a1..a_ny` of the pruned model
/// into `buf`; query the length with [`arxid_report_orders`] (`n_y`).
///
/// # Safety
///
/// `report` must be null or a live report handle; `buf` must be null or
/// point to writable memory for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn arxid_report_a(
    report: *const ArxidReport,
    buf: *mut f64,
    cap: usize,
) -> ArxidStatus {
    if report.is_null() {
        return fail(ArxidStatus::NullPointer, "report must be non-null");
    }
    fill_slice(&(*report).inner.model.a, buf, cap)
}

/// Copies the input coefficients `b0..b_nu` of the pruned model into
/// `buf`, including zeros below the delay; the length is `n_u + 1` from
/// [`arxid_report_orders`].
///
/// # Safety
///
/// `report` must be null or a live report handle; `buf` must be null or
/// point to writable memory for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn arxid_report_b(
    report: *const ArxidReport,
    buf: *mut f64,
    cap: usize,
) -> ArxidStatus {
    if report.is_null() {
        return fail(ArxidStatus::NullPointer, "report must be non-null");
    }
    let model = &(*report).inner.model;
    let dense: Vec<f64> = (0..=model.n_u).map(|j| model.b_at(j)).collect();
    fill_slice(&dense, buf, cap)
}

/// Serializes the full report to pretty-printed JSON. Release the string
/// with [`arxid_string_free`].
///
/// # Safety
///
/// `report` must be null or a live report handle; `out` must be null or
/// point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn arxid_report_to_json(
    report: *const ArxidReport,
    out: *mut *mut c_char,
) -> ArxidStatus {
    if report.is_null() || out.is_null() {
        return fail(ArxidStatus::NullPointer, "report and out must be non-null");
    }
    guarded(|| match serde_json::to_string_pretty(&(*report).inner) {
        Ok(json) => match CString::new(json) {
            Ok(c) => {
                out.write(c.into_raw());
                ArxidStatus::Ok
            }
            Err(_) => fail(ArxidStatus::NumericalFailure, "JSON contained a NUL byte"),
        },
        Err(e) => fail(ArxidStatus::NumericalFailure, &e.to_string()),
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
///
/// `s` must be null or a string returned by this library that has not
/// been freed yet; the pointer is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn arxid_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Normalized root-mean-square fit of `test` against `reference`, in
/// percent (100 is a perfect match).
///
/// # Safety
///
/// `reference` and `test` must be null or point to `len` readable
/// doubles; `out` must be null or point to writable memory for one
/// double.
#[no_mangle]
pub unsafe extern "C" fn arxid_percent_fit(
    reference: *const f64,
    test: *const f64,
    len: usize,
    out: *mut f64,
) -> ArxidStatus {
    if reference.is_null() || test.is_null() || out.is_null() {
        return fail(
            ArxidStatus::NullPointer,
            "reference, test and out must be non-null",
        );
    }
    let reference = slice::from_raw_parts(reference, len);
    let test = slice::from_raw_parts(test, len);
    match percent_fit(reference, test) {
        Ok(fit) => {
            out.write(fit);
            ArxidStatus::Ok
        }
        Err(e) => fail_with(&e),
    }
}
