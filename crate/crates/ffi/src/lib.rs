//! C ABI for `dirtrend`.
//!
//! Objects are opaque handles created by `dt_*_new`-style functions and
//! released with the matching `dt_*_free`. Every function returns a
//! [`DtStatus`]; on failure a description is available from
//! [`dt_last_error_message`] on the same thread. Matrices cross the boundary
//! as row-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use dirtrend::families::{FixedSmoother, PlsFamily, SmootherFamily, WeightedRunningAverage};
use dirtrend::geometry::{lambert_project, Hemisphere, SphericalPoint};
use dirtrend::io::{ingest_csv, AngleFormat};
use dirtrend::model::{estimated_risk_from_parts, gamma2_hat, DirectionData};
use dirtrend::select::{minimize_estimated_risk, SelectionConfig};
use dirtrend::synth::{builtin_trend, generate_dataset, SimulationConfig};
use dirtrend::Error;
use nalgebra::DMatrix;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    DegenerateRow = 4,
    NumericalFailure = 5,
    Io = 6,
    Parse = 7,
    Panic = 8,
}

/// Observed unit vectors, one per row, in time order.
pub struct DtData(DirectionData);

/// A smoother family `A(t)` of fixed size.
pub struct DtFamily(Box<dyn SmootherFamily>);

/// Result of an adaptive selection.
pub struct DtFit {
    t_hat: Vec<f64>,
    estimated_risk: f64,
    directions: DMatrix<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DtStatus {
    match e {
        Error::DimensionMismatch { .. } => DtStatus::DimensionMismatch,
        Error::DegenerateRow { .. } => DtStatus::DegenerateRow,
        Error::NotPositiveDefinite { .. } | Error::NonConvergence { .. } => DtStatus::NumericalFailure,
        Error::Parse { .. } => DtStatus::Parse,
        Error::Io(_) | Error::Json(_) => DtStatus::Io,
        _ => DtStatus::InvalidArgument,
    }
}

struct Fail(DtStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(DtStatus::NullPointer, format!("{what} is NULL"))
}

fn invalid(message: impl Into<String>) -> Fail {
    Fail(DtStatus::InvalidArgument, message.into())
}

/// Runs `body`, recording failures and converting panics.
fn guard<F>(body: F) -> DtStatus
where
    F: FnOnce() -> Result<(), Fail>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DtStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {message}"));
            DtStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn copy_out(dst: &mut [f64], src: &[f64]) -> Result<(), Fail> {
    if dst.len() < src.len() {
        return Err(Fail(
            DtStatus::DimensionMismatch,
            format!("output buffer holds {} values, {} needed", dst.len(), src.len()),
        ));
    }
    dst[..src.len()].copy_from_slice(src);
    Ok(())
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// Message for the last failed call on this thread, or NULL after a
/// successful call. Valid until the next `dt_*` call on this thread.
#[no_mangle]
pub extern "C" fn dt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dt_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Builds a data set from `p` unit rows of length `q` (row-major, `p * q`
/// values). `times` may be NULL or point to `p` non-decreasing values.
///
/// # Safety
/// `rows` must point to `p * q` readable doubles, `times` to `p` when not
/// NULL, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_data_new(
    rows: *const f64,
    p: usize,
    q: usize,
    times: *const f64,
    out: *mut *mut DtData,
) -> DtStatus {
    guard(|| {
        let n = p.checked_mul(q).ok_or_else(|| invalid("p * q overflows"))?;
        let values = input(rows, n, "rows")?;
        let times = if times.is_null() {
            None
        } else {
            Some(input(times, p, "times")?.to_vec())
        };
        let data = DirectionData::new(DMatrix::from_row_slice(p, q, values), times)?;
        put(out, Box::into_raw(Box::new(DtData(data))), "out")
    })
}

/// Reads a CSV file with header `time,theta,phi` (radians) or, when
/// `degrees` is true, `time,lat,lon`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dt_data_from_csv(path: *const c_char, degrees: bool, out: *mut *mut DtData) -> DtStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| invalid("path is not UTF-8"))?;
        let format = if degrees {
            AngleFormat::Degrees
        } else {
            AngleFormat::Radians
        };
        let data = ingest_csv(Path::new(path), format)?;
        put(out, Box::into_raw(Box::new(DtData(data))), "out")
    })
}

/// # Safety
/// `data` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dt_data_free(data: *mut DtData) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Number of observations `p` and their dimension `q`.
///
/// # Safety
/// `data` must be a live handle; the outputs must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn dt_data_shape(data: *const DtData, out_p: *mut usize, out_q: *mut usize) -> DtStatus {
    guard(|| {
        let d = &as_ref(data, "data")?.0;
        if !out_p.is_null() {
            out_p.write(d.p());
        }
        if !out_q.is_null() {
            out_q.write(d.q());
        }
        Ok(())
    })
}

/// Copies the unit rows (row-major, `p * q` values) into `out`.
///
/// # Safety
/// `data` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dt_data_rows(data: *const DtData, out: *mut f64, len: usize) -> DtStatus {
    guard(|| {
        let d = &as_ref(data, "data")?.0;
        copy_out(output(out, len, "out")?, &row_major(d.y()))
    })
}

/// First-difference dispersion estimate.
///
/// # Safety
/// `data` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dt_gamma2_hat(data: *const DtData, out: *mut f64) -> DtStatus {
    guard(|| put(out, gamma2_hat(&as_ref(data, "data")?.0), "out"))
}

unsafe fn new_family(out: *mut *mut DtFamily, family: Box<dyn SmootherFamily>) -> Result<(), Fail> {
    put(out, Box::into_raw(Box::new(DtFamily(family))), "out")
}

/// Penalised least squares with a normalised `d`-th difference penalty of
/// scale `c` (1000 is customary).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_family_pls(p: usize, d: usize, c: f64, out: *mut *mut DtFamily) -> DtStatus {
    guard(|| new_family(out, Box::new(PlsFamily::new(p, d, c)?)))
}

/// Span-3 weighted running averages with one parameter.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_family_running_average(p: usize, out: *mut *mut DtFamily) -> DtStatus {
    guard(|| new_family(out, Box::new(WeightedRunningAverage::new(p)?)))
}

/// The parameterless span-3 running average.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_family_span3(p: usize, out: *mut *mut DtFamily) -> DtStatus {
    guard(|| new_family(out, Box::new(FixedSmoother::span3(p)?)))
}

/// # Safety
/// `family` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dt_family_free(family: *mut DtFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// Parameter dimension `k` of the family.
///
/// # Safety
/// `family` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dt_family_dim(family: *const DtFamily, out: *mut usize) -> DtStatus {
    guard(|| put(out, as_ref(family, "family")?.0.dim(), "out"))
}

/// Writes `A(t)` (row-major, `p * p` values).
///
/// # Safety
/// `t` must hold `k` doubles, `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dt_family_matrix(
    family: *const DtFamily,
    t: *const f64,
    k: usize,
    out: *mut f64,
    len: usize,
) -> DtStatus {
    guard(|| {
        let f = &as_ref(family, "family")?.0;
        let a = f.matrix(input(t, k, "t")?)?;
        copy_out(output(out, len, "out")?, &row_major(&a))
    })
}

/// Estimated risk of `A(t)` on the data, given a dispersion estimate.
///
/// # Safety
/// Handles must be live, `t` must hold `k` doubles, and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_estimated_risk(
    data: *const DtData,
    family: *const DtFamily,
    t: *const f64,
    k: usize,
    gamma2hat: f64,
    out: *mut f64,
) -> DtStatus {
    guard(|| {
        let d = &as_ref(data, "data")?.0;
        let f = &as_ref(family, "family")?.0;
        if f.p() != d.p() {
            return Err(Fail(
                DtStatus::DimensionMismatch,
                format!("family has p = {}, data p = {}", f.p(), d.p()),
            ));
        }
        let eval = f.apply(input(t, k, "t")?, d.y())?;
        put(
            out,
            estimated_risk_from_parts(d, &eval.fitted, eval.trace, gamma2hat)?,
            "out",
        )
    })
}

/// Minimises the estimated risk over the family on a grid of
/// `grid_points` per axis (0 for the default 201), optionally refined.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dt_select(
    data: *const DtData,
    family: *const DtFamily,
    grid_points: usize,
    refine: bool,
    out: *mut *mut DtFit,
) -> DtStatus {
    guard(|| {
        let d = &as_ref(data, "data")?.0;
        let f = &as_ref(family, "family")?.0;
        let mut cfg = SelectionConfig {
            refine,
            ..Default::default()
        };
        if grid_points != 0 {
            cfg.grid_points_per_axis = grid_points;
        }
        let sel = minimize_estimated_risk(f.as_ref(), d, gamma2_hat(d), &cfg)?;
        let fit = DtFit {
            t_hat: sel.t_hat,
            estimated_risk: sel.estimated_risk,
            directions: sel.fit.d_hat,
        };
        put(out, Box::into_raw(Box::new(fit)), "out")
    })
}

/// Copies the selected parameter into `out` (capacity `len`) and its length
/// into `written`.
///
/// # Safety
/// `fit` must be live; `out` must hold `len` doubles; `written` writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn dt_fit_t_hat(fit: *const DtFit, out: *mut f64, len: usize, written: *mut usize) -> DtStatus {
    guard(|| {
        let f = as_ref(fit, "fit")?;
        if !written.is_null() {
            written.write(f.t_hat.len());
        }
        copy_out(output(out, len, "out")?, &f.t_hat)
    })
}

/// # Safety
/// `fit` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dt_fit_estimated_risk(fit: *const DtFit, out: *mut f64) -> DtStatus {
    guard(|| put(out, as_ref(fit, "fit")?.estimated_risk, "out"))
}

/// Fitted unit directions (row-major, `p * q` values).
///
/// # Safety
/// `fit` must be live and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dt_fit_directions(fit: *const DtFit, out: *mut f64, len: usize) -> DtStatus {
    guard(|| {
        let f = as_ref(fit, "fit")?;
        copy_out(output(out, len, "out")?, &row_major(&f.directions))
    })
}

/// # Safety
/// `fit` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dt_fit_free(fit: *mut DtFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Simulates a built-in trend (`"wobble"`, `"bat"` or `"jumps"`). The true
/// mean directions are written to `truth` (`p * 3` values) unless it is NULL.
///
/// # Safety
/// `trend` must be a NUL-terminated string, `out` writable, and `truth` NULL
/// or able to hold `p * 3` doubles.
#[no_mangle]
pub unsafe extern "C" fn dt_simulate(
    trend: *const c_char,
    p: usize,
    kappa: f64,
    seed: u64,
    out: *mut *mut DtData,
    truth: *mut f64,
) -> DtStatus {
    guard(|| {
        if trend.is_null() {
            return Err(null("trend"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let name = CStr::from_ptr(trend)
            .to_str()
            .map_err(|_| invalid("trend is not UTF-8"))?;
        let spec = builtin_trend(name).ok_or_else(|| invalid(format!("unknown trend '{name}'")))?;
        let (data, mean) = generate_dataset(&spec, &SimulationConfig { p, kappa, seed })?;
        if !truth.is_null() {
            copy_out(output(truth, p * 3, "truth")?, &row_major(mean.mu()))?;
        }
        put(out, Box::into_raw(Box::new(DtData(data))), "out")
    })
}

/// Lambert projection of `(theta, phi)` onto the disk of radius √2.
///
/// # Safety
/// The outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_lambert_project(
    theta: f64,
    phi: f64,
    out_u: *mut f64,
    out_v: *mut f64,
    out_north: *mut bool,
) -> DtStatus {
    guard(|| {
        let q = lambert_project(SphericalPoint::new(theta, phi)?);
        put(out_u, q.u, "out_u")?;
        put(out_v, q.v, "out_v")?;
        put(out_north, q.hemisphere == Hemisphere::North, "out_north")
    })
}
