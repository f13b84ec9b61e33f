//! C ABI over the `cwica` library.
//!
//! Matrices and models are opaque handles created and freed through this
//! interface. Every fallible function returns a [`CwStatus`]; on failure the
//! message is available from [`cw_last_error_message`] on the same thread.
//! Matrices are row-major `f64`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use cwica::autoencoder::{Autoencoder, Checkpoint};
use cwica::evaluation::max_corr;
use cwica::independence::{
    cramer_wold_dist_sq, dcor, dcor_pairwise, independence_index, CwParams, Reduce, ZeroDistance,
};
use cwica::{Error, Matrix, Rng};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Domain = 4,
    Degenerate = 5,
    NonFinite = 6,
    Io = 7,
    Parse = 8,
    Panic = 9,
}

/// Opaque row-major matrix.
pub struct CwMatrix(Matrix);

/// Opaque trained autoencoder.
pub struct CwModel(Autoencoder);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CwStatus {
    match e {
        Error::Dimension(_) => CwStatus::Dimension,
        Error::Domain(_) => CwStatus::Domain,
        Error::Degenerate(_) => CwStatus::Degenerate,
        Error::Config(_) => CwStatus::InvalidArgument,
        Error::NonFinite(_) | Error::Diverged { .. } => CwStatus::NonFinite,
        Error::Ingest { .. } | Error::Io { .. } => CwStatus::Io,
        Error::Parse { .. } | Error::Json(_) => CwStatus::Parse,
    }
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CwStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            CwStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            CwStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            CwStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn cw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Copies `rows * cols` values from `data` into a new matrix.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut CwMatrix,
) -> CwStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Fail::Arg(format!("{rows} x {cols} overflows")))?;
        if data.is_null() && len > 0 {
            return Err(Fail::Null("data"));
        }
        let values = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(data, len).to_vec()
        };
        *out = boxed(CwMatrix(Matrix::new(rows, cols, values)?));
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cw_matrix_free(m: *mut CwMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle; `rows` and `cols` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_matrix_shape(
    m: *const CwMatrix,
    rows: *mut usize,
    cols: *mut usize,
) -> CwStatus {
    guard(|| {
        let m = deref(m, "matrix")?;
        *out_ptr(rows, "rows")? = m.0.rows();
        *out_ptr(cols, "cols")? = m.0.cols();
        Ok(())
    })
}

/// Copies the matrix into `buf`, which must hold `len >= rows * cols` values.
///
/// # Safety
/// `m` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cw_matrix_copy(m: *const CwMatrix, buf: *mut f64, len: usize) -> CwStatus {
    guard(|| {
        let m = deref(m, "matrix")?;
        let src = m.0.as_slice();
        if len < src.len() {
            return Err(Fail::Arg(format!("buffer holds {len} values, need {}", src.len())));
        }
        if !src.is_empty() {
            if buf.is_null() {
                return Err(Fail::Null("buf"));
            }
            std::slice::from_raw_parts_mut(buf, src.len()).copy_from_slice(src);
        }
        Ok(())
    })
}

fn cw_params(n: usize, dim: usize, bandwidth_multiplier: f64, continuous: bool) -> Result<CwParams, Fail> {
    let rule = if continuous {
        ZeroDistance::Continuous
    } else {
        ZeroDistance::Excluded
    };
    Ok(CwParams::silverman(n, dim, bandwidth_multiplier)?.with_zero_distance(rule))
}

/// Squared Cramer-Wold distance between two samples with the Silverman
/// bandwidth for `x`'s row count scaled by `bandwidth_multiplier`.
/// `continuous_zero` selects kernel value 1 (instead of 0) at zero distance.
///
/// # Safety
/// `x`, `y` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_cramer_wold_distance(
    x: *const CwMatrix,
    y: *const CwMatrix,
    bandwidth_multiplier: f64,
    continuous_zero: bool,
    out: *mut f64,
) -> CwStatus {
    guard(|| {
        let (x, y) = (deref(x, "x")?, deref(y, "y")?);
        let p = cw_params(x.0.rows(), x.0.cols(), bandwidth_multiplier, continuous_zero)?;
        *out_ptr(out, "out")? = cramer_wold_dist_sq(&x.0, &y.0, &p)?;
        Ok(())
    })
}

/// Independence index of `z` with one seeded column-shift draw.
///
/// # Safety
/// `z` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_independence_index(
    z: *const CwMatrix,
    bandwidth_multiplier: f64,
    continuous_zero: bool,
    seed: u64,
    out: *mut f64,
) -> CwStatus {
    guard(|| {
        let z = deref(z, "z")?;
        let p = cw_params(z.0.rows(), z.0.cols(), bandwidth_multiplier, continuous_zero)?;
        *out_ptr(out, "out")? = independence_index(&z.0, &p, &mut Rng::seed_from(seed))?;
        Ok(())
    })
}

/// Distance correlation between two samples with equal row counts.
///
/// # Safety
/// `x`, `y` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_dcor(x: *const CwMatrix, y: *const CwMatrix, out: *mut f64) -> CwStatus {
    guard(|| {
        let (x, y) = (deref(x, "x")?, deref(y, "y")?);
        *out_ptr(out, "out")? = dcor(&x.0, &y.0)?;
        Ok(())
    })
}

/// Mean distance correlation over all column pairs of `z`.
///
/// # Safety
/// `z` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_dcor_pairwise_mean(z: *const CwMatrix, out: *mut f64) -> CwStatus {
    guard(|| {
        let z = deref(z, "z")?;
        *out_ptr(out, "out")? = dcor_pairwise(&z.0, Reduce::Mean)?;
        Ok(())
    })
}

/// Mean absolute correlation between sources and recovered components under
/// the best one-to-one matching.
///
/// # Safety
/// `sources`, `recovered` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_max_corr(
    sources: *const CwMatrix,
    recovered: *const CwMatrix,
    out: *mut f64,
) -> CwStatus {
    guard(|| {
        let (y, z) = (deref(sources, "sources")?, deref(recovered, "recovered")?);
        *out_ptr(out, "out")? = max_corr(&y.0, &z.0)?;
        Ok(())
    })
}

/// Loads a model from a checkpoint JSON file written by `cwica train`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_model_load(path: *const c_char, out: *mut *mut CwModel) -> CwStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if path.is_null() {
            return Err(Fail::Null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Fail::Arg("path is not UTF-8".into()))?;
        let model = Checkpoint::load(Path::new(path))?.model()?;
        *out = boxed(CwModel(model));
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cw_model_free(m: *mut CwModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle; `input` and `latent` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_model_dims(
    m: *const CwModel,
    input: *mut usize,
    latent: *mut usize,
) -> CwStatus {
    guard(|| {
        let m = deref(m, "model")?;
        *out_ptr(input, "input")? = m.0.encoder_spec.input_size();
        *out_ptr(latent, "latent")? = m.0.latent_dim();
        Ok(())
    })
}

/// Latent codes of `x`; the result is a new handle owned by the caller.
///
/// # Safety
/// `m`, `x` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_model_encode(
    m: *const CwModel,
    x: *const CwMatrix,
    out: *mut *mut CwMatrix,
) -> CwStatus {
    guard(|| {
        let (m, x) = (deref(m, "model")?, deref(x, "x")?);
        let out = out_ptr(out, "out")?;
        *out = boxed(CwMatrix(m.0.encode(&x.0)?));
        Ok(())
    })
}

/// Decoder output for latent codes `z`; the result is owned by the caller.
///
/// # Safety
/// `m`, `z` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_model_decode(
    m: *const CwModel,
    z: *const CwMatrix,
    out: *mut *mut CwMatrix,
) -> CwStatus {
    guard(|| {
        let (m, z) = (deref(m, "model")?, deref(z, "z")?);
        let out = out_ptr(out, "out")?;
        *out = boxed(CwMatrix(m.0.decode(&z.0)?));
        Ok(())
    })
}
