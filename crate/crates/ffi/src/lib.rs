//! C interface to `diffmap`.
//!
//! Every fallible function returns a [`DmStatus`]; on failure the message is
//! available from [`dm_last_error`] on the same thread. Objects are opaque
//! handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use diffmap::io::{embed_features, load_features, PipelineConfig};
use diffmap::{pearson, select_eigenvector, Error, FeatureMatrix, SpectralEmbedding};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    InvalidInput = 4,
    Numerical = 5,
    Panic = 6,
}

/// Raw area × variable table.
pub struct DmFeatures(FeatureMatrix);

/// Eigenvalues and eigenvectors of one diffusion map.
pub struct DmEmbedding(SpectralEmbedding);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn status_of(error: &Error) -> DmStatus {
    match error.root() {
        Error::Io { .. } => DmStatus::Io,
        Error::Csv { source, .. } if source.is_io_error() => DmStatus::Io,
        Error::ConvergenceFailure(_) | Error::SpectrumExhausted { .. } | Error::IsolatedNode(_) => DmStatus::Numerical,
        Error::Config(_) | Error::InvalidNeighborCount | Error::IndexOutOfRange { .. } => DmStatus::InvalidArgument,
        _ => DmStatus::InvalidInput,
    }
}

fn guard<F: FnOnce() -> Result<(), (DmStatus, String)>>(f: F) -> DmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DmStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DmStatus::Panic
        }
    }
}

fn fail(error: Error) -> (DmStatus, String) {
    (status_of(&error), error.to_string())
}

fn null(what: &str) -> (DmStatus, String) {
    (DmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (DmStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (DmStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, needed: usize) -> Result<&'a mut [f64], (DmStatus, String)> {
    if p.is_null() {
        return Err(null("output buffer"));
    }
    if len < needed {
        return Err((DmStatus::InvalidArgument, format!("output buffer holds {len}, need {needed}")));
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Loads a features CSV whose area codes are in column `id_column`.
///
/// # Safety
/// `path` and `id_column` must be NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn dm_features_from_csv(
    path: *const c_char,
    id_column: *const c_char,
    out: *mut *mut DmFeatures,
) -> DmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = str_arg(path, "path")?;
        let id_column = str_arg(id_column, "id_column")?;
        let features = load_features(path, id_column).map_err(fail)?;
        *out = Box::into_raw(Box::new(DmFeatures(features)));
        Ok(())
    })
}

/// Builds a table from `n_rows * n_cols` row-major values. Areas are named
/// `R0`, `R1`, ... and columns `C0`, `C1`, ...
///
/// # Safety
/// `values` must point to `n_rows * n_cols` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn dm_features_from_rows(
    values: *const f64,
    n_rows: usize,
    n_cols: usize,
    out: *mut *mut DmFeatures,
) -> DmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if values.is_null() {
            return Err(null("values"));
        }
        let len = n_rows
            .checked_mul(n_cols)
            .ok_or((DmStatus::InvalidArgument, "table too large".to_string()))?;
        let data = std::slice::from_raw_parts(values, len).to_vec();
        let ids = (0..n_rows).map(|i| format!("R{i}")).collect();
        let names = (0..n_cols).map(|j| format!("C{j}")).collect();
        let features = FeatureMatrix::new(ids, names, data).map_err(fail)?;
        *out = Box::into_raw(Box::new(DmFeatures(features)));
        Ok(())
    })
}

/// # Safety
/// `features` must come from a `dm_features_*` constructor, or be null.
#[no_mangle]
pub unsafe extern "C" fn dm_features_free(features: *mut DmFeatures) {
    if !features.is_null() {
        drop(Box::from_raw(features));
    }
}

/// # Safety
/// `features` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dm_features_rows(features: *const DmFeatures) -> usize {
    features.as_ref().map_or(0, |f| f.0.n_rows())
}

/// # Safety
/// `features` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dm_features_cols(features: *const DmFeatures) -> usize {
    features.as_ref().map_or(0, |f| f.0.n_cols())
}

/// Standardizes, links each area to its `k_neighbors` strongest neighbours
/// and keeps `n_eigenvectors` nonzero eigenpairs.
///
/// # Safety
/// `features` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dm_embed(
    features: *const DmFeatures,
    k_neighbors: usize,
    n_eigenvectors: usize,
    out: *mut *mut DmEmbedding,
) -> DmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let features = features.as_ref().ok_or_else(|| null("features"))?;
        let config = PipelineConfig {
            k_neighbors,
            n_eigenvectors,
            classify_eigenvector: 1,
            ..Default::default()
        };
        config.validate().map_err(fail)?;
        let embedding = embed_features(&features.0, &config).map_err(fail)?;
        *out = Box::into_raw(Box::new(DmEmbedding(embedding)));
        Ok(())
    })
}

/// # Safety
/// `embedding` must come from `dm_embed`, or be null.
#[no_mangle]
pub unsafe extern "C" fn dm_embedding_free(embedding: *mut DmEmbedding) {
    if !embedding.is_null() {
        drop(Box::from_raw(embedding));
    }
}

/// Number of areas, i.e. the length of each eigenvector.
///
/// # Safety
/// `embedding` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dm_embedding_size(embedding: *const DmEmbedding) -> usize {
    embedding.as_ref().map_or(0, |e| e.0.area_ids().len())
}

/// Number of nonzero eigenpairs kept.
///
/// # Safety
/// `embedding` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dm_embedding_count(embedding: *const DmEmbedding) -> usize {
    embedding.as_ref().map_or(0, |e| e.0.n_nonzero())
}

/// Number of connected components of the similarity graph.
///
/// # Safety
/// `embedding` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dm_embedding_components(embedding: *const DmEmbedding) -> usize {
    embedding.as_ref().map_or(0, |e| e.0.n_components())
}

/// Copies the nonzero eigenvalues, ascending, into `out[0..count]`.
///
/// # Safety
/// `embedding` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dm_embedding_eigenvalues(embedding: *const DmEmbedding, out: *mut f64, len: usize) -> DmStatus {
    guard(|| {
        let e = embedding.as_ref().ok_or_else(|| null("embedding"))?;
        let values = e.0.nonzero_eigenvalues();
        out_slice(out, len, values.len())?.copy_from_slice(values);
        Ok(())
    })
}

/// Copies nonzero eigenvector `index` (1-based) into `out[0..size]`.
///
/// # Safety
/// `embedding` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dm_embedding_eigenvector(
    embedding: *const DmEmbedding,
    index: usize,
    out: *mut f64,
    len: usize,
) -> DmStatus {
    guard(|| {
        let e = embedding.as_ref().ok_or_else(|| null("embedding"))?;
        let v = select_eigenvector(&e.0, index).map_err(fail)?;
        out_slice(out, len, v.len())?.copy_from_slice(&v.values);
        Ok(())
    })
}

/// Sample Pearson correlation of `x[0..n]` and `y[0..n]`.
///
/// # Safety
/// `x` and `y` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dm_pearson(x: *const f64, y: *const f64, n: usize, out: *mut f64) -> DmStatus {
    guard(|| {
        if x.is_null() || y.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let r = pearson(std::slice::from_raw_parts(x, n), std::slice::from_raw_parts(y, n)).map_err(fail)?;
        *out = r;
        Ok(())
    })
}
