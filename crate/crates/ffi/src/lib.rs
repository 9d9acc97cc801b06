//! C ABI for `wproj`.
//!
//! Measures cross the boundary as opaque `WprojMeasure` handles created by
//! `wproj_measure_new` or returned by the projection and lattice functions, and
//! released with `wproj_measure_free`. Every function reports a `WprojStatus`
//! and writes results through out-pointers, which are left untouched on error.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use wproj::{DiscreteMeasure, Error};

/// Status codes returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WprojStatus {
    Ok = 0,
    NullPointer = 1,
    EmptyInput = 2,
    InvalidWeight = 3,
    NonFinite = 4,
    InvalidP = 5,
    BarycenterMismatch = 6,
    BufferTooSmall = 7,
    NoConvergence = 8,
    InvalidInput = 9,
    Panic = 10,
}

impl From<&Error> for WprojStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::EmptyInput => Self::EmptyInput,
            Error::NonPositiveWeight { .. } => Self::InvalidWeight,
            Error::NonFinite { .. } => Self::NonFinite,
            Error::InvalidP(_) => Self::InvalidP,
            Error::BarycenterMismatch { .. } => Self::BarycenterMismatch,
            Error::NoConvergence { .. } => Self::NoConvergence,
            _ => Self::InvalidInput,
        }
    }
}

/// Opaque handle to a finitely supported probability measure.
pub struct WprojMeasure(DiscreteMeasure);

fn guard(f: impl FnOnce() -> Result<(), WprojStatus>) -> WprojStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WprojStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => WprojStatus::Panic,
    }
}

unsafe fn measure<'a>(m: *const WprojMeasure) -> Result<&'a DiscreteMeasure, WprojStatus> {
    m.as_ref().map(|h| &h.0).ok_or(WprojStatus::NullPointer)
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), WprojStatus> {
    if out.is_null() {
        return Err(WprojStatus::NullPointer);
    }
    out.write(value);
    Ok(())
}

unsafe fn write_handle(out: *mut *mut WprojMeasure, m: DiscreteMeasure) -> Result<(), WprojStatus> {
    if out.is_null() {
        return Err(WprojStatus::NullPointer);
    }
    out.write(Box::into_raw(Box::new(WprojMeasure(m))));
    Ok(())
}

fn lift<T>(r: wproj::Result<T>) -> Result<T, WprojStatus> {
    r.map_err(|e| WprojStatus::from(&e))
}

/// Builds a measure from `len` positions and positive weights. Weights are
/// normalized and coincident positions merged.
///
/// # Safety
/// `xs` and `ws` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wproj_measure_new(
    xs: *const f64,
    ws: *const f64,
    len: usize,
    out: *mut *mut WprojMeasure,
) -> WprojStatus {
    guard(|| {
        if xs.is_null() || ws.is_null() || out.is_null() {
            return Err(WprojStatus::NullPointer);
        }
        let xs = std::slice::from_raw_parts(xs, len);
        let ws = std::slice::from_raw_parts(ws, len);
        let m = lift(DiscreteMeasure::from_atoms(
            xs.iter().copied().zip(ws.iter().copied()),
        ))?;
        write_handle(out, m)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `m` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wproj_measure_free(m: *mut WprojMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of atoms after merging.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wproj_measure_len(m: *const WprojMeasure, out: *mut usize) -> WprojStatus {
    guard(|| write(out, measure(m)?.len()))
}

/// Copies the sorted atoms into `xs` and `ws`, which hold `capacity` doubles.
/// Returns `BufferTooSmall` if `capacity` is less than the atom count.
///
/// # Safety
/// `m` must be a live handle; `xs` and `ws` must be writable for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn wproj_measure_atoms(
    m: *const WprojMeasure,
    xs: *mut f64,
    ws: *mut f64,
    capacity: usize,
) -> WprojStatus {
    guard(|| {
        let m = measure(m)?;
        if xs.is_null() || ws.is_null() {
            return Err(WprojStatus::NullPointer);
        }
        if capacity < m.len() {
            return Err(WprojStatus::BufferTooSmall);
        }
        for (k, a) in m.atoms().iter().enumerate() {
            xs.add(k).write(a.x);
            ws.add(k).write(a.w);
        }
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wproj_measure_barycenter(
    m: *const WprojMeasure,
    out: *mut f64,
) -> WprojStatus {
    guard(|| write(out, measure(m)?.barycenter()))
}

/// `W_p(a, b)` for `p >= 1`.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wproj_wasserstein(
    a: *const WprojMeasure,
    b: *const WprojMeasure,
    p: f64,
    out: *mut f64,
) -> WprojStatus {
    guard(|| write(out, lift(wproj::wasserstein(measure(a)?, measure(b)?, p))?))
}

/// Whether `a <=_c b`. Fails with `BarycenterMismatch` when the barycenters
/// differ by more than `tol`.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wproj_is_convex_order(
    a: *const WprojMeasure,
    b: *const WprojMeasure,
    tol: f64,
    out: *mut bool,
) -> WprojStatus {
    guard(|| {
        write(
            out,
            lift(wproj::is_convex_order(measure(a)?, measure(b)?, tol))?,
        )
    })
}

/// `I(mu, nu)`: the measure dominated by `nu` closest to `mu`. The result is a
/// new handle owned by the caller.
///
/// # Safety
/// `mu` and `nu` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wproj_project_i(
    mu: *const WprojMeasure,
    nu: *const WprojMeasure,
    out: *mut *mut WprojMeasure,
) -> WprojStatus {
    guard(|| {
        let (i, _) = wproj::projections(measure(mu)?, measure(nu)?);
        write_handle(out, i)
    })
}

/// `J(mu, nu)`: the measure dominating `mu` closest to `nu`. The result is a
/// new handle owned by the caller.
///
/// # Safety
/// `mu` and `nu` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wproj_project_j(
    mu: *const WprojMeasure,
    nu: *const WprojMeasure,
    out: *mut *mut WprojMeasure,
) -> WprojStatus {
    guard(|| {
        let (_, j) = wproj::projections(measure(mu)?, measure(nu)?);
        write_handle(out, j)
    })
}

/// Convex-order minimum of two measures whose barycenters agree within `tol`.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wproj_min_convex(
    a: *const WprojMeasure,
    b: *const WprojMeasure,
    tol: f64,
    out: *mut *mut WprojMeasure,
) -> WprojStatus {
    guard(|| write_handle(out, lift(wproj::min_convex(measure(a)?, measure(b)?, tol))?))
}

/// Convex-order maximum of two measures whose barycenters agree within `tol`.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wproj_max_convex(
    a: *const WprojMeasure,
    b: *const WprojMeasure,
    tol: f64,
    out: *mut *mut WprojMeasure,
) -> WprojStatus {
    guard(|| write_handle(out, lift(wproj::max_convex(measure(a)?, measure(b)?, tol))?))
}

/// Static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn wproj_status_message(status: WprojStatus) -> *const c_char {
    let msg: &'static CStr = match status {
        WprojStatus::Ok => c"ok",
        WprojStatus::NullPointer => c"null pointer argument",
        WprojStatus::EmptyInput => c"measure has no atoms",
        WprojStatus::InvalidWeight => c"non-positive weight",
        WprojStatus::NonFinite => c"non-finite value",
        WprojStatus::InvalidP => c"exponent must be finite and at least 1",
        WprojStatus::BarycenterMismatch => c"barycenters differ",
        WprojStatus::BufferTooSmall => c"output buffer too small",
        WprojStatus::NoConvergence => c"solver did not converge",
        WprojStatus::InvalidInput => c"invalid input",
        WprojStatus::Panic => c"internal error",
    };
    msg.as_ptr()
}
