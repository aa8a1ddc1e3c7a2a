//! C interface to `wedgetri`.
//!
//! Objects cross the boundary as opaque handles created by `wt_*_new` /
//! `wt_*_from_*` and released with the matching `wt_*_free`. Every fallible
//! call returns a [`WtStatus`]; on failure a message is kept per thread and
//! can be copied out with [`wt_last_error_message`]. Complex vectors and
//! matrices are passed as interleaved `(re, im)` doubles, matrices in
//! row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use num_complex::Complex64;
use wedgetri::rng::from_seed;
use wedgetri::triangular::{self, MinimizeOptions};
use wedgetri::{CMatrix, CVector, DistanceMatrix, Error, StateVector, WedgeOperatorQ};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WtStatus {
    Ok = 0,
    NullPointer = 1,
    DimensionMismatch = 2,
    InvalidArgument = 3,
    ParseError = 4,
    Panic = 5,
}

/// Opaque handle to a distance matrix.
pub struct WtDistanceMatrix(DistanceMatrix);

/// Opaque handle to a wedge operator `Q = E²`.
pub struct WtOperator(WedgeOperatorQ);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

#[derive(Debug)]
enum Failure {
    Null(&'static str),
    Core(Error),
    Parse(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> WtStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            WtStatus::Ok
        }
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("null pointer: {name}"));
            WtStatus::NullPointer
        }
        Ok(Err(Failure::Parse(msg))) => {
            set_error(msg);
            WtStatus::ParseError
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            match e {
                Error::DimensionMismatch { .. } | Error::DimensionTooSmall { .. } | Error::NotSquare { .. } => {
                    WtStatus::DimensionMismatch
                }
                Error::Parse(_) => WtStatus::ParseError,
                _ => WtStatus::InvalidArgument,
            }
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            WtStatus::Panic
        }
    }
}

unsafe fn reference<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or(Failure::Null(name))
}

unsafe fn output<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    unsafe { p.as_mut() }.ok_or(Failure::Null(name))
}

unsafe fn doubles<'a>(p: *const f64, len: usize, name: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(unsafe { slice::from_raw_parts(p, len) })
}

fn complex(values: &[f64]) -> Vec<Complex64> {
    values.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

unsafe fn state(p: *const f64, n: usize, name: &'static str) -> Result<StateVector, Failure> {
    let raw = unsafe { doubles(p, 2 * n, name) }?;
    Ok(StateVector::new(CVector::from_vec(complex(raw)))?)
}

fn write_state(out: &mut [f64], v: &StateVector) {
    for (k, c) in v.as_vector().iter().enumerate() {
        out[2 * k] = c.re;
        out[2 * k + 1] = c.im;
    }
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `len` bytes, into `buf`. Returns the length the full message
/// needs including the terminator; `buf` may be null to query it.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn wt_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len() + 1
    })
}

/// Builds an `n`-point distance matrix from its strict upper triangle
/// `d_12, d_13, ..., d_(n-1)n` (`n(n-1)/2` values).
///
/// # Safety
/// `upper` must point to `len` doubles and `out` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn wt_dmat_new(n: usize, upper: *const f64, len: usize, out: *mut *mut WtDistanceMatrix) -> WtStatus {
    guard(|| {
        let out = unsafe { output(out, "out") }?;
        let values = unsafe { doubles(upper, len, "upper") }?;
        let d = DistanceMatrix::from_upper(n, values)?;
        *out = Box::into_raw(Box::new(WtDistanceMatrix(d)));
        Ok(())
    })
}

/// Writes 1 to `valid` when every triangle inequality holds, 0 otherwise.
///
/// # Safety
/// `dmat` must be a live handle and `valid` writable.
#[no_mangle]
pub unsafe extern "C" fn wt_dmat_validate(dmat: *const WtDistanceMatrix, valid: *mut i32) -> WtStatus {
    guard(|| {
        let d = unsafe { reference(dmat, "dmat") }?;
        *unsafe { output(valid, "valid") }? = i32::from(d.0.is_valid());
        Ok(())
    })
}

/// # Safety
/// `dmat` must be null or a handle from `wt_dmat_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wt_dmat_free(dmat: *mut WtDistanceMatrix) {
    if !dmat.is_null() {
        drop(unsafe { Box::from_raw(dmat) });
    }
}

/// The operator with eigenvalue `d_ij²` on `u_i ∧ u_j`. With `basis` null
/// the `u_i` are the standard basis; otherwise `basis` holds an `n × n`
/// unitary (interleaved, row-major) whose columns are the `u_i`.
///
/// # Safety
/// `dmat` must be a live handle, `basis` null or `2n²` doubles, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn wt_operator_from_dmat(
    dmat: *const WtDistanceMatrix,
    basis: *const f64,
    out: *mut *mut WtOperator,
) -> WtStatus {
    guard(|| {
        let out = unsafe { output(out, "out") }?;
        let d = unsafe { reference(dmat, "dmat") }?.0.clone();
        let n = d.n();
        let q = if basis.is_null() {
            WedgeOperatorQ::standard_diagonal(d)
        } else {
            let raw = unsafe { doubles(basis, 2 * n * n, "basis") }?;
            WedgeOperatorQ::from_diagonal(d, CMatrix::from_row_slice(n, n, &complex(raw)))?
        };
        *out = Box::into_raw(Box::new(WtOperator(q)));
        Ok(())
    })
}

/// Parses an operator from the JSON form written by the command-line tool.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wt_operator_from_json(json: *const c_char, out: *mut *mut WtOperator) -> WtStatus {
    guard(|| {
        let out = unsafe { output(out, "out") }?;
        if json.is_null() {
            return Err(Failure::Null("json"));
        }
        let text = unsafe { CStr::from_ptr(json) }.to_str().map_err(|e| Failure::Parse(e.to_string()))?;
        let q: WedgeOperatorQ = serde_json::from_str(text).map_err(|e| Failure::Parse(e.to_string()))?;
        *out = Box::into_raw(Box::new(WtOperator(q)));
        Ok(())
    })
}

/// Dimension `n` of the underlying space, or 0 for a null handle.
///
/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wt_operator_dim(op: *const WtOperator) -> usize {
    unsafe { op.as_ref() }.map_or(0, |q| q.0.n())
}

/// # Safety
/// `op` must be null or a handle from `wt_operator_from_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wt_operator_free(op: *mut WtOperator) {
    if !op.is_null() {
        drop(unsafe { Box::from_raw(op) });
    }
}

/// Hilbert-Schmidt distance between the pure states of unit vectors `x`, `y`
/// of length `n`.
///
/// # Safety
/// `x`, `y` must hold `2n` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn wt_hs_distance(x: *const f64, y: *const f64, n: usize, out: *mut f64) -> WtStatus {
    guard(|| {
        let out = unsafe { output(out, "out") }?;
        let (x, y) = unsafe { (state(x, n, "x")?, state(y, n, "y")?) };
        *out = wedgetri::hs_distance(&x, &y)?;
        Ok(())
    })
}

/// `d_E(x, y) = ‖E(x ∧ y)‖` for unit vectors of length `wt_operator_dim(op)`.
///
/// # Safety
/// `op` must be a live handle, `x`, `y` hold `2n` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wt_semidistance(op: *const WtOperator, x: *const f64, y: *const f64, out: *mut f64) -> WtStatus {
    guard(|| {
        let q = unsafe { reference(op, "op") }?;
        let out = unsafe { output(out, "out") }?;
        let n = q.0.n();
        let (x, y) = unsafe { (state(x, n, "x")?, state(y, n, "y")?) };
        *out = wedgetri::semidistance(&q.0, &x, &y)?;
        Ok(())
    })
}

/// Triangle deficit `d(x,z) + d(z,y) - d(x,y)`.
///
/// # Safety
/// `op` must be a live handle, `x`, `y`, `z` hold `2n` doubles, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn wt_deficit(
    op: *const WtOperator,
    x: *const f64,
    y: *const f64,
    z: *const f64,
    out: *mut f64,
) -> WtStatus {
    guard(|| {
        let q = unsafe { reference(op, "op") }?;
        let out = unsafe { output(out, "out") }?;
        let n = q.0.n();
        let (x, y, z) = unsafe { (state(x, n, "x")?, state(y, n, "y")?, state(z, n, "z")?) };
        *out = triangular::deficit(&q.0, &x, &y, &z)?;
        Ok(())
    })
}

/// Writes 1 to `certified` when the spectral sufficient condition proves the
/// operator triangular, 0 when it does not apply.
///
/// # Safety
/// `op` must be a live handle and `certified` writable.
#[no_mangle]
pub unsafe extern "C" fn wt_certify_sufficient(op: *const WtOperator, certified: *mut i32) -> WtStatus {
    guard(|| {
        let q = unsafe { reference(op, "op") }?;
        *unsafe { output(certified, "certified") }? = i32::from(triangular::certify_sufficient(&q.0));
        Ok(())
    })
}

/// Minimizes the deficit from `restarts` random starts (plus basis starts for
/// diagonal operators). The minimum goes to `deficit`; when `xyz` is not null
/// it receives the minimizing `x`, `y`, `z` back to back (`6n` doubles).
///
/// # Safety
/// `op` must be a live handle, `deficit` writable, `xyz` null or `6n`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn wt_minimize_deficit(
    op: *const WtOperator,
    seed: u64,
    restarts: usize,
    deficit: *mut f64,
    xyz: *mut f64,
) -> WtStatus {
    guard(|| {
        let q = unsafe { reference(op, "op") }?;
        let deficit = unsafe { output(deficit, "deficit") }?;
        let opts = MinimizeOptions { restarts, ..MinimizeOptions::default() };
        let rec = triangular::minimize_deficit(&q.0, &opts, &mut from_seed(seed))?;
        *deficit = rec.deficit;
        if !xyz.is_null() {
            let n = q.0.n();
            let out = unsafe { slice::from_raw_parts_mut(xyz, 6 * n) };
            for (k, v) in [&rec.x, &rec.y, &rec.z].into_iter().enumerate() {
                write_state(&mut out[2 * n * k..2 * n * (k + 1)], v);
            }
        }
        Ok(())
    })
}

/// Lowest deficit over `count` random orthonormal triples.
///
/// # Safety
/// `op` must be a live handle and `worst` writable.
#[no_mangle]
pub unsafe extern "C" fn wt_sample_triples(op: *const WtOperator, count: usize, seed: u64, worst: *mut f64) -> WtStatus {
    guard(|| {
        let q = unsafe { reference(op, "op") }?;
        let worst = unsafe { output(worst, "worst") }?;
        let rep = triangular::sample_triples_test(&q.0, count, &mut from_seed(seed), 1e-13)?;
        *worst = rep.worst.map_or(f64::INFINITY, |r| r.deficit);
        Ok(())
    })
}

/// `min(0, d_a + d_b - d_max)` over the three labels of a 3-point operator.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wt_mu_closed_form_n3(d12: f64, d13: f64, d23: f64, out: *mut f64) -> WtStatus {
    guard(|| {
        *unsafe { output(out, "out") }? = triangular::mu_closed_form_n3(d12, d13, d23)?;
        Ok(())
    })
}
