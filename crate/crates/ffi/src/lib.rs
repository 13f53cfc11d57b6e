//! C ABI for schmidt-core.
//!
//! States and observables are opaque handles created from interleaved
//! `re, im` doubles in row-major composite order and released with the
//! matching `_free`. Every fallible call returns a [`SchmidtStatus`]; the
//! message of the last failure on the calling thread is available through
//! [`schmidt_last_error`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use schmidt_core::hilbert::{BipartiteDims, BipartitePureState, DensityOperator, Observable};
use schmidt_core::linalg::{c, CMat, CVec};
use schmidt_core::quasiprob;
use schmidt_core::se_solver::{self, SolverConfig};
use schmidt_core::witness::{self, Verdict};
use schmidt_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchmidtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Convergence = 3,
    IncompleteBasis = 4,
    Panic = 5,
}

/// Solver settings; start from [`schmidt_solver_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SchmidtSolverConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol_lambda: f64,
    pub tol_residual: f64,
    pub seed: u64,
}

impl From<&SchmidtSolverConfig> for SolverConfig {
    fn from(c: &SchmidtSolverConfig) -> Self {
        SolverConfig {
            restarts: c.restarts,
            max_iter: c.max_iter,
            tol_lambda: c.tol_lambda,
            tol_residual: c.tol_residual,
            seed: c.seed,
            ..SolverConfig::default()
        }
    }
}

/// Opaque density operator.
pub struct SchmidtDensity(DensityOperator);

/// Opaque Hermitian observable.
pub struct SchmidtObservable(Observable);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nulls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> SchmidtStatus {
    match e {
        Error::Convergence { .. } => SchmidtStatus::Convergence,
        Error::IncompleteBasis { .. } => SchmidtStatus::IncompleteBasis,
        _ => SchmidtStatus::InvalidInput,
    }
}

fn guard(f: impl FnOnce() -> Result<(), SchmidtStatus>) -> SchmidtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SchmidtStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            SchmidtStatus::Panic
        }
    }
}

fn fail(e: Error) -> SchmidtStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

unsafe fn read_complex<'a>(data: *const f64, count: usize) -> Result<&'a [f64], SchmidtStatus> {
    if data.is_null() {
        set_error("null data pointer".into());
        return Err(SchmidtStatus::NullPointer);
    }
    Ok(std::slice::from_raw_parts(data, 2 * count))
}

fn dims(d1: usize, d2: usize) -> Result<BipartiteDims, SchmidtStatus> {
    BipartiteDims::new(d1, d2).map_err(fail)
}

fn matrix_from(raw: &[f64], n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| {
        let k = 2 * (i * n + j);
        c(raw[k], raw[k + 1])
    })
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), SchmidtStatus> {
    if out.is_null() {
        set_error("null output pointer".into());
        return Err(SchmidtStatus::NullPointer);
    }
    out.write(value);
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, SchmidtStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null handle".into());
        SchmidtStatus::NullPointer
    })
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length, 0 if none.
#[no_mangle]
pub unsafe extern "C" fn schmidt_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

#[no_mangle]
pub extern "C" fn schmidt_solver_config_default() -> SchmidtSolverConfig {
    let d = SolverConfig::default();
    SchmidtSolverConfig {
        restarts: d.restarts,
        max_iter: d.max_iter,
        tol_lambda: d.tol_lambda,
        tol_residual: d.tol_residual,
        seed: d.seed,
    }
}

/// Density operator from `(d1·d2)²` complex entries.
#[no_mangle]
pub unsafe extern "C" fn schmidt_density_new(
    d1: usize,
    d2: usize,
    data: *const f64,
    out: *mut *mut SchmidtDensity,
) -> SchmidtStatus {
    guard(|| {
        let d = dims(d1, d2)?;
        let n = d.total();
        let raw = read_complex(data, n * n)?;
        let rho = DensityOperator::new(d, matrix_from(raw, n)).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(SchmidtDensity(rho))))
    })
}

/// Projector onto a unit vector of `d1·d2` complex amplitudes.
#[no_mangle]
pub unsafe extern "C" fn schmidt_density_from_pure(
    d1: usize,
    d2: usize,
    amplitudes: *const f64,
    out: *mut *mut SchmidtDensity,
) -> SchmidtStatus {
    guard(|| {
        let d = dims(d1, d2)?;
        let raw = read_complex(amplitudes, d.total())?;
        let v = CVec::from_fn(d.total(), |k, _| c(raw[2 * k], raw[2 * k + 1]));
        let psi = BipartitePureState::new(d, v).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(SchmidtDensity(psi.density()))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn schmidt_density_free(rho: *mut SchmidtDensity) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// Hermitian observable from `(d1·d2)²` complex entries.
#[no_mangle]
pub unsafe extern "C" fn schmidt_observable_new(
    d1: usize,
    d2: usize,
    data: *const f64,
    out: *mut *mut SchmidtObservable,
) -> SchmidtStatus {
    guard(|| {
        let d = dims(d1, d2)?;
        let n = d.total();
        let raw = read_complex(data, n * n)?;
        let l = Observable::new(d, matrix_from(raw, n)).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(SchmidtObservable(l))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn schmidt_observable_free(l: *mut SchmidtObservable) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

/// Largest r-SE value of `l`, a lower bound on `f12^(r)(l)`. `cfg` may be null.
#[no_mangle]
pub unsafe extern "C" fn schmidt_f12(
    l: *const SchmidtObservable,
    r: usize,
    cfg: *const SchmidtSolverConfig,
    out: *mut f64,
) -> SchmidtStatus {
    guard(|| {
        let l = handle(l)?;
        let cfg = cfg.as_ref().map(SolverConfig::from).unwrap_or_default();
        let v = se_solver::f12_r(&l.0, r, &cfg).map_err(fail)?;
        write_out(out, v)
    })
}

/// Witness test `tr(ρL) > f12^(r)(L)`. Writes the margin and 1 if the
/// Schmidt number exceeds `r`, 0 if inconclusive.
#[no_mangle]
pub unsafe extern "C" fn schmidt_certify(
    rho: *const SchmidtDensity,
    l: *const SchmidtObservable,
    r: usize,
    cfg: *const SchmidtSolverConfig,
    margin: *mut f64,
    certified: *mut i32,
) -> SchmidtStatus {
    guard(|| {
        let rho = handle(rho)?;
        let l = handle(l)?;
        let cfg = cfg.as_ref().map(SolverConfig::from).unwrap_or_default();
        let cert = witness::certify_schmidt_number(&rho.0, &l.0, r, &cfg, None).map_err(fail)?;
        write_out(margin, cert.margin)?;
        write_out(certified, i32::from(cert.verdict == Verdict::CertifiedAboveR))
    })
}

/// Schmidt-number readout from entanglement quasi-probabilities. On
/// `IncompleteBasis` the bracket `[lower, upper]` is still written and
/// `value` is 0.
#[no_mangle]
pub unsafe extern "C" fn schmidt_estimate(
    rho: *const SchmidtDensity,
    cfg: *const SchmidtSolverConfig,
    value: *mut usize,
    lower: *mut usize,
    upper: *mut usize,
) -> SchmidtStatus {
    guard(|| {
        let rho = handle(rho)?;
        let cfg = cfg.as_ref().map(SolverConfig::from).unwrap_or_default();
        let est = quasiprob::estimate_schmidt_number(&rho.0, &cfg).map_err(fail)?;
        write_out(lower, est.lower)?;
        write_out(upper, est.upper)?;
        write_out(value, est.value.unwrap_or(0))?;
        match est.value {
            Some(_) => Ok(()),
            None => {
                set_error(format!("Schmidt number only bracketed in [{}, {}]", est.lower, est.upper));
                Err(SchmidtStatus::IncompleteBasis)
            }
        }
    })
}

/// Minimum eigenvalue of the partial transpose; `npt` is 1 when negative.
#[no_mangle]
pub unsafe extern "C" fn schmidt_is_npt(
    rho: *const SchmidtDensity,
    min_eigenvalue: *mut f64,
    npt: *mut i32,
) -> SchmidtStatus {
    guard(|| {
        let rho = handle(rho)?;
        let res = witness::is_npt(&rho.0);
        write_out(min_eigenvalue, res.min_eigenvalue)?;
        write_out(npt, i32::from(res.npt))
    })
}
