//! C ABI over `lgi-core`.
//!
//! Every function returns an [`LgiStatus`]; outputs go through pointers.
//! On failure a message is kept per thread and can be read with
//! [`lgi_last_error`]. Engines and evaluations are opaque handles released
//! with their `_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lgi_core::grid::{GridConfig, GridEngine};
use lgi_core::lgi::{lgi_value_with, maximize_c, MaximizeOptions};
use lgi_core::measurement::{AnalyticEngine, JointEngine, SmearedMeasurement};
use lgi_core::quadrature::QuadConfig;
use lgi_core::specfun::{faddeeva_w, ComplexValue};
use lgi_core::units::{DimensionlessParams, PhysicalParams};
use lgi_core::{LgiError, LgiResult};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LgiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    NotConverged = 3,
    SingularInterval = 4,
    Unsupported = 5,
    Panic = 6,
    BranchUnreachable = 7,
    Io = 8,
}

impl From<&LgiError> for LgiStatus {
    fn from(e: &LgiError) -> Self {
        match e {
            LgiError::Parameter(_) | LgiError::GridConfig(_) => LgiStatus::InvalidParameter,
            LgiError::Convergence { .. } => LgiStatus::NotConverged,
            LgiError::SingularInterval { .. } => LgiStatus::SingularInterval,
            LgiError::Capability(_) => LgiStatus::Unsupported,
            LgiError::BranchUnreachable(_) => LgiStatus::BranchUnreachable,
            LgiError::Io(_) => LgiStatus::Io,
        }
    }
}

/// Laboratory parameters: amu, rad/s, kg m/s, s, s.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LgiPhysical {
    pub mass_amu: f64,
    pub omega: f64,
    pub p0: f64,
    pub t1: f64,
    pub dt: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LgiDimensionless {
    pub p_tilde: f64,
    pub tau1: f64,
    pub dtau: f64,
}

/// Joint probabilities `P(a, b)`, `+` meaning `x < 0`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LgiJointTable {
    pub p_pp: f64,
    pub p_pm: f64,
    pub p_mp: f64,
    pub p_mm: f64,
}

/// Opaque engine handle.
pub struct LgiEngine {
    inner: Box<dyn JointEngine>,
}

/// Opaque result of one evaluation of `C`.
pub struct LgiEvaluation {
    inner: LgiResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(e: LgiError) -> LgiStatus {
    set_error(&e.to_string());
    LgiStatus::from(&e)
}

fn guard(f: impl FnOnce() -> LgiStatus) -> LgiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == LgiStatus::Ok {
                set_error("");
            }
            status
        }
        Err(_) => {
            set_error("internal panic");
            LgiStatus::Panic
        }
    }
}

macro_rules! nonnull {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            set_error(concat!("null pointer: ", stringify!($p)));
            return LgiStatus::NullPointer;
        })+
    };
}

/// Message of the last failure on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn lgi_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static description of a status code; takes the raw value so any integer
/// is safe to pass.
#[no_mangle]
pub extern "C" fn lgi_status_string(status: i32) -> *const c_char {
    let s: &'static [u8] = match status {
        0 => b"ok\0",
        1 => b"null pointer\0",
        2 => b"invalid parameter\0",
        3 => b"not converged\0",
        4 => b"singular interval\0",
        5 => b"unsupported\0",
        6 => b"internal panic\0",
        7 => b"branch unreachable\0",
        8 => b"i/o error\0",
        _ => b"unknown status\0",
    };
    s.as_ptr().cast()
}

/// # Safety
/// `input` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lgi_to_dimensionless(input: *const LgiPhysical, out: *mut LgiDimensionless) -> LgiStatus {
    guard(|| {
        nonnull!(input, out);
        let p = &*input;
        match PhysicalParams::new(p.mass_amu, p.omega, p.p0, p.t1, p.dt).and_then(|p| p.to_dimensionless()) {
            Ok(d) => {
                *out = LgiDimensionless {
                    p_tilde: d.p_tilde,
                    tau1: d.tau1,
                    dtau: d.dtau,
                };
                LgiStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Probability of outcome `+` (particle at `x < 0`) at phase `tau`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lgi_marginal_plus(p_tilde: f64, tau: f64, out: *mut f64) -> LgiStatus {
    guard(|| {
        nonnull!(out);
        if !(p_tilde.is_finite() && tau.is_finite()) {
            return fail(LgiError::Parameter("p_tilde and tau must be finite".into()));
        }
        *out = lgi_core::coherent::marginal_plus(p_tilde, tau);
        LgiStatus::Ok
    })
}

/// Faddeeva function `w(z) = exp(-z^2) erfc(-i z)`.
///
/// # Safety
/// `out_re` and `out_im` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lgi_faddeeva_w(re: f64, im: f64, out_re: *mut f64, out_im: *mut f64) -> LgiStatus {
    guard(|| {
        nonnull!(out_re, out_im);
        let w = faddeeva_w(ComplexValue::new(re, im));
        *out_re = w.re;
        *out_im = w.im;
        LgiStatus::Ok
    })
}

/// Closed-form engine. Non-positive tolerances select the defaults.
///
/// # Safety
/// `out` must be a valid pointer; the handle is released with
/// [`lgi_engine_free`].
#[no_mangle]
pub unsafe extern "C" fn lgi_engine_new_analytic(rel_tol: f64, abs_tol: f64, out: *mut *mut LgiEngine) -> LgiStatus {
    guard(|| {
        nonnull!(out);
        let d = QuadConfig::default();
        let quad = QuadConfig {
            rel_tol: if rel_tol > 0.0 { rel_tol } else { d.rel_tol },
            abs_tol: if abs_tol > 0.0 { abs_tol } else { d.abs_tol },
            ..d
        };
        *out = Box::into_raw(Box::new(LgiEngine {
            inner: Box::new(AnalyticEngine::new(quad)),
        }));
        LgiStatus::Ok
    })
}

/// Split-operator grid engine. `min_points == 0` selects the default.
///
/// # Safety
/// `out` must be a valid pointer; the handle is released with
/// [`lgi_engine_free`].
#[no_mangle]
pub unsafe extern "C" fn lgi_engine_new_grid(
    min_points: usize,
    smearing: f64,
    richardson: bool,
    out: *mut *mut LgiEngine,
) -> LgiStatus {
    guard(|| {
        nonnull!(out);
        let m = match SmearedMeasurement::new(smearing) {
            Ok(m) => m,
            Err(e) => return fail(e),
        };
        let config = GridConfig {
            min_points: if min_points == 0 { GridConfig::default().min_points } else { min_points },
            richardson,
            ..GridConfig::default()
        };
        *out = Box::into_raw(Box::new(LgiEngine {
            inner: Box::new(GridEngine::new(config, m)),
        }));
        LgiStatus::Ok
    })
}

/// # Safety
/// `engine` must come from an `lgi_engine_new_*` call and not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lgi_engine_free(engine: *mut LgiEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Joint probabilities of outcomes at phases `tau_i < tau_j`.
///
/// # Safety
/// `engine` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lgi_joint_table(
    engine: *const LgiEngine,
    p_tilde: f64,
    tau_i: f64,
    tau_j: f64,
    out: *mut LgiJointTable,
) -> LgiStatus {
    guard(|| {
        nonnull!(engine, out);
        match (*engine).inner.joint_table(p_tilde, tau_i, tau_j) {
            Ok(t) => {
                *out = LgiJointTable {
                    p_pp: t.p_pp,
                    p_pm: t.p_pm,
                    p_mp: t.p_mp,
                    p_mm: t.p_mm,
                };
                LgiStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

fn store(result: lgi_core::Result<LgiResult>, out: *mut *mut LgiEvaluation) -> LgiStatus {
    match result {
        Ok(r) => {
            // SAFETY: callers check `out` for null first
            unsafe { *out = Box::into_raw(Box::new(LgiEvaluation { inner: r })) };
            LgiStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// `C` on the uniform schedule of `params`.
///
/// # Safety
/// `engine` must be a live handle, `params` and `out` valid pointers. The
/// result is released with [`lgi_evaluation_free`].
#[no_mangle]
pub unsafe extern "C" fn lgi_compute(
    engine: *const LgiEngine,
    params: *const LgiDimensionless,
    out: *mut *mut LgiEvaluation,
) -> LgiStatus {
    guard(|| {
        nonnull!(engine, params, out);
        *out = ptr::null_mut();
        let p = &*params;
        let d = DimensionlessParams {
            p_tilde: p.p_tilde,
            tau1: p.tau1,
            dtau: p.dtau,
        };
        store(lgi_value_with((*engine).inner.as_ref(), &d), out)
    })
}

/// `C` maximized over the schedule at fixed `p_tilde`.
///
/// # Safety
/// As for [`lgi_compute`].
#[no_mangle]
pub unsafe extern "C" fn lgi_maximize(engine: *const LgiEngine, p_tilde: f64, out: *mut *mut LgiEvaluation) -> LgiStatus {
    guard(|| {
        nonnull!(engine, out);
        *out = ptr::null_mut();
        let r = maximize_c((*engine).inner.as_ref(), p_tilde, &MaximizeOptions::default()).map(|m| m.result);
        store(r, out)
    })
}

/// # Safety
/// `eval` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lgi_evaluation_c(eval: *const LgiEvaluation, out: *mut f64) -> LgiStatus {
    guard(|| {
        nonnull!(eval, out);
        *out = (*eval).inner.c_value;
        LgiStatus::Ok
    })
}

/// Schedule actually evaluated (after maximization, the optimum).
///
/// # Safety
/// `eval` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lgi_evaluation_params(eval: *const LgiEvaluation, out: *mut LgiDimensionless) -> LgiStatus {
    guard(|| {
        nonnull!(eval, out);
        let p = (*eval).inner.params;
        *out = LgiDimensionless {
            p_tilde: p.p_tilde,
            tau1: p.tau1,
            dtau: p.dtau,
        };
        LgiStatus::Ok
    })
}

/// `C12, C23, C34, C14` into `out[0..4]`.
///
/// # Safety
/// `eval` must be a live handle and `out` point to four doubles.
#[no_mangle]
pub unsafe extern "C" fn lgi_evaluation_correlators(eval: *const LgiEvaluation, out: *mut f64) -> LgiStatus {
    guard(|| {
        nonnull!(eval, out);
        for (k, c) in (*eval).inner.correlators().into_iter().enumerate() {
            *out.add(k) = c;
        }
        LgiStatus::Ok
    })
}

/// Joint table of pair `index` (0: (1,2), 1: (2,3), 2: (3,4), 3: (1,4)).
///
/// # Safety
/// `eval` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lgi_evaluation_joint_table(
    eval: *const LgiEvaluation,
    index: usize,
    out: *mut LgiJointTable,
) -> LgiStatus {
    guard(|| {
        nonnull!(eval, out);
        match (*eval).inner.joint_tables.get(index) {
            Some(t) => {
                *out = LgiJointTable {
                    p_pp: t.p_pp,
                    p_pm: t.p_pm,
                    p_mp: t.p_mp,
                    p_mm: t.p_mm,
                };
                LgiStatus::Ok
            }
            None => fail(LgiError::Parameter(format!("pair index {index} out of range 0..4"))),
        }
    })
}

/// # Safety
/// `eval` must come from [`lgi_compute`] or [`lgi_maximize`] and not be
/// used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lgi_evaluation_free(eval: *mut LgiEvaluation) {
    if !eval.is_null() {
        drop(Box::from_raw(eval));
    }
}
