// Copyright 2026 hypoflow contributors
// SPDX-License-Identifier: Apache-2.0

//! C ABI over the hypoflow core: opaque model handles, status codes and
//! plain-old-data report structs. All functions are panic-free at the
//! boundary; failures return a status code and store a message retrievable
//! with [`hf_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hypoflow::catalog::{build_model, BuiltModel, Classification, ModelParams};
use hypoflow::lifting::{check_lift_conditions, overdamped_limit, rate_scan};
use hypoflow::spectral::{spectral_gap, DEFAULT_KERNEL_TOL};
use hypoflow::HypoflowError;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HfStatus {
    /// Success.
    Ok = 0,
    /// A pointer argument was null or a parameter was out of range.
    InvalidArgument = 1,
    /// The model name or model parameters were rejected.
    InvalidModel = 2,
    /// A numerical routine failed (non-convergence, degeneracy, ...).
    Numerical = 3,
}

/// Opaque handle to a built model (generator decomposition plus metadata).
pub struct HfModel {
    inner: BuiltModel,
}

/// Structural and lift diagnostics for a model.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct HfLiftReport {
    /// Weighted norm of the dissipative-kernel projection of the
    /// conservative part (zero for a valid lift).
    pub php_residual: f64,
    /// Spectral gap of the dissipative part on its kernel complement.
    pub coercivity_lambda_s: f64,
    /// 1 when the overdamped kernel equals the full kernel.
    pub kernel_equal: i32,
    pub second_order_residual: f64,
    pub first_order_residual: f64,
    /// Smallest singular value of the lift metric on the lifted range;
    /// +infinity when the range is trivial (coercive branch).
    pub s_tilde_m: f64,
    /// 1 when the model is coercive (trivial lift).
    pub coercive: i32,
}

/// Kernel dimensions and classification of a model.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct HfModelInfo {
    /// Dimension of the discretized state space.
    pub dimension: usize,
    pub ker_l_dim: usize,
    pub ker_ls_dim: usize,
    /// 1 when coercive, 0 when hypocoercive.
    pub coercive: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("nul-free");
    });
}

fn status_of(err: &HypoflowError) -> HfStatus {
    match err {
        HypoflowError::InvalidModel(_) => HfStatus::InvalidModel,
        _ => HfStatus::Numerical,
    }
}

fn guard(body: impl FnOnce() -> HfStatus) -> HfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            HfStatus::Numerical
        }
    }
}

/// Copy the most recent error message (UTF-8, NUL-terminated) into `buf`.
/// Returns the full message length in bytes, excluding the terminator; the
/// copy is truncated to `cap - 1` bytes. `buf` may be null to query the
/// length only.
#[no_mangle]
pub extern "C" fn hf_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Build a catalog model (or load a `.json` Lindblad model file) and store
/// an owned handle in `out`. Free it with [`hf_model_free`].
///
/// # Safety
/// `name` must be a NUL-terminated UTF-8 string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_model_build(
    name: *const c_char,
    m: f64,
    gamma: f64,
    n_x: usize,
    n_v: usize,
    out: *mut *mut HfModel,
) -> HfStatus {
    guard(|| {
        if name.is_null() || out.is_null() {
            set_error("null pointer argument");
            return HfStatus::InvalidArgument;
        }
        let name = match unsafe { CStr::from_ptr(name) }.to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("model name is not valid UTF-8");
                return HfStatus::InvalidArgument;
            }
        };
        if !(m > 0.0) || !(gamma > 0.0) || n_x == 0 || n_v == 0 {
            set_error("m, gamma must be positive and n_x, n_v nonzero");
            return HfStatus::InvalidArgument;
        }
        let params = ModelParams {
            m,
            gamma,
            n_x,
            n_v,
        };
        match build_model(name, &params) {
            Ok(built) => {
                unsafe {
                    *out = Box::into_raw(Box::new(HfModel { inner: built }));
                }
                HfStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Release a model handle. Null is a no-op.
///
/// # Safety
/// `model` must have come from [`hf_model_build`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hf_model_free(model: *mut HfModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Kernel dimensions and classification of the model.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hf_model_info(
    model: *const HfModel,
    out: *mut HfModelInfo,
) -> HfStatus {
    guard(|| {
        if model.is_null() || out.is_null() {
            set_error("null pointer argument");
            return HfStatus::InvalidArgument;
        }
        let info = unsafe { &(*model).inner.info };
        unsafe {
            *out = HfModelInfo {
                dimension: info.dimension,
                ker_l_dim: info.ker_l_dim,
                ker_ls_dim: info.ker_ls_dim,
                coercive: (info.classification == Classification::Coercive) as i32,
            };
        }
        HfStatus::Ok
    })
}

/// Spectral gap and kernel dimension of the full generator.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hf_spectral_gap(
    model: *const HfModel,
    out_gap: *mut f64,
    out_kernel_dim: *mut usize,
) -> HfStatus {
    guard(|| {
        if model.is_null() || out_gap.is_null() || out_kernel_dim.is_null() {
            set_error("null pointer argument");
            return HfStatus::InvalidArgument;
        }
        let decomp = unsafe { &(*model).inner.decomp };
        let full = match decomp.full() {
            Ok(op) => op,
            Err(e) => {
                set_error(&e.to_string());
                return status_of(&e);
            }
        };
        match spectral_gap(&full, DEFAULT_KERNEL_TOL) {
            Ok(rep) => {
                unsafe {
                    *out_gap = rep.gap;
                    *out_kernel_dim = rep.kernel_dim;
                }
                HfStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Spectral gap of the overdamped-limit generator. Fails with
/// `HF_STATUS_NUMERICAL` when the reduced generator has no spectrum
/// outside its kernel.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hf_overdamped_gap(
    model: *const HfModel,
    out_gap: *mut f64,
) -> HfStatus {
    guard(|| {
        if model.is_null() || out_gap.is_null() {
            set_error("null pointer argument");
            return HfStatus::InvalidArgument;
        }
        let decomp = unsafe { &(*model).inner.decomp };
        let result = overdamped_limit(decomp)
            .and_then(|od| spectral_gap(&od.op, DEFAULT_KERNEL_TOL));
        match result {
            Ok(rep) => {
                unsafe { *out_gap = rep.gap };
                HfStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Lift diagnostics with the default lift metric.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hf_lift_check(
    model: *const HfModel,
    out: *mut HfLiftReport,
) -> HfStatus {
    guard(|| {
        if model.is_null() || out.is_null() {
            set_error("null pointer argument");
            return HfStatus::InvalidArgument;
        }
        let decomp = unsafe { &(*model).inner.decomp };
        match check_lift_conditions(decomp, None) {
            Ok(rep) => {
                unsafe {
                    *out = HfLiftReport {
                        php_residual: rep.php_residual,
                        coercivity_lambda_s: rep.coercivity_lambda_s,
                        kernel_equal: rep.kernel_equal as i32,
                        second_order_residual: rep.second_order_residual,
                        first_order_residual: rep.first_order_residual,
                        s_tilde_m: rep.s_tilde_m,
                        coercive: rep.coercive as i32,
                    };
                }
                HfStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Spectral gaps over a caller-supplied friction grid. `gaps` must have
/// room for `n` values.
///
/// # Safety
/// `gammas` and `gaps` must point to `n` readable / writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hf_rate_scan_gaps(
    model: *const HfModel,
    gammas: *const f64,
    n: usize,
    gaps: *mut f64,
) -> HfStatus {
    guard(|| {
        if model.is_null() || gammas.is_null() || gaps.is_null() || n == 0 {
            set_error("null pointer argument or empty grid");
            return HfStatus::InvalidArgument;
        }
        let grid = unsafe { std::slice::from_raw_parts(gammas, n) };
        if grid.iter().any(|&g| !(g > 0.0)) {
            set_error("friction values must be positive");
            return HfStatus::InvalidArgument;
        }
        let decomp = unsafe { &(*model).inner.decomp };
        match rate_scan(decomp, grid, None) {
            Ok(rep) => {
                let out = unsafe { std::slice::from_raw_parts_mut(gaps, n) };
                out.copy_from_slice(&rep.spectral_gaps);
                HfStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}
