//! C ABI over `fdlab-core`.
//!
//! Every function returns an [`FdlabStatus`]; results come back through out-pointers.
//! Grids and fields are opaque handles owned by the caller and released with the matching
//! `_free` function. After a failure, [`fdlab_last_error`] copies a message for the
//! calling thread.
//!
//! # Safety
//!
//! Handles must come from this library and be freed at most once. Pointer arguments paired
//! with a length must point to at least that many valid doubles. Out-pointers may be null
//! only where documented.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use fdlab_core::bubbles::{bubble_mass, fit_bubble, interaction_i1, interaction_i2, Bubble, FitOptions};
use fdlab_core::diagnostics::{energy_f, fit_rate, RateModel, RateWindow};
use fdlab_core::flow::{run_rescaled, run_rescaled_stabilized, FlowParams, RunOptions, StabilizeOptions};
use fdlab_core::spectral::dirichlet_lambda1;
use fdlab_core::stationary::{solve_stationary, ShootingProblem};
use fdlab_core::{Error, Field, FieldKind, RadialGrid};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdlabStatus {
    Ok = 0,
    NullPointer = 1,
    /// Configuration, domain or contract violation.
    InvalidArgument = 2,
    /// A solver failed to converge or a fit was degenerate.
    Numerical = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdlabRateModel {
    Exponential = 0,
    Polynomial = 1,
}

/// Radial grid handle.
pub struct FdlabGrid {
    inner: Arc<RadialGrid>,
}

/// Nodal field handle.
pub struct FdlabField {
    inner: Field,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> FdlabStatus {
    match err {
        Error::Config { .. } | Error::Domain(_) | Error::Contract(_) | Error::Io(_) | Error::Json(_) => {
            FdlabStatus::InvalidArgument
        }
        _ => FdlabStatus::Numerical,
    }
}

struct Failure(FdlabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(FdlabStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FdlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            FdlabStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            FdlabStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn grid_ref<'a>(g: *const FdlabGrid) -> Result<&'a FdlabGrid, Failure> {
    g.as_ref().ok_or_else(|| null("grid"))
}

unsafe fn field_ref<'a>(f: *const FdlabField) -> Result<&'a FdlabField, Failure> {
    f.as_ref().ok_or_else(|| null("field"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn copy_out(src: &[f64], dst: *mut f64, len: usize) -> Result<(), Failure> {
    if len < src.len() {
        return Err(Failure(
            FdlabStatus::BufferTooSmall,
            format!("buffer holds {len} values, need {}", src.len()),
        ));
    }
    if dst.is_null() {
        return Err(null("out"));
    }
    // SAFETY: the caller promises `dst` points to `len >= src.len()` writable doubles.
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len()) };
    Ok(())
}

fn boxed(field: Field) -> *mut FdlabField {
    Box::into_raw(Box::new(FdlabField { inner: field }))
}

/// Copy the calling thread's last error message into `buf` (NUL-terminated, truncated to
/// `len`). Returns the full message length in bytes, excluding the terminator.
#[no_mangle]
pub unsafe extern "C" fn fdlab_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fdlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// `n = 1` is the interval `(0, radius)`; `n >= 2` is the ball of that radius.
#[no_mangle]
pub unsafe extern "C" fn fdlab_grid_new(
    n: usize,
    radius: f64,
    intervals: usize,
    stretch: f64,
    grid: *mut *mut FdlabGrid,
) -> FdlabStatus {
    guard(|| {
        let slot = out(grid, "grid")?;
        let inner = RadialGrid::build(n, radius, intervals, stretch)?;
        *slot = Box::into_raw(Box::new(FdlabGrid { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fdlab_grid_free(grid: *mut FdlabGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of nodes, `intervals + 1`; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn fdlab_grid_len(grid: *const FdlabGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.inner.len())
}

#[no_mangle]
pub unsafe extern "C" fn fdlab_grid_nodes(grid: *const FdlabGrid, nodes: *mut f64, len: usize) -> FdlabStatus {
    guard(|| copy_out(grid_ref(grid)?.inner.nodes(), nodes, len))
}

#[no_mangle]
pub unsafe extern "C" fn fdlab_dirichlet_lambda1(grid: *const FdlabGrid, lambda1: *mut f64) -> FdlabStatus {
    guard(|| {
        let slot = out(lambda1, "lambda1")?;
        *slot = dirichlet_lambda1(&grid_ref(grid)?.inner)?;
        Ok(())
    })
}

/// Field from `len` nodal values; Dirichlet nodes must be zero.
#[no_mangle]
pub unsafe extern "C" fn fdlab_field_new(
    grid: *const FdlabGrid,
    values: *const f64,
    len: usize,
    field: *mut *mut FdlabField,
) -> FdlabStatus {
    guard(|| {
        let slot = out(field, "field")?;
        let g = grid_ref(grid)?;
        let vals = slice(values, len, "values")?;
        let inner = Field::new(g.inner.clone(), vals.to_vec(), FieldKind::RescaledV)?;
        *slot = boxed(inner);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fdlab_field_free(field: *mut FdlabField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

#[no_mangle]
pub unsafe extern "C" fn fdlab_field_len(field: *const FdlabField) -> usize {
    field.as_ref().map_or(0, |f| f.inner.values().len())
}

#[no_mangle]
pub unsafe extern "C" fn fdlab_field_values(field: *const FdlabField, values: *mut f64, len: usize) -> FdlabStatus {
    guard(|| copy_out(field_ref(field)?.inner.values(), values, len))
}

/// `∫ f` over the ball.
#[no_mangle]
pub unsafe extern "C" fn fdlab_field_integrate(field: *const FdlabField, value: *mut f64) -> FdlabStatus {
    guard(|| {
        let slot = out(value, "value")?;
        *slot = field_ref(field)?.inner.integrate();
        Ok(())
    })
}

/// `F(v) = ∫ |∇v|² − b v² − (2/(p+1)) v^{p+1}`.
#[no_mangle]
pub unsafe extern "C" fn fdlab_energy(field: *const FdlabField, p: f64, b: f64, value: *mut f64) -> FdlabStatus {
    guard(|| {
        let slot = out(value, "value")?;
        *slot = energy_f(&field_ref(field)?.inner, p, b);
        Ok(())
    })
}

/// Positive radial solution of `−Δv − bv = v^p`, vanishing on the boundary.
#[no_mangle]
pub unsafe extern "C" fn fdlab_stationary_solve(
    grid: *const FdlabGrid,
    p: f64,
    b: f64,
    field: *mut *mut FdlabField,
    alpha: *mut f64,
) -> FdlabStatus {
    guard(|| {
        let slot = out(field, "field")?;
        let g = &grid_ref(grid)?.inner;
        let sol = solve_stationary(&ShootingProblem::new(g.dim(), p, b, g.radius()), g)?;
        if !alpha.is_null() {
            *alpha = sol.alpha_star;
        }
        *slot = boxed(sol.field);
        Ok(())
    })
}

/// Rescaled flow from `initial` to `t_end`; writes the final state. With `stabilize != 0`
/// the amplitude is rebalanced window by window.
#[no_mangle]
pub unsafe extern "C" fn fdlab_rescaled_run(
    initial: *const FdlabField,
    p: f64,
    b: f64,
    t_end: f64,
    stabilize: c_int,
    field: *mut *mut FdlabField,
) -> FdlabStatus {
    guard(|| {
        let slot = out(field, "field")?;
        let v0 = &field_ref(initial)?.inner;
        let params = FlowParams::new(v0.grid().dim(), p, b);
        let traj = if stabilize != 0 {
            run_rescaled_stabilized(v0, &params, t_end, &StabilizeOptions::default())?
        } else {
            run_rescaled(v0, &params, t_end, &RunOptions::default())?
        };
        *slot = boxed(traj.last().clone());
        Ok(())
    })
}

/// `∫_{R^n} ξ̄^{2n/(n−2)}` for a bubble of concentration `lambda`.
#[no_mangle]
pub unsafe extern "C" fn fdlab_bubble_mass(n: usize, lambda: f64, value: *mut f64) -> FdlabStatus {
    guard(|| {
        let slot = out(value, "value")?;
        *slot = bubble_mass(&Bubble::new(n, lambda)?)?;
        Ok(())
    })
}

/// Interaction integrals of two bubbles at the given separation.
#[no_mangle]
pub unsafe extern "C" fn fdlab_interaction(
    n: usize,
    lambda1: f64,
    lambda2: f64,
    separation: f64,
    i1: *mut f64,
    i2: *mut f64,
) -> FdlabStatus {
    guard(|| {
        let (s1, s2) = (out(i1, "i1")?, out(i2, "i2")?);
        let (a, b) = (Bubble::new(n, lambda1)?, Bubble::new(n, lambda2)?);
        *s1 = interaction_i1(&a, &b, separation)?;
        *s2 = interaction_i2(&a, &b, separation)?;
        Ok(())
    })
}

/// Best centered corrected bubble `α·ξ_λ` for `field`; `b` twists the fitting norm.
#[no_mangle]
pub unsafe extern "C" fn fdlab_fit_bubble(
    field: *const FdlabField,
    b: f64,
    lambda: *mut f64,
    alpha: *mut f64,
    relative_residual: *mut f64,
) -> FdlabStatus {
    guard(|| {
        let (sl, sa, sr) = (out(lambda, "lambda")?, out(alpha, "alpha")?, out(relative_residual, "relative_residual")?);
        let fit = fit_bubble(&field_ref(field)?.inner, &FitOptions { b, ..FitOptions::default() })?;
        *sl = fit.lambda;
        *sa = fit.alpha;
        *sr = fit.relative_residual();
        Ok(())
    })
}

/// Classify the decay of `e(t)` on the tail of `[t_min, t_max]`.
#[no_mangle]
pub unsafe extern "C" fn fdlab_fit_rate(
    t: *const f64,
    e: *const f64,
    len: usize,
    t_min: f64,
    t_max: f64,
    tail_fraction: f64,
    model: *mut FdlabRateModel,
    gamma: *mut f64,
    theta: *mut f64,
) -> FdlabStatus {
    guard(|| {
        let slot = out(model, "model")?;
        let (ts, es) = (slice(t, len, "t")?, slice(e, len, "e")?);
        let v = fit_rate(ts, es, RateWindow { t_min, t_max, tail_fraction })?;
        *slot = match v.verdict {
            RateModel::Exponential => FdlabRateModel::Exponential,
            RateModel::Polynomial => FdlabRateModel::Polynomial,
        };
        if !gamma.is_null() {
            *gamma = v.gamma;
        }
        if !theta.is_null() {
            *theta = v.theta;
        }
        Ok(())
    })
}
