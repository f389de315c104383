//! C interface to the regmoment solver.
//!
//! Every fallible function returns an [`RmStatus`]; on failure the message
//! is available from [`rm_last_error`] on the calling thread. Solvers are
//! opaque handles created by `rm_solver_new*` and released with
//! [`rm_solver_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use regmoment::hermite::{he_roots, index_count};
use regmoment::projection::project;
use regmoment::scenarios::{build_initial, Config};
use regmoment::solver::Solver;
use regmoment::state::GradState;
use regmoment::Error;

/// Result code of every fallible call.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Unphysical = 4,
    Numerical = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Opaque solver handle.
pub struct RmSolver {
    inner: Solver,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RmStatus {
    match e {
        Error::Config(_)
        | Error::IncompatibleGrids(_)
        | Error::DegreeTooHigh { .. }
        | Error::DimensionTooLarge(_) => RmStatus::Config,
        Error::Unphysical { .. } | Error::NonPositive { .. } => RmStatus::Unphysical,
        Error::RunAborted { source, .. } => status_of(source),
        Error::NonFinite(_)
        | Error::SignalOrder { .. }
        | Error::NotConverged { .. }
        | Error::VelocityOverflow(_) => RmStatus::Numerical,
        Error::Io { .. } | Error::Snapshot { .. } => RmStatus::Io,
    }
}

fn fail(status: RmStatus, msg: impl Into<String>) -> RmStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), RmStatus>) -> RmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RmStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(RmStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

fn lib_err(e: Error) -> RmStatus {
    fail(status_of(&e), e.to_string())
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, RmStatus> {
    if p.is_null() {
        return Err(fail(RmStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(RmStatus::InvalidArgument, "string is not valid UTF-8"))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, need: usize) -> Result<&'a mut [f64], RmStatus> {
    if p.is_null() {
        return Err(fail(RmStatus::NullPointer, "null output buffer"));
    }
    if len < need {
        return Err(fail(
            RmStatus::BufferTooSmall,
            format!("buffer holds {len} values, {need} needed"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

unsafe fn in_slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], RmStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(RmStatus::NullPointer, "null input buffer"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a>(s: *const RmSolver) -> Result<&'a RmSolver, RmStatus> {
    s.as_ref()
        .ok_or_else(|| fail(RmStatus::NullPointer, "null solver handle"))
}

unsafe fn handle_mut<'a>(s: *mut RmSolver) -> Result<&'a mut RmSolver, RmStatus> {
    s.as_mut()
        .ok_or_else(|| fail(RmStatus::NullPointer, "null solver handle"))
}

fn new_solver(config: Config, out: *mut *mut RmSolver) -> Result<(), RmStatus> {
    if out.is_null() {
        return Err(fail(RmStatus::NullPointer, "null output handle"));
    }
    let (mesh, field) = build_initial(&config).map_err(lib_err)?;
    let inner = Solver::new(mesh, field, config.run).map_err(lib_err)?;
    unsafe { *out = Box::into_raw(Box::new(RmSolver { inner })) };
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a solver from `key = value` config text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rm_solver_new(text: *const c_char, out: *mut *mut RmSolver) -> RmStatus {
    guard(|| {
        let config: Config = c_str(text)?.parse().map_err(lib_err)?;
        new_solver(config, out)
    })
}

/// Builds a solver from a config file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rm_solver_new_from_file(
    path: *const c_char,
    out: *mut *mut RmSolver,
) -> RmStatus {
    guard(|| {
        let config = Config::from_file(Path::new(c_str(path)?)).map_err(lib_err)?;
        new_solver(config, out)
    })
}

/// Releases a solver. Null is ignored.
///
/// # Safety
/// `solver` must come from `rm_solver_new*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rm_solver_free(solver: *mut RmSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// One step at the stable time step; the step size is stored in `dt` when
/// it is not null.
///
/// # Safety
/// `solver` must be a live handle; `dt` null or writable.
#[no_mangle]
pub unsafe extern "C" fn rm_solver_step(solver: *mut RmSolver, dt: *mut f64) -> RmStatus {
    guard(|| {
        let s = handle_mut(solver)?;
        let h = s.inner.advance(f64::INFINITY).map_err(lib_err)?;
        if !dt.is_null() {
            *dt = h;
        }
        Ok(())
    })
}

/// Advances to time `t`, landing on it exactly.
///
/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rm_solver_run_until(solver: *mut RmSolver, t: f64) -> RmStatus {
    guard(|| {
        let s = handle_mut(solver)?;
        if !t.is_finite() {
            return Err(fail(RmStatus::InvalidArgument, format!("target time {t}")));
        }
        s.inner.run_until(t).map_err(lib_err)
    })
}

/// Current simulation time, or NaN for a null handle.
///
/// # Safety
/// `solver` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rm_solver_time(solver: *const RmSolver) -> f64 {
    solver.as_ref().map_or(f64::NAN, |s| s.inner.time())
}

/// Number of cells, or 0 for a null handle.
///
/// # Safety
/// `solver` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rm_solver_cell_count(solver: *const RmSolver) -> usize {
    solver.as_ref().map_or(0, |s| s.inner.mesh().len())
}

/// Velocity dimension `D`, or 0 for a null handle.
///
/// # Safety
/// `solver` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rm_solver_velocity_dim(solver: *const RmSolver) -> usize {
    solver.as_ref().map_or(0, |s| s.inner.config().velocity_dim)
}

/// Copies per-cell density, velocity, temperature and heat flux. `rho` and
/// `theta` hold `cells` values, `u` and `q` hold `cells * D` values, cell
/// major. Any output pointer may be null to skip it.
///
/// # Safety
/// Non-null buffers must be writable for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn rm_solver_macro_fields(
    solver: *const RmSolver,
    rho: *mut f64,
    u: *mut f64,
    theta: *mut f64,
    q: *mut f64,
    cells: usize,
) -> RmStatus {
    guard(|| {
        let s = handle(solver)?;
        let n = s.inner.mesh().len();
        let d = s.inner.config().velocity_dim;
        if cells < n {
            return Err(fail(
                RmStatus::BufferTooSmall,
                format!("buffers sized for {cells} cells, solver has {n}"),
            ));
        }
        let states = s.inner.field().macro_states();
        if !rho.is_null() {
            let out = out_slice(rho, cells, n)?;
            for (o, m) in out.iter_mut().zip(&states) {
                *o = m.rho;
            }
        }
        if !theta.is_null() {
            let out = out_slice(theta, cells, n)?;
            for (o, m) in out.iter_mut().zip(&states) {
                *o = m.theta;
            }
        }
        for (p, pick) in [(u, 0), (q, 1)] {
            if p.is_null() {
                continue;
            }
            let out = out_slice(p, cells * d, n * d)?;
            for (row, m) in out.chunks_mut(d).zip(&states) {
                row.copy_from_slice(if pick == 0 { &m.u } else { &m.q });
            }
        }
        Ok(())
    })
}

/// Domain totals of mass, momentum (`D` values) and energy.
///
/// # Safety
/// `mass` and `energy` must be writable; `momentum` writable for `len`
/// values.
#[no_mangle]
pub unsafe extern "C" fn rm_solver_totals(
    solver: *const RmSolver,
    mass: *mut f64,
    momentum: *mut f64,
    len: usize,
    energy: *mut f64,
) -> RmStatus {
    guard(|| {
        let s = handle(solver)?;
        if mass.is_null() || energy.is_null() {
            return Err(fail(RmStatus::NullPointer, "null output"));
        }
        let (m, p, e) = s.inner.field().totals(s.inner.mesh());
        let out = out_slice(momentum, len, p.len())?;
        out.copy_from_slice(&p);
        *mass = m;
        *energy = e;
        Ok(())
    })
}

/// Number of coefficients of an expansion of order `order` in `dim`
/// velocity dimensions.
#[no_mangle]
pub extern "C" fn rm_index_count(order: usize, dim: usize) -> usize {
    index_count(order, dim)
}

/// Roots of `He_n` in ascending order.
///
/// # Safety
/// `out` must be writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn rm_hermite_roots(n: usize, out: *mut f64, len: usize) -> RmStatus {
    guard(|| {
        if n == 0 {
            return Err(fail(RmStatus::InvalidArgument, "He_0 has no roots"));
        }
        let r = he_roots(n);
        out_slice(out, len, n)?.copy_from_slice(r.roots());
        Ok(())
    })
}

/// Re-expands coefficients given in frame `(u1, theta1)` at order
/// `order_in` into frame `(u2, theta2)` at order `order_out`, preserving
/// all moments up to that order.
///
/// # Safety
/// `u1`, `u2` must hold `dim` values; `coeffs_in` must hold
/// `rm_index_count(order_in, dim)` values; `coeffs_out` must be writable
/// for `len_out` values.
#[no_mangle]
pub unsafe extern "C" fn rm_project(
    dim: usize,
    order_in: usize,
    u1: *const f64,
    theta1: f64,
    coeffs_in: *const f64,
    u2: *const f64,
    theta2: f64,
    order_out: usize,
    coeffs_out: *mut f64,
    len_out: usize,
) -> RmStatus {
    guard(|| {
        if dim == 0 {
            return Err(fail(RmStatus::InvalidArgument, "dim must be positive"));
        }
        let u1 = in_slice(u1, dim)?.to_vec();
        let u2 = in_slice(u2, dim)?;
        let c = in_slice(coeffs_in, index_count(order_in, dim))?.to_vec();
        let state = GradState::new(order_in, u1, theta1, c).map_err(lib_err)?;
        let g = project(&state, u2, theta2, order_out).map_err(lib_err)?;
        out_slice(coeffs_out, len_out, g.coeffs().len())?.copy_from_slice(g.coeffs());
        Ok(())
    })
}
