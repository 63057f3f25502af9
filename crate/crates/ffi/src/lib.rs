//! C interface to `nsbf`.
//!
//! A solver is an opaque handle made by `nsbf_solver_new` or
//! `nsbf_solver_from_samples` and released with `nsbf_solver_free`. Every
//! other call returns an `int32_t` status; on failure the message is
//! available from `nsbf_last_error` on the same thread. Handles are
//! immutable after construction and may be shared between threads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nsbf::mesh::UniformMesh;
use nsbf::spectral::find_eigenvalues;
use nsbf::{Boundary, NsbfError, NsbfSolution, Potential, PotentialSpec, SpectralProblem};

pub const NSBF_OK: i32 = 0;
pub const NSBF_ERR_NULL_POINTER: i32 = 1;
pub const NSBF_ERR_INVALID_ARGUMENT: i32 = 2;
pub const NSBF_ERR_INVALID_MESH: i32 = 3;
pub const NSBF_ERR_DOMAIN: i32 = 4;
pub const NSBF_ERR_RANGE: i32 = 5;
pub const NSBF_ERR_NON_FINITE: i32 = 6;
pub const NSBF_ERR_CONVERGENCE: i32 = 7;
pub const NSBF_ERR_NON_VANISHING: i32 = 8;
pub const NSBF_ERR_BREAKDOWN: i32 = 9;
pub const NSBF_ERR_EVALUATION: i32 = 10;
pub const NSBF_ERR_INSUFFICIENT_DATA: i32 = 11;
pub const NSBF_ERR_IO: i32 = 12;
pub const NSBF_ERR_BUFFER_TOO_SMALL: i32 = 13;
pub const NSBF_ERR_PANIC: i32 = 14;

pub const NSBF_BOUNDARY_DIRICHLET: i32 = 0;
pub const NSBF_BOUNDARY_NEUMANN: i32 = 1;
pub const NSBF_BOUNDARY_ROBIN: i32 = 2;

/// Opaque solver handle.
pub struct NsbfSolver {
    inner: NsbfSolution,
}

/// Truncation data of a solver.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NsbfTruncation {
    /// Number of computed coefficients minus one.
    pub n: usize,
    pub n_opt: usize,
    pub n_opt_beta: usize,
    pub n_opt_gamma: usize,
    pub beta_floor: f64,
    pub gamma_floor: f64,
    /// 1 when both residuals reached a plateau.
    pub converged: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &NsbfError) -> i32 {
    match e {
        NsbfError::InvalidMesh(_) => NSBF_ERR_INVALID_MESH,
        NsbfError::Domain(_) => NSBF_ERR_DOMAIN,
        NsbfError::Range(_) => NSBF_ERR_RANGE,
        NsbfError::NonFinite { .. } => NSBF_ERR_NON_FINITE,
        NsbfError::Convergence { .. } => NSBF_ERR_CONVERGENCE,
        NsbfError::NonVanishing { .. } => NSBF_ERR_NON_VANISHING,
        NsbfError::NumericalBreakdown { .. } => NSBF_ERR_BREAKDOWN,
        NsbfError::Evaluation { .. } => NSBF_ERR_EVALUATION,
        NsbfError::InsufficientData { .. } => NSBF_ERR_INSUFFICIENT_DATA,
        NsbfError::Config(_) => NSBF_ERR_INVALID_ARGUMENT,
        NsbfError::Io(_) => NSBF_ERR_IO,
    }
}

struct Fail(i32, String);

impl From<NsbfError> for Fail {
    fn from(e: NsbfError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(NSBF_ERR_NULL_POINTER, format!("{what} is null"))
}

/// Runs `f`, turning errors and panics into a status plus last-error text.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            NSBF_OK
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(&msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            NSBF_ERR_PANIC
        }
    }
}

unsafe fn handle<'a>(h: *const NsbfSolver) -> Result<&'a NsbfSolution, Fail> {
    h.as_ref().map(|s| &s.inner).ok_or_else(|| null("solver"))
}

fn publish(p: Potential, n: usize, out: *mut *mut NsbfSolver) -> Result<(), Fail> {
    let inner = NsbfSolution::build(p, n)?;
    // SAFETY: `out` was checked non-null by the caller.
    unsafe { *out = Box::into_raw(Box::new(NsbfSolver { inner })) };
    Ok(())
}

/// Builds a solver for a named potential (`"x^2"`, `"1/x"`, `"zero"`,
/// `"const:c"`, `"sqrt(pi^2-x^2)"`, `"decay1:k"`, `"decay2:k"`,
/// `"csv:path"`) on `[0, b]` with `mesh_points` nodes and `n + 1`
/// coefficients.
///
/// # Safety
/// `potential` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsbf_solver_new(
    potential: *const c_char,
    l: f64,
    b: f64,
    mesh_points: usize,
    n: usize,
    out: *mut *mut NsbfSolver,
) -> i32 {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if potential.is_null() {
            return Err(null("potential"));
        }
        let s = CStr::from_ptr(potential)
            .to_str()
            .map_err(|_| Fail(NSBF_ERR_INVALID_ARGUMENT, "potential is not UTF-8".into()))?;
        let spec: PotentialSpec = s.parse()?;
        let mesh = UniformMesh::new(b, mesh_points)?;
        publish(spec.build(mesh, l)?, n, out)
    })
}

/// Builds a solver from `len` samples of `q` on the uniform mesh over
/// `[0, b]` (`len` is the mesh size).
///
/// # Safety
/// `q` must point to `len` doubles and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsbf_solver_from_samples(
    q: *const f64,
    len: usize,
    l: f64,
    b: f64,
    n: usize,
    out: *mut *mut NsbfSolver,
) -> i32 {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if q.is_null() {
            return Err(null("q"));
        }
        let samples = std::slice::from_raw_parts(q, len).to_vec();
        let mesh = UniformMesh::new(b, len)?;
        publish(Potential::from_samples(mesh, l, samples)?, n, out)
    })
}

/// Releases a solver. Null is ignored.
///
/// # Safety
/// `solver` must come from one of the constructors and not be used again.
#[no_mangle]
pub unsafe extern "C" fn nsbf_solver_free(solver: *mut NsbfSolver) {
    if !solver.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(solver))));
    }
}

/// `u(ω, x)` and `u′(ω, x)`. Either output pointer may be null.
///
/// # Safety
/// `solver` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn nsbf_eval(solver: *const NsbfSolver, omega: f64, x: f64, u: *mut f64, u_prime: *mut f64) -> i32 {
    guard(|| {
        let (a, b) = handle(solver)?.eval_pair(omega, x)?;
        if !u.is_null() {
            *u = a;
        }
        if !u_prime.is_null() {
            *u_prime = b;
        }
        Ok(())
    })
}

/// `|Σ β_n(x)/x|` and `|Σ γ_n(x)/x|` at the applied truncation.
///
/// # Safety
/// `solver` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn nsbf_error_indicator(solver: *const NsbfSolver, x: f64, eps_beta: *mut f64, eps_gamma: *mut f64) -> i32 {
    guard(|| {
        let s = handle(solver)?;
        if !(x > 0.0 && x <= s.b()) {
            return Err(NsbfError::Domain(format!("x = {x} outside (0, {}]", s.b())).into());
        }
        let (eb, eg) = s.error_indicator(x);
        if !eps_beta.is_null() {
            *eps_beta = eb;
        }
        if !eps_gamma.is_null() {
            *eps_gamma = eg;
        }
        Ok(())
    })
}

/// # Safety
/// `solver` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nsbf_truncation(solver: *const NsbfSolver, out: *mut NsbfTruncation) -> i32 {
    guard(|| {
        let s = handle(solver)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let t = s.tables().truncation;
        let (nb, ng) = s.orders();
        *out = NsbfTruncation {
            n: s.tables().n,
            n_opt: t.n_opt,
            n_opt_beta: nb,
            n_opt_gamma: ng,
            beta_floor: t.beta_floor,
            gamma_floor: t.gamma_floor,
            converged: t.converged as i32,
        };
        Ok(())
    })
}

/// Writes `β_n(b)` (or `γ_n(b)` when `gamma` is nonzero) for
/// `n = 0..=N` into `out`, which must hold `N + 1` values.
///
/// # Safety
/// `solver` must be a live handle and `out` must point to `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn nsbf_coefficients_at_b(solver: *const NsbfSolver, gamma: i32, out: *mut f64, capacity: usize) -> i32 {
    guard(|| {
        let t = handle(solver)?.tables();
        let src = if gamma != 0 { &t.gamma } else { &t.beta };
        if out.is_null() {
            return Err(null("out"));
        }
        if capacity < src.len() {
            return Err(Fail(NSBF_ERR_BUFFER_TOO_SMALL, format!("need {} values, got room for {capacity}", src.len())));
        }
        let dst = std::slice::from_raw_parts_mut(out, src.len());
        for (d, c) in dst.iter_mut().zip(src) {
            *d = c.last();
        }
        Ok(())
    })
}

/// Eigenvalues in `[omega_lo, omega_hi]` for the boundary condition
/// `boundary` (`NSBF_BOUNDARY_*`; `h` is used for Robin). `*count`
/// receives the number found; if it exceeds `capacity` the first
/// `capacity` are written and `NSBF_ERR_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `solver` must be a live handle, `out` must point to `capacity` doubles
/// (or be null when `capacity` is 0) and `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nsbf_eigenvalues(
    solver: *const NsbfSolver,
    boundary: i32,
    h: f64,
    omega_lo: f64,
    omega_hi: f64,
    out: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> i32 {
    guard(|| {
        let s = handle(solver)?;
        if count.is_null() {
            return Err(null("count"));
        }
        if out.is_null() && capacity > 0 {
            return Err(null("out"));
        }
        let bc = match boundary {
            NSBF_BOUNDARY_DIRICHLET => Boundary::Dirichlet,
            NSBF_BOUNDARY_NEUMANN => Boundary::Neumann,
            NSBF_BOUNDARY_ROBIN => Boundary::Robin(h),
            k => return Err(Fail(NSBF_ERR_INVALID_ARGUMENT, format!("unknown boundary kind {k}"))),
        };
        let eig = find_eigenvalues(s, &SpectralProblem::new(bc, omega_lo, omega_hi)?)?;
        *count = eig.len();
        let k = eig.len().min(capacity);
        if k > 0 {
            let dst = std::slice::from_raw_parts_mut(out, k);
            for (d, e) in dst.iter_mut().zip(&eig) {
                *d = e.omega;
            }
        }
        if eig.len() > capacity {
            return Err(Fail(NSBF_ERR_BUFFER_TOO_SMALL, format!("{} eigenvalues found, room for {capacity}", eig.len())));
        }
        Ok(())
    })
}

/// Message of the last failed call on this thread, or `""`. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn nsbf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nsbf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
