//! C ABI over `shsim-core`.
//!
//! Every fallible call returns a [`ShsimStatus`]; on failure the message is
//! available from [`shsim_last_error_message`] on the same thread. Handles
//! are opaque and owned by the caller, who releases them with the matching
//! `*_free` function. No function unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use shsim_core::basis::{build_basis, default_quad_points, Domain};
use shsim_core::dynamics::ModelParams;
use shsim_core::integrator::{simulate, Trajectory};
use shsim_core::verification::defect::commutation_defect;
use shsim_core::verification::probes::deterministic_suite;
use shsim_core::{parse_config, parse_config_str, RunConfig, ShsimError, SimConfig, SpectralField};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Integration = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Per-state diagnostics of a trajectory.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ShsimDiagnostics {
    pub time: f64,
    pub sphere_defect: f64,
    pub v_norm_sq: f64,
    pub l2n_norm: f64,
    pub da_norm_sq: f64,
}

/// Opaque simulator handle.
pub struct ShsimSimulator {
    config: RunConfig,
    sim: SimConfig,
}

/// Opaque trajectory handle.
pub struct ShsimTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(e: &ShsimError) -> ShsimStatus {
    match e {
        ShsimError::Config { .. } | ShsimError::Parse { .. } => ShsimStatus::Config,
        ShsimError::Integration { .. } => ShsimStatus::Integration,
        ShsimError::Io(_) | ShsimError::Snapshot(_) | ShsimError::Json(_) | ShsimError::Csv(_) => ShsimStatus::Io,
        _ => ShsimStatus::InvalidArgument,
    }
}

/// Run `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (ShsimStatus, String)>) -> ShsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ShsimStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ShsimStatus::Panic
        }
    }
}

fn core<T>(r: shsim_core::Result<T>) -> Result<T, (ShsimStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (ShsimStatus, String) {
    (ShsimStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (ShsimStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (ShsimStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

fn new_simulator(config: RunConfig, out: *mut *mut ShsimSimulator) -> Result<(), (ShsimStatus, String)> {
    let sim = core(config.sim_config())?;
    unsafe { *out = Box::into_raw(Box::new(ShsimSimulator { config, sim })) };
    Ok(())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn shsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn shsim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Build a simulator from TOML text.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn shsim_simulator_from_toml(toml: *const c_char, out: *mut *mut ShsimSimulator) -> ShsimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(toml, "toml")?;
        new_simulator(core(parse_config_str(text))?, out)
    })
}

/// Build a simulator from a TOML file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn shsim_simulator_from_file(path: *const c_char, out: *mut *mut ShsimSimulator) -> ShsimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = str_arg(path, "path")?;
        new_simulator(core(parse_config(Path::new(path)))?, out)
    })
}

/// # Safety
/// `sim` must come from a `shsim_simulator_from_*` call.
#[no_mangle]
pub unsafe extern "C" fn shsim_simulator_set_seed(sim: *mut ShsimSimulator, seed: u64) -> ShsimStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        s.config = s.config.clone().with_seed(seed);
        s.sim.master_seed = seed;
        Ok(())
    })
}

/// Number of spectral coefficients per state, 0 for NULL.
///
/// # Safety
/// `sim` must be NULL or a live simulator handle.
#[no_mangle]
pub unsafe extern "C" fn shsim_simulator_dim(sim: *const ShsimSimulator) -> usize {
    sim.as_ref().map_or(0, |s| s.sim.basis.dim())
}

/// Hash of the resolved configuration, 0 for NULL.
///
/// # Safety
/// `sim` must be NULL or a live simulator handle.
#[no_mangle]
pub unsafe extern "C" fn shsim_simulator_config_hash(sim: *const ShsimSimulator) -> u64 {
    sim.as_ref().map_or(0, |s| s.config.hash())
}

/// Integrate trajectory number `trajectory` of the ensemble.
///
/// # Safety
/// `sim` must be a live simulator handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn shsim_simulator_run(
    sim: *const ShsimSimulator,
    trajectory: u64,
    out: *mut *mut ShsimTrajectory,
) -> ShsimStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = core(simulate(&s.sim, trajectory))?;
        *out = Box::into_raw(Box::new(ShsimTrajectory { inner }));
        Ok(())
    })
}

/// Deterministic probe suite as JSON lines. Release with [`shsim_string_free`].
///
/// # Safety
/// `sim` must be a live simulator handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn shsim_simulator_verify(sim: *const ShsimSimulator, out: *mut *mut c_char) -> ShsimStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let hash = s.config.hash();
        let reports = core(deterministic_suite(
            &s.sim.basis,
            &s.sim.params,
            &s.sim.noise,
            s.config.suite.probe_samples,
            s.sim.master_seed,
        ))?;
        let text: String = reports.into_iter().map(|r| r.with_hash(hash).to_json_lines()).collect();
        *out = CString::new(text).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `sim` must be NULL or come from a `shsim_simulator_from_*` call, and must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn shsim_simulator_free(sim: *mut ShsimSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Number of recorded states, 0 for NULL.
///
/// # Safety
/// `traj` must be NULL or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn shsim_trajectory_len(traj: *const ShsimTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.states.len())
}

/// Copy the recorded times into `buf`, which must hold `shsim_trajectory_len` values.
///
/// # Safety
/// `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn shsim_trajectory_times(traj: *const ShsimTrajectory, buf: *mut f64, len: usize) -> ShsimStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| null("traj"))?;
        copy_out(&t.inner.times, buf, len)
    })
}

/// Copy the coefficients of state `index` into `buf` of `shsim_simulator_dim` values.
///
/// # Safety
/// `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn shsim_trajectory_state(
    traj: *const ShsimTrajectory,
    index: usize,
    buf: *mut f64,
    len: usize,
) -> ShsimStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| null("traj"))?;
        let u = t.inner.states.get(index).ok_or_else(|| out_of_range(index, t.inner.states.len()))?;
        copy_out(u.coeffs(), buf, len)
    })
}

/// # Safety
/// `traj` must be a live trajectory handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn shsim_trajectory_diagnostics(
    traj: *const ShsimTrajectory,
    index: usize,
    out: *mut ShsimDiagnostics,
) -> ShsimStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| null("traj"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let n = t.inner.diagnostics.len();
        let d = t.inner.diagnostics.get(index).ok_or_else(|| out_of_range(index, n))?;
        *out = ShsimDiagnostics {
            time: t.inner.times[index],
            sphere_defect: d.sphere_defect,
            v_norm_sq: d.v_norm_sq,
            l2n_norm: d.l2n_norm,
            da_norm_sq: d.da_norm_sq,
        };
        Ok(())
    })
}

/// # Safety
/// `traj` must be NULL or come from [`shsim_simulator_run`], and must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn shsim_trajectory_free(traj: *mut ShsimTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn shsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `|(I - Z_n) F(u_n)|` on `(0, length)` for the sine coefficients `coeffs`,
/// which must vanish beyond index `n_galerkin`.
///
/// # Safety
/// `coeffs` must be valid for `n_coeffs` reads and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn shsim_commutation_defect(
    coeffs: *const f64,
    n_coeffs: usize,
    length: f64,
    n_galerkin: usize,
    n_exp: u32,
    a: f64,
    out: *mut f64,
) -> ShsimStatus {
    guard(|| {
        if coeffs.is_null() {
            return Err(null("coeffs"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let params = ModelParams { n_exp, a };
        core(params.validate())?;
        let c = std::slice::from_raw_parts(coeffs, n_coeffs);
        let modes = n_coeffs.max((2 * n_exp.max(1) as usize - 1) * n_galerkin).max(1);
        let basis = Arc::new(core(build_basis(
            Domain::Interval { length },
            modes,
            default_quad_points(modes, n_exp),
        ))?);
        let mut full = c.to_vec();
        full.resize(modes, 0.0);
        let u = core(SpectralField::from_coeffs(&basis, full))?;
        *out = core(commutation_defect(&u, n_galerkin, &params))?;
        Ok(())
    })
}

fn out_of_range(index: usize, len: usize) -> (ShsimStatus, String) {
    (ShsimStatus::InvalidArgument, format!("index {index} out of range for {len} states"))
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), (ShsimStatus, String)> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < src.len() {
        return Err((
            ShsimStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}
