use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use shsim_ffi::*;

const CONFIG: &str = "[domain]\nn_modes = 6\n\n[integrator]\nT = 0.1\ndt = 0.01\nseed = 3\n";

fn simulator(text: &str) -> *mut ShsimSimulator {
    let c = CString::new(text).unwrap();
    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { shsim_simulator_from_toml(c.as_ptr(), &mut sim) }, ShsimStatus::Ok);
    sim
}

fn last_error() -> String {
    let p = shsim_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(shsim_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn run_matches_core() {
    let sim = simulator(CONFIG);
    let dim = unsafe { shsim_simulator_dim(sim) };
    let mut traj = ptr::null_mut();
    assert_eq!(unsafe { shsim_simulator_run(sim, 2, &mut traj) }, ShsimStatus::Ok);
    let len = unsafe { shsim_trajectory_len(traj) };

    let expected = shsim_core::integrator::simulate(
        &shsim_core::parse_config_str(CONFIG).unwrap().sim_config().unwrap(),
        2,
    )
    .unwrap();
    assert_eq!(len, expected.states.len());
    let mut times = vec![0.0; len];
    assert_eq!(unsafe { shsim_trajectory_times(traj, times.as_mut_ptr(), len) }, ShsimStatus::Ok);
    assert_eq!(times, expected.times);
    let mut u = vec![0.0; dim];
    for (i, want) in expected.states.iter().enumerate() {
        assert_eq!(unsafe { shsim_trajectory_state(traj, i, u.as_mut_ptr(), dim) }, ShsimStatus::Ok);
        assert_eq!(u.as_slice(), want.coeffs());
    }
    let mut d = ShsimDiagnostics::default();
    assert_eq!(unsafe { shsim_trajectory_diagnostics(traj, len - 1, &mut d) }, ShsimStatus::Ok);
    assert_eq!(d.sphere_defect, expected.diagnostics[len - 1].sphere_defect);
    assert_eq!(
        unsafe { shsim_trajectory_state(traj, len, u.as_mut_ptr(), dim) },
        ShsimStatus::InvalidArgument
    );
    unsafe {
        shsim_trajectory_free(traj);
        shsim_simulator_free(sim);
    }
}

#[test]
fn seed_changes_path_and_hash() {
    let sim = simulator(CONFIG);
    let h0 = unsafe { shsim_simulator_config_hash(sim) };
    assert_eq!(h0, shsim_core::parse_config_str(CONFIG).unwrap().hash());
    assert_eq!(unsafe { shsim_simulator_set_seed(sim, 4) }, ShsimStatus::Ok);
    assert_ne!(unsafe { shsim_simulator_config_hash(sim) }, h0);
    unsafe { shsim_simulator_free(sim) };
}

#[test]
fn errors_set_status_and_message() {
    let mut sim = ptr::null_mut();
    let bad = CString::new("[domain]\nn_modes = 6\n[integrator]\nT = 1.0\ndt = 0.0\n").unwrap();
    assert_eq!(unsafe { shsim_simulator_from_toml(bad.as_ptr(), &mut sim) }, ShsimStatus::Config);
    assert!(sim.is_null());
    assert!(last_error().contains("integrator.dt"));

    assert_eq!(unsafe { shsim_simulator_from_toml(ptr::null(), &mut sim) }, ShsimStatus::NullPointer);
    assert!(last_error().contains("toml"));
    let missing = CString::new("/nonexistent/shsim.toml").unwrap();
    assert_eq!(unsafe { shsim_simulator_from_file(missing.as_ptr(), &mut sim) }, ShsimStatus::Io);

    assert_eq!(unsafe { shsim_simulator_dim(ptr::null()) }, 0);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { shsim_simulator_run(ptr::null(), 0, &mut out) }, ShsimStatus::NullPointer);
    unsafe {
        shsim_simulator_free(ptr::null_mut());
        shsim_trajectory_free(ptr::null_mut());
        shsim_string_free(ptr::null_mut());
    }
    let sim = simulator(CONFIG);
    assert!(shsim_last_error_message().is_null());
    unsafe { shsim_simulator_free(sim) };
}

#[test]
fn commutation_defect_of_ground_state() {
    let e1 = [1.0];
    let mut d = -1.0;
    let s = unsafe { shsim_commutation_defect(e1.as_ptr(), 1, std::f64::consts::PI, 2, 2, 1.0, &mut d) };
    assert_eq!(s, ShsimStatus::Ok);
    assert!((d - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-12);

    let e3 = [0.0, 0.0, 1.0];
    let s = unsafe { shsim_commutation_defect(e3.as_ptr(), 3, std::f64::consts::PI, 2, 2, 1.0, &mut d) };
    assert_eq!(s, ShsimStatus::InvalidArgument);
}

#[test]
fn verify_returns_json_lines() {
    let sim = simulator(&format!("{CONFIG}\n[suite]\nprobe_samples = 50\n"));
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { shsim_simulator_verify(sim, &mut text) }, ShsimStatus::Ok);
    let s = unsafe { CStr::from_ptr(text) }.to_str().unwrap().to_owned();
    unsafe {
        shsim_string_free(text);
        shsim_simulator_free(sim);
    }
    let rows: Vec<serde_json::Value> = s.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(rows.len() >= 12);
    assert!(rows.iter().all(|r| r["verdict"] != "fail"), "{s}");
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/shsim.h")).unwrap();
    for name in [
        "shsim_version",
        "shsim_last_error_message",
        "shsim_simulator_from_toml",
        "shsim_simulator_run",
        "shsim_trajectory_state",
        "shsim_trajectory_free",
        "shsim_commutation_defect",
        "SHSIM_STATUS_OK = 0",
        "typedef struct ShsimSimulator ShsimSimulator",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

/// Directory holding the shared library built alongside this test binary.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let dir = artifact_dir();
    assert!(dir.join("libshsim_ffi.so").exists(), "no shared library in {}", dir.display());
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempfile::tempdir().unwrap();
    let bin = tmp.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(&dir)
        .arg(format!("-Wl,-rpath,{}", dir.display()))
        .args(["-lshsim_ffi", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("ok"));
}
