use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use quadmod::constellation::{generate_d4_lam, LatticeCarveSpec};
use quadmod_ffi::*;

fn by_name(name: &str) -> *mut QmConstellation {
    let n = CString::new(name).unwrap();
    let mut h = ptr::null_mut();
    let s = unsafe { qm_constellation_by_name(n.as_ptr(), &mut h) };
    assert_eq!(s, QmStatus::Ok, "{}", last_error());
    h
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(qm_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn handle_lifecycle_and_points() {
    let h = by_name("88-LAM");
    unsafe {
        assert_eq!(qm_constellation_len(h), 88);
        let mut bits = 0.0;
        assert_eq!(qm_constellation_bits(h, &mut bits), QmStatus::Ok);
        assert!((bits - 88f64.log2()).abs() < 1e-12);

        let mut len = 10;
        let mut small = vec![0.0; 10];
        assert_eq!(qm_constellation_points(h, small.as_mut_ptr(), &mut len), QmStatus::BufferTooSmall);
        assert_eq!(len, 352);
        let mut buf = vec![0.0; len];
        assert_eq!(qm_constellation_points(h, buf.as_mut_ptr(), &mut len), QmStatus::Ok);
        let energy: f64 = buf.iter().map(|x| x * x).sum::<f64>() / 88.0;
        assert!((energy - 1.0).abs() < 1e-12);

        let mut d = 0.0;
        assert_eq!(qm_constellation_min_distance(h, &mut d), QmStatus::Ok);
        let want = generate_d4_lam(&LatticeCarveSpec::new(88)).unwrap().min_distance();
        assert_eq!(d, want);
        qm_constellation_free(h);
        qm_constellation_free(ptr::null_mut());
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(qm_constellation_by_name(ptr::null(), &mut h), QmStatus::NullPointer);
        let bad = CString::new("12-star").unwrap();
        assert_eq!(qm_constellation_by_name(bad.as_ptr(), &mut h), QmStatus::InvalidArgument);
        assert!(last_error().contains("12-star"));
        let odd = CString::new("hex-cyl-7-PSK").unwrap();
        assert_eq!(qm_constellation_by_name(odd.as_ptr(), &mut h), QmStatus::CountUnreachable);
        let missing = CString::new("/nonexistent/q.txt").unwrap();
        assert_eq!(qm_constellation_load(missing.as_ptr(), &mut h), QmStatus::Io);
        assert!(h.is_null());
        let mut v = 0.0;
        assert_eq!(qm_union_bound(ptr::null(), 10.0, &mut v), QmStatus::NullPointer);
        assert_eq!(qm_constellation_len(ptr::null()), 0);
        let mut r = QmLoopResult::default();
        assert_eq!(qm_run_timing_loop(0.5, 0, 10.0, 1000, 1, &mut r), QmStatus::InvalidArgument);
    }
}

#[test]
fn save_and_load() {
    let dir = std::env::temp_dir().join(format!("qm-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = CString::new(dir.join("cyl.txt").to_str().unwrap()).unwrap();
    let h = by_name("hex-cyl-64-PSK");
    unsafe {
        assert_eq!(qm_constellation_save(h, path.as_ptr()), QmStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(qm_constellation_load(path.as_ptr(), &mut back), QmStatus::Ok);
        assert_eq!(qm_constellation_len(back), 64);
        qm_constellation_free(back);
        qm_constellation_free(h);
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn simulation_entry_points() {
    let h = by_name("dual-QPSK");
    unsafe {
        let mut a = QmSerEstimate::default();
        let mut b = QmSerEstimate::default();
        assert_eq!(qm_simulate_ser(h, 9.0, 10_000_000, 300, 3, 1, &mut a), QmStatus::Ok);
        assert_eq!(qm_simulate_ser(h, 9.0, 10_000_000, 300, 3, 1, &mut b), QmStatus::Ok);
        assert_eq!((a.errors, a.trials), (b.errors, b.trials));
        assert!(a.errors >= 300 && a.underresolved == 0);
        let mut ub = 0.0;
        assert_eq!(qm_union_bound(h, 9.0, &mut ub), QmStatus::Ok);
        assert!(ub >= a.ser - 3.0 * a.ci95_halfwidth);

        let mut p = QmPapr::default();
        assert_eq!(qm_measure_papr(h, 20_000, 0.2, 32, 8, 1, &mut p), QmStatus::Ok);
        assert!((p.combined_symbol - 1.0).abs() < 1e-12);
        assert!(p.single_shaped > p.combined_shaped);
        assert_eq!(qm_measure_papr(h, 20_000, 0.2, 31, 8, 1, &mut p), QmStatus::InvalidArgument);
        qm_constellation_free(h);
    }
    let m = qm_mcrb_tau_normalized(5e-4, 0.852, 10.0, 0);
    assert!((m - 1.486e-6).abs() < 1e-9);
    assert_eq!(qm_mcrb_tau_normalized(5e-4, 0.852, 10.0, 1), m / 2.0);

    let mut r = QmLoopResult::default();
    assert_eq!(unsafe { qm_run_timing_loop(5e-4, 1, f64::INFINITY, 20_000, 1, &mut r) }, QmStatus::Ok);
    assert_eq!(r.locked, 1);
    assert!(r.variance < 1e-5 && r.detector_gain > 0.5);
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include/quadmod.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["qm_constellation_by_name", "qm_simulate_ser", "qm_last_error", "QM_STATUS_OK"] {
        assert!(text.contains(sym), "{sym}");
    }
    let lib = target_dir().join("libquadmod_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let exe = std::env::temp_dir().join(format!("qm-smoke-{}", std::process::id()));
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler runs");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(out.status.success(), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok 0.1.0"));
}
