//! C interface to the quadmod toolkit.
//!
//! Constellations are opaque handles created by `qm_constellation_*` constructors and released
//! with [`qm_constellation_free`]. Every fallible call returns a [`QmStatus`]; on failure the
//! message is available from [`qm_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use quadmod::channel::{simulate_ser, union_bound, RngStream, StopRule};
use quadmod::constellation::io::{read_constellation, write_constellation};
use quadmod::constellation::Constellation;
use quadmod::experiment::ConstellationSpec;
use quadmod::sync::{mcrb_tau_normalized, run_timing_loop, McrbParams, PolMode, TimingLoopConfig};
use quadmod::waveform::{measure_papr, PulseShape};
use quadmod::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A lattice carve or torus grid cannot produce the requested point count.
    CountUnreachable = 3,
    Io = 4,
    /// Output buffer too small; the required length has been written back.
    BufferTooSmall = 5,
    Internal = 6,
}

/// Opaque constellation handle.
pub struct QmConstellation {
    inner: Constellation,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QmSerEstimate {
    pub errors: u64,
    pub trials: u64,
    pub ser: f64,
    pub ci95_halfwidth: f64,
    /// Non-zero when the symbol budget ran out before the error target.
    pub underresolved: u8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QmPapr {
    pub combined_symbol: f64,
    pub single_symbol: f64,
    pub combined_shaped: f64,
    pub single_shaped: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QmLoopResult {
    /// Timing-estimate variance over the measurement window, in `T^2`.
    pub variance: f64,
    pub mean_offset: f64,
    pub detector_gain: f64,
    pub locked: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let mut s = msg.into();
    s.retain(|c| c != '\0');
    let c = CString::new(s).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> QmStatus {
    match e {
        Error::CountUnreachable { .. } | Error::InvalidCount { .. } => QmStatus::CountUnreachable,
        Error::Io { .. } | Error::Csv(_) => QmStatus::Io,
        _ => QmStatus::InvalidArgument,
    }
}

fn fail(e: Error) -> QmStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

/// Runs `f`, turning panics into [`QmStatus::Internal`].
fn guard(f: impl FnOnce() -> QmStatus) -> QmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            QmStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, QmStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(QmStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        QmStatus::InvalidArgument
    })
}

unsafe fn handle<'a>(h: *const QmConstellation) -> Result<&'a Constellation, QmStatus> {
    if h.is_null() {
        set_error("null constellation handle");
        return Err(QmStatus::NullPointer);
    }
    Ok(&(*h).inner)
}

unsafe fn emit(c: Constellation, out: *mut *mut QmConstellation) -> QmStatus {
    *out = Box::into_raw(Box::new(QmConstellation { inner: c }));
    QmStatus::Ok
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            set_error(concat!("null pointer: ", stringify!($p)));
            return QmStatus::NullPointer;
        })+
    };
}

/// Message of the last failed call on this thread, or an empty string. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a constellation by name, e.g. `"88-LAM"`, `"64-4D-PSK"`, `"hex-cyl-64-PSK"`,
/// `"bi-orthogonal"` or `"dual-16-QAM"`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qm_constellation_by_name(
    name: *const c_char,
    out: *mut *mut QmConstellation,
) -> QmStatus {
    guard(|| {
        non_null!(out);
        let name = try_status!(str_arg(name));
        let Some(spec) = ConstellationSpec::from_name(name) else {
            set_error(format!("unknown constellation `{name}`"));
            return QmStatus::InvalidArgument;
        };
        match spec.build() {
            Ok(c) => emit(c, out),
            Err(e) => fail(e),
        }
    })
}

/// Reads a constellation from an interchange file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qm_constellation_load(
    path: *const c_char,
    out: *mut *mut QmConstellation,
) -> QmStatus {
    guard(|| {
        non_null!(out);
        let path = try_status!(str_arg(path));
        match read_constellation(path) {
            Ok(c) => emit(c, out),
            Err(e) => fail(e),
        }
    })
}

/// Writes a constellation in the interchange format.
///
/// # Safety
/// `c` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn qm_constellation_save(
    c: *const QmConstellation,
    path: *const c_char,
) -> QmStatus {
    guard(|| {
        let c = try_status!(handle(c));
        let path = try_status!(str_arg(path));
        match write_constellation(c, path) {
            Ok(()) => QmStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `c` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qm_constellation_free(c: *mut QmConstellation) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qm_constellation_len(c: *const QmConstellation) -> usize {
    handle(c).map_or(0, |c| c.len())
}

/// # Safety
/// `c` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qm_constellation_bits(c: *const QmConstellation, out: *mut f64) -> QmStatus {
    non_null!(out);
    *out = try_status!(handle(c)).bits_per_symbol();
    QmStatus::Ok
}

/// Minimum 4-D Euclidean distance.
///
/// # Safety
/// `c` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qm_constellation_min_distance(
    c: *const QmConstellation,
    out: *mut f64,
) -> QmStatus {
    guard(|| {
        non_null!(out);
        *out = try_status!(handle(c)).min_distance();
        QmStatus::Ok
    })
}

/// Copies the points as `xI xQ yI yQ` quadruples into `buf`, which holds `*len` doubles.
/// `*len` is set to the number of doubles required (`4 * points`).
///
/// # Safety
/// `c` must be a live handle, `len` valid, and `buf` valid for `*len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qm_constellation_points(
    c: *const QmConstellation,
    buf: *mut f64,
    len: *mut usize,
) -> QmStatus {
    non_null!(len);
    let c = try_status!(handle(c));
    let need = 4 * c.len();
    let have = *len;
    *len = need;
    if have < need || buf.is_null() {
        set_error(format!("buffer holds {have} doubles, {need} needed"));
        return QmStatus::BufferTooSmall;
    }
    for (k, p) in c.points().iter().enumerate() {
        ptr::copy_nonoverlapping(p.coords().as_ptr(), buf.add(4 * k), 4);
    }
    QmStatus::Ok
}

/// Monte-Carlo symbol error rate at `esn0_db` until `min_errors` errors or `max_symbols`
/// symbols. Deterministic in `(seed, stream)`.
///
/// # Safety
/// `c` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qm_simulate_ser(
    c: *const QmConstellation,
    esn0_db: f64,
    max_symbols: u64,
    min_errors: u64,
    seed: u64,
    stream: u64,
    out: *mut QmSerEstimate,
) -> QmStatus {
    guard(|| {
        non_null!(out);
        let c = try_status!(handle(c));
        if esn0_db.is_nan() || max_symbols == 0 {
            set_error("Es/N0 must be a number and max_symbols positive");
            return QmStatus::InvalidArgument;
        }
        let e = simulate_ser(
            c,
            esn0_db,
            &StopRule::new(max_symbols, min_errors),
            &RngStream::new(seed, stream),
        );
        *out = QmSerEstimate {
            errors: e.errors,
            trials: e.trials,
            ser: e.ser,
            ci95_halfwidth: e.ci95_halfwidth,
            underresolved: e.underresolved as u8,
        };
        QmStatus::Ok
    })
}

/// Union bound on the symbol error rate.
///
/// # Safety
/// `c` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qm_union_bound(
    c: *const QmConstellation,
    esn0_db: f64,
    out: *mut f64,
) -> QmStatus {
    guard(|| {
        non_null!(out);
        *out = union_bound(try_status!(handle(c)), esn0_db);
        QmStatus::Ok
    })
}

/// Symbol-level and RRC-shaped PAPR over `n_symbols` random symbols.
///
/// # Safety
/// `c` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qm_measure_papr(
    c: *const QmConstellation,
    n_symbols: usize,
    rolloff: f64,
    span: usize,
    sps: usize,
    seed: u64,
    out: *mut QmPapr,
) -> QmStatus {
    guard(|| {
        non_null!(out);
        let c = try_status!(handle(c));
        let pulse = PulseShape::rrc(rolloff, span, sps);
        match measure_papr(c, n_symbols, &pulse, &RngStream::new(seed, 0)) {
            Ok(r) => {
                *out = QmPapr {
                    combined_symbol: r.combined_symbol,
                    single_symbol: r.single_symbol,
                    combined_shaped: r.combined_shaped,
                    single_shaped: r.single_shaped,
                };
                QmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Normalized timing MCRB `B_N T / (4 pi^2 xi) * N0/Es`, halved when `dual` is non-zero.
#[no_mangle]
pub extern "C" fn qm_mcrb_tau_normalized(bn_t: f64, xi: f64, esn0_linear: f64, dual: u8) -> f64 {
    mcrb_tau_normalized(&McrbParams {
        bn_t,
        xi,
        esn0_linear,
        dual: dual != 0,
    })
}

/// One Gardner timing-loop run on 16-QAM with the default chain (roll-off 0.2, 4 samples
/// per symbol). `esn0_db` is per polarization; pass infinity for a noiseless run.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qm_run_timing_loop(
    bn_t: f64,
    dual: u8,
    esn0_db: f64,
    measure_symbols: usize,
    seed: u64,
    out: *mut QmLoopResult,
) -> QmStatus {
    guard(|| {
        non_null!(out);
        let mode = if dual != 0 {
            PolMode::DualPol
        } else {
            PolMode::SinglePol
        };
        if !(bn_t > 0.0 && bn_t < 0.1) {
            set_error(format!("B_N T must lie in (0, 0.1), got {bn_t}"));
            return QmStatus::InvalidArgument;
        }
        let mut cfg = TimingLoopConfig::new(bn_t, mode, esn0_db);
        cfg.measure_symbols = measure_symbols;
        match run_timing_loop(&cfg, &RngStream::new(seed, 0)) {
            Ok(t) => {
                *out = QmLoopResult {
                    variance: t.variance,
                    mean_offset: t.mean_offset,
                    detector_gain: t.detector_gain,
                    locked: t.locked() as u8,
                };
                QmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
