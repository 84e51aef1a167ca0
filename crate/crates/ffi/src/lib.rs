//! C ABI over `asmo-drive`.
//!
//! Scenarios and run results are opaque handles owned by the library and
//! released with the matching `_free` call. Every fallible entry point
//! returns an `AsmoStatus`; on failure the message is kept per thread and
//! read back with `asmo_last_error_message`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use asmo_drive::benchmark::{run_demo, DemoConfig, DemoMode};
use asmo_drive::lyapunov::StabilityClass;
use asmo_drive::motor_model::{derived, MotorParams};
use asmo_drive::sim::{self, RunResult, ScenarioConfig, CSV_COLUMNS};
use asmo_drive::transforms::{self, AbcTriple, AlphaBetaPair, DqPair};
use asmo_drive::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsmoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Runtime = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque scenario configuration.
pub struct AsmoScenario {
    cfg: ScenarioConfig,
}

/// Opaque run result.
pub struct AsmoRun {
    result: RunResult,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AsmoMetrics {
    pub speed_rms_error: f64,
    pub speed_max_error: f64,
    /// NaN when the speed error never settles into the band.
    pub convergence_time: f64,
    pub flux_rms_error: f64,
    pub flux_rms_magnitude: f64,
    pub rr_final_error: f64,
    /// 0 asymptotically stable, 1 marginal, 2 unstable, -1 not classified.
    pub stability: i32,
    pub verdict: bool,
    pub aborted: bool,
    /// Time of the abort, NaN if the run completed.
    pub failure_time: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AsmoMotorParams {
    pub r_s: f64,
    pub r_r: f64,
    pub l_s: f64,
    pub l_r: f64,
    pub l_m: f64,
    pub pole_pairs: u32,
    pub inertia: f64,
    pub friction: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AsmoDerivedParams {
    pub sigma: f64,
    pub tau_r: f64,
    pub k: f64,
    pub gamma: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AsmoDemoVerdict {
    pub mode: u8,
    pub pass: bool,
    pub terminal_norm: f64,
    pub steady_amplitude: f64,
    pub ultimate_bound: f64,
    pub rms_x1: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: AsmoStatus, msg: impl AsRef<str>) -> AsmoStatus {
    set_error(msg.as_ref());
    status
}

fn from_error(e: Error) -> AsmoStatus {
    let status = match e {
        Error::Config(_) | Error::ParameterConsistency(_) | Error::UnknownMode(_) => {
            AsmoStatus::Config
        }
        Error::InvalidInput(_) | Error::DimensionMismatch { .. } | Error::NotSymmetric(_) => {
            AsmoStatus::InvalidArgument
        }
        Error::Io(_) => AsmoStatus::Io,
        _ => AsmoStatus::Runtime,
    };
    fail(status, e.to_string())
}

/// Run `f`, turning a panic into `AsmoStatus::Panic`.
fn guard(f: impl FnOnce() -> AsmoStatus) -> AsmoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == AsmoStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(AsmoStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, AsmoStatus> {
    if p.is_null() {
        return Err(fail(AsmoStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(AsmoStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

macro_rules! out_ptr {
    ($p:expr, $name:literal) => {
        if $p.is_null() {
            return fail(AsmoStatus::NullPointer, concat!($name, " is null"));
        }
    };
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Library version, static NUL-terminated string.
#[no_mangle]
pub extern "C" fn asmo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn asmo_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parse a scenario from a JSON string.
#[no_mangle]
pub unsafe extern "C" fn asmo_scenario_from_json(
    json: *const c_char,
    out: *mut *mut AsmoScenario,
) -> AsmoStatus {
    guard(|| {
        out_ptr!(out, "out");
        let text = try_status!(str_arg(json, "json"));
        match ScenarioConfig::from_json(text) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(AsmoScenario { cfg }));
                AsmoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Load a scenario from a JSON file.
#[no_mangle]
pub unsafe extern "C" fn asmo_scenario_load(
    path: *const c_char,
    out: *mut *mut AsmoScenario,
) -> AsmoStatus {
    guard(|| {
        out_ptr!(out, "out");
        let path = try_status!(str_arg(path, "path"));
        match ScenarioConfig::load(Path::new(path)) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(AsmoScenario { cfg }));
                AsmoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Built-in reference scenario.
#[no_mangle]
pub unsafe extern "C" fn asmo_scenario_reference(out: *mut *mut AsmoScenario) -> AsmoStatus {
    guard(|| {
        out_ptr!(out, "out");
        *out = Box::into_raw(Box::new(AsmoScenario {
            cfg: ScenarioConfig::reference(),
        }));
        AsmoStatus::Ok
    })
}

/// Overwrite one numeric config value by dotted path, e.g. `observer.gains.k_R`.
#[no_mangle]
pub unsafe extern "C" fn asmo_scenario_set(
    scenario: *mut AsmoScenario,
    path: *const c_char,
    value: f64,
) -> AsmoStatus {
    guard(|| {
        out_ptr!(scenario, "scenario");
        let path = try_status!(str_arg(path, "path"));
        let s = &mut *scenario;
        let updated = sim::with_value(&s.cfg, path, value);
        match updated {
            Ok(cfg) => {
                s.cfg = cfg;
                AsmoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn asmo_scenario_free(scenario: *mut AsmoScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Run a scenario. An aborted run still yields a handle carrying the
/// partial records; check `AsmoMetrics::aborted`.
#[no_mangle]
pub unsafe extern "C" fn asmo_run(
    scenario: *const AsmoScenario,
    out: *mut *mut AsmoRun,
) -> AsmoStatus {
    guard(|| {
        out_ptr!(scenario, "scenario");
        out_ptr!(out, "out");
        match sim::run_scenario(&(*scenario).cfg) {
            Ok(result) => {
                *out = Box::into_raw(Box::new(AsmoRun { result }));
                AsmoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn asmo_run_free(run: *mut AsmoRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

#[no_mangle]
pub unsafe extern "C" fn asmo_run_metrics(
    run: *const AsmoRun,
    out: *mut AsmoMetrics,
) -> AsmoStatus {
    guard(|| {
        out_ptr!(run, "run");
        out_ptr!(out, "out");
        let r = &(*run).result;
        let mut m = AsmoMetrics {
            convergence_time: f64::NAN,
            stability: -1,
            verdict: r.verdict(),
            aborted: r.failure.is_some(),
            failure_time: r.failure.as_ref().map_or(f64::NAN, |f| f.t),
            ..AsmoMetrics::default()
        };
        if let Some(x) = &r.metrics {
            m.speed_rms_error = x.speed_rms_error;
            m.speed_max_error = x.speed_max_error;
            m.convergence_time = x.convergence_time.unwrap_or(f64::NAN);
            m.flux_rms_error = x.flux_rms_error;
            m.flux_rms_magnitude = x.flux_rms_magnitude;
            m.rr_final_error = x.rr_final_error;
            m.stability = match x.stability_classification {
                Some(StabilityClass::AsymptoticallyStable) => 0,
                Some(StabilityClass::Marginal) => 1,
                Some(StabilityClass::Unstable) => 2,
                None => -1,
            };
        }
        *out = m;
        AsmoStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn asmo_run_record_count(run: *const AsmoRun, out: *mut usize) -> AsmoStatus {
    guard(|| {
        out_ptr!(run, "run");
        out_ptr!(out, "out");
        *out = (*run).result.records.len();
        AsmoStatus::Ok
    })
}

/// Number of record columns.
#[no_mangle]
pub extern "C" fn asmo_column_count() -> usize {
    CSV_COLUMNS.len()
}

/// Index of a `run.csv` column by name, or -1.
#[no_mangle]
pub unsafe extern "C" fn asmo_column_index(name: *const c_char) -> i32 {
    let Ok(name) = str_arg(name, "name") else {
        return -1;
    };
    CSV_COLUMNS
        .iter()
        .position(|c| *c == name)
        .map_or(-1, |i| i as i32)
}

/// Copy column `column` (`run.csv` order) into `buf`, which must hold at
/// least the record count.
#[no_mangle]
pub unsafe extern "C" fn asmo_run_column(
    run: *const AsmoRun,
    column: usize,
    buf: *mut f64,
    len: usize,
) -> AsmoStatus {
    guard(|| {
        out_ptr!(run, "run");
        out_ptr!(buf, "buf");
        if column >= CSV_COLUMNS.len() {
            return fail(
                AsmoStatus::InvalidArgument,
                format!("column {column} out of range 0..{}", CSV_COLUMNS.len()),
            );
        }
        let records = &(*run).result.records;
        if len < records.len() {
            return fail(
                AsmoStatus::BufferTooSmall,
                format!("buffer holds {len}, need {}", records.len()),
            );
        }
        let dst = std::slice::from_raw_parts_mut(buf, records.len());
        for (d, r) in dst.iter_mut().zip(records) {
            *d = r.values()[column];
        }
        AsmoStatus::Ok
    })
}

/// Write `run.csv` and `metrics.json` into `dir`, creating it if needed.
#[no_mangle]
pub unsafe extern "C" fn asmo_run_write(run: *const AsmoRun, dir: *const c_char) -> AsmoStatus {
    guard(|| {
        out_ptr!(run, "run");
        let dir = Path::new(try_status!(str_arg(dir, "dir")));
        let r = &(*run).result;
        let write = || -> asmo_drive::Result<()> {
            std::fs::create_dir_all(dir)?;
            sim::write_run_csv(r, std::fs::File::create(dir.join("run.csv"))?)?;
            sim::write_metrics_json(r, std::fs::File::create(dir.join("metrics.json"))?)?;
            Ok(())
        };
        match write() {
            Ok(()) => AsmoStatus::Ok,
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn asmo_clarke(
    a: f64,
    b: f64,
    c: f64,
    alpha: *mut f64,
    beta: *mut f64,
) -> AsmoStatus {
    guard(|| {
        out_ptr!(alpha, "alpha");
        out_ptr!(beta, "beta");
        match transforms::clarke(AbcTriple::new(a, b, c)) {
            Ok(ab) => {
                *alpha = ab.alpha;
                *beta = ab.beta;
                AsmoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn asmo_inverse_clarke(alpha: f64, beta: f64, abc: *mut f64) -> AsmoStatus {
    guard(|| {
        out_ptr!(abc, "abc");
        match transforms::inverse_clarke(AlphaBetaPair::new(alpha, beta)) {
            Ok(v) => {
                let out = std::slice::from_raw_parts_mut(abc, 3);
                out.copy_from_slice(&[v.a, v.b, v.c]);
                AsmoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn asmo_park(
    alpha: f64,
    beta: f64,
    theta: f64,
    d: *mut f64,
    q: *mut f64,
) -> AsmoStatus {
    guard(|| {
        out_ptr!(d, "d");
        out_ptr!(q, "q");
        match transforms::park(AlphaBetaPair::new(alpha, beta), theta) {
            Ok(dq) => {
                *d = dq.d;
                *q = dq.q;
                AsmoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn asmo_inverse_park(
    d: f64,
    q: f64,
    theta: f64,
    alpha: *mut f64,
    beta: *mut f64,
) -> AsmoStatus {
    guard(|| {
        out_ptr!(alpha, "alpha");
        out_ptr!(beta, "beta");
        match transforms::inverse_park(DqPair::new(d, q), theta) {
            Ok(ab) => {
                *alpha = ab.alpha;
                *beta = ab.beta;
                AsmoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Default machine parameters.
#[no_mangle]
pub extern "C" fn asmo_motor_params_default() -> AsmoMotorParams {
    let p = MotorParams::default();
    AsmoMotorParams {
        r_s: p.r_s,
        r_r: p.r_r,
        l_s: p.l_s,
        l_r: p.l_r,
        l_m: p.l_m,
        pole_pairs: p.pole_pairs,
        inertia: p.inertia,
        friction: p.friction,
    }
}

#[no_mangle]
pub unsafe extern "C" fn asmo_derived_params(
    params: *const AsmoMotorParams,
    out: *mut AsmoDerivedParams,
) -> AsmoStatus {
    guard(|| {
        out_ptr!(params, "params");
        out_ptr!(out, "out");
        let p = &*params;
        let mp = MotorParams {
            r_s: p.r_s,
            r_r: p.r_r,
            l_s: p.l_s,
            l_r: p.l_r,
            l_m: p.l_m,
            pole_pairs: p.pole_pairs,
            inertia: p.inertia,
            friction: p.friction,
        };
        match mp.validate().and_then(|_| derived(&mp)) {
            Ok(d) => {
                *out = AsmoDerivedParams {
                    sigma: d.sigma,
                    tau_r: d.tau_r,
                    k: d.k,
                    gamma: d.gamma,
                };
                AsmoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Benchmark plant demo with default settings; `mode` is 1, 2 or 3.
#[no_mangle]
pub unsafe extern "C" fn asmo_testplant(mode: u8, out: *mut AsmoDemoVerdict) -> AsmoStatus {
    guard(|| {
        out_ptr!(out, "out");
        let mode: DemoMode = match mode.to_string().parse() {
            Ok(m) => m,
            Err(e) => return from_error(e),
        };
        match run_demo(mode, &DemoConfig::default()) {
            Ok(r) => {
                let v = r.verdict;
                *out = AsmoDemoVerdict {
                    mode: v.mode,
                    pass: v.pass,
                    terminal_norm: v.terminal_norm,
                    steady_amplitude: v.steady_amplitude,
                    ultimate_bound: v.ultimate_bound,
                    rms_x1: v.rms_x1,
                };
                AsmoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
