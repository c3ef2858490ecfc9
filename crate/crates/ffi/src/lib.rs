//! C interface to `outbreak-core`.
//!
//! Every function returns an [`ObStatus`]. On failure the message is
//! available from [`ob_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use outbreak_core::detector::{self, DetectorConfig, Mode, ThresholdTable};
use outbreak_core::domain::{self, DayIndex, GrowthParams, RngSeed};
use outbreak_core::growth_model::{self, SequentialOptions, SequentialSummary};
use outbreak_core::ingest::{self, DailyCount};
use outbreak_core::voi;
use outbreak_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InputError = 3,
    ModelError = 4,
    AllSimulationsEmpty = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObMode {
    KnownStart = 0,
    UnknownStart = 1,
}

/// Detector settings. `alphas` points to `n_alphas` levels.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ObDetectorConfig {
    pub rho0: f64,
    pub beta1_null: f64,
    pub n_travelers: u64,
    pub horizon_days: usize,
    pub n_sims: usize,
    pub alphas: *const f64,
    pub n_alphas: usize,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ObDomesticFit {
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub intercept: f64,
}

/// One decision date of a sequential run. `p_exceed` is NaN when not
/// computed.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ObSequentialRow {
    /// Days since the epidemic start.
    pub day: i64,
    pub n_cases: u64,
    pub beta1_mean: f64,
    pub beta1_lo: f64,
    pub beta1_hi: f64,
    pub p_exceed: f64,
    pub detected: bool,
}

/// Opaque threshold table.
pub struct ObThresholdTable {
    table: ThresholdTable,
}

/// Opaque sequential run.
pub struct ObSequentialRun {
    summary: SequentialSummary,
    start: chrono::NaiveDate,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> ObStatus {
    match e {
        Error::AllSimulationsEmpty => ObStatus::AllSimulationsEmpty,
        Error::Input(_) => ObStatus::InputError,
        Error::Config(_) | Error::Domain(_) => ObStatus::InvalidArgument,
        Error::AtDate { source, .. } => status_of(source),
        _ => ObStatus::ModelError,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (ObStatus, String)>) -> ObStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ObStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ObStatus::Panic
        }
    }
}

fn core(e: Error) -> (ObStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (ObStatus, String) {
    (ObStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> (ObStatus, String) {
    (ObStatus::InvalidArgument, msg.into())
}

/// # Safety
/// `ptr` must be null or point to `len` readable values.
unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], (ObStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// # Safety
/// `ptr` must be null or a NUL-terminated string.
unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, (ObStatus, String)> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

/// # Safety
/// `out` must be null or valid for writes.
unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (ObStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ob_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ob_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Doubling time `ln 2 / beta1`; fails unless `beta1 > 0`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ob_doubling_time(beta1: f64, out: *mut f64) -> ObStatus {
    guard(|| write(out, domain::doubling_time(beta1).map_err(core)?, "out"))
}

/// Prevalence on day `t` for `initial_cases` infections among `population`,
/// capped at one.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ob_prevalence(
    initial_cases: u64,
    population: u64,
    beta1: f64,
    t: i64,
    out: *mut f64,
) -> ObStatus {
    guard(|| {
        if initial_cases == 0 || population == 0 || initial_cases > population {
            return Err(invalid("need 0 < initial_cases <= population"));
        }
        let p = GrowthParams::new(initial_cases, population, beta1, 0.0);
        write(out, domain::prevalence(&p, DayIndex(t)), "out")
    })
}

/// Integrated quadratic distance between two sample sets, using every sample.
///
/// # Safety
/// `f` and `g` must point to `nf` and `ng` values; `out` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn ob_iqd(f: *const f64, nf: usize, g: *const f64, ng: usize, out: *mut f64) -> ObStatus {
    guard(|| {
        let v = voi::iqd_exact(slice(f, nf, "f")?, slice(g, ng, "g")?).map_err(core)?;
        write(out, v, "out")
    })
}

/// Poisson log-linear fit to `n` consecutive daily counts.
///
/// # Safety
/// `counts` must point to `n` values; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ob_domestic_fit(counts: *const u64, n: usize, out: *mut ObDomesticFit) -> ObStatus {
    guard(|| {
        let start = chrono::NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
        let series: Vec<DailyCount> = slice(counts, n, "counts")?
            .iter()
            .enumerate()
            .map(|(i, &c)| DailyCount {
                date: start + chrono::Days::new(i as u64),
                new_cases: c,
            })
            .collect();
        let fit = growth_model::domestic_fit(&series).map_err(core)?;
        write(
            out,
            ObDomesticFit {
                rate: fit.rate,
                ci_lo: fit.ci_lo,
                ci_hi: fit.ci_hi,
                intercept: fit.intercept,
            },
            "out",
        )
    })
}

/// Simulates and tabulates a threshold table. Free with
/// [`ob_thresholds_free`].
///
/// # Safety
/// `cfg` must point to a valid config whose `alphas` holds `n_alphas`
/// values; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ob_thresholds_new(
    cfg: *const ObDetectorConfig,
    mode: ObMode,
    out: *mut *mut ObThresholdTable,
) -> ObStatus {
    guard(|| {
        let c = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let config = DetectorConfig {
            rho0: c.rho0,
            beta1_null: c.beta1_null,
            n_travelers: c.n_travelers,
            horizon_days: c.horizon_days,
            n_sims: c.n_sims,
            alphas: slice(c.alphas, c.n_alphas, "alphas")?.to_vec(),
            seed: c.seed,
        };
        let mode = match mode {
            ObMode::KnownStart => Mode::KnownStart,
            ObMode::UnknownStart => Mode::UnknownStart,
        };
        let table = detector::threshold_table(&config, mode).map_err(core)?;
        write(out, Box::into_raw(Box::new(ObThresholdTable { table })), "out")
    })
}

/// # Safety
/// `table` must be null or a handle from [`ob_thresholds_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ob_thresholds_free(table: *mut ObThresholdTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of days in the table.
///
/// # Safety
/// `table` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ob_thresholds_horizon(table: *const ObThresholdTable) -> usize {
    table.as_ref().map_or(0, |t| t.table.horizon())
}

/// Minimum cumulative cases to reject on `day` (1-based) at the
/// `alpha_index`-th level. Writes 0 when no count can reject.
///
/// # Safety
/// `table` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ob_thresholds_get(
    table: *const ObThresholdTable,
    day: usize,
    alpha_index: usize,
    out: *mut u64,
) -> ObStatus {
    guard(|| {
        let t = &table.as_ref().ok_or_else(|| null("table"))?.table;
        let per = day
            .checked_sub(1)
            .and_then(|d| t.min_cases.get(d))
            .ok_or_else(|| invalid(format!("day {day} outside 1..={}", t.horizon())))?;
        let c = per
            .get(alpha_index)
            .ok_or_else(|| invalid(format!("alpha index {alpha_index} out of range")))?;
        write(out, c.unwrap_or(0), "out")
    })
}

/// Smallest level at which `observed_cumulative` rejects on `day`, or 0
/// when it rejects at none.
///
/// # Safety
/// `table` must be a live handle; `out_alpha` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ob_verdict(
    table: *const ObThresholdTable,
    day: usize,
    observed_cumulative: u64,
    out_alpha: *mut f64,
) -> ObStatus {
    guard(|| {
        let t = &table.as_ref().ok_or_else(|| null("table"))?.table;
        let v = detector::verdict(t, day, observed_cumulative).map_err(core)?;
        write(out_alpha, v.alpha_attained.unwrap_or(0.0), "out_alpha")
    })
}

/// Runs the daily estimates for one origin from CSV/JSON files. Free with
/// [`ob_sequential_free`].
///
/// # Safety
/// The paths must be NUL-terminated strings; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ob_sequential_run(
    cases_path: *const c_char,
    volumes_path: *const c_char,
    origin_config_path: *const c_char,
    threshold: f64,
    seed: u64,
    out: *mut *mut ObSequentialRun,
) -> ObStatus {
    guard(|| {
        let origin = ingest::parse_origin_config(Path::new(text(origin_config_path, "origin_config_path")?))
            .map_err(|e| core(e.into()))?;
        let cases = ingest::parse_case_reports(Path::new(text(cases_path, "cases_path")?)).map_err(|e| core(e.into()))?;
        let cases = ingest::for_origin(&cases, &origin.name);
        let volumes = ingest::parse_volumes(Path::new(text(volumes_path, "volumes_path")?)).map_err(|e| core(e.into()))?;
        let opts = SequentialOptions {
            threshold,
            ..Default::default()
        };
        let summary = growth_model::sequential_estimates(&cases, &volumes, &origin, &opts, &RngSeed::root(seed))
            .map_err(core)?;
        let run = ObSequentialRun {
            summary,
            start: origin.epidemic_start,
        };
        write(out, Box::into_raw(Box::new(run)), "out")
    })
}

/// # Safety
/// `run` must be null or a handle from [`ob_sequential_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ob_sequential_free(run: *mut ObSequentialRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of decision dates.
///
/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ob_sequential_len(run: *const ObSequentialRun) -> usize {
    run.as_ref().map_or(0, |r| r.summary.rows.len())
}

/// # Safety
/// `run` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ob_sequential_row(run: *const ObSequentialRun, index: usize, out: *mut ObSequentialRow) -> ObStatus {
    guard(|| {
        let r = run.as_ref().ok_or_else(|| null("run"))?;
        let row = r
            .summary
            .rows
            .get(index)
            .ok_or_else(|| invalid(format!("row {index} out of range")))?;
        write(
            out,
            ObSequentialRow {
                day: DayIndex::from_date(r.start, row.decision_date).value(),
                n_cases: row.n_cases,
                beta1_mean: row.beta1.mean,
                beta1_lo: row.beta1.lo,
                beta1_hi: row.beta1.hi,
                p_exceed: row.p_exceed.unwrap_or(f64::NAN),
                detected: row.beta1.lo > r.summary.threshold,
            },
            "out",
        )
    })
}

/// Detection day (days since the epidemic start), or -1 without detection.
///
/// # Safety
/// `run` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ob_sequential_detection_day(run: *const ObSequentialRun, out: *mut i64) -> ObStatus {
    guard(|| {
        let r = run.as_ref().ok_or_else(|| null("run"))?;
        let day = r
            .summary
            .detection_date
            .map_or(-1, |d| DayIndex::from_date(r.start, d).value());
        write(out, day, "out")
    })
}
