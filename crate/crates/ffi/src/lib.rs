//! C ABI for `varest`.
//!
//! Populations and population moments cross the boundary as opaque handles
//! created by `*_new`/`*_from_*` functions and released with the matching
//! `*_free`. Every fallible call returns a [`VarestStatus`]; on failure the
//! message is available from [`varest_last_error_message`] on the same thread.
//! Unit indices are 0-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use varest::input::{load_summary_params, SummaryParams};
use varest::montecarlo::{enumerate_exact, simulate, EmpiricalReport, SimulationPlan};
use varest::{
    evaluate, optimal_params, population_moments, pre, sample_stats, theoretical_bias, theoretical_mse, Estimator,
    EvalOptions, GeneralizedParams, KhoshParams, Population, PopulationMoments, RegressionCoef, SahaiParams, ThetaMode,
    VarestError,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarestStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed input: bad sizes, indices, files or parameters.
    InvalidInput = 2,
    /// Degenerate data, zero denominators and other numeric failures.
    NumericError = 3,
    Panic = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarestEstimatorKind {
    Unbiased = 0,
    Ratio = 1,
    Regression = 2,
    Khosh = 3,
    SahaiRay = 4,
    Generalized = 5,
    /// Regression with the slope taken from the population moments.
    RegressionPopulation = 6,
}

/// Estimator choice with all constants flattened; fields not used by `kind`
/// are ignored. `a`, `b`, `alpha` serve `Khosh`; `w` serves `SahaiRay`;
/// `a`, `c`, `d`, `alpha1`, `alpha`, `beta` serve `Generalized`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarestEstimatorConfig {
    pub kind: VarestEstimatorKind,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub alpha1: f64,
    pub alpha: f64,
    pub beta: f64,
    pub w: f64,
}

/// Published summary statistics, as in a parameter file.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarestSummary {
    pub population_size: usize,
    pub s_y: f64,
    pub s_x: f64,
    pub c_y: f64,
    pub c_x: f64,
    pub rho_yx: f64,
    pub c_yx: f64,
    pub beta2y: f64,
    pub beta2x: f64,
    pub lambda22: f64,
}

/// Plain copy of the scalar moments. Unavailable values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarestMomentsView {
    /// 0 when unknown.
    pub population_size: usize,
    pub n: usize,
    pub theta: f64,
    pub mean_y: f64,
    pub mean_x: f64,
    pub s2_y: f64,
    pub s2_x: f64,
    pub cv_y: f64,
    pub cv_x: f64,
    pub rho_yx: f64,
    pub lambda40: f64,
    pub lambda04: f64,
    pub lambda22: f64,
    pub beta2y_star: f64,
    pub beta2x_star: f64,
    pub lambda22_star: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarestEmpiricalReport {
    pub mean_estimate: f64,
    pub empirical_bias: f64,
    pub empirical_mse: f64,
    pub stderr_of_mean: f64,
    pub negative_estimate_count: u64,
    pub failed_sample_count: u64,
    pub evaluated_count: u64,
    /// Number of enumerated samples; 0 for simulation.
    pub sample_space_size: u64,
}

/// Opaque population handle.
pub struct VarestPopulation(Population);

/// Opaque population-moments handle.
pub struct VarestMoments(PopulationMoments);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &VarestError) -> VarestStatus {
    match err.exit_code() {
        3 => VarestStatus::NumericError,
        _ => VarestStatus::InvalidInput,
    }
}

/// Runs `body`, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> VarestStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => VarestStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            VarestStatus::NullPointer
        }
        Ok(Err(Failure::Varest(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            VarestStatus::Panic
        }
    }
}

enum Failure {
    Null(&'static str),
    Varest(VarestError),
}

impl From<VarestError> for Failure {
    fn from(e: VarestError) -> Self {
        Failure::Varest(e)
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: the caller guarantees `p` is null or valid for reads.
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: the caller guarantees `len` readable elements at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn write<T>(p: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: non-null and, per the caller, valid for writes.
    unsafe { p.write(value) };
    Ok(())
}

impl VarestEstimatorConfig {
    fn to_estimator(self) -> Estimator {
        match self.kind {
            VarestEstimatorKind::Unbiased => Estimator::Unbiased,
            VarestEstimatorKind::Ratio => Estimator::Ratio,
            VarestEstimatorKind::Regression => Estimator::regression(),
            VarestEstimatorKind::RegressionPopulation => Estimator::Regression {
                coef: RegressionCoef::Population,
            },
            VarestEstimatorKind::Khosh => Estimator::Khosh(KhoshParams {
                a: self.a,
                b: self.b,
                alpha: self.alpha,
            }),
            VarestEstimatorKind::SahaiRay => Estimator::SahaiRay(SahaiParams { w: self.w }),
            VarestEstimatorKind::Generalized => Estimator::Generalized(GeneralizedParams {
                a: self.a,
                c: self.c,
                d: self.d,
                alpha1: self.alpha1,
                alpha: self.alpha,
                beta: self.beta,
            }),
        }
    }

    fn from_estimator(est: &Estimator) -> Self {
        let mut cfg = VarestEstimatorConfig {
            kind: VarestEstimatorKind::Unbiased,
            a: 0.0,
            b: 0.0,
            c: 0.0,
            d: 0.0,
            alpha1: 0.0,
            alpha: 0.0,
            beta: 0.0,
            w: 0.0,
        };
        match est {
            Estimator::Unbiased => {}
            Estimator::Ratio => cfg.kind = VarestEstimatorKind::Ratio,
            Estimator::Regression { coef } => {
                cfg.kind = match coef {
                    RegressionCoef::Sample => VarestEstimatorKind::Regression,
                    RegressionCoef::Population => VarestEstimatorKind::RegressionPopulation,
                }
            }
            Estimator::Khosh(p) => {
                cfg.kind = VarestEstimatorKind::Khosh;
                (cfg.a, cfg.b, cfg.alpha) = (p.a, p.b, p.alpha);
            }
            Estimator::SahaiRay(p) => {
                cfg.kind = VarestEstimatorKind::SahaiRay;
                cfg.w = p.w;
            }
            Estimator::Generalized(p) => {
                cfg.kind = VarestEstimatorKind::Generalized;
                (cfg.a, cfg.c, cfg.d) = (p.a, p.c, p.d);
                (cfg.alpha1, cfg.alpha, cfg.beta) = (p.alpha1, p.alpha, p.beta);
            }
        }
        cfg
    }
}

fn theta_mode(fpc: bool) -> ThetaMode {
    if fpc {
        ThetaMode::Fpc
    } else {
        ThetaMode::NoFpc
    }
}

fn report_view(r: &EmpiricalReport, sample_space_size: u64) -> VarestEmpiricalReport {
    VarestEmpiricalReport {
        mean_estimate: r.mean_estimate,
        empirical_bias: r.empirical_bias,
        empirical_mse: r.empirical_mse,
        stderr_of_mean: r.stderr_of_mean,
        negative_estimate_count: r.negative_estimate_count,
        failed_sample_count: r.failed_sample_count,
        evaluated_count: r.evaluated_count,
        sample_space_size,
    }
}

/// Message describing the last failed call on this thread, or null. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn varest_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies `len` paired values into a new population.
///
/// # Safety
/// `y` and `x` must each point to `len` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn varest_population_new(
    y: *const f64,
    x: *const f64,
    len: usize,
    out: *mut *mut VarestPopulation,
) -> VarestStatus {
    guard(|| {
        let y = unsafe { slice(y, len, "y") }?;
        let x = unsafe { slice(x, len, "x") }?;
        let pop = Population::new(y.to_vec(), x.to_vec())?;
        unsafe { write(out, Box::into_raw(Box::new(VarestPopulation(pop))), "out") }
    })
}

/// # Safety
/// `pop` must be null or a handle from [`varest_population_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn varest_population_free(pop: *mut VarestPopulation) {
    if !pop.is_null() {
        drop(unsafe { Box::from_raw(pop) });
    }
}

/// # Safety
/// `pop` must be a live population handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn varest_population_len(pop: *const VarestPopulation, out: *mut usize) -> VarestStatus {
    guard(|| {
        let pop = unsafe { deref(pop, "pop") }?;
        unsafe { write(out, pop.0.len(), "out") }
    })
}

/// Moments of a population for samples of size `n`; `fpc` selects
/// `theta = 1/n - 1/N` instead of `1/n`.
///
/// # Safety
/// `pop` must be a live population handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn varest_moments_from_population(
    pop: *const VarestPopulation,
    n: usize,
    fpc: bool,
    out: *mut *mut VarestMoments,
) -> VarestStatus {
    guard(|| {
        let pop = unsafe { deref(pop, "pop") }?;
        let pm = population_moments(&pop.0, n, fpc)?;
        unsafe { write(out, Box::into_raw(Box::new(VarestMoments(pm))), "out") }
    })
}

/// # Safety
/// `summary` must be readable; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn varest_moments_from_summary(
    summary: *const VarestSummary,
    n: usize,
    fpc: bool,
    out: *mut *mut VarestMoments,
) -> VarestStatus {
    guard(|| {
        let s = unsafe { deref(summary, "summary") }?;
        let params = SummaryParams {
            N: s.population_size,
            n: None,
            S_y: s.s_y,
            S_x: s.s_x,
            C_y: s.c_y,
            C_x: s.c_x,
            rho_yx: s.rho_yx,
            C_yx: s.c_yx,
            beta2y: s.beta2y,
            beta2x: s.beta2x,
            lambda22: s.lambda22,
        };
        let pm = params.to_moments(Some(n), theta_mode(fpc))?;
        unsafe { write(out, Box::into_raw(Box::new(VarestMoments(pm))), "out") }
    })
}

/// Reads a `key = value` parameter file. `n = 0` takes the sample size from
/// the file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn varest_moments_load_params(
    path: *const c_char,
    n: usize,
    fpc: bool,
    out: *mut *mut VarestMoments,
) -> VarestStatus {
    guard(|| {
        if path.is_null() {
            return Err(Failure::Null("path"));
        }
        let path = unsafe { CStr::from_ptr(path) }
            .to_str()
            .map_err(|_| VarestError::InvalidArgument("path is not UTF-8".into()))?;
        let pm = load_summary_params(Path::new(path), (n > 0).then_some(n), theta_mode(fpc))?;
        unsafe { write(out, Box::into_raw(Box::new(VarestMoments(pm))), "out") }
    })
}

/// # Safety
/// `pm` must be null or a live moments handle.
#[no_mangle]
pub unsafe extern "C" fn varest_moments_free(pm: *mut VarestMoments) {
    if !pm.is_null() {
        drop(unsafe { Box::from_raw(pm) });
    }
}

/// # Safety
/// `pm` must be a live moments handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn varest_moments_view(pm: *const VarestMoments, out: *mut VarestMomentsView) -> VarestStatus {
    guard(|| {
        let pm = &unsafe { deref(pm, "pm") }?.0;
        let nan = f64::NAN;
        let view = VarestMomentsView {
            population_size: pm.population_size.unwrap_or(0),
            n: pm.n,
            theta: pm.theta,
            mean_y: pm.mean_y.unwrap_or(nan),
            mean_x: pm.mean_x.unwrap_or(nan),
            s2_y: pm.s2_y,
            s2_x: pm.s2_x,
            cv_y: pm.cv_y.unwrap_or(nan),
            cv_x: pm.cv_x.unwrap_or(nan),
            rho_yx: pm.rho_yx,
            lambda40: pm.lambda40,
            lambda04: pm.lambda04,
            lambda22: pm.lambda22,
            beta2y_star: pm.beta2y_star,
            beta2x_star: pm.beta2x_star,
            lambda22_star: pm.lambda22_star,
        };
        unsafe { write(out, view, "out") }
    })
}

/// Fills the free constant of `cfg` (alpha of t_k, w of t_s, alpha1 of t)
/// with its MSE-minimizing value.
///
/// # Safety
/// Pointers must be valid; `out` may alias `cfg`.
#[no_mangle]
pub unsafe extern "C" fn varest_optimal_params(
    pm: *const VarestMoments,
    cfg: *const VarestEstimatorConfig,
    out: *mut VarestEstimatorConfig,
) -> VarestStatus {
    guard(|| {
        let pm = &unsafe { deref(pm, "pm") }?.0;
        let est = unsafe { deref(cfg, "cfg") }?.to_estimator();
        let opt = optimal_params(&est, pm)?;
        unsafe { write(out, VarestEstimatorConfig::from_estimator(&opt), "out") }
    })
}

/// First-order bias. `paper_literal` drops the theta factor from the bias of t_k.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn varest_theoretical_bias(
    pm: *const VarestMoments,
    cfg: *const VarestEstimatorConfig,
    paper_literal: bool,
    out: *mut f64,
) -> VarestStatus {
    guard(|| {
        let pm = &unsafe { deref(pm, "pm") }?.0;
        let est = unsafe { deref(cfg, "cfg") }?.to_estimator();
        let opts = varest::theory::TheoryOptions { paper_literal };
        unsafe { write(out, theoretical_bias(&est, pm, opts)?, "out") }
    })
}

/// First-order mean square error.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn varest_theoretical_mse(
    pm: *const VarestMoments,
    cfg: *const VarestEstimatorConfig,
    out: *mut f64,
) -> VarestStatus {
    guard(|| {
        let pm = &unsafe { deref(pm, "pm") }?.0;
        let est = unsafe { deref(cfg, "cfg") }?.to_estimator();
        unsafe { write(out, theoretical_mse(&est, pm)?, "out") }
    })
}

/// Percent relative efficiency `100 * mse_reference / mse_candidate`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn varest_pre(mse_reference: f64, mse_candidate: f64, out: *mut f64) -> VarestStatus {
    guard(|| unsafe { write(out, pre(mse_reference, mse_candidate)?, "out") })
}

/// Evaluates one estimator on the units at `indices` (0-based).
///
/// # Safety
/// Handles must be live; `indices` must point to `len` readable values.
#[no_mangle]
pub unsafe extern "C" fn varest_estimate(
    pop: *const VarestPopulation,
    pm: *const VarestMoments,
    indices: *const usize,
    len: usize,
    cfg: *const VarestEstimatorConfig,
    clamp_nonnegative: bool,
    out: *mut f64,
) -> VarestStatus {
    guard(|| {
        let pop = &unsafe { deref(pop, "pop") }?.0;
        let pm = &unsafe { deref(pm, "pm") }?.0;
        let indices = unsafe { slice(indices, len, "indices") }?;
        let est = unsafe { deref(cfg, "cfg") }?.to_estimator();
        let stats = sample_stats(pop, indices)?;
        let e = evaluate(&est, &stats, pm, EvalOptions { clamp_nonnegative })?;
        unsafe { write(out, e.value, "out") }
    })
}

/// Monte Carlo SRSWOR evaluation; writes `count` reports to `out`.
///
/// # Safety
/// `pop` must be live; `cfgs` and `out` must each hold `count` elements.
#[no_mangle]
pub unsafe extern "C" fn varest_simulate(
    pop: *const VarestPopulation,
    n: usize,
    replications: u64,
    seed: u64,
    cfgs: *const VarestEstimatorConfig,
    count: usize,
    out: *mut VarestEmpiricalReport,
) -> VarestStatus {
    guard(|| {
        let pop = &unsafe { deref(pop, "pop") }?.0;
        let ests: Vec<Estimator> = unsafe { slice(cfgs, count, "cfgs") }?
            .iter()
            .map(|c| c.to_estimator())
            .collect();
        if count > 0 && out.is_null() {
            return Err(Failure::Null("out"));
        }
        let reports = simulate(pop, &SimulationPlan::new(n, replications, seed, ests))?;
        for (i, r) in reports.iter().enumerate() {
            // SAFETY: `out` holds `count` == reports.len() elements.
            unsafe { out.add(i).write(report_view(r, 0)) };
        }
        Ok(())
    })
}

/// Exact design moments by enumerating all samples of size `n`, refusing
/// sample spaces larger than `limit`.
///
/// # Safety
/// As for [`varest_simulate`].
#[no_mangle]
pub unsafe extern "C" fn varest_enumerate(
    pop: *const VarestPopulation,
    n: usize,
    limit: u64,
    cfgs: *const VarestEstimatorConfig,
    count: usize,
    out: *mut VarestEmpiricalReport,
) -> VarestStatus {
    guard(|| {
        let pop = &unsafe { deref(pop, "pop") }?.0;
        let ests: Vec<Estimator> = unsafe { slice(cfgs, count, "cfgs") }?
            .iter()
            .map(|c| c.to_estimator())
            .collect();
        if count > 0 && out.is_null() {
            return Err(Failure::Null("out"));
        }
        let reports = enumerate_exact(pop, n, &ests, limit, EvalOptions::default())?;
        for (i, r) in reports.iter().enumerate() {
            // SAFETY: `out` holds `count` == reports.len() elements.
            unsafe { out.add(i).write(report_view(&r.report, r.sample_space_size)) };
        }
        Ok(())
    })
}
