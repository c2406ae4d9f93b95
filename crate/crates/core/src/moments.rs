//! Population and sample moment computations.
//!
//! Bivariate central moments use the `1/N` divisor, so that `lambda40` is the
//! ordinary kurtosis of `y`. Variances use `N - 1` (population) and `n - 1`
//! (sample).

use serde::{Deserialize, Serialize};

use crate::error::{Result, VarestError, Variate};

/// A finite population of paired study (`y`) and auxiliary (`x`) values.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    y: Vec<f64>,
    x: Vec<f64>,
}

impl Population {
    pub fn new(y: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        if y.len() != x.len() {
            return Err(VarestError::InvalidPopulation(format!(
                "y has {} values but x has {}",
                y.len(),
                x.len()
            )));
        }
        if y.len() < 2 {
            return Err(VarestError::InvalidPopulation(format!(
                "at least 2 units are required, got {}",
                y.len()
            )));
        }
        if let Some(i) = y.iter().chain(x.iter()).position(|v| !v.is_finite()) {
            let unit = i % y.len();
            return Err(VarestError::InvalidPopulation(format!(
                "non-finite value for unit {}",
                unit + 1
            )));
        }
        Ok(Population { y, x })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Multiplies each variate by a constant.
    pub fn scaled(&self, k_y: f64, k_x: f64) -> Result<Population> {
        Population::new(
            self.y.iter().map(|v| v * k_y).collect(),
            self.x.iter().map(|v| v * k_x).collect(),
        )
    }
}

/// Central moments `m_pq = (1/k) * sum (y - ybar)^p (x - xbar)^q` of a set of
/// paired values, for the orders the estimators and theory need.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CentralMoments {
    pub count: usize,
    pub mean_y: f64,
    pub mean_x: f64,
    pub m20: f64,
    pub m02: f64,
    pub m11: f64,
    pub m40: f64,
    pub m04: f64,
    pub m22: f64,
}

impl CentralMoments {
    pub fn from_pairs(y: &[f64], x: &[f64]) -> CentralMoments {
        debug_assert_eq!(y.len(), x.len());
        let k = y.len();
        if k == 0 {
            return CentralMoments::default();
        }
        let kf = k as f64;
        // Shift by the first value so that constant data give exactly zero
        // deviations.
        let (y0, x0) = (y[0], x[0]);
        let (mut sy, mut sx) = (0.0, 0.0);
        for (&yi, &xi) in y.iter().zip(x) {
            sy += yi - y0;
            sx += xi - x0;
        }
        let (shift_y, shift_x) = (sy / kf, sx / kf);

        let mut m = CentralMoments {
            count: k,
            mean_y: y0 + shift_y,
            mean_x: x0 + shift_x,
            ..CentralMoments::default()
        };
        for (&yi, &xi) in y.iter().zip(x) {
            let dy = (yi - y0) - shift_y;
            let dx = (xi - x0) - shift_x;
            let dy2 = dy * dy;
            let dx2 = dx * dx;
            m.m20 += dy2;
            m.m02 += dx2;
            m.m11 += dy * dx;
            m.m40 += dy2 * dy2;
            m.m04 += dx2 * dx2;
            m.m22 += dy2 * dx2;
        }
        m.m20 /= kf;
        m.m02 /= kf;
        m.m11 /= kf;
        m.m40 /= kf;
        m.m04 /= kf;
        m.m22 /= kf;
        m
    }

    /// Variance of `y` with the `k - 1` divisor.
    pub fn var_y(&self) -> f64 {
        self.m20 * self.count as f64 / (self.count as f64 - 1.0)
    }

    pub fn var_x(&self) -> f64 {
        self.m02 * self.count as f64 / (self.count as f64 - 1.0)
    }

    /// `lambda40 = m40 / m20^2`, `None` if `y` is constant.
    pub fn lambda40(&self) -> Option<f64> {
        (self.m20 > 0.0).then(|| self.m40 / (self.m20 * self.m20))
    }

    pub fn lambda04(&self) -> Option<f64> {
        (self.m02 > 0.0).then(|| self.m04 / (self.m02 * self.m02))
    }

    pub fn lambda22(&self) -> Option<f64> {
        (self.m20 > 0.0 && self.m02 > 0.0).then(|| self.m22 / (self.m20 * self.m02))
    }
}

fn general_central_moment(y: &[f64], x: &[f64], p: u32, q: u32) -> f64 {
    let k = y.len() as f64;
    let mean_y = y.iter().sum::<f64>() / k;
    let mean_x = x.iter().sum::<f64>() / k;
    y.iter()
        .zip(x)
        .map(|(&yi, &xi)| (yi - mean_y).powi(p as i32) * (xi - mean_x).powi(q as i32))
        .sum::<f64>()
        / k
}

/// Standardized moment ratio `lambda_pq = mu_pq / (mu20^(p/2) * mu02^(q/2))`.
pub fn central_moment_ratio(pop: &Population, p: u32, q: u32) -> Result<f64> {
    moment_ratio_of_pairs(pop.y(), pop.x(), p, q)
}

pub(crate) fn moment_ratio_of_pairs(y: &[f64], x: &[f64], p: u32, q: u32) -> Result<f64> {
    if (p + q) % 2 == 1 || p + q < 2 {
        return Err(VarestError::InvalidOrder { p, q });
    }
    let base = CentralMoments::from_pairs(y, x);
    if p > 0 && base.m20 <= 0.0 {
        return Err(VarestError::DegenerateVariate(Variate::Y));
    }
    if q > 0 && base.m02 <= 0.0 {
        return Err(VarestError::DegenerateVariate(Variate::X));
    }
    let mu = match (p, q) {
        (2, 0) => base.m20,
        (0, 2) => base.m02,
        (1, 1) => base.m11,
        (4, 0) => base.m40,
        (0, 4) => base.m04,
        (2, 2) => base.m22,
        _ => general_central_moment(y, x, p, q),
    };
    let sd_y = base.m20.sqrt();
    let sd_x = base.m02.sqrt();
    Ok(mu / (sd_y.powi(p as i32) * sd_x.powi(q as i32)))
}

/// How the sampling factor `theta` is formed from `n` (and `N`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaMode {
    /// `theta = 1/n`, finite population correction neglected.
    #[default]
    NoFpc,
    /// `theta = 1/n - 1/N`.
    Fpc,
}

pub fn theta(n: usize, population_size: Option<usize>, mode: ThetaMode) -> Result<f64> {
    match (mode, population_size) {
        (ThetaMode::NoFpc, _) => Ok(1.0 / n as f64),
        (ThetaMode::Fpc, Some(big_n)) => Ok(1.0 / n as f64 - 1.0 / big_n as f64),
        (ThetaMode::Fpc, None) => Err(VarestError::InvalidArgument(
            "finite population correction requires the population size N".into(),
        )),
    }
}

/// Every population-level scalar the estimators and first-order theory use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationMoments {
    pub population_size: Option<usize>,
    pub n: usize,
    pub theta_mode: ThetaMode,
    pub theta: f64,
    pub mean_y: Option<f64>,
    pub mean_x: Option<f64>,
    pub s2_y: f64,
    pub s2_x: f64,
    pub cv_y: Option<f64>,
    pub cv_x: Option<f64>,
    pub rho_yx: f64,
    /// `rho_yx * C_y * C_x`; informational only.
    pub c_yx: Option<f64>,
    pub lambda40: f64,
    pub lambda04: f64,
    pub lambda22: f64,
    pub beta2y_star: f64,
    pub beta2x_star: f64,
    pub lambda22_star: f64,
}

impl PopulationMoments {
    /// Assembles moments from the standardized ratios, deriving the starred
    /// quantities.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        population_size: Option<usize>,
        n: usize,
        theta_mode: ThetaMode,
        s2_y: f64,
        s2_x: f64,
        lambda40: f64,
        lambda04: f64,
        lambda22: f64,
    ) -> Result<Self> {
        check_sample_size(n, population_size)?;
        if s2_y <= 0.0 {
            return Err(VarestError::DegenerateVariate(Variate::Y));
        }
        if s2_x <= 0.0 {
            return Err(VarestError::DegenerateVariate(Variate::X));
        }
        Ok(PopulationMoments {
            population_size,
            n,
            theta_mode,
            theta: theta(n, population_size, theta_mode)?,
            mean_y: None,
            mean_x: None,
            s2_y,
            s2_x,
            cv_y: None,
            cv_x: None,
            rho_yx: f64::NAN,
            c_yx: None,
            lambda40,
            lambda04,
            lambda22,
            beta2y_star: lambda40 - 1.0,
            beta2x_star: lambda04 - 1.0,
            lambda22_star: lambda22 - 1.0,
        })
    }

    /// Same population, different sample size or `theta` convention.
    pub fn at_sample_size(&self, n: usize, theta_mode: ThetaMode) -> Result<Self> {
        check_sample_size(n, self.population_size)?;
        Ok(PopulationMoments {
            n,
            theta_mode,
            theta: theta(n, self.population_size, theta_mode)?,
            ..self.clone()
        })
    }

    pub fn s4_y(&self) -> f64 {
        self.s2_y * self.s2_y
    }
}

fn check_sample_size(n: usize, population_size: Option<usize>) -> Result<()> {
    let too_big = population_size.is_some_and(|big_n| n > big_n);
    if n < 2 || too_big {
        return Err(VarestError::InvalidSize {
            n,
            population_size: population_size.unwrap_or(0),
        });
    }
    Ok(())
}

pub fn population_moments(pop: &Population, n: usize, use_fpc: bool) -> Result<PopulationMoments> {
    let big_n = pop.len();
    let m = CentralMoments::from_pairs(pop.y(), pop.x());
    if m.m20 <= 0.0 {
        return Err(VarestError::DegenerateVariate(Variate::Y));
    }
    if m.m02 <= 0.0 {
        return Err(VarestError::DegenerateVariate(Variate::X));
    }
    let mode = if use_fpc { ThetaMode::Fpc } else { ThetaMode::NoFpc };
    let mut pm = PopulationMoments::from_parts(
        Some(big_n),
        n,
        mode,
        m.var_y(),
        m.var_x(),
        m.m40 / (m.m20 * m.m20),
        m.m04 / (m.m02 * m.m02),
        m.m22 / (m.m20 * m.m02),
    )?;
    let cv = |var: f64, mean: f64| (mean != 0.0).then(|| var.sqrt() / mean);
    pm.mean_y = Some(m.mean_y);
    pm.mean_x = Some(m.mean_x);
    pm.cv_y = cv(pm.s2_y, m.mean_y);
    pm.cv_x = cv(pm.s2_x, m.mean_x);
    pm.rho_yx = m.m11 / (m.m20 * m.m02).sqrt();
    pm.c_yx = pm.cv_y.zip(pm.cv_x).map(|(cy, cx)| pm.rho_yx * cy * cx);
    Ok(pm)
}

/// Per-sample statistics consumed by the point estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    pub s2_y: f64,
    pub s2_x: f64,
    pub lambda22_hat: Option<f64>,
    pub lambda04_hat: Option<f64>,
    pub central: CentralMoments,
}

impl SampleStats {
    /// Statistics of the sampled `(y, x)` values.
    pub fn from_values(y: &[f64], x: &[f64]) -> Result<SampleStats> {
        if y.len() < 2 {
            return Err(VarestError::TooSmall(y.len()));
        }
        let central = CentralMoments::from_pairs(y, x);
        Ok(SampleStats {
            n: y.len(),
            s2_y: central.var_y(),
            s2_x: central.var_x(),
            lambda22_hat: central.lambda22(),
            lambda04_hat: central.lambda04(),
            central,
        })
    }

    /// Sample slope of `(y - ybar)^2` on `(x - xbar)^2`, which equals
    /// `(lambda22_hat - 1) s2_y / ((lambda04_hat - 1) s2_x)`.
    pub fn regression_slope(&self) -> Result<f64> {
        let c = &self.central;
        let spread = c.m04 - c.m02 * c.m02;
        // Two-point samples have lambda04_hat == 1 analytically; rounding
        // leaves a residue of order eps * m02^2.
        if c.m02 <= 0.0 || spread <= 1e-12 * c.m02 * c.m02 {
            return Err(VarestError::DegenerateRegression);
        }
        Ok((c.m22 - c.m20 * c.m02) / spread)
    }
}

/// Statistics of the units at the given 0-based indices.
pub fn sample_stats(pop: &Population, indices: &[usize]) -> Result<SampleStats> {
    if indices.len() < 2 {
        return Err(VarestError::TooSmall(indices.len()));
    }
    let big_n = pop.len();
    let mut seen = vec![false; big_n];
    for &i in indices {
        if i >= big_n || seen[i] {
            return Err(VarestError::BadIndex {
                index: i,
                population_size: big_n,
            });
        }
        seen[i] = true;
    }
    let y: Vec<f64> = indices.iter().map(|&i| pop.y()[i]).collect();
    let x: Vec<f64> = indices.iter().map(|&i| pop.x()[i]).collect();
    SampleStats::from_values(&y, &x)
}
