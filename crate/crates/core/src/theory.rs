//! First-order bias and mean square error of the estimators, their optimal
//! constants, and percent relative efficiency.
//!
//! Every formula is linear in `theta`, taken from [`PopulationMoments`], so the
//! same code serves the `1/n` convention and the finite-population-corrected
//! `1/n - 1/N`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VarestError};
use crate::estimators::{Estimator, GeneralizedParams, KhoshParams, SahaiParams};
use crate::moments::PopulationMoments;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TheoryOptions {
    /// Use the `theta`-free bias of `t_k` exactly as commonly printed, instead
    /// of the first-order bias which carries `theta` like its siblings.
    pub paper_literal: bool,
}

/// Intermediate quantities of the generalized estimator's first-order theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedDerived {
    /// `A = alpha c / (c + d)`.
    pub a_coef: f64,
    /// Second-order coefficient of `(1 + A e1)^(-beta)`, `beta (beta + 1) A^2 / 2`.
    pub b_coef: f64,
    pub q1: f64,
    pub q2: f64,
    pub alpha1_opt: f64,
}

pub fn generalized_derived(p: &GeneralizedParams, pm: &PopulationMoments) -> Result<GeneralizedDerived> {
    let a_coef = p.expansion_coef()?;
    let b_coef = p.beta * (p.beta + 1.0) * a_coef * a_coef / 2.0;
    let shifted = pm.s2_y + p.a;
    let k = shifted * shifted;
    let beta_a = p.beta * a_coef;
    let q1 = pm.theta
        * (pm.s4_y() * pm.beta2y_star + pm.beta2x_star * (beta_a * beta_a * k + 2.0 * b_coef * k)
            - 4.0 * beta_a * pm.s2_y * shifted * pm.lambda22_star);
    let q2 = pm.theta * (b_coef * k * pm.beta2x_star - pm.s2_y * shifted * beta_a * pm.lambda22_star);
    let alpha1_denom = q1 + k;
    if alpha1_denom == 0.0 {
        return Err(VarestError::ZeroDenominator("Q1 + (S_y^2 + a)^2"));
    }
    Ok(GeneralizedDerived {
        a_coef,
        b_coef,
        q1,
        q2,
        alpha1_opt: (q2 + k) / alpha1_denom,
    })
}

/// `gamma = a S_x^2 / (a S_x^2 - b)`.
pub fn khosh_gamma(pm: &PopulationMoments, a: f64, b: f64) -> Result<f64> {
    let known = a * pm.s2_x;
    let denom = known - b;
    if denom == 0.0 {
        return Err(VarestError::ZeroDenominator("gamma: a S_x^2 - b"));
    }
    Ok(known / denom)
}

pub fn theoretical_bias(est: &Estimator, pm: &PopulationMoments, opts: TheoryOptions) -> Result<f64> {
    let bias = match est {
        Estimator::Unbiased | Estimator::Regression { .. } => 0.0,
        Estimator::Ratio => pm.theta * pm.s2_y * (pm.beta2x_star - pm.lambda22_star),
        Estimator::Khosh(p) => {
            let ag = p.alpha * khosh_gamma(pm, p.a, p.b)?;
            let factor = if opts.paper_literal { 1.0 } else { pm.theta };
            factor * pm.s2_y * (ag * ag * pm.beta2x_star - ag * pm.lambda22_star)
        }
        Estimator::SahaiRay(SahaiParams { w }) => {
            pm.theta * pm.s2_y * (w * (w - 1.0) / 2.0 * pm.beta2x_star - w * pm.lambda22_star)
        }
        Estimator::Generalized(p) => {
            let g = generalized_derived(p, pm)?;
            let shifted = pm.s2_y + p.a;
            (p.alpha1 - 1.0) * shifted + g.b_coef * p.alpha1 * shifted * pm.theta * pm.beta2x_star
                - p.beta * g.a_coef * pm.s2_y * p.alpha1 * pm.theta * pm.lambda22_star
        }
    };
    Ok(bias)
}

pub fn theoretical_mse(est: &Estimator, pm: &PopulationMoments) -> Result<f64> {
    let lead = pm.theta * pm.s4_y();
    let mse = match est {
        Estimator::Unbiased => lead * pm.beta2y_star,
        Estimator::Ratio => lead * (pm.beta2y_star + pm.beta2x_star - 2.0 * pm.lambda22_star),
        Estimator::Regression { .. } => {
            if pm.beta2y_star <= 0.0 || pm.beta2x_star <= 0.0 {
                return Err(VarestError::DomainError(
                    "regression MSE needs positive beta2y* and beta2x*".into(),
                ));
            }
            let l = pm.lambda22_star;
            lead * pm.beta2y_star * (1.0 - l * l / (pm.beta2y_star * pm.beta2x_star))
        }
        Estimator::Khosh(p) => {
            let ag = p.alpha * khosh_gamma(pm, p.a, p.b)?;
            lead * (pm.beta2y_star + ag * ag * pm.beta2x_star - 2.0 * ag * pm.lambda22_star)
        }
        Estimator::SahaiRay(SahaiParams { w }) => {
            lead * (pm.beta2y_star + w * w * pm.beta2x_star - 2.0 * w * pm.lambda22_star)
        }
        Estimator::Generalized(p) => {
            let g = generalized_derived(p, pm)?;
            let shifted = pm.s2_y + p.a;
            let mse = (p.alpha1 - 1.0).powi(2) * shifted * shifted + p.alpha1 * p.alpha1 * g.q1 - 2.0 * p.alpha1 * g.q2;
            if mse < 0.0 {
                return Err(VarestError::DomainError(format!(
                    "first-order MSE of t is negative ({mse}) for these constants"
                )));
            }
            mse
        }
    };
    Ok(mse)
}

/// Returns `est` with its free constant replaced by the MSE-minimizing value:
/// `alpha` for `t_k`, `w` for `t_s`, `alpha1` for `t`. Other estimators are
/// returned unchanged.
pub fn optimal_params(est: &Estimator, pm: &PopulationMoments) -> Result<Estimator> {
    Ok(match est {
        Estimator::Khosh(p) => {
            let gamma = khosh_gamma(pm, p.a, p.b)?;
            let denom = gamma * pm.beta2x_star;
            if denom == 0.0 {
                return Err(VarestError::ZeroDenominator("gamma beta2x*"));
            }
            Estimator::Khosh(KhoshParams {
                alpha: pm.lambda22_star / denom,
                ..*p
            })
        }
        Estimator::SahaiRay(_) => {
            if pm.beta2x_star == 0.0 {
                return Err(VarestError::ZeroDenominator("beta2x*"));
            }
            Estimator::SahaiRay(SahaiParams {
                w: pm.lambda22_star / pm.beta2x_star,
            })
        }
        Estimator::Generalized(p) => {
            let g = generalized_derived(p, pm)?;
            Estimator::Generalized(GeneralizedParams {
                alpha1: g.alpha1_opt,
                ..*p
            })
        }
        other => *other,
    })
}

/// Percent relative efficiency `100 * mse_reference / mse_candidate`.
pub fn pre(mse_reference: f64, mse_candidate: f64) -> Result<f64> {
    if mse_candidate <= 0.0 {
        return Err(VarestError::ZeroDenominator("PRE candidate MSE"));
    }
    Ok(100.0 * mse_reference / mse_candidate)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub estimator: Estimator,
    pub bias: f64,
    pub mse: f64,
    pub pre: f64,
}

/// First-order bias, MSE and PRE (relative to the unbiased estimator) for
/// each estimator, with constants used as given.
pub fn theory_reports(
    estimators: &[Estimator],
    pm: &PopulationMoments,
    opts: TheoryOptions,
) -> Result<Vec<TheoryReport>> {
    let reference = theoretical_mse(&Estimator::Unbiased, pm)?;
    estimators
        .iter()
        .map(|est| {
            let mse = theoretical_mse(est, pm)?;
            Ok(TheoryReport {
                estimator: *est,
                bias: theoretical_bias(est, pm, opts)?,
                mse,
                pre: pre(reference, mse)?,
            })
        })
        .collect()
}
