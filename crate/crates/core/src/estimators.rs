//! Point estimators of the population variance `S_y^2`.
//!
//! All estimators evaluate their exact closed form on a sample; the Taylor
//! expansion used for bias and MSE lives in [`crate::theory`].

use serde::{Deserialize, Serialize};

use crate::error::{Result, VarestError};
use crate::moments::{PopulationMoments, SampleStats};

/// Constants of the transformed generalized estimator
/// `t = alpha1 * s_u^2 * [S_v^2 / (alpha s_v^2 + (1 - alpha) S_v^2)]^beta - a`
/// with `s_u^2 = s_y^2 + a` and `s_v^2 = c s_x^2 + d S_x^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedParams {
    pub a: f64,
    pub c: f64,
    pub d: f64,
    pub alpha1: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl GeneralizedParams {
    /// `A = alpha c / (c + d)`, the coefficient of the relative error of
    /// `s_x^2` inside the bracket.
    pub fn expansion_coef(&self) -> Result<f64> {
        let c_plus_d = self.c + self.d;
        if c_plus_d == 0.0 {
            return Err(VarestError::ZeroDenominator("c + d"));
        }
        Ok(self.alpha * self.c / c_plus_d)
    }
}

/// Constants of the ratio-type estimator
/// `t_k = s_y^2 (a S_x^2 - b) / (alpha (a s_x^2 - b) + (1 - alpha)(a S_x^2 - b))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KhoshParams {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
}

/// Exponent of `t_s = s_y^2 [2 - (s_x^2 / S_x^2)^w]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SahaiParams {
    pub w: f64,
}

/// Source of the slope in the regression estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegressionCoef {
    /// Plug-in slope from the sample fourth moments.
    #[default]
    Sample,
    /// `lambda22* S_y^2 / (beta2x* S_x^2)` from the known population moments.
    Population,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Estimator {
    Unbiased,
    Ratio,
    Regression {
        #[serde(default)]
        coef: RegressionCoef,
    },
    Khosh(KhoshParams),
    SahaiRay(SahaiParams),
    Generalized(GeneralizedParams),
}

impl Estimator {
    pub const fn regression() -> Estimator {
        Estimator::Regression {
            coef: RegressionCoef::Sample,
        }
    }

    /// The product estimator `s_y^2 s_x^2 / S_x^2` as a member of the
    /// generalized family.
    pub const fn product() -> Estimator {
        Estimator::Generalized(GeneralizedParams {
            a: 0.0,
            c: 1.0,
            d: 0.0,
            alpha1: 1.0,
            alpha: 1.0,
            beta: -1.0,
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Estimator::Unbiased => "unbiased",
            Estimator::Ratio => "ratio",
            Estimator::Regression { .. } => "regression",
            Estimator::Khosh(_) => "t_k",
            Estimator::SahaiRay(_) => "t_s",
            Estimator::Generalized(_) => "t",
        }
    }
}

/// A point estimate with the diagnostics raised while computing it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// The raw estimate was negative.
    pub negative: bool,
    /// `|A e1| >= 1` for the generalized estimator, where the first-order
    /// expansion does not converge.
    pub expansion_invalid: bool,
    /// The value was truncated at zero.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalOptions {
    pub clamp_nonnegative: bool,
}

pub fn est_unbiased(s: &SampleStats) -> f64 {
    s.s2_y
}

pub fn est_ratio(s: &SampleStats, pm: &PopulationMoments) -> Result<f64> {
    if s.s2_x == 0.0 {
        return Err(VarestError::ZeroDenominator("s_x^2"));
    }
    Ok(s.s2_y * (pm.s2_x / s.s2_x))
}

pub fn est_regression(s: &SampleStats, pm: &PopulationMoments, coef: RegressionCoef) -> Result<f64> {
    let slope = match coef {
        RegressionCoef::Sample => s.regression_slope()?,
        RegressionCoef::Population => {
            if pm.beta2x_star == 0.0 {
                return Err(VarestError::DegenerateRegression);
            }
            pm.lambda22_star * pm.s2_y / (pm.beta2x_star * pm.s2_x)
        }
    };
    Ok(s.s2_y + slope * (pm.s2_x - s.s2_x))
}

pub fn est_khosh(s: &SampleStats, pm: &PopulationMoments, p: &KhoshParams) -> Result<f64> {
    let known = p.a * pm.s2_x - p.b;
    let observed = p.a * s.s2_x - p.b;
    let denom = p.alpha * observed + (1.0 - p.alpha) * known;
    if denom == 0.0 {
        return Err(VarestError::ZeroDenominator("t_k mixed denominator"));
    }
    Ok(s.s2_y * (known / denom))
}

pub fn est_sahai_ray(s: &SampleStats, pm: &PopulationMoments, p: &SahaiParams) -> Result<f64> {
    let ratio = s.s2_x / pm.s2_x;
    let powered = real_power(ratio, p.w)?;
    if !powered.is_finite() {
        return Err(VarestError::ZeroDenominator("s_x^2 raised to a negative power"));
    }
    Ok(s.s2_y * (2.0 - powered))
}

pub fn est_generalized(s: &SampleStats, pm: &PopulationMoments, p: &GeneralizedParams) -> Result<f64> {
    let c_plus_d = p.c + p.d;
    if c_plus_d == 0.0 {
        return Err(VarestError::ZeroDenominator("c + d"));
    }
    let su2 = s.s2_y + p.a;
    let sv2 = p.c * s.s2_x + p.d * pm.s2_x;
    let big_sv2 = c_plus_d * pm.s2_x;
    let denom = p.alpha * sv2 + (1.0 - p.alpha) * big_sv2;
    if denom == 0.0 {
        return Err(VarestError::ZeroDenominator("t mixed denominator"));
    }
    let bracket = real_power(big_sv2 / denom, p.beta)?;
    Ok(p.alpha1 * su2 * bracket - p.a)
}

/// `base^exp`, using integer powers where the exponent is integral so that
/// negative bases stay admissible.
fn real_power(base: f64, exp: f64) -> Result<f64> {
    if exp.fract() == 0.0 && exp.abs() <= i32::MAX as f64 {
        return Ok(base.powi(exp as i32));
    }
    if base <= 0.0 {
        return Err(VarestError::DomainError(format!(
            "non-integer power {exp} of non-positive base {base}"
        )));
    }
    Ok(base.powf(exp))
}

/// Evaluates any estimator on a sample and attaches diagnostics.
pub fn evaluate(est: &Estimator, s: &SampleStats, pm: &PopulationMoments, opts: EvalOptions) -> Result<Estimate> {
    let mut expansion_invalid = false;
    let raw = match est {
        Estimator::Unbiased => est_unbiased(s),
        Estimator::Ratio => est_ratio(s, pm)?,
        Estimator::Regression { coef } => est_regression(s, pm, *coef)?,
        Estimator::Khosh(p) => est_khosh(s, pm, p)?,
        Estimator::SahaiRay(p) => est_sahai_ray(s, pm, p)?,
        Estimator::Generalized(p) => {
            let e1 = s.s2_x / pm.s2_x - 1.0;
            expansion_invalid = (p.expansion_coef()? * e1).abs() >= 1.0;
            est_generalized(s, pm, p)?
        }
    };
    if !raw.is_finite() {
        return Err(VarestError::DomainError(format!(
            "{} produced a non-finite estimate",
            est.label()
        )));
    }
    let negative = raw < 0.0;
    let clamped = negative && opts.clamp_nonnegative;
    Ok(Estimate {
        value: if clamped { 0.0 } else { raw },
        negative,
        expansion_invalid,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{population_moments, sample_stats, CentralMoments, Population};

    fn stats(s2_y: f64, s2_x: f64) -> SampleStats {
        SampleStats {
            n: 2,
            s2_y,
            s2_x,
            lambda22_hat: None,
            lambda04_hat: None,
            central: CentralMoments::default(),
        }
    }

    fn toy_pm() -> PopulationMoments {
        let pop = Population::new(vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 4.0, 6.0, 8.0]).unwrap();
        population_moments(&pop, 2, false).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn unbiased_is_the_sample_variance() {
        assert_eq!(est_unbiased(&stats(4.5, 1.0)), 4.5);
        assert_eq!(est_unbiased(&stats(0.0, 1.0)), 0.0);
        let pop = Population::new(vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 4.0, 6.0, 8.0]).unwrap();
        let full = sample_stats(&pop, &[0, 1, 2, 3]).unwrap();
        assert!(rel(est_unbiased(&full), 5.0 / 3.0) < 1e-15);
    }

    #[test]
    fn ratio_estimator() {
        let pm = toy_pm();
        let t = est_ratio(&stats(4.5, 18.0), &pm).unwrap();
        assert!(rel(t, 5.0 / 3.0) < 1e-15);
        assert_eq!(est_ratio(&stats(4.5, pm.s2_x), &pm).unwrap(), 4.5);
        assert!(matches!(
            est_ratio(&stats(4.5, 0.0), &pm),
            Err(VarestError::ZeroDenominator(_))
        ));
    }

    #[test]
    fn regression_estimator() {
        let pm = toy_pm();
        let pop = Population::new(vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 4.0, 6.0, 8.0]).unwrap();
        let full = sample_stats(&pop, &[0, 1, 2, 3]).unwrap();
        let reg = est_regression(&full, &pm, RegressionCoef::Sample).unwrap();
        let ratio = est_ratio(&full, &pm).unwrap();
        assert!(rel(reg, ratio) < 0.05);
        assert_eq!(reg, full.s2_y);

        let constant_x = SampleStats::from_values(&[1.0, 2.0, 5.0], &[3.0, 3.0, 3.0]).unwrap();
        assert!(matches!(
            est_regression(&constant_x, &pm, RegressionCoef::Sample),
            Err(VarestError::DegenerateRegression)
        ));
        // Population slope for x = 2y: lambda22* S_y^2 / (beta2x* S_x^2) = 1/4
        let t = est_regression(&stats(4.5, 18.0), &pm, RegressionCoef::Population).unwrap();
        assert!(rel(t, 4.5 + 0.25 * (20.0 / 3.0 - 18.0)) < 1e-14);
    }

    #[test]
    fn khosh_estimator() {
        let pm = toy_pm();
        let s = stats(4.5, 18.0);
        let zero = KhoshParams {
            a: 1.0,
            b: 1.0,
            alpha: 0.0,
        };
        assert_eq!(est_khosh(&s, &pm, &zero).unwrap(), 4.5);
        let isaki = KhoshParams {
            a: 1.0,
            b: 0.0,
            alpha: 1.0,
        };
        assert_eq!(est_khosh(&s, &pm, &isaki).unwrap(), est_ratio(&s, &pm).unwrap());
        let half = KhoshParams {
            a: 1.0,
            b: 1.0,
            alpha: 0.5,
        };
        assert!(rel(est_khosh(&s, &pm, &half).unwrap(), 2.25) < 1e-14);
        // a S_x^2 - b = 0 with alpha = 0
        let vanishing = KhoshParams {
            a: 3.0,
            b: 20.0,
            alpha: 0.0,
        };
        assert!(matches!(
            est_khosh(&s, &pm, &vanishing),
            Err(VarestError::ZeroDenominator(_))
        ));
    }

    #[test]
    fn sahai_ray_estimator() {
        let pm = toy_pm();
        let s = stats(4.5, 18.0);
        assert_eq!(est_sahai_ray(&s, &pm, &SahaiParams { w: 0.0 }).unwrap(), 4.5);
        assert_eq!(
            est_sahai_ray(&stats(4.5, pm.s2_x), &pm, &SahaiParams { w: 0.37 }).unwrap(),
            4.5
        );
        let t = est_sahai_ray(&s, &pm, &SahaiParams { w: 1.0 }).unwrap();
        assert!(rel(t, -3.15) < 1e-14);
        let est = evaluate(
            &Estimator::SahaiRay(SahaiParams { w: 1.0 }),
            &s,
            &pm,
            EvalOptions::default(),
        )
        .unwrap();
        assert!(est.negative && !est.clamped);
        let clamped = evaluate(
            &Estimator::SahaiRay(SahaiParams { w: 1.0 }),
            &s,
            &pm,
            EvalOptions {
                clamp_nonnegative: true,
            },
        )
        .unwrap();
        assert_eq!(clamped.value, 0.0);
        assert!(clamped.negative && clamped.clamped);
    }

    #[test]
    fn sahai_ray_domain() {
        let pm = toy_pm();
        assert!(matches!(
            est_sahai_ray(&stats(4.5, 0.0), &pm, &SahaiParams { w: 0.5 }),
            Err(VarestError::DomainError(_))
        ));
        assert!(est_sahai_ray(&stats(4.5, 0.0), &pm, &SahaiParams { w: 2.0 }).is_ok());
        assert!(est_sahai_ray(&stats(4.5, 0.0), &pm, &SahaiParams { w: -1.0 }).is_err());
    }

    #[test]
    fn generalized_reductions() {
        let pm = toy_pm();
        let s = stats(4.5, 18.0);
        let unbiased = GeneralizedParams {
            a: 0.0,
            c: 2.5,
            d: -0.7,
            alpha1: 1.0,
            alpha: 0.3,
            beta: 0.0,
        };
        assert_eq!(est_generalized(&s, &pm, &unbiased).unwrap(), 4.5);
        let ratio = GeneralizedParams {
            a: 0.0,
            c: 1.0,
            d: 0.0,
            alpha1: 1.0,
            alpha: 1.0,
            beta: 1.0,
        };
        assert_eq!(est_generalized(&s, &pm, &ratio).unwrap(), est_ratio(&s, &pm).unwrap());
        let Estimator::Generalized(product) = Estimator::product() else {
            unreachable!()
        };
        let t = est_generalized(&s, &pm, &product).unwrap();
        assert!(rel(t, 4.5 * 18.0 / (20.0 / 3.0)) < 1e-14);
    }

    #[test]
    fn generalized_errors() {
        let pm = toy_pm();
        let s = stats(4.5, 18.0);
        let cd_zero = GeneralizedParams {
            a: 0.0,
            c: 1.0,
            d: -1.0,
            alpha1: 1.0,
            alpha: 1.0,
            beta: 1.0,
        };
        assert!(matches!(
            est_generalized(&s, &pm, &cd_zero),
            Err(VarestError::ZeroDenominator("c + d"))
        ));
        // alpha s_v^2 + (1 - alpha) S_v^2 = 18 alpha + (1 - alpha) 20/3 = 0
        let alpha = -(20.0 / 3.0) / (18.0 - 20.0 / 3.0);
        let vanishing = GeneralizedParams {
            a: 0.0,
            c: 1.0,
            d: 0.0,
            alpha1: 1.0,
            alpha,
            beta: 1.0,
        };
        let r = est_generalized(&s, &pm, &vanishing);
        assert!(matches!(r, Err(VarestError::ZeroDenominator(_))) || !r.unwrap().is_finite());
        let negative_base = GeneralizedParams {
            a: 0.0,
            c: 1.0,
            d: 0.0,
            alpha1: 1.0,
            alpha: -1.0,
            beta: 0.5,
        };
        assert!(matches!(
            est_generalized(&s, &pm, &negative_base),
            Err(VarestError::DomainError(_))
        ));
    }

    #[test]
    fn generalized_is_continuous_in_its_constants() {
        let pm = toy_pm();
        let s = stats(4.5, 18.0);
        let p = GeneralizedParams {
            a: 0.7,
            c: 1.3,
            d: 0.4,
            alpha1: 0.9,
            alpha: 0.6,
            beta: 1.4,
        };
        let base = est_generalized(&s, &pm, &p).unwrap();
        for eps in [1e-3, 1e-5, 1e-7] {
            let nudges = [
                GeneralizedParams { a: p.a + eps, ..p },
                GeneralizedParams { c: p.c + eps, ..p },
                GeneralizedParams { d: p.d + eps, ..p },
                GeneralizedParams {
                    alpha1: p.alpha1 + eps,
                    ..p
                },
                GeneralizedParams {
                    alpha: p.alpha + eps,
                    ..p
                },
                GeneralizedParams {
                    beta: p.beta + eps,
                    ..p
                },
            ];
            for q in nudges {
                let moved = est_generalized(&s, &pm, &q).unwrap();
                assert!((moved - base).abs() < 1e3 * eps, "eps {eps}: {moved} vs {base}");
            }
        }
    }

    #[test]
    fn expansion_validity_is_advisory() {
        let pm = toy_pm();
        // e1 = 18 / (20/3) - 1 = 1.7, A = 1
        let p = GeneralizedParams {
            a: 0.0,
            c: 1.0,
            d: 0.0,
            alpha1: 1.0,
            alpha: 1.0,
            beta: 1.0,
        };
        let est = evaluate(
            &Estimator::Generalized(p),
            &stats(4.5, 18.0),
            &pm,
            EvalOptions::default(),
        )
        .unwrap();
        assert!(est.expansion_invalid);
        assert!(est.value > 0.0);
    }

    #[test]
    fn estimator_config_serializes_with_kind_tag() {
        let json = serde_json::to_string(&Estimator::SahaiRay(SahaiParams { w: 0.5 })).unwrap();
        assert_eq!(json, r#"{"kind":"sahai-ray","w":0.5}"#);
        let back: Estimator = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Estimator::SahaiRay(SahaiParams { w: 0.5 }));
        let reg: Estimator = serde_json::from_str(r#"{"kind":"regression"}"#).unwrap();
        assert_eq!(reg, Estimator::regression());
    }
}
