//! Named estimator configurations and a compact text syntax for custom ones.

use std::str::FromStr;

use crate::error::{Result, VarestError};
use crate::estimators::{Estimator, GeneralizedParams, KhoshParams, RegressionCoef, SahaiParams};
use crate::moments::PopulationMoments;
use crate::theory::optimal_params;

/// `d` used by the published configuration of the generalized estimator.
pub const PAPER_D: f64 = 0.9742;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// `t_k` with a = 1, b = 1 and the optimal alpha.
    PaperTk,
    /// `t_s` with the optimal w.
    PaperTs,
    /// `t` with a = c = C_x, d = 0.9742, alpha = beta = 1, optimal alpha1.
    PaperTCx,
    /// `t` with a = C_x, c = 1, d = 0.9742, alpha = beta = 1, optimal alpha1.
    PaperTBx,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::PaperTk => "t_k",
            Preset::PaperTs => "t_s",
            Preset::PaperTCx => "t",
            Preset::PaperTBx => "t[c=1]",
        }
    }

    pub fn resolve(&self, pm: &PopulationMoments) -> Result<Estimator> {
        let cv_x = || {
            pm.cv_x
                .ok_or_else(|| VarestError::DomainError("preset needs C_x, which is undefined when mean_x = 0".into()))
        };
        let template = match self {
            Preset::PaperTk => Estimator::Khosh(KhoshParams {
                a: 1.0,
                b: 1.0,
                alpha: 0.0,
            }),
            Preset::PaperTs => Estimator::SahaiRay(SahaiParams { w: 0.0 }),
            Preset::PaperTCx => Estimator::Generalized(GeneralizedParams {
                a: cv_x()?,
                c: cv_x()?,
                d: PAPER_D,
                alpha1: 1.0,
                alpha: 1.0,
                beta: 1.0,
            }),
            Preset::PaperTBx => Estimator::Generalized(GeneralizedParams {
                a: cv_x()?,
                c: 1.0,
                d: PAPER_D,
                alpha1: 1.0,
                alpha: 1.0,
                beta: 1.0,
            }),
        };
        optimal_params(&template, pm)
    }
}

/// An estimator named on the command line, e.g. `ratio`,
/// `khosh:a=1,b=1,alpha=opt`, `sahai:w=0.8` or
/// `gen:a=0,c=1,d=0,alpha1=1,alpha=1,beta=-1`.
///
/// The free constant (`alpha` of `khosh`, `w` of `sahai`, `alpha1` of `gen`)
/// may be `opt`, in which case it is filled in from the population moments.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSpec {
    pub name: String,
    template: Estimator,
    optimize: bool,
}

impl EstimatorSpec {
    pub fn fixed(name: &str, est: Estimator) -> Self {
        EstimatorSpec {
            name: name.to_string(),
            template: est,
            optimize: false,
        }
    }

    pub fn resolve(&self, pm: &PopulationMoments) -> Result<Estimator> {
        if self.optimize {
            optimal_params(&self.template, pm)
        } else {
            Ok(self.template)
        }
    }
}

impl FromStr for EstimatorSpec {
    type Err = VarestError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| VarestError::InvalidArgument(format!("estimator \"{s}\": {msg}"));
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let mut pairs: Vec<(&str, &str)> = Vec::new();
        for part in args.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got {part:?}")))?;
            pairs.push((k.trim(), v.trim()));
        }
        let mut optimize = false;
        let mut take = |key: &str, default: Option<f64>, free: bool| -> Result<f64> {
            match pairs.iter().position(|(k, _)| *k == key) {
                Some(i) => {
                    let (_, v) = pairs.remove(i);
                    if free && v == "opt" {
                        optimize = true;
                        return Ok(0.0);
                    }
                    v.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| bad(format!("{key}: cannot parse {v:?}")))
                }
                None if free => {
                    optimize = true;
                    Ok(0.0)
                }
                None => default.ok_or_else(|| bad(format!("missing {key}"))),
            }
        };
        let template = match kind.trim() {
            "unbiased" => Estimator::Unbiased,
            "ratio" => Estimator::Ratio,
            "regression" => Estimator::regression(),
            "regression-pop" => Estimator::Regression {
                coef: RegressionCoef::Population,
            },
            "product" => Estimator::product(),
            "khosh" | "t_k" => Estimator::Khosh(KhoshParams {
                a: take("a", Some(1.0), false)?,
                b: take("b", Some(1.0), false)?,
                alpha: take("alpha", None, true)?,
            }),
            "sahai" | "t_s" => Estimator::SahaiRay(SahaiParams {
                w: take("w", None, true)?,
            }),
            "gen" | "t" => Estimator::Generalized(GeneralizedParams {
                a: take("a", Some(0.0), false)?,
                c: take("c", Some(1.0), false)?,
                d: take("d", Some(0.0), false)?,
                alpha1: take("alpha1", None, true)?,
                alpha: take("alpha", Some(1.0), false)?,
                beta: take("beta", Some(1.0), false)?,
            }),
            other => return Err(bad(format!("unknown estimator kind {other:?}"))),
        };
        if let Some((k, _)) = pairs.first() {
            return Err(bad(format!("unexpected parameter {k:?}")));
        }
        Ok(EstimatorSpec {
            name: s.to_string(),
            template,
            optimize,
        })
    }
}

/// The six rows of the standard comparison: unbiased, ratio, regression and
/// the three tuned estimators. `t_presets` chooses the generalized rows;
/// empty means [`Preset::PaperTCx`].
pub fn default_specs(pm: &PopulationMoments, t_presets: &[Preset]) -> Result<Vec<(String, Estimator)>> {
    let mut rows = vec![
        ("unbiased".to_string(), Estimator::Unbiased),
        ("ratio".to_string(), Estimator::Ratio),
        ("regression".to_string(), Estimator::regression()),
    ];
    for preset in [Preset::PaperTk, Preset::PaperTs] {
        rows.push((preset.name().to_string(), preset.resolve(pm)?));
    }
    let mut generalized: Vec<Preset> = t_presets
        .iter()
        .copied()
        .filter(|p| matches!(p, Preset::PaperTCx | Preset::PaperTBx))
        .collect();
    if generalized.is_empty() {
        generalized.push(Preset::PaperTCx);
    }
    generalized.dedup();
    for preset in generalized {
        rows.push((preset.name().to_string(), preset.resolve(pm)?));
    }
    Ok(rows)
}
