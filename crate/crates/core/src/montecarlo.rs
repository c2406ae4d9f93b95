//! Empirical checks of the theory under simple random sampling without
//! replacement: seeded Monte Carlo and exhaustive enumeration of all samples.
//!
//! Both drivers split the work into fixed-size blocks, summarize each block
//! with compensated sums, and merge block summaries in block order. The
//! output therefore does not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VarestError};
use crate::estimators::{evaluate, Estimator, EvalOptions};
use crate::moments::{population_moments, Population, PopulationMoments, SampleStats};

/// Replications (or enumerated subsets) per work block.
const BLOCK: u64 = 2048;

pub const DEFAULT_ENUMERATION_LIMIT: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub n: usize,
    pub replications: u64,
    pub seed: u64,
    pub estimators: Vec<Estimator>,
    pub options: EvalOptions,
}

impl SimulationPlan {
    pub fn new(n: usize, replications: u64, seed: u64, estimators: Vec<Estimator>) -> Self {
        SimulationPlan {
            n,
            replications,
            seed,
            estimators,
            options: EvalOptions::default(),
        }
    }
}

/// Design moments of one estimator's sampling distribution, estimated by
/// simulation or computed exactly by enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub estimator: Estimator,
    pub mean_estimate: f64,
    pub empirical_bias: f64,
    pub empirical_mse: f64,
    /// Standard error of `mean_estimate`; zero for exact enumeration.
    pub stderr_of_mean: f64,
    pub negative_estimate_count: u64,
    pub failed_sample_count: u64,
    /// Samples that entered the moments (total minus failed).
    pub evaluated_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactReport {
    #[serde(flatten)]
    pub report: EmpiricalReport,
    pub sample_space_size: u64,
}

/// Exact binomial coefficient, `None` on `u128` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    Some(acc)
}

fn check_size(population_size: usize, n: usize) -> Result<()> {
    if n < 2 || n > population_size {
        return Err(VarestError::InvalidSize { n, population_size });
    }
    Ok(())
}

/// Draws `n` distinct 0-based unit indices from `0..population_size`, each
/// `n`-subset equally likely. Returned in increasing order.
pub fn srswor_sample<R: Rng + ?Sized>(population_size: usize, n: usize, rng: &mut R) -> Result<Vec<usize>> {
    check_size(population_size, n)?;
    let mut units: Vec<usize> = (0..population_size).collect();
    partial_shuffle(&mut units, n, rng);
    let mut chosen = units[..n].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Moves a uniform random `n`-subset of `units` into its first `n` slots.
fn partial_shuffle<R: Rng + ?Sized>(units: &mut [usize], n: usize, rng: &mut R) {
    let len = units.len();
    for i in 0..n {
        let j = rng.random_range(i..len);
        units.swap(i, j);
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Count, mean and centered sum of squares of deviations `t - S_y^2`.
#[derive(Debug, Clone, Copy, Default)]
struct BlockSummary {
    count: u64,
    mean: f64,
    m2: f64,
    negatives: u64,
    failed: u64,
}

impl BlockSummary {
    fn from_deviations(devs: &[f64], negatives: u64, failed: u64) -> Self {
        if devs.is_empty() {
            return BlockSummary {
                negatives,
                failed,
                ..BlockSummary::default()
            };
        }
        let mut sum = CompensatedSum::default();
        devs.iter().for_each(|&d| sum.add(d));
        let mean = sum.value() / devs.len() as f64;
        let mut sq = CompensatedSum::default();
        devs.iter().for_each(|&d| sq.add((d - mean) * (d - mean)));
        BlockSummary {
            count: devs.len() as u64,
            mean,
            m2: sq.value(),
            negatives,
            failed,
        }
    }

    fn merge(self, other: BlockSummary) -> BlockSummary {
        let negatives = self.negatives + other.negatives;
        let failed = self.failed + other.failed;
        if other.count == 0 {
            return BlockSummary {
                negatives,
                failed,
                ..self
            };
        }
        if self.count == 0 {
            return BlockSummary {
                negatives,
                failed,
                ..other
            };
        }
        let count = self.count + other.count;
        let (na, nb) = (self.count as f64, other.count as f64);
        let delta = other.mean - self.mean;
        BlockSummary {
            count,
            mean: self.mean + delta * nb / count as f64,
            m2: self.m2 + other.m2 + delta * delta * na * nb / count as f64,
            negatives,
            failed,
        }
    }

    fn into_report(self, estimator: Estimator, target: f64, with_stderr: bool) -> EmpiricalReport {
        let k = self.count as f64;
        let (mean_estimate, bias, mse, stderr) = if self.count == 0 {
            (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
        } else {
            let variance = self.m2 / k;
            let stderr = match (with_stderr, self.count) {
                (false, _) => 0.0,
                (true, 1) => f64::NAN,
                (true, _) => (self.m2 / (k - 1.0) / k).sqrt(),
            };
            (target + self.mean, self.mean, self.mean * self.mean + variance, stderr)
        };
        EmpiricalReport {
            estimator,
            mean_estimate,
            empirical_bias: bias,
            empirical_mse: mse,
            stderr_of_mean: stderr,
            negative_estimate_count: self.negatives,
            failed_sample_count: self.failed,
            evaluated_count: self.count,
        }
    }
}

/// Evaluates every estimator on a stream of samples and summarizes one block.
struct BlockEvaluator<'a> {
    pop: &'a Population,
    pm: &'a PopulationMoments,
    estimators: &'a [Estimator],
    options: EvalOptions,
    ybuf: Vec<f64>,
    xbuf: Vec<f64>,
    devs: Vec<Vec<f64>>,
    negatives: Vec<u64>,
    failed: Vec<u64>,
}

impl<'a> BlockEvaluator<'a> {
    fn new(pop: &'a Population, pm: &'a PopulationMoments, estimators: &'a [Estimator], options: EvalOptions) -> Self {
        let m = estimators.len();
        BlockEvaluator {
            pop,
            pm,
            estimators,
            options,
            ybuf: Vec::new(),
            xbuf: Vec::new(),
            devs: vec![Vec::with_capacity(BLOCK as usize); m],
            negatives: vec![0; m],
            failed: vec![0; m],
        }
    }

    fn push_sample(&mut self, indices: &[usize]) {
        self.ybuf.clear();
        self.xbuf.clear();
        for &i in indices {
            self.ybuf.push(self.pop.y()[i]);
            self.xbuf.push(self.pop.x()[i]);
        }
        let stats = SampleStats::from_values(&self.ybuf, &self.xbuf).expect("sample size checked by caller");
        for (k, est) in self.estimators.iter().enumerate() {
            match evaluate(est, &stats, self.pm, self.options) {
                Ok(e) => {
                    self.devs[k].push(e.value - self.pm.s2_y);
                    self.negatives[k] += u64::from(e.negative);
                }
                Err(_) => self.failed[k] += 1,
            }
        }
    }

    fn finish(self) -> Vec<BlockSummary> {
        self.devs
            .iter()
            .zip(self.negatives.iter().zip(&self.failed))
            .map(|(d, (&neg, &fail))| BlockSummary::from_deviations(d, neg, fail))
            .collect()
    }
}

fn merge_blocks(blocks: Vec<Vec<BlockSummary>>, m: usize) -> Vec<BlockSummary> {
    blocks.into_iter().fold(vec![BlockSummary::default(); m], |acc, block| {
        acc.into_iter().zip(block).map(|(a, b)| a.merge(b)).collect()
    })
}

/// Monte Carlo evaluation of each estimator over `plan.replications`
/// independent SRSWOR samples. Replication `r` draws from ChaCha stream `r`
/// under the key derived from `plan.seed`.
pub fn simulate(pop: &Population, plan: &SimulationPlan) -> Result<Vec<EmpiricalReport>> {
    let big_n = pop.len();
    if plan.n < 2 || plan.n >= big_n {
        return Err(VarestError::InvalidSize {
            n: plan.n,
            population_size: big_n,
        });
    }
    if plan.replications == 0 {
        return Err(VarestError::InvalidArgument("replications must be at least 1".into()));
    }
    let pm = population_moments(pop, plan.n, false)?;
    let key = ChaCha8Rng::seed_from_u64(plan.seed).get_seed();
    let m = plan.estimators.len();
    let blocks = plan.replications.div_ceil(BLOCK);

    let summaries: Vec<Vec<BlockSummary>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut eval = BlockEvaluator::new(pop, &pm, &plan.estimators, plan.options);
            let mut units: Vec<usize> = Vec::with_capacity(big_n);
            let end = ((b + 1) * BLOCK).min(plan.replications);
            for r in b * BLOCK..end {
                let mut rng = ChaCha8Rng::from_seed(key);
                rng.set_stream(r);
                units.clear();
                units.extend(0..big_n);
                partial_shuffle(&mut units, plan.n, &mut rng);
                eval.push_sample(&units[..plan.n]);
            }
            eval.finish()
        })
        .collect();

    Ok(merge_blocks(summaries, m)
        .into_iter()
        .zip(&plan.estimators)
        .map(|(s, est)| s.into_report(*est, pm.s2_y, true))
        .collect())
}

/// The `rank`-th `n`-subset of `0..big_n` in lexicographic order.
fn unrank_combination(mut rank: u128, big_n: usize, n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    let mut next = 0;
    for slot in 0..n {
        for candidate in next..big_n {
            let rest = binomial((big_n - candidate - 1) as u64, (n - slot - 1) as u64)
                .expect("bounded by the enumeration limit");
            if rank < rest {
                out.push(candidate);
                next = candidate + 1;
                break;
            }
            rank -= rest;
        }
    }
    out
}

/// Advances to the next `n`-subset in lexicographic order; false after the
/// last one.
fn next_combination(c: &mut [usize], big_n: usize) -> bool {
    let n = c.len();
    let mut i = n;
    while i > 0 {
        i -= 1;
        if c[i] < big_n - n + i {
            c[i] += 1;
            for j in i + 1..n {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exact design moments of each estimator, visiting every `n`-subset once.
pub fn enumerate_exact(
    pop: &Population,
    n: usize,
    estimators: &[Estimator],
    limit: u64,
    options: EvalOptions,
) -> Result<Vec<ExactReport>> {
    let big_n = pop.len();
    check_size(big_n, n)?;
    let size = binomial(big_n as u64, n as u64).unwrap_or(u128::MAX);
    if size > limit as u128 {
        return Err(VarestError::TooLarge {
            size,
            limit: limit as u128,
        });
    }
    let size = size as u64;
    let pm = population_moments(pop, n, false)?;
    let blocks = size.div_ceil(BLOCK);

    let summaries: Vec<Vec<BlockSummary>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut eval = BlockEvaluator::new(pop, &pm, estimators, options);
            let start = b * BLOCK;
            let count = BLOCK.min(size - start);
            let mut subset = unrank_combination(start as u128, big_n, n);
            for i in 0..count {
                if i > 0 {
                    next_combination(&mut subset, big_n);
                }
                eval.push_sample(&subset);
            }
            eval.finish()
        })
        .collect();

    Ok(merge_blocks(summaries, estimators.len())
        .into_iter()
        .zip(estimators)
        .map(|(s, est)| ExactReport {
            report: s.into_report(*est, pm.s2_y, false),
            sample_space_size: size,
        })
        .collect())
}
