//! The `varest` command line.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, VarestError};
use crate::estimators::{evaluate, Estimator, EvalOptions};
use crate::input::{load_population_csv, load_summary_params};
use crate::moments::{population_moments, sample_stats, Population, PopulationMoments, ThetaMode};
use crate::montecarlo::{enumerate_exact, simulate, srswor_sample, SimulationPlan, DEFAULT_ENUMERATION_LIMIT};
use crate::presets::{default_specs, EstimatorSpec, Preset};
use crate::report::{render, EmpiricalRow, EstimateRow, MomentRow, OutputFormat, TheoryRow};
use crate::theory::{theoretical_bias, theoretical_mse, theory_reports, TheoryOptions};

#[derive(Debug, Parser)]
#[command(
    name = "varest",
    version,
    about = "Estimators of a finite-population variance using an auxiliary variable"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the population moments used by the estimators and theory.
    Moments(InputArgs),
    /// Draw one sample (or use given units) and evaluate the estimators on it.
    Estimate(EstimateArgs),
    /// First-order bias, MSE and percent relative efficiency of each estimator.
    TheoryTable(TheoryArgs),
    /// Monte Carlo SRSWOR comparison against the first-order theory.
    Simulate(SimulateArgs),
    /// Exact design moments by enumerating every sample.
    Enumerate(EnumerateArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Unit-level CSV with header `y,x`.
    #[arg(long, conflicts_with = "params", required_unless_present = "params")]
    pub data: Option<PathBuf>,
    /// Summary parameter file (`key = value` lines).
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Sample size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Use theta = 1/n - 1/N instead of 1/n.
    #[arg(long)]
    pub fpc: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct EstimatorArgs {
    /// Generalized-estimator configuration(s) for the default rows.
    #[arg(long, value_enum)]
    pub preset: Vec<Preset>,
    /// Explicit estimator list, e.g. `ratio` or `sahai:w=opt`; replaces the defaults.
    #[arg(long, value_parser = parse_spec)]
    pub estimator: Vec<EstimatorSpec>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub estimators: EstimatorArgs,
    /// Comma-separated 1-based unit numbers; drawn at random when absent.
    #[arg(long)]
    pub indices: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub clamp_nonnegative: bool,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub estimators: EstimatorArgs,
    /// Report the bias of t_k without the theta factor.
    #[arg(long)]
    pub paper_literal: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub estimators: EstimatorArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    /// Worker threads (default: all available).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Enumerate every sample instead of simulating.
    #[arg(long)]
    pub exact: bool,
    /// Largest sample space `--exact` will enumerate.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
    pub limit: u64,
    #[arg(long)]
    pub clamp_nonnegative: bool,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub estimators: EstimatorArgs,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
    pub limit: u64,
    #[arg(long)]
    pub clamp_nonnegative: bool,
}

fn parse_spec(s: &str) -> std::result::Result<EstimatorSpec, String> {
    s.parse().map_err(|e: VarestError| e.to_string())
}

enum Loaded {
    Raw(Population),
    Summary,
}

impl InputArgs {
    fn theta_mode(&self) -> ThetaMode {
        if self.fpc {
            ThetaMode::Fpc
        } else {
            ThetaMode::NoFpc
        }
    }

    fn load(&self) -> Result<(Loaded, PopulationMoments)> {
        match (&self.data, &self.params) {
            (Some(path), _) => {
                let pop = load_population_csv(path)?;
                let n = self
                    .n
                    .ok_or_else(|| VarestError::InvalidArgument("--n is required with --data".into()))?;
                let pm = population_moments(&pop, n, self.fpc)?;
                Ok((Loaded::Raw(pop), pm))
            }
            (None, Some(path)) => Ok((Loaded::Summary, load_summary_params(path, self.n, self.theta_mode())?)),
            (None, None) => Err(VarestError::InvalidArgument(
                "one of --data or --params is required".into(),
            )),
        }
    }

    fn require_raw(&self, command: &str) -> Result<(Population, PopulationMoments)> {
        match self.load()? {
            (Loaded::Raw(pop), pm) => Ok((pop, pm)),
            (Loaded::Summary, _) => Err(VarestError::ModeError(format!(
                "`{command}` needs unit-level data (--data); summary parameters are not enough"
            ))),
        }
    }
}

impl EstimatorArgs {
    fn resolve(&self, pm: &PopulationMoments) -> Result<Vec<(String, Estimator)>> {
        if self.estimator.is_empty() {
            return default_specs(pm, &self.preset);
        }
        self.estimator
            .iter()
            .map(|spec| Ok((spec.name.clone(), spec.resolve(pm)?)))
            .collect()
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|source| VarestError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| VarestError::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Moments(args) => cmd_moments(&args, out),
        Command::Estimate(args) => cmd_estimate(&args, out),
        Command::TheoryTable(args) => {
            let rows = cmd_theory_table(&args)?;
            write_out(out, &render(&rows, args.input.format)?)
        }
        Command::Simulate(args) => {
            let rows = cmd_simulate(&args)?;
            write_out(out, &render(&rows, args.input.format)?)
        }
        Command::Enumerate(args) => {
            let sim = SimulateArgs {
                input: args.input,
                estimators: args.estimators,
                seed: 0,
                reps: 1,
                threads: args.threads,
                exact: true,
                limit: args.limit,
                clamp_nonnegative: args.clamp_nonnegative,
            };
            let rows = cmd_simulate(&sim)?;
            write_out(out, &render(&rows, sim.input.format)?)
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code:
/// 0 on success, 2 for input errors, 3 for numeric or domain errors.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn cmd_moments(args: &InputArgs, out: &mut dyn Write) -> Result<()> {
    let (_, pm) = args.load()?;
    if args.format == OutputFormat::Json {
        let mut s =
            serde_json::to_string_pretty(&pm).map_err(|e| VarestError::InvalidArgument(format!("JSON output: {e}")))?;
        s.push('\n');
        return write_out(out, &s);
    }
    let row = |name: &str, value: Option<f64>| MomentRow {
        name: name.to_string(),
        value,
    };
    let rows = vec![
        row("N", pm.population_size.map(|v| v as f64)),
        row("n", Some(pm.n as f64)),
        row("theta", Some(pm.theta)),
        row("mean_y", pm.mean_y),
        row("mean_x", pm.mean_x),
        row("S2_y", Some(pm.s2_y)),
        row("S2_x", Some(pm.s2_x)),
        row("C_y", pm.cv_y),
        row("C_x", pm.cv_x),
        row("rho_yx", Some(pm.rho_yx).filter(|v| v.is_finite())),
        row("C_yx", pm.c_yx),
        row("lambda40", Some(pm.lambda40)),
        row("lambda04", Some(pm.lambda04)),
        row("lambda22", Some(pm.lambda22)),
        row("beta2y_star", Some(pm.beta2y_star)),
        row("beta2x_star", Some(pm.beta2x_star)),
        row("lambda22_star", Some(pm.lambda22_star)),
    ];
    write_out(out, &render(&rows, args.format)?)
}

fn parse_indices(text: &str, population_size: usize) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            let unit: usize = t
                .trim()
                .parse()
                .map_err(|_| VarestError::InvalidArgument(format!("bad unit number {t:?}")))?;
            if unit == 0 || unit > population_size {
                return Err(VarestError::BadIndex {
                    index: unit,
                    population_size,
                });
            }
            Ok(unit - 1)
        })
        .collect()
}

fn cmd_estimate(args: &EstimateArgs, out: &mut dyn Write) -> Result<()> {
    let (pop, pm) = args.input.require_raw("estimate")?;
    let indices = match &args.indices {
        Some(text) => parse_indices(text, pop.len())?,
        None => srswor_sample(pop.len(), pm.n, &mut ChaCha8Rng::seed_from_u64(args.seed))?,
    };
    let stats = sample_stats(&pop, &indices)?;
    let opts = EvalOptions {
        clamp_nonnegative: args.clamp_nonnegative,
    };
    let rows: Vec<EstimateRow> = args
        .estimators
        .resolve(&pm)?
        .into_iter()
        .map(|(name, est)| match evaluate(&est, &stats, &pm, opts) {
            Ok(e) => EstimateRow {
                estimator: name,
                config: est,
                estimate: Some(e.value),
                negative: e.negative,
                expansion_invalid: e.expansion_invalid,
                clamped: e.clamped,
                error: None,
            },
            Err(err) => EstimateRow {
                estimator: name,
                config: est,
                estimate: None,
                negative: false,
                expansion_invalid: false,
                clamped: false,
                error: Some(err.to_string()),
            },
        })
        .collect();
    write_out(out, &render(&rows, args.input.format)?)
}

pub fn cmd_theory_table(args: &TheoryArgs) -> Result<Vec<TheoryRow>> {
    let (_, pm) = args.input.load()?;
    let named = args.estimators.resolve(&pm)?;
    let ests: Vec<Estimator> = named.iter().map(|(_, e)| *e).collect();
    let reports = theory_reports(
        &ests,
        &pm,
        TheoryOptions {
            paper_literal: args.paper_literal,
        },
    )?;
    Ok(named
        .into_iter()
        .zip(reports)
        .map(|((name, _), r)| TheoryRow {
            estimator: name,
            config: r.estimator,
            bias: r.bias,
            mse: r.mse,
            pre: r.pre,
        })
        .collect())
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<Vec<EmpiricalRow>> {
    let (pop, pm) = args
        .input
        .require_raw(if args.exact { "enumerate" } else { "simulate" })?;
    let named = args.estimators.resolve(&pm)?;
    let ests: Vec<Estimator> = named.iter().map(|(_, e)| *e).collect();
    let options = EvalOptions {
        clamp_nonnegative: args.clamp_nonnegative,
    };
    let n = pm.n;

    let (reports, space) = if args.exact {
        let exact = with_threads(args.threads, || enumerate_exact(&pop, n, &ests, args.limit, options))??;
        let space = exact.first().map(|r| r.sample_space_size);
        (exact.into_iter().map(|r| r.report).collect::<Vec<_>>(), space)
    } else {
        let plan = SimulationPlan {
            options,
            ..SimulationPlan::new(n, args.reps, args.seed, ests.clone())
        };
        (with_threads(args.threads, || simulate(&pop, &plan))??, None)
    };

    let pm_fpc = pm.at_sample_size(n, ThetaMode::Fpc)?;
    let pm_plain = pm.at_sample_size(n, ThetaMode::NoFpc)?;
    let finite = |v: f64| Some(v).filter(|v| v.is_finite());
    let reference = reports
        .iter()
        .find(|r| r.estimator == Estimator::Unbiased)
        .and_then(|r| finite(r.empirical_mse));

    Ok(named
        .into_iter()
        .zip(reports)
        .map(|((name, est), r)| {
            let mse = finite(r.empirical_mse);
            EmpiricalRow {
                estimator: name,
                config: est,
                mean: finite(r.mean_estimate),
                bias: finite(r.empirical_bias),
                mse,
                pre: reference.zip(mse).filter(|(_, m)| *m > 0.0).map(|(a, m)| 100.0 * a / m),
                stderr: finite(r.stderr_of_mean),
                evaluated: r.evaluated_count,
                failed_samples: r.failed_sample_count,
                negative_estimates: r.negative_estimate_count,
                sample_space_size: space,
                theory_bias_fpc: theoretical_bias(&est, &pm_fpc, TheoryOptions::default()).ok(),
                theory_mse_fpc: theoretical_mse(&est, &pm_fpc).ok(),
                theory_mse_no_fpc: theoretical_mse(&est, &pm_plain).ok(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn unit_numbers_are_one_based() {
        assert_eq!(parse_indices("1, 4", 4).unwrap(), vec![0, 3]);
        assert!(matches!(
            parse_indices("0,2", 4),
            Err(VarestError::BadIndex { index: 0, .. })
        ));
        assert!(matches!(parse_indices("5", 4), Err(VarestError::BadIndex { .. })));
        assert!(parse_indices("a", 4).is_err());
    }
}
