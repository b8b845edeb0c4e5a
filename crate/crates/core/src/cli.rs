//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors, 2 when a
//! run exhausted its step budget.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::engine::StopReason;
use crate::error::{Error, Result};
use crate::experiments::{
    emit_runs_csv, emit_summary_csv, expected_epidemic_interactions, expected_pse_counters_at_half,
    repeat_median_estimate, run_replicate, run_replicates, summarize, DeadlineMode, ExperimentConfig, Figure, Metric,
    RunRecord, SummaryRow,
};
use crate::protocols::{le_round_cap, le_threshold, ProtocolKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;

const DEFAULT_N: usize = 1024;
const DEFAULT_N_MIN: usize = 8;
const DEFAULT_N_MAX: usize = 4096;
const DEFAULT_REPS: usize = 100;
const DEFAULT_SEED: u64 = 1;
const DEFAULT_M: u32 = 10;
const DEFAULT_B: f64 = 2.0;
const DEFAULT_DEADLINE_COEFF: f64 = 1.0;

#[derive(Debug, Parser)]
#[command(
    name = "popsim",
    version,
    about = "Population-protocol simulator: epidemics, size estimation and leader election",
    after_help = "Summary std is the sample standard deviation (divisor count-1).\n\
                  Exit codes: 0 success, 1 usage/config error, 2 step budget exhausted."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one replicate and print a report.
    Run(SimArgs),
    /// Run replicates over a power-of-two grid and write runs.csv and summary.csv.
    Sweep(SimArgs),
    /// Write the CSV data for one of the preset plots.
    Figure(FigureArgs),
    /// Print closed-form reference values.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SimArgs {
    /// Protocol: epidemic, elimination, pse or le [default: le]
    #[arg(long)]
    pub protocol: Option<ProtocolKind>,
    /// Population size for a single-size run or sweep [default: 1024 for run; grid for sweep]
    #[arg(long)]
    pub n: Option<usize>,
    /// Smallest grid size, a power of two [default: 8]
    #[arg(long)]
    pub n_min: Option<usize>,
    /// Largest grid size, a power of two [default: 4096]
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Replicates per population size [default: 100]
    #[arg(long)]
    pub reps: Option<usize>,
    /// Seed: used directly by `run`, as the base seed by `sweep`/`figure` [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Leader election: largest random number [default: 10]
    #[arg(long)]
    pub m: Option<u32>,
    /// Leader election: size bound exponent, agents know n^b [default: 2]
    #[arg(long)]
    pub b: Option<f64>,
    /// Leader election: deadline coefficient c in c*log2(n)^2/log2(log2 n) [default: 1]
    #[arg(long)]
    pub deadline_coeff: Option<f64>,
    /// Leader election: silence or fixed_parallel_time [default: silence]
    #[arg(long)]
    pub deadline_mode: Option<DeadlineMode>,
    /// Leader election: allow round increments past the cap after leader meetings [default: off]
    #[arg(long)]
    #[serde(default)]
    pub cap_reentry: bool,
    /// Size estimation (`run` only): report the median of K independent estimates, K odd [default: 1]
    #[arg(long, value_name = "K")]
    pub repeat: Option<usize>,
    /// Step budget per replicate [default: 200*n*ceil(log2 n)^2]
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Worker threads, 0 = all cores [default: 0]
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory [default: results/<protocol> or results/<figure>]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with any of the options above (kebab-case keys); flags take precedence [default: none]
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// fig1a, fig1b, fig2a, fig2b or fig3
    pub name: Figure,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum OracleName {
    EpidemicTime,
    PseCounters,
    LeRoundCap,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// epidemic_time, pse_counters or le_round_cap
    pub name: OracleName,
    /// Population size [default: 1024]
    #[arg(long)]
    pub n: Option<usize>,
    /// Largest random number [default: 10]
    #[arg(long)]
    pub m: Option<u32>,
    /// Size bound exponent [default: 2]
    #[arg(long)]
    pub b: Option<f64>,
}

impl SimArgs {
    /// Fills unset fields from `base`.
    fn merged_over(self, base: SimArgs) -> SimArgs {
        SimArgs {
            protocol: self.protocol.or(base.protocol),
            n: self.n.or(base.n),
            n_min: self.n_min.or(base.n_min),
            n_max: self.n_max.or(base.n_max),
            reps: self.reps.or(base.reps),
            seed: self.seed.or(base.seed),
            m: self.m.or(base.m),
            b: self.b.or(base.b),
            deadline_coeff: self.deadline_coeff.or(base.deadline_coeff),
            deadline_mode: self.deadline_mode.or(base.deadline_mode),
            cap_reentry: self.cap_reentry || base.cap_reentry,
            repeat: self.repeat.or(base.repeat),
            max_steps: self.max_steps.or(base.max_steps),
            jobs: self.jobs.or(base.jobs),
            out: self.out.or(base.out),
            config: self.config,
        }
    }

    /// Applies `--config` if given.
    fn resolve(self) -> Result<SimArgs> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        let file: SimArgs = toml::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Ok(self.merged_over(file))
    }

    fn grid(&self) -> Result<Vec<usize>> {
        if let Some(n) = self.n {
            return Ok(vec![n]);
        }
        let lo = self.n_min.unwrap_or(DEFAULT_N_MIN);
        let hi = self.n_max.unwrap_or(DEFAULT_N_MAX);
        if !lo.is_power_of_two() || !hi.is_power_of_two() || lo < 2 || lo > hi {
            return Err(Error::InvalidConfig(format!(
                "--n-min/--n-max must be powers of two with 2 <= n-min <= n-max, got {lo}..{hi}"
            )));
        }
        Ok(std::iter::successors(Some(lo), |&n| (n < hi).then_some(n * 2)).collect())
    }

    fn experiment(&self, protocol: ProtocolKind, n_values: Vec<usize>) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(protocol, n_values, self.reps.unwrap_or(DEFAULT_REPS), self.seed.unwrap_or(DEFAULT_SEED));
        cfg.m = self.m.unwrap_or(DEFAULT_M);
        cfg.b = self.b.unwrap_or(DEFAULT_B);
        cfg.deadline_coefficient = self.deadline_coeff.unwrap_or(DEFAULT_DEADLINE_COEFF);
        cfg.deadline_mode = self.deadline_mode.unwrap_or_default();
        cfg.cap_reentry = self.cap_reentry;
        cfg.max_steps = self.max_steps;
        cfg.jobs = self.jobs.unwrap_or(0);
        cfg
    }
}

/// Parses `args` and runs the command, writing reports to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn execute<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            let _ = writeln!(err, "run `popsim --help` for usage");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Run(args) => cmd_run(args.resolve()?, out),
        Command::Sweep(args) => cmd_sweep(args.resolve()?, out),
        Command::Figure(args) => cmd_figure(args.name, args.sim.resolve()?, out),
        Command::Oracle(args) => cmd_oracle(&args, out),
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn exit_for(reason: StopReason) -> i32 {
    if reason == StopReason::MaxSteps {
        EXIT_NO_CONVERGENCE
    } else {
        EXIT_OK
    }
}

pub fn cmd_run(args: SimArgs, out: &mut dyn Write) -> Result<i32> {
    let protocol = args.protocol.unwrap_or(ProtocolKind::Le);
    let n = args.n.unwrap_or(DEFAULT_N);
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let cfg = args.experiment(protocol, vec![n]);
    cfg.validate()?;
    let rec = run_replicate(&cfg, n, 0, seed)?;
    report_run(&cfg, &rec, out).map_err(io_err)?;
    if let Some(k) = args.repeat.filter(|_| protocol == ProtocolKind::Pse) {
        let median = repeat_median_estimate(n, k, seed)?;
        writeln!(out, "median_estimate(k={k})={median}").map_err(io_err)?;
    }
    Ok(exit_for(rec.stop_reason))
}

fn report_run(cfg: &ExperimentConfig, rec: &RunRecord, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "protocol={} n={} seed={}", rec.protocol, rec.n, rec.seed)?;
    writeln!(out, "steps={}", rec.steps)?;
    writeln!(out, "parallel_time={}", rec.parallel_time)?;
    writeln!(out, "stop_reason={}", rec.stop_reason)?;
    match rec.protocol {
        ProtocolKind::Epidemic => {}
        ProtocolKind::Elimination => {
            if let Some(l) = rec.leaders_final {
                writeln!(out, "leaders_final={l}")?;
            }
        }
        ProtocolKind::Pse => {
            if let (Some(cq), Some(ca)) = (rec.cq_half, rec.ca_half) {
                writeln!(out, "half_infection c_q={cq} c_a={ca}")?;
            }
            match (rec.cq_final, rec.estimate) {
                (Some(cq), Some(est)) => writeln!(out, "c_q={cq} estimate=2^(c_q+1)={est}")?,
                _ => writeln!(out, "estimate=none (leader did not halt)")?,
            }
        }
        ProtocolKind::Le => {
            if let (Ok(t), Ok(r)) = (le_threshold(rec.n, cfg.b), le_round_cap(rec.n, cfg.b, cfg.m)) {
                writeln!(out, "m={} b={} threshold={t} round_cap={r}", cfg.m, cfg.b)?;
            }
            if let Some(l) = rec.leaders_final {
                writeln!(out, "leaders_final={l}")?;
            }
            if let Some(l) = rec.leaders_at_deadline {
                writeln!(out, "leaders_at_deadline={l}")?;
            }
        }
    }
    Ok(())
}

fn write_outputs(dir: &Path, records: &[RunRecord], metrics: &[Metric]) -> Result<Vec<SummaryRow>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let rows: Vec<SummaryRow> = metrics.iter().flat_map(|&m| summarize(records, m)).collect();
    emit_runs_csv(records, &dir.join("runs.csv"))?;
    emit_summary_csv(&rows, &dir.join("summary.csv"))?;
    Ok(rows)
}

fn failures(records: &[RunRecord]) -> usize {
    records.iter().filter(|r| r.stop_reason == StopReason::MaxSteps).count()
}

pub fn cmd_sweep(args: SimArgs, out: &mut dyn Write) -> Result<i32> {
    let protocol = args.protocol.unwrap_or(ProtocolKind::Le);
    let cfg = args.experiment(protocol, args.grid()?);
    let records = run_replicates(&cfg)?;
    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("results").join(protocol.as_str()));
    let rows = write_outputs(&dir, &records, Metric::for_protocol(protocol))?;
    print_overview(out, &dir, &records, &rows, Metric::ParallelTime).map_err(io_err)?;
    Ok(if failures(&records) > 0 { EXIT_NO_CONVERGENCE } else { EXIT_OK })
}

pub fn cmd_figure(figure: Figure, args: SimArgs, out: &mut dyn Write) -> Result<i32> {
    let mut cfg = figure.config(args.grid()?, args.reps.unwrap_or(DEFAULT_REPS), args.seed.unwrap_or(DEFAULT_SEED));
    let tuned = args.experiment(figure.protocol(), cfg.n_values.clone());
    cfg.m = tuned.m;
    cfg.b = tuned.b;
    cfg.deadline_coefficient = tuned.deadline_coefficient;
    cfg.cap_reentry = tuned.cap_reentry;
    cfg.max_steps = tuned.max_steps;
    cfg.jobs = tuned.jobs;
    let records = run_replicates(&cfg)?;
    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("results").join(figure.as_str()));
    let rows = write_outputs(&dir, &records, figure.metrics())?;
    print_overview(out, &dir, &records, &rows, figure.metrics()[0]).map_err(io_err)?;
    Ok(if failures(&records) > 0 { EXIT_NO_CONVERGENCE } else { EXIT_OK })
}

fn print_overview(
    out: &mut dyn Write,
    dir: &Path,
    records: &[RunRecord],
    rows: &[SummaryRow],
    headline: Metric,
) -> std::io::Result<()> {
    writeln!(out, "wrote {} records to {}", records.len(), dir.join("runs.csv").display())?;
    writeln!(out, "wrote {} summary rows to {}", rows.len(), dir.join("summary.csv").display())?;
    let failed = failures(records);
    if failed > 0 {
        writeln!(out, "warning: {failed} replicates exhausted the step budget")?;
    }
    for r in rows.iter().filter(|r| r.metric == headline) {
        writeln!(
            out,
            "n={:<6} {}: mean={:.4} std={:.4} median={:.4} p95={:.4} (count {})",
            r.n, r.metric, r.mean, r.std, r.median, r.p95, r.count
        )?;
    }
    Ok(())
}

pub fn cmd_oracle(args: &OracleArgs, out: &mut dyn Write) -> Result<i32> {
    let n = args.n.unwrap_or(DEFAULT_N);
    match args.name {
        OracleName::EpidemicTime => {
            let x = expected_epidemic_interactions(n)?;
            writeln!(out, "interactions={x:?} parallel_time={:?}", x / n as f64).map_err(io_err)?;
        }
        OracleName::PseCounters => {
            let (cq, ca) = expected_pse_counters_at_half(n)?;
            writeln!(out, "cq_half={cq:?} ca_half={ca:?}").map_err(io_err)?;
        }
        OracleName::LeRoundCap => {
            let b = args.b.unwrap_or(DEFAULT_B);
            let m = args.m.unwrap_or(DEFAULT_M);
            let r = le_round_cap(n, b, m)?;
            let t = le_threshold(n, b)?;
            writeln!(out, "round_cap={r} threshold={t}").map_err(io_err)?;
        }
    }
    Ok(EXIT_OK)
}
