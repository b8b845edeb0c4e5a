use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{default_max_steps, run, FnHook, Population, SimRng, SnapshotHook, StopCondition, StopReason};
use crate::error::{Error, Result};
use crate::protocols::pse::{half_infection_counters, pse_estimate};
use crate::protocols::{Elimination, Epidemic, LeParams, LeaderElection, ProtocolKind, Pse, PseState};

use super::oracles::le_deadline;

const HALF_INFECTION: &str = "half_infection";
const LE_DEADLINE: &str = "deadline";

/// How leader-election runs use the `log2^2 n / log2 log2 n` deadline.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeadlineMode {
    /// Run to stabilization and snapshot the leader count at the deadline.
    #[default]
    Silence,
    /// Stop at the deadline.
    FixedParallelTime,
}

impl std::str::FromStr for DeadlineMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "silence" => Ok(DeadlineMode::Silence),
            "fixed_parallel_time" | "fixed" => Ok(DeadlineMode::FixedParallelTime),
            _ => Err(format!("unknown deadline mode '{s}' (expected silence or fixed_parallel_time)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub protocol: ProtocolKind,
    pub n_values: Vec<usize>,
    pub reps: usize,
    pub base_seed: u64,
    pub m: u32,
    pub b: f64,
    pub deadline_mode: DeadlineMode,
    pub deadline_coefficient: f64,
    pub cap_reentry: bool,
    /// Overrides [`default_max_steps`].
    pub max_steps: Option<u64>,
    /// Worker threads; 0 uses the rayon default.
    pub jobs: usize,
}

impl ExperimentConfig {
    pub fn new(protocol: ProtocolKind, n_values: Vec<usize>, reps: usize, base_seed: u64) -> Self {
        Self {
            protocol,
            n_values,
            reps,
            base_seed,
            m: 10,
            b: 2.0,
            deadline_mode: DeadlineMode::Silence,
            deadline_coefficient: 1.0,
            cap_reentry: false,
            max_steps: None,
            jobs: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidConfig("reps must be >= 1".into()));
        }
        if self.n_values.is_empty() {
            return Err(Error::InvalidConfig("no population sizes given".into()));
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidPopulationSize(n));
        }
        if self.max_steps == Some(0) {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        if self.protocol == ProtocolKind::Le {
            if self.m < 2 {
                return Err(Error::InvalidParameter(format!("m must be >= 2, got {}", self.m)));
            }
            if !(self.b >= 1.0 && self.b.is_finite()) {
                return Err(Error::InvalidParameter(format!("b must be >= 1, got {}", self.b)));
            }
            if !(self.deadline_coefficient > 0.0 && self.deadline_coefficient.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "deadline coefficient must be positive, got {}",
                    self.deadline_coefficient
                )));
            }
        }
        Ok(())
    }

    fn max_steps_for(&self, n: usize) -> u64 {
        self.max_steps.unwrap_or_else(|| default_max_steps(n))
    }
}

/// Outcome of one replicate. Metrics that do not apply to the protocol are
/// `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub protocol: ProtocolKind,
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    pub steps: u64,
    pub parallel_time: f64,
    pub stop_reason: StopReason,
    pub leaders_final: Option<usize>,
    pub leaders_at_deadline: Option<usize>,
    pub estimate: Option<u64>,
    pub cq_half: Option<u32>,
    pub ca_half: Option<u32>,
    pub cq_final: Option<u32>,
}

impl RunRecord {
    fn bare(protocol: ProtocolKind, n: usize, rep: usize, seed: u64) -> Self {
        Self {
            protocol,
            n,
            rep,
            seed,
            steps: 0,
            parallel_time: 0.0,
            stop_reason: StopReason::MaxSteps,
            leaders_final: None,
            leaders_at_deadline: None,
            estimate: None,
            cq_half: None,
            ca_half: None,
            cq_final: None,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Replicate seed: SplitMix64 chained over `(base_seed, protocol tag, n, rep)`.
pub fn derive_seed(base_seed: u64, protocol: ProtocolKind, n: usize, rep: usize) -> u64 {
    let mut h = splitmix64(base_seed);
    h = splitmix64(h ^ protocol.tag());
    h = splitmix64(h ^ n as u64);
    splitmix64(h ^ rep as u64)
}

/// Runs a single replicate with an explicit seed.
pub fn run_replicate(cfg: &ExperimentConfig, n: usize, rep: usize, seed: u64) -> Result<RunRecord> {
    let mut rec = RunRecord::bare(cfg.protocol, n, rep, seed);
    let mut rng = SimRng::new(seed);
    let budget = StopCondition::new(cfg.max_steps_for(n));
    match cfg.protocol {
        ProtocolKind::Epidemic => {
            let pop = Population::new(&Epidemic, n)?;
            let res = run(pop, &Epidemic, &mut rng, &budget.on_stabilized(), vec![]);
            fill_timing(&mut rec, res.steps, res.parallel_time, res.stop_reason);
        }
        ProtocolKind::Elimination => {
            let pop = Population::new(&Elimination, n)?;
            let res = run(pop, &Elimination, &mut rng, &budget.on_stabilized(), vec![]);
            fill_timing(&mut rec, res.steps, res.parallel_time, res.stop_reason);
            rec.leaders_final = Some(res.final_population.tally().leaders);
        }
        ProtocolKind::Pse => {
            let pop = Population::new(&Pse, n)?;
            let hook = FnHook::new(HALF_INFECTION, |p: &Population<Pse>| {
                half_infection_counters(p.agents(), p.tally()).map(|(cq, ca)| vec![u64::from(cq), u64::from(ca)])
            });
            let res = run(pop, &Pse, &mut rng, &budget.on_halt(), vec![Box::new(hook)]);
            fill_timing(&mut rec, res.steps, res.parallel_time, res.stop_reason);
            if let Some(s) = res.snapshot(HALF_INFECTION) {
                rec.cq_half = Some(s.payload[0] as u32);
                rec.ca_half = Some(s.payload[1] as u32);
            }
            if let Some(&halt) = res
                .final_population
                .agents()
                .iter()
                .find(|s| matches!(s, PseState::Halt { .. }))
            {
                if let PseState::Halt { cq } = halt {
                    rec.cq_final = Some(cq);
                }
                rec.estimate = pse_estimate(halt);
            }
        }
        ProtocolKind::Le => {
            let params = LeParams::for_population(n, cfg.b, cfg.m)?.with_cap_reentry(cfg.cap_reentry);
            let proto = LeaderElection::new(params);
            let pop = Population::new(&proto, n)?;
            let deadline = le_deadline(n, cfg.deadline_coefficient);
            let mut hooks: Vec<Box<dyn SnapshotHook<LeaderElection>>> = Vec::new();
            let stop = match (cfg.deadline_mode, deadline) {
                (DeadlineMode::FixedParallelTime, Some(d)) => budget.with_deadline(d),
                (DeadlineMode::Silence, Some(d)) => {
                    hooks.push(Box::new(FnHook::new(LE_DEADLINE, move |p: &Population<LeaderElection>| {
                        (p.parallel_time() >= d).then(|| vec![p.tally().leaders as u64])
                    })));
                    budget.on_stabilized()
                }
                (_, None) => budget.on_stabilized(),
            };
            let res = run(pop, &proto, &mut rng, &stop, hooks);
            fill_timing(&mut rec, res.steps, res.parallel_time, res.stop_reason);
            let leaders = res.final_population.tally().leaders;
            rec.leaders_final = Some(leaders);
            rec.leaders_at_deadline = match (res.snapshot(LE_DEADLINE), res.stop_reason) {
                (Some(s), _) => Some(s.payload[0] as usize),
                // Silent before the deadline: the count can no longer change.
                (None, StopReason::Stabilized | StopReason::Deadline) => Some(leaders),
                (None, _) => None,
            };
        }
    }
    Ok(rec)
}

fn fill_timing(rec: &mut RunRecord, steps: u64, parallel_time: f64, reason: StopReason) {
    rec.steps = steps;
    rec.parallel_time = parallel_time;
    rec.stop_reason = reason;
}

/// Runs every `(n, rep)` cell of `cfg`. Records come back sorted by `n`, then
/// `rep`, and depend only on `cfg`.
pub fn run_replicates(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let mut n_values = cfg.n_values.clone();
    n_values.sort_unstable();
    n_values.dedup();
    let cells: Vec<(usize, usize)> = n_values
        .iter()
        .flat_map(|&n| (0..cfg.reps).map(move |rep| (n, rep)))
        .collect();
    let work = || {
        cells
            .par_iter()
            .map(|&(n, rep)| run_replicate(cfg, n, rep, derive_seed(cfg.base_seed, cfg.protocol, n, rep)))
            .collect::<Result<Vec<_>>>()
    };
    if cfg.jobs == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start {} worker threads: {e}", cfg.jobs)))?
            .install(work)
    }
}

/// Median PSE estimate over independent replicates, one per seed.
///
/// Replicates that exhaust the step budget are dropped; more than half
/// dropped is an error. With an even number of survivors the lower median is
/// returned.
pub fn median_estimate(n: usize, seeds: &[u64], max_steps: Option<u64>) -> Result<u64> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("need at least one replicate".into()));
    }
    let mut cfg = ExperimentConfig::new(ProtocolKind::Pse, vec![n], seeds.len(), 0);
    cfg.max_steps = max_steps;
    cfg.validate()?;
    let mut estimates = Vec::with_capacity(seeds.len());
    for (rep, &seed) in seeds.iter().enumerate() {
        if let Some(e) = run_replicate(&cfg, n, rep, seed)?.estimate {
            estimates.push(e);
        }
    }
    let failed = seeds.len() - estimates.len();
    if failed > seeds.len() / 2 || estimates.is_empty() {
        return Err(Error::TooManyFailures {
            failed,
            total: seeds.len(),
        });
    }
    estimates.sort_unstable();
    Ok(estimates[(estimates.len() - 1) / 2])
}

/// Median of `k` (odd) independent PSE estimates with seeds derived from `seed`.
pub fn repeat_median_estimate(n: usize, k: usize, seed: u64) -> Result<u64> {
    if k.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("repeat count must be odd and >= 1, got {k}")));
    }
    let seeds: Vec<u64> = (0..k).map(|i| derive_seed(seed, ProtocolKind::Pse, n, i)).collect();
    median_estimate(n, &seeds, None)
}
