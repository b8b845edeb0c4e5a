//! Uniform random pairwise scheduler and the run loop around it.
//!
//! A [`Population`] holds exactly `n` agent states plus a cached tally that
//! the protocol defines. Every call to [`Population::step`] draws one ordered
//! pair of distinct agents uniformly at random, applies the protocol's
//! transition function to `(initiator, responder)` and writes both results
//! back. Ineffective steps still advance `step_count`, so parallel time is
//! always `step_count / n`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Seeded generator shared by the scheduler and the randomized rules.
///
/// ChaCha8 is portable, so a seed reproduces the same trajectory on every
/// platform.
#[derive(Clone, Debug)]
pub struct SimRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn below(&mut self, bound: usize) -> usize {
        self.inner.random_range(0..bound)
    }
}

/// Source of the uniform integer draws made inside transition functions.
///
/// The engine passes its [`SimRng`]; exhaustive checkers substitute a scripted
/// source to enumerate every outcome.
pub trait RandomDraw {
    /// Uniform draw from the inclusive range `[lo, hi]`.
    fn draw_uniform(&mut self, lo: u32, hi: u32) -> u32;
}

impl RandomDraw for SimRng {
    fn draw_uniform(&mut self, lo: u32, hi: u32) -> u32 {
        self.inner.random_range(lo..=hi)
    }
}

/// One scheduler decision: an ordered pair of distinct agent indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SchedulerDraw {
    pub initiator: usize,
    pub responder: usize,
}

/// Draws an ordered pair uniformly from the `n(n-1)` ordered pairs of distinct
/// agents.
///
/// Panics if `n < 2`.
pub fn draw_pair(rng: &mut SimRng, n: usize) -> SchedulerDraw {
    assert!(n >= 2, "draw_pair needs at least two agents, got {n}");
    let initiator = rng.below(n);
    let mut responder = rng.below(n - 1);
    if responder >= initiator {
        responder += 1;
    }
    SchedulerDraw {
        initiator,
        responder,
    }
}

/// Steps divided by population size.
pub fn parallel_time(steps: u64, n: usize) -> f64 {
    steps as f64 / n as f64
}

/// Default step budget: `200 * n * ceil(log2 n)^2`.
pub fn default_max_steps(n: usize) -> u64 {
    let log = (n.max(2) as f64).log2().ceil() as u64;
    200 * n as u64 * log * log
}

/// Aggregate counts kept in sync with the agent states.
pub trait Tally<S>: Clone + PartialEq + fmt::Debug {
    fn add(&mut self, state: &S);
    fn remove(&mut self, state: &S);
}

/// A population protocol: initial configuration, ordered-pair transition
/// function and the predicates the run loop can stop on.
pub trait Protocol {
    type State: Copy + Eq + fmt::Debug;
    type Tally: Tally<Self::State>;

    fn name(&self) -> &'static str;

    /// Initial configuration for `n` agents (`n >= 2` is checked by the caller).
    fn initial_states(&self, n: usize) -> Vec<Self::State>;

    fn empty_tally(&self) -> Self::Tally;

    /// Applies the transition function to `(initiator, responder)`.
    fn delta<D: RandomDraw>(
        &self,
        initiator: Self::State,
        responder: Self::State,
        rng: &mut D,
    ) -> (Self::State, Self::State);

    /// Terminating protocols report the halt state here (PSE).
    fn is_halted(&self, _tally: &Self::Tally, _n: usize) -> bool {
        false
    }

    fn is_stabilized(&self, tally: &Self::Tally, n: usize) -> bool;
}

pub struct Population<P: Protocol> {
    agents: Vec<P::State>,
    tally: P::Tally,
    step_count: u64,
}

impl<P: Protocol> Clone for Population<P> {
    fn clone(&self) -> Self {
        Self {
            agents: self.agents.clone(),
            tally: self.tally.clone(),
            step_count: self.step_count,
        }
    }
}

impl<P: Protocol> fmt::Debug for Population<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Population")
            .field("n", &self.agents.len())
            .field("step_count", &self.step_count)
            .field("tally", &self.tally)
            .finish()
    }
}

impl<P: Protocol> Population<P> {
    /// Builds the protocol's initial configuration.
    pub fn new(protocol: &P, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidPopulationSize(n));
        }
        Ok(Self::from_states(protocol, protocol.initial_states(n)))
    }

    /// Builds a population from an arbitrary configuration.
    ///
    /// Panics if fewer than two states are given.
    pub fn from_states(protocol: &P, agents: Vec<P::State>) -> Self {
        assert!(agents.len() >= 2, "a population needs at least two agents");
        let mut tally = protocol.empty_tally();
        for s in &agents {
            tally.add(s);
        }
        Self {
            agents,
            tally,
            step_count: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[P::State] {
        &self.agents
    }

    pub fn tally(&self) -> &P::Tally {
        &self.tally
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn parallel_time(&self) -> f64 {
        parallel_time(self.step_count, self.n())
    }

    /// Tally recomputed from scratch; equal to [`Population::tally`] at all times.
    pub fn recount(&self, protocol: &P) -> P::Tally {
        let mut tally = protocol.empty_tally();
        for s in &self.agents {
            tally.add(s);
        }
        tally
    }

    /// Executes one scheduler step. Returns whether any state changed.
    pub fn step(&mut self, protocol: &P, rng: &mut SimRng) -> bool {
        let draw = draw_pair(rng, self.n());
        self.apply(protocol, draw, rng)
    }

    /// Applies the transition function to a given pair; counts as one step.
    pub fn apply<D: RandomDraw>(&mut self, protocol: &P, draw: SchedulerDraw, rng: &mut D) -> bool {
        let x = self.agents[draw.initiator];
        let y = self.agents[draw.responder];
        let (x2, y2) = protocol.delta(x, y, rng);
        self.step_count += 1;
        let mut effective = false;
        if x2 != x {
            self.tally.remove(&x);
            self.tally.add(&x2);
            self.agents[draw.initiator] = x2;
            effective = true;
        }
        if y2 != y {
            self.tally.remove(&y);
            self.tally.add(&y2);
            self.agents[draw.responder] = y2;
            effective = true;
        }
        effective
    }

    pub fn is_halted(&self, protocol: &P) -> bool {
        protocol.is_halted(&self.tally, self.n())
    }

    pub fn is_stabilized(&self, protocol: &P) -> bool {
        protocol.is_stabilized(&self.tally, self.n())
    }
}

/// Builds the initial population for `protocol`.
pub fn init_population<P: Protocol>(protocol: &P, n: usize) -> Result<Population<P>> {
    Population::new(protocol, n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StopReason {
    Stabilized,
    Halted,
    Deadline,
    MaxSteps,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Stabilized => "stabilized",
            StopReason::Halted => "halted",
            StopReason::Deadline => "deadline",
            StopReason::MaxSteps => "max_steps",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which conditions end a run. When several fire on the same step the
/// precedence is halt, stabilization, deadline, step budget.
#[derive(Clone, Debug, PartialEq)]
pub struct StopCondition {
    pub max_steps: u64,
    pub on_halt: bool,
    pub on_stabilized: bool,
    /// Parallel-time deadline.
    pub deadline: Option<f64>,
}

impl StopCondition {
    /// Only the step budget. Panics if `max_steps == 0`.
    pub fn new(max_steps: u64) -> Self {
        assert!(max_steps > 0, "max_steps must be positive");
        Self {
            max_steps,
            on_halt: false,
            on_stabilized: false,
            deadline: None,
        }
    }

    pub fn on_halt(mut self) -> Self {
        self.on_halt = true;
        self
    }

    pub fn on_stabilized(mut self) -> Self {
        self.on_stabilized = true;
        self
    }

    pub fn with_deadline(mut self, parallel_time: f64) -> Self {
        self.deadline = Some(parallel_time);
        self
    }

    fn check<P: Protocol>(&self, protocol: &P, pop: &Population<P>) -> Option<StopReason> {
        if self.on_halt && pop.is_halted(protocol) {
            Some(StopReason::Halted)
        } else if self.on_stabilized && pop.is_stabilized(protocol) {
            Some(StopReason::Stabilized)
        } else if self.deadline.is_some_and(|d| pop.parallel_time() >= d) {
            Some(StopReason::Deadline)
        } else if pop.step_count() >= self.max_steps {
            Some(StopReason::MaxSteps)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub label: String,
    pub step: u64,
    pub payload: Vec<u64>,
}

/// Observer run after every step. A hook fires at most once: the first time
/// `check` returns a payload it is recorded and the hook is not consulted
/// again.
pub trait SnapshotHook<P: Protocol> {
    fn label(&self) -> &str;
    fn check(&mut self, pop: &Population<P>) -> Option<Vec<u64>>;
}

/// Closure-backed [`SnapshotHook`].
pub struct FnHook<F> {
    label: String,
    f: F,
}

impl<F> FnHook<F> {
    pub fn new(label: impl Into<String>, f: F) -> Self {
        Self {
            label: label.into(),
            f,
        }
    }
}

impl<P, F> SnapshotHook<P> for FnHook<F>
where
    P: Protocol,
    F: FnMut(&Population<P>) -> Option<Vec<u64>>,
{
    fn label(&self) -> &str {
        &self.label
    }

    fn check(&mut self, pop: &Population<P>) -> Option<Vec<u64>> {
        (self.f)(pop)
    }
}

#[derive(Debug)]
pub struct RunResult<P: Protocol> {
    pub steps: u64,
    pub parallel_time: f64,
    pub stop_reason: StopReason,
    pub final_population: Population<P>,
    pub snapshots: Vec<Snapshot>,
}

impl<P: Protocol> RunResult<P> {
    pub fn snapshot(&self, label: &str) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.label == label)
    }
}

/// Steps `pop` until a condition in `stop` fires.
pub fn run<'h, P: Protocol>(
    mut pop: Population<P>,
    protocol: &P,
    rng: &mut SimRng,
    stop: &StopCondition,
    mut hooks: Vec<Box<dyn SnapshotHook<P> + 'h>>,
) -> RunResult<P> {
    let mut fired = vec![false; hooks.len()];
    let mut snapshots = Vec::new();
    let stop_reason = loop {
        if let Some(reason) = stop.check(protocol, &pop) {
            break reason;
        }
        pop.step(protocol, rng);
        for (hook, done) in hooks.iter_mut().zip(fired.iter_mut()) {
            if *done {
                continue;
            }
            if let Some(payload) = hook.check(&pop) {
                *done = true;
                snapshots.push(Snapshot {
                    label: hook.label().to_string(),
                    step: pop.step_count(),
                    payload,
                });
            }
        }
    };
    RunResult {
        steps: pop.step_count(),
        parallel_time: pop.parallel_time(),
        stop_reason,
        final_population: pop,
        snapshots,
    }
}
