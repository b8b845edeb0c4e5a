//! Presets for the five standard plots: leader election time and uniqueness,
//! estimation time and accuracy, and the counters at half infection.

use std::fmt;
use std::str::FromStr;

use crate::protocols::ProtocolKind;

use super::runner::{DeadlineMode, ExperimentConfig};
use super::stats::Metric;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Figure {
    /// Leader election: stabilization time.
    Fig1a,
    /// Leader election: leaders alive at the `log^2 n / log log n` deadline.
    Fig1b,
    /// Size estimation: time to halt.
    Fig2a,
    /// Size estimation: estimate against actual size.
    Fig2b,
    /// Size estimation: leader counters at half infection.
    Fig3,
}

impl Figure {
    pub const ALL: [Figure; 5] = [Figure::Fig1a, Figure::Fig1b, Figure::Fig2a, Figure::Fig2b, Figure::Fig3];

    pub fn as_str(self) -> &'static str {
        match self {
            Figure::Fig1a => "fig1a",
            Figure::Fig1b => "fig1b",
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig3 => "fig3",
        }
    }

    pub fn protocol(self) -> ProtocolKind {
        match self {
            Figure::Fig1a | Figure::Fig1b => ProtocolKind::Le,
            Figure::Fig2a | Figure::Fig2b | Figure::Fig3 => ProtocolKind::Pse,
        }
    }

    pub fn metrics(self) -> &'static [Metric] {
        match self {
            Figure::Fig1a => &[Metric::ParallelTime, Metric::Steps],
            Figure::Fig1b => &[Metric::LeadersAtDeadline, Metric::UniqueAtDeadline],
            Figure::Fig2a => &[Metric::ParallelTime, Metric::Steps],
            Figure::Fig2b => &[Metric::Estimate, Metric::EstimateRatio],
            Figure::Fig3 => &[Metric::CqHalf, Metric::CaHalf],
        }
    }

    /// Experiment for this figure; leader-election figures always run to
    /// silence and snapshot the deadline.
    pub fn config(self, n_values: Vec<usize>, reps: usize, base_seed: u64) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(self.protocol(), n_values, reps, base_seed);
        cfg.deadline_mode = DeadlineMode::Silence;
        cfg
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Figure::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown figure '{s}' (expected fig1a, fig1b, fig2a, fig2b or fig3)"))
    }
}
