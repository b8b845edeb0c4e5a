use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::protocols::ProtocolKind;

use super::runner::RunRecord;

/// Per-replicate quantity that can be summarized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    Steps,
    ParallelTime,
    LeadersFinal,
    LeadersAtDeadline,
    /// 1 when exactly one leader was present at the deadline, else 0.
    UniqueAtDeadline,
    Estimate,
    /// `log2(estimate) / log2(n)`.
    EstimateRatio,
    CqHalf,
    CaHalf,
    CqFinal,
}

impl Metric {
    pub const ALL: [Metric; 10] = [
        Metric::Steps,
        Metric::ParallelTime,
        Metric::LeadersFinal,
        Metric::LeadersAtDeadline,
        Metric::UniqueAtDeadline,
        Metric::Estimate,
        Metric::EstimateRatio,
        Metric::CqHalf,
        Metric::CaHalf,
        Metric::CqFinal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Steps => "steps",
            Metric::ParallelTime => "parallel_time",
            Metric::LeadersFinal => "leaders_final",
            Metric::LeadersAtDeadline => "leaders_at_deadline",
            Metric::UniqueAtDeadline => "unique_at_deadline",
            Metric::Estimate => "estimate",
            Metric::EstimateRatio => "estimate_ratio",
            Metric::CqHalf => "cq_half",
            Metric::CaHalf => "ca_half",
            Metric::CqFinal => "cq_final",
        }
    }

    pub fn value(self, r: &RunRecord) -> Option<f64> {
        match self {
            Metric::Steps => Some(r.steps as f64),
            Metric::ParallelTime => Some(r.parallel_time),
            Metric::LeadersFinal => r.leaders_final.map(|v| v as f64),
            Metric::LeadersAtDeadline => r.leaders_at_deadline.map(|v| v as f64),
            Metric::UniqueAtDeadline => r.leaders_at_deadline.map(|v| if v == 1 { 1.0 } else { 0.0 }),
            Metric::Estimate => r.estimate.map(|v| v as f64),
            Metric::EstimateRatio => r.estimate.map(|v| (v as f64).log2() / (r.n as f64).log2()),
            Metric::CqHalf => r.cq_half.map(f64::from),
            Metric::CaHalf => r.ca_half.map(f64::from),
            Metric::CqFinal => r.cq_final.map(f64::from),
        }
    }

    /// Metrics that carry a value for `protocol`.
    pub fn for_protocol(protocol: ProtocolKind) -> &'static [Metric] {
        match protocol {
            ProtocolKind::Epidemic => &[Metric::Steps, Metric::ParallelTime],
            ProtocolKind::Elimination => &[Metric::Steps, Metric::ParallelTime, Metric::LeadersFinal],
            ProtocolKind::Pse => &[
                Metric::Steps,
                Metric::ParallelTime,
                Metric::Estimate,
                Metric::EstimateRatio,
                Metric::CqHalf,
                Metric::CaHalf,
                Metric::CqFinal,
            ],
            ProtocolKind::Le => &[
                Metric::Steps,
                Metric::ParallelTime,
                Metric::LeadersFinal,
                Metric::LeadersAtDeadline,
                Metric::UniqueAtDeadline,
            ],
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown metric '{s}'"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub protocol: ProtocolKind,
    pub metric: Metric,
    pub n: usize,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (divisor `count - 1`); 0 for a single value.
    pub std: f64,
    pub min: f64,
    pub median: f64,
    pub p95: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted values.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn row(protocol: ProtocolKind, metric: Metric, n: usize, mut values: Vec<f64>) -> SummaryRow {
    values.sort_by(f64::total_cmp);
    let count = values.len();
    let mean = values.iter().sum::<f64>() / count as f64;
    let std = if count > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    SummaryRow {
        protocol,
        metric,
        n,
        count,
        mean,
        std,
        min: values[0],
        median: quantile(&values, 0.5),
        p95: quantile(&values, 0.95),
        max: values[count - 1],
    }
}

/// One row per `(protocol, n)` with the statistics of `metric`. Records
/// without a value for the metric are skipped; groups with no values yield no
/// row.
pub fn summarize(records: &[RunRecord], metric: Metric) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(ProtocolKind, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        if let Some(v) = metric.value(r) {
            groups.entry((r.protocol, r.n)).or_default().push(v);
        }
    }
    groups
        .into_iter()
        .map(|((protocol, n), values)| row(protocol, metric, n, values))
        .collect()
}
