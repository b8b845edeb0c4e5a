//! Leader election with a rough upper bound `n^b` on the population size.
//!
//! Agents start fresh. Leaders carry a tuple `(r, e)`, a random number in
//! `[1, m]` and a round, plus a counter. Followers copy and spread the
//! winning tuple. A leader that meets anything it beats or ties bumps its
//! counter; at the threshold `T = ceil(b log2 n)` it enters the next round
//! with a fresh random number. At the round cap `R` the round is frozen and
//! the counter clamps at `T`, after which the unique surviving leader and
//! its followers form a silent configuration.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::engine::{Protocol, RandomDraw, Tally};
use crate::error::{Error, Result};

/// `(r, e)`: ordered by round first, then by random number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LeTuple {
    pub r: u32,
    pub e: u32,
}

impl LeTuple {
    pub fn new(r: u32, e: u32) -> Self {
        Self { r, e }
    }
}

impl Ord for LeTuple {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.e, self.r).cmp(&(other.e, other.r))
    }
}

impl PartialOrd for LeTuple {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Whether `t1` wins `t2`: a later round, or the same round and a larger `r`.
pub fn le_tuple_wins(t1: LeTuple, t2: LeTuple) -> bool {
    t1.e > t2.e || (t1.e == t2.e && t1.r > t2.r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LeState {
    Fresh,
    Leader { tuple: LeTuple, counter: u32 },
    Follower { tuple: LeTuple },
}

impl LeState {
    pub fn tuple(&self) -> Option<LeTuple> {
        match *self {
            LeState::Fresh => None,
            LeState::Leader { tuple, .. } | LeState::Follower { tuple } => Some(tuple),
        }
    }

    pub fn is_leader(&self) -> bool {
        matches!(self, LeState::Leader { .. })
    }
}

/// `ceil(b * log2 n)`, at least 1.
pub fn le_threshold(n: usize, b: f64) -> Result<u32> {
    check_n_b(n, b)?;
    Ok(((b * (n as f64).log2()).ceil() as u32).max(1))
}

/// `ceil((2b log2 n - log2(b log2^2 n)) / log2 m)`, at least 1.
pub fn le_round_cap(n: usize, b: f64, m: u32) -> Result<u32> {
    check_n_b(n, b)?;
    if m < 2 {
        return Err(Error::InvalidParameter(format!("m must be >= 2, got {m}")));
    }
    let log_n = (n as f64).log2();
    let numerator = 2.0 * b * log_n - (b * log_n * log_n).log2();
    let cap = (numerator / f64::from(m).log2()).ceil();
    Ok(if cap < 1.0 { 1 } else { cap as u32 })
}

fn check_n_b(n: usize, b: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidPopulationSize(n));
    }
    if !(b >= 1.0 && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("b must be a finite value >= 1, got {b}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeParams {
    /// Largest random number a leader can draw.
    pub m: u32,
    /// Counter threshold `T`.
    pub threshold: u32,
    /// Round cap `R`.
    pub round_cap: u32,
    /// When set, a leader at the cap still advances its round if the
    /// counter trigger came from a leader–leader meeting.
    pub cap_reentry: bool,
}

impl LeParams {
    pub fn new(m: u32, threshold: u32, round_cap: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!("m must be >= 2, got {m}")));
        }
        if threshold < 1 || round_cap < 1 {
            return Err(Error::InvalidParameter(format!(
                "threshold and round cap must be >= 1, got T={threshold} R={round_cap}"
            )));
        }
        Ok(Self {
            m,
            threshold,
            round_cap,
            cap_reentry: false,
        })
    }

    /// Derives `T` and `R` from the population size, `b` and `m`.
    pub fn for_population(n: usize, b: f64, m: u32) -> Result<Self> {
        Self::new(m, le_threshold(n, b)?, le_round_cap(n, b, m)?)
    }

    pub fn with_cap_reentry(mut self, on: bool) -> Self {
        self.cap_reentry = on;
        self
    }
}

/// Counts by kind plus how many agents hold each tuple.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LeTally {
    pub fresh: usize,
    pub leaders: usize,
    pub followers: usize,
    pub tuples: HashMap<LeTuple, usize>,
}

impl Tally<LeState> for LeTally {
    fn add(&mut self, s: &LeState) {
        match s {
            LeState::Fresh => self.fresh += 1,
            LeState::Leader { .. } => self.leaders += 1,
            LeState::Follower { .. } => self.followers += 1,
        }
        if let Some(t) = s.tuple() {
            *self.tuples.entry(t).or_insert(0) += 1;
        }
    }

    fn remove(&mut self, s: &LeState) {
        match s {
            LeState::Fresh => self.fresh -= 1,
            LeState::Leader { .. } => self.leaders -= 1,
            LeState::Follower { .. } => self.followers -= 1,
        }
        if let Some(t) = s.tuple() {
            let count = self.tuples.get_mut(&t).expect("tuple missing from tally");
            *count -= 1;
            if *count == 0 {
                self.tuples.remove(&t);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeaderElection {
    pub params: LeParams,
}

impl LeaderElection {
    pub fn new(params: LeParams) -> Self {
        Self { params }
    }

    /// Counter increment followed by the round-change check.
    fn bump<D: RandomDraw>(&self, tuple: LeTuple, counter: u32, met_leader: bool, rng: &mut D) -> LeState {
        let p = &self.params;
        let counter = counter + 1;
        if counter < p.threshold {
            return LeState::Leader { tuple, counter };
        }
        if tuple.e < p.round_cap || (p.cap_reentry && met_leader) {
            LeState::Leader {
                tuple: LeTuple::new(rng.draw_uniform(1, p.m), tuple.e + 1),
                counter: 0,
            }
        } else {
            LeState::Leader {
                tuple,
                counter: p.threshold,
            }
        }
    }

    /// `(leader, follower)` in that orientation.
    fn leader_meets_follower<D: RandomDraw>(
        &self,
        lt: LeTuple,
        counter: u32,
        ft: LeTuple,
        rng: &mut D,
    ) -> (LeState, LeState) {
        if le_tuple_wins(ft, lt) {
            (LeState::Follower { tuple: ft }, LeState::Follower { tuple: ft })
        } else {
            // Winning or equal: the follower ends up with the leader's tuple.
            (self.bump(lt, counter, false, rng), LeState::Follower { tuple: lt })
        }
    }

    pub fn le_delta<D: RandomDraw>(&self, x: LeState, y: LeState, rng: &mut D) -> (LeState, LeState) {
        use LeState::*;
        match (x, y) {
            (Fresh, Fresh) => {
                let tuple = LeTuple::new(rng.draw_uniform(1, self.params.m), 1);
                (Leader { tuple, counter: 0 }, Follower { tuple })
            }
            (Follower { tuple }, Fresh) => (x, Follower { tuple }),
            (Fresh, Follower { tuple }) => (Follower { tuple }, y),
            (Leader { tuple, counter }, Fresh) => (self.bump(tuple, counter, false, rng), Follower { tuple }),
            (Fresh, Leader { tuple, counter }) => (Follower { tuple }, self.bump(tuple, counter, false, rng)),
            (Follower { tuple: s }, Follower { tuple: t }) => {
                let w = s.max(t);
                (Follower { tuple: w }, Follower { tuple: w })
            }
            (Leader { tuple: s, counter: c }, Leader { tuple: t, counter: d }) => {
                if le_tuple_wins(t, s) {
                    (Follower { tuple: t }, self.bump(t, d, true, rng))
                } else {
                    (self.bump(s, c, true, rng), Follower { tuple: s })
                }
            }
            (Leader { tuple, counter }, Follower { tuple: ft }) => self.leader_meets_follower(tuple, counter, ft, rng),
            (Follower { tuple: ft }, Leader { tuple, counter }) => {
                let (l, f) = self.leader_meets_follower(tuple, counter, ft, rng);
                (f, l)
            }
        }
    }
}

impl Protocol for LeaderElection {
    type State = LeState;
    type Tally = LeTally;

    fn name(&self) -> &'static str {
        "le"
    }

    fn initial_states(&self, n: usize) -> Vec<LeState> {
        vec![LeState::Fresh; n]
    }

    fn empty_tally(&self) -> LeTally {
        LeTally::default()
    }

    fn delta<D: RandomDraw>(&self, x: LeState, y: LeState, rng: &mut D) -> (LeState, LeState) {
        self.le_delta(x, y, rng)
    }

    fn is_stabilized(&self, tally: &LeTally, _n: usize) -> bool {
        if tally.leaders != 1 || tally.fresh != 0 || tally.tuples.len() != 1 {
            return false;
        }
        tally.tuples.keys().all(|t| t.e >= self.params.round_cap)
    }
}

/// Direct scan: one leader, no fresh agents, leader at the round cap and
/// every follower holding the leader's tuple.
pub fn le_stabilized(states: &[LeState], params: &LeParams) -> bool {
    let mut leader = None;
    for s in states {
        match s {
            LeState::Fresh => return false,
            LeState::Leader { tuple, .. } => {
                if leader.replace(*tuple).is_some() {
                    return false;
                }
            }
            LeState::Follower { .. } => {}
        }
    }
    let Some(lt) = leader else { return false };
    lt.e >= params.round_cap
        && states
            .iter()
            .all(|s| !matches!(s, LeState::Follower { tuple } if *tuple != lt))
}
