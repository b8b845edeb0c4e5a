//! Population size estimation with a unique leader.
//!
//! The leader starts an epidemic of `a` states among the `q` agents and keeps
//! two counters: `c_q` for meetings with uninfected agents and `c_a` for
//! meetings with infected ones. While fewer than half the agents are infected
//! `c_q` pulls ahead; once infected agents dominate, `c_a` catches up and the
//! leader halts on `c_q == c_a`, holding `2^(c_q + 1)` as its estimate.
//!
//! Rules, in order:
//!
//! 1. `(l(0,0), q) -> (l(1,0), a)`
//! 2. `(a, q) -> (a, a)`
//! 3. `(l(cq,ca), q) -> (l(cq+1,ca), q)` if `cq > ca`
//! 4. `(l(cq,ca), a) -> (l(cq,ca+1), a)` if `cq > ca`
//! 5. `(l(cq,ca), _) -> (halt(cq), _)` if `cq == ca`

use crate::engine::{Protocol, RandomDraw, Tally};

use super::{apply_rules, Rule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PseState {
    Q,
    A,
    Leader { cq: u32, ca: u32 },
    /// Absorbing; keeps `cq` for the readout.
    Halt { cq: u32 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PseTally {
    pub q: usize,
    pub a: usize,
    pub leaders: usize,
    pub halted: usize,
}

impl PseTally {
    fn slot(&mut self, s: &PseState) -> &mut usize {
        match s {
            PseState::Q => &mut self.q,
            PseState::A => &mut self.a,
            PseState::Leader { .. } => &mut self.leaders,
            PseState::Halt { .. } => &mut self.halted,
        }
    }
}

impl Tally<PseState> for PseTally {
    fn add(&mut self, s: &PseState) {
        *self.slot(s) += 1;
    }

    fn remove(&mut self, s: &PseState) {
        *self.slot(s) -= 1;
    }
}

fn start_epidemic(x: PseState, y: PseState) -> Option<(PseState, PseState)> {
    match (x, y) {
        (PseState::Leader { cq: 0, ca: 0 }, PseState::Q) => Some((PseState::Leader { cq: 1, ca: 0 }, PseState::A)),
        _ => None,
    }
}

fn spread(x: PseState, y: PseState) -> Option<(PseState, PseState)> {
    (x == PseState::A && y == PseState::Q).then_some((PseState::A, PseState::A))
}

fn count_q(x: PseState, y: PseState) -> Option<(PseState, PseState)> {
    match (x, y) {
        (PseState::Leader { cq, ca }, PseState::Q) if cq > ca => Some((PseState::Leader { cq: cq + 1, ca }, PseState::Q)),
        _ => None,
    }
}

fn count_a(x: PseState, y: PseState) -> Option<(PseState, PseState)> {
    match (x, y) {
        (PseState::Leader { cq, ca }, PseState::A) if cq > ca => Some((PseState::Leader { cq, ca: ca + 1 }, PseState::A)),
        _ => None,
    }
}

fn halt(x: PseState, y: PseState) -> Option<(PseState, PseState)> {
    match x {
        PseState::Leader { cq, ca } if cq == ca => Some((PseState::Halt { cq }, y)),
        _ => None,
    }
}

const RULES: [Rule<PseState>; 5] = [start_epidemic, spread, count_q, count_a, halt];

pub fn pse_delta(x: PseState, y: PseState) -> (PseState, PseState) {
    apply_rules(x, y, &RULES)
}

/// `2^(c_q + 1)` for a halted leader; `None` for any other state or if the
/// estimate overflows `u64`.
pub fn pse_estimate(state: PseState) -> Option<u64> {
    match state {
        PseState::Halt { cq } => 1u64.checked_shl(cq.checked_add(1)?),
        _ => None,
    }
}

/// Leader counters once at least `floor(n/2)` agents carry `a`.
pub fn half_infection_counters(states: &[PseState], tally: &PseTally) -> Option<(u32, u32)> {
    if tally.a < states.len() / 2 {
        return None;
    }
    states.iter().find_map(|s| match *s {
        PseState::Leader { cq, ca } => Some((cq, ca)),
        _ => None,
    })
}

/// The PSE protocol: one leader with counters `(0, 0)`, the rest `q`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pse;

impl Protocol for Pse {
    type State = PseState;
    type Tally = PseTally;

    fn name(&self) -> &'static str {
        "pse"
    }

    fn initial_states(&self, n: usize) -> Vec<PseState> {
        let mut v = vec![PseState::Q; n];
        v[0] = PseState::Leader { cq: 0, ca: 0 };
        v
    }

    fn empty_tally(&self) -> PseTally {
        PseTally::default()
    }

    fn delta<D: RandomDraw>(&self, x: PseState, y: PseState, _rng: &mut D) -> (PseState, PseState) {
        pse_delta(x, y)
    }

    fn is_halted(&self, tally: &PseTally, _n: usize) -> bool {
        tally.halted > 0
    }

    /// The leader's output is final once it has halted.
    fn is_stabilized(&self, tally: &PseTally, n: usize) -> bool {
        self.is_halted(tally, n)
    }
}

#[cfg(test)]
mod tests {
    use super::PseState::*;
    use super::*;

    fn l(cq: u32, ca: u32) -> PseState {
        Leader { cq, ca }
    }

    #[test]
    fn first_meeting_starts_the_epidemic() {
        assert_eq!(pse_delta(l(0, 0), Q), (l(1, 0), A));
        assert_eq!(pse_delta(Q, l(0, 0)), (A, l(1, 0)));
    }

    #[test]
    fn infection_spreads() {
        assert_eq!(pse_delta(A, Q), (A, A));
        assert_eq!(pse_delta(Q, A), (A, A));
    }

    #[test]
    fn leader_counts_both_kinds() {
        assert_eq!(pse_delta(l(2, 1), Q), (l(3, 1), Q));
        assert_eq!(pse_delta(A, l(3, 2)), (A, l(3, 3)));
    }

    #[test]
    fn equal_counters_halt_on_next_meeting() {
        let (leader, _) = pse_delta(l(3, 2), A);
        assert_eq!(leader, l(3, 3));
        assert_eq!(pse_delta(leader, Q), (Halt { cq: 3 }, Q));
        assert_eq!(pse_delta(A, leader), (A, Halt { cq: 3 }));
    }

    #[test]
    fn unmatched_pairs_are_identity() {
        assert_eq!(pse_delta(A, A), (A, A));
        assert_eq!(pse_delta(Q, Q), (Q, Q));
        assert_eq!(pse_delta(Halt { cq: 4 }, Q), (Halt { cq: 4 }, Q));
        assert_eq!(pse_delta(A, Halt { cq: 4 }), (A, Halt { cq: 4 }));
    }

    #[test]
    fn estimate_readout() {
        assert_eq!(pse_estimate(Halt { cq: 0 }), Some(2));
        assert_eq!(pse_estimate(Halt { cq: 9 }), Some(1024));
        assert_eq!(pse_estimate(l(9, 3)), None);
        assert_eq!(pse_estimate(Q), None);
        assert_eq!(pse_estimate(Halt { cq: 63 }), None);
    }

    #[test]
    fn half_infection_threshold_is_floor() {
        let states = [l(2, 0), A, A, Q];
        let tally = PseTally { q: 1, a: 2, leaders: 1, halted: 0 };
        assert_eq!(half_infection_counters(&states, &tally), Some((2, 0)));
        let states = [l(2, 0), A, Q, Q];
        let tally = PseTally { q: 2, a: 1, leaders: 1, halted: 0 };
        assert_eq!(half_infection_counters(&states, &tally), None);
    }
}
