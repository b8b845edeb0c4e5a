//! Pairwise elimination `(l, l) -> (l, f)`, the linear-time baseline.

use crate::engine::{Protocol, RandomDraw, Tally};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElimState {
    Leader,
    Follower,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ElimTally {
    pub leaders: usize,
}

impl Tally<ElimState> for ElimTally {
    fn add(&mut self, s: &ElimState) {
        if *s == ElimState::Leader {
            self.leaders += 1;
        }
    }

    fn remove(&mut self, s: &ElimState) {
        if *s == ElimState::Leader {
            self.leaders -= 1;
        }
    }
}

/// The initiator survives a leader meeting.
pub fn elim_delta(x: ElimState, y: ElimState) -> (ElimState, ElimState) {
    match (x, y) {
        (ElimState::Leader, ElimState::Leader) => (ElimState::Leader, ElimState::Follower),
        other => other,
    }
}

/// Everyone starts as a leader; stabilizes at a single leader.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Elimination;

impl Protocol for Elimination {
    type State = ElimState;
    type Tally = ElimTally;

    fn name(&self) -> &'static str {
        "elimination"
    }

    fn initial_states(&self, n: usize) -> Vec<ElimState> {
        vec![ElimState::Leader; n]
    }

    fn empty_tally(&self) -> ElimTally {
        ElimTally::default()
    }

    fn delta<D: RandomDraw>(&self, x: ElimState, y: ElimState, _rng: &mut D) -> (ElimState, ElimState) {
        elim_delta(x, y)
    }

    fn is_stabilized(&self, tally: &ElimTally, _n: usize) -> bool {
        tally.leaders == 1
    }
}

#[cfg(test)]
mod tests {
    use super::ElimState::*;
    use super::*;

    #[test]
    fn leaders_meet() {
        assert_eq!(elim_delta(Leader, Leader), (Leader, Follower));
    }

    #[test]
    fn mixed_pairs_unchanged() {
        assert_eq!(elim_delta(Leader, Follower), (Leader, Follower));
        assert_eq!(elim_delta(Follower, Leader), (Follower, Leader));
        assert_eq!(elim_delta(Follower, Follower), (Follower, Follower));
    }
}
