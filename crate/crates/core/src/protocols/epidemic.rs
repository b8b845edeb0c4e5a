//! One-way epidemic `(a, b) -> (a, a)`.

use crate::engine::{Protocol, RandomDraw, Tally};

use super::{apply_rules, Rule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EpidemicState {
    Infected,
    Susceptible,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EpidemicTally {
    pub infected: usize,
}

impl Tally<EpidemicState> for EpidemicTally {
    fn add(&mut self, s: &EpidemicState) {
        if *s == EpidemicState::Infected {
            self.infected += 1;
        }
    }

    fn remove(&mut self, s: &EpidemicState) {
        if *s == EpidemicState::Infected {
            self.infected -= 1;
        }
    }
}

fn infect(x: EpidemicState, y: EpidemicState) -> Option<(EpidemicState, EpidemicState)> {
    use EpidemicState::*;
    (x == Infected && y == Susceptible).then_some((Infected, Infected))
}

const RULES: [Rule<EpidemicState>; 1] = [infect];

pub fn epidemic_delta(x: EpidemicState, y: EpidemicState) -> (EpidemicState, EpidemicState) {
    apply_rules(x, y, &RULES)
}

/// One infected agent, the rest susceptible; stabilizes when all are infected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Epidemic;

impl Protocol for Epidemic {
    type State = EpidemicState;
    type Tally = EpidemicTally;

    fn name(&self) -> &'static str {
        "epidemic"
    }

    fn initial_states(&self, n: usize) -> Vec<EpidemicState> {
        let mut v = vec![EpidemicState::Susceptible; n];
        v[0] = EpidemicState::Infected;
        v
    }

    fn empty_tally(&self) -> EpidemicTally {
        EpidemicTally::default()
    }

    fn delta<D: RandomDraw>(&self, x: EpidemicState, y: EpidemicState, _rng: &mut D) -> (EpidemicState, EpidemicState) {
        epidemic_delta(x, y)
    }

    fn is_stabilized(&self, tally: &EpidemicTally, n: usize) -> bool {
        tally.infected == n
    }
}
