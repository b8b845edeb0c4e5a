//! Brute-force oracles shared by the integration tests and the acceptance
//! runner. Nothing here calls into the run loop; the explorers drive the
//! transition functions directly.

#![allow(dead_code)]

use std::collections::HashMap;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use popsim::engine::{draw_pair, RandomDraw, SimRng};
use popsim::protocols::{le_stabilized, LeParams, LeState, LeaderElection};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Returns `value` for every draw and records whether a draw happened.
pub struct Scripted {
    pub value: u32,
    pub used: bool,
}

impl RandomDraw for Scripted {
    fn draw_uniform(&mut self, lo: u32, hi: u32) -> u32 {
        assert!(lo <= self.value && self.value <= hi);
        self.used = true;
        self.value
    }
}

#[derive(Debug, Default)]
pub struct LeExploration {
    pub reachable: usize,
    pub edges: usize,
    pub terminal_components: usize,
    /// Terminal configurations that are not a silent single-leader state.
    pub bad_terminals: Vec<Vec<LeState>>,
    /// Reachable configurations with neither a fresh agent nor a leader.
    pub leaderless: Vec<Vec<LeState>>,
}

/// Enumerates every configuration reachable from all-fresh (agents are
/// anonymous, so configurations are sorted multisets) under every ordered
/// pair and every random draw, then inspects the terminal strongly connected
/// components.
pub fn explore_le(n: usize, params: LeParams) -> LeExploration {
    let proto = LeaderElection::new(params);
    let start = vec![LeState::Fresh; n];
    let mut index: HashMap<Vec<LeState>, NodeIndex> = HashMap::new();
    let mut graph: DiGraph<Vec<LeState>, ()> = DiGraph::new();
    let root = graph.add_node(start.clone());
    index.insert(start, root);
    let mut frontier = vec![root];
    while let Some(node) = frontier.pop() {
        let config = graph[node].clone();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for v in 1..=params.m {
                    let mut draw = Scripted { value: v, used: false };
                    let (x, y) = proto.le_delta(config[i], config[j], &mut draw);
                    let mut next = config.clone();
                    next[i] = x;
                    next[j] = y;
                    next.sort();
                    let target = match index.get(&next) {
                        Some(&t) => t,
                        None => {
                            let t = graph.add_node(next.clone());
                            index.insert(next, t);
                            frontier.push(t);
                            t
                        }
                    };
                    if target != node {
                        graph.update_edge(node, target, ());
                    }
                    if !draw.used {
                        break;
                    }
                }
            }
        }
    }

    let mut report = LeExploration {
        reachable: graph.node_count(),
        edges: graph.edge_count(),
        ..Default::default()
    };
    for cfg in graph.node_weights() {
        if !cfg.iter().any(|s| matches!(s, LeState::Fresh | LeState::Leader { .. })) {
            report.leaderless.push(cfg.clone());
        }
    }
    let sccs = tarjan_scc(&graph);
    let mut component = vec![0usize; graph.node_count()];
    for (c, members) in sccs.iter().enumerate() {
        for m in members {
            component[m.index()] = c;
        }
    }
    for (c, members) in sccs.iter().enumerate() {
        let leaves = members
            .iter()
            .any(|&m| graph.neighbors(m).any(|t| component[t.index()] != c));
        if leaves {
            continue;
        }
        report.terminal_components += 1;
        for &m in members {
            let cfg = &graph[m];
            let leaders = cfg.iter().filter(|s| s.is_leader()).count();
            if leaders != 1 || !le_stabilized(cfg, &params) {
                report.bad_terminals.push(cfg.clone());
            }
        }
    }
    report
}

/// Pearson chi-square statistic of `draws` scheduler draws at population size
/// `n` against the uniform distribution on the `n(n-1)` ordered pairs, with
/// the critical value at significance `alpha`.
pub fn scheduler_chi_square(seed: u64, n: usize, draws: usize, alpha: f64) -> (f64, f64) {
    let mut rng = SimRng::new(seed);
    let mut counts = vec![0u64; n * n];
    for _ in 0..draws {
        let d = draw_pair(&mut rng, n);
        assert_ne!(d.initiator, d.responder);
        counts[d.initiator * n + d.responder] += 1;
    }
    let cells = n * (n - 1);
    let expected = draws as f64 / cells as f64;
    let mut stat = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                assert_eq!(counts[i * n + j], 0);
                continue;
            }
            let o = counts[i * n + j] as f64;
            stat += (o - expected).powi(2) / expected;
        }
    }
    let critical = ChiSquared::new((cells - 1) as f64).unwrap().inverse_cdf(1.0 - alpha);
    (stat, critical)
}

/// Expected steps to full infection for the one-way epidemic, solved on the
/// full agent-level Markov chain over infected subsets (`n <= 12`).
pub fn epidemic_absorption_brute_force(n: usize) -> f64 {
    assert!((2..=12).contains(&n));
    let full = (1usize << n) - 1;
    let pairs = (n * (n - 1)) as f64;
    let mut expected = vec![0.0f64; 1 << n];
    // Infection only grows, so process subsets from largest popcount down.
    let mut order: Vec<usize> = (1..=full).collect();
    order.sort_by_key(|s| std::cmp::Reverse(s.count_ones()));
    for s in order {
        if s == full {
            continue;
        }
        let mut stay = 0.0;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let a = s >> i & 1 == 1;
                let b = s >> j & 1 == 1;
                let next = if a && !b {
                    s | 1 << j
                } else if b && !a {
                    s | 1 << i
                } else {
                    s
                };
                if next == s {
                    stay += 1.0 / pairs;
                } else {
                    acc += expected[next] / pairs;
                }
            }
        }
        expected[s] = (1.0 + acc) / (1.0 - stay);
    }
    expected[1]
}

pub mod invariants {
    //! Step-by-step trajectory checks. Each returns `Err` describing the
    //! first violation.

    use popsim::engine::{Population, Protocol, SimRng};
    use popsim::protocols::{Epidemic, EpidemicState, LeParams, LeState, LeTuple, LeaderElection, Pse, PseState};

    /// Size, step accounting, tally consistency and the effective flag.
    pub fn engine_contract<P: Protocol>(protocol: &P, n: usize, seed: u64, steps: usize) -> Result<(), String> {
        let mut pop = Population::new(protocol, n).map_err(|e| e.to_string())?;
        let mut rng = SimRng::new(seed);
        for k in 0..steps {
            let before = pop.agents().to_vec();
            let count = pop.step_count();
            let effective = pop.step(protocol, &mut rng);
            if pop.n() != n || pop.agents().len() != n {
                return Err(format!("step {k}: size changed"));
            }
            if pop.step_count() != count + 1 {
                return Err(format!("step {k}: step_count did not advance by one"));
            }
            if pop.tally() != &pop.recount(protocol) {
                return Err(format!("step {k}: cached tally diverged"));
            }
            let changed = before.as_slice() != pop.agents();
            if changed != effective {
                return Err(format!("step {k}: effective={effective} but changed={changed}"));
            }
            let moved = before.iter().zip(pop.agents()).filter(|(a, b)| a != b).count();
            if moved > 2 {
                return Err(format!("step {k}: {moved} agents changed in one interaction"));
            }
        }
        Ok(())
    }

    pub fn epidemic_monotone(n: usize, seed: u64, steps: usize) -> Result<(), String> {
        let mut pop = Population::new(&Epidemic, n).map_err(|e| e.to_string())?;
        let mut rng = SimRng::new(seed);
        let mut infected = 1;
        for k in 0..steps {
            pop.step(&Epidemic, &mut rng);
            let now = pop.agents().iter().filter(|s| **s == EpidemicState::Infected).count();
            if now < infected {
                return Err(format!("step {k}: infected count fell from {infected} to {now}"));
            }
            if infected == n && now != n {
                return Err(format!("step {k}: left the absorbing state"));
            }
            infected = now;
        }
        Ok(())
    }

    /// One leader-or-halt agent, `c_q >= c_a`, infection non-decreasing,
    /// halt absorbing.
    pub fn pse_trajectory(n: usize, seed: u64, steps: usize) -> Result<(), String> {
        let mut pop = Population::new(&Pse, n).map_err(|e| e.to_string())?;
        let mut rng = SimRng::new(seed);
        let mut infected = 0usize;
        let mut halted: Option<PseState> = None;
        for k in 0..steps {
            pop.step(&Pse, &mut rng);
            let heads: Vec<PseState> = pop
                .agents()
                .iter()
                .copied()
                .filter(|s| matches!(s, PseState::Leader { .. } | PseState::Halt { .. }))
                .collect();
            if heads.len() != 1 {
                return Err(format!("step {k}: {} leader/halt agents", heads.len()));
            }
            match heads[0] {
                PseState::Leader { cq, ca } => {
                    if cq < ca {
                        return Err(format!("step {k}: c_q={cq} < c_a={ca}"));
                    }
                    if halted.is_some() {
                        return Err(format!("step {k}: halted leader resumed"));
                    }
                }
                h @ PseState::Halt { .. } => {
                    if halted.is_some_and(|prev| prev != h) {
                        return Err(format!("step {k}: halt state changed"));
                    }
                    halted = Some(h);
                }
                _ => unreachable!(),
            }
            let now = pop.agents().iter().filter(|s| **s == PseState::A).count();
            if now < infected {
                return Err(format!("step {k}: infected count fell"));
            }
            infected = now;
        }
        Ok(())
    }

    /// Fresh+Leader count non-increasing and at least one, population-wide
    /// maximum tuple non-decreasing, followers never revert.
    pub fn le_trajectory(n: usize, params: LeParams, seed: u64, steps: usize) -> Result<(), String> {
        let proto = LeaderElection::new(params);
        let mut pop = Population::new(&proto, n).map_err(|e| e.to_string())?;
        let mut rng = SimRng::new(seed);
        let mut contenders = n;
        let mut max_tuple: Option<LeTuple> = None;
        let mut was_follower = vec![false; n];
        for k in 0..steps {
            pop.step(&proto, &mut rng);
            let agents = pop.agents();
            let now = agents
                .iter()
                .filter(|s| matches!(s, LeState::Fresh | LeState::Leader { .. }))
                .count();
            if now == 0 {
                return Err(format!("step {k}: no fresh agent or leader left"));
            }
            if now > contenders {
                return Err(format!("step {k}: fresh+leader count rose from {contenders} to {now}"));
            }
            contenders = now;
            let m = agents.iter().filter_map(LeState::tuple).max();
            if m < max_tuple {
                return Err(format!("step {k}: maximum tuple decreased from {max_tuple:?} to {m:?}"));
            }
            max_tuple = m;
            for (i, s) in agents.iter().enumerate() {
                match s {
                    LeState::Follower { .. } => was_follower[i] = true,
                    _ if was_follower[i] => return Err(format!("step {k}: follower {i} became {s:?}")),
                    _ => {}
                }
                if let LeState::Leader { tuple, counter } = s {
                    if *counter > params.threshold {
                        return Err(format!("step {k}: counter {counter} above threshold"));
                    }
                    if !params.cap_reentry && tuple.e > params.round_cap {
                        return Err(format!("step {k}: round {} above cap", tuple.e));
                    }
                    if !(1..=params.m).contains(&tuple.r) {
                        return Err(format!("step {k}: random number {} out of range", tuple.r));
                    }
                }
            }
        }
        Ok(())
    }
}
