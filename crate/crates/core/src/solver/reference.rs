//! Hash-keyed layered program, written directly against the successor
//! functions of [`crate::model`]. Slower than the indexed kernel but simple
//! enough to serve as its cross-check.

use std::hash::Hash;
use std::time::Instant;

use rustc_hash::FxHashMap;

use super::{accumulate_successor, MomentsSum, Representation, SolveOptions, SolveResult, StateMoments, Tally};
use crate::error::{CcpError, Result};
use crate::model::{
    group_decompose, successors_ba, successors_dpsa, successors_uda, FullState, GroupDecomposition, GroupedState,
    MultiplicityState, Problem, Transition,
};
use crate::summation::CompensatedSum;

/// A state space the layered program can walk.
pub trait ChainModel {
    type State: Clone + Eq + Hash + Ord;

    fn initial(&self) -> Self::State;
    fn completed(&self, s: &Self::State) -> usize;
    fn p_complete(&self, s: &Self::State) -> f64;
    fn successors(&self, s: &Self::State) -> Result<Vec<Transition<Self::State>>>;
    /// Flat integer image of a state, for reporting.
    fn flatten(&self, s: &Self::State) -> Vec<u32>;
}

pub struct FullChain<'a> {
    pub problem: &'a Problem,
}

impl ChainModel for FullChain<'_> {
    type State = FullState;

    fn initial(&self) -> FullState {
        FullState::initial(self.problem.n())
    }
    fn completed(&self, s: &FullState) -> usize {
        s.completed(self.problem.t())
    }
    fn p_complete(&self, s: &FullState) -> f64 {
        s.p_complete(self.problem.dist(), self.problem.t())
    }
    fn successors(&self, s: &FullState) -> Result<Vec<Transition<FullState>>> {
        successors_ba(s, self.problem)
    }
    fn flatten(&self, s: &FullState) -> Vec<u32> {
        s.0.clone()
    }
}

pub struct MultiplicityChain {
    pub n: usize,
    pub k: usize,
    pub t: usize,
}

impl ChainModel for MultiplicityChain {
    type State = MultiplicityState;

    fn initial(&self) -> MultiplicityState {
        MultiplicityState::initial(self.n, self.t)
    }
    fn completed(&self, s: &MultiplicityState) -> usize {
        s.completed()
    }
    fn p_complete(&self, s: &MultiplicityState) -> f64 {
        s.p_complete(self.n)
    }
    fn successors(&self, s: &MultiplicityState) -> Result<Vec<Transition<MultiplicityState>>> {
        successors_uda(s, self.n, self.t, self.k)
    }
    fn flatten(&self, s: &MultiplicityState) -> Vec<u32> {
        s.0.clone()
    }
}

pub struct GroupedChain {
    pub decomposition: GroupDecomposition,
    pub k: usize,
    pub t: usize,
}

impl ChainModel for GroupedChain {
    type State = GroupedState;

    fn initial(&self) -> GroupedState {
        GroupedState::initial(&self.decomposition, self.t)
    }
    fn completed(&self, s: &GroupedState) -> usize {
        s.completed()
    }
    fn p_complete(&self, s: &GroupedState) -> f64 {
        s.p_complete(&self.decomposition)
    }
    fn successors(&self, s: &GroupedState) -> Result<Vec<Transition<GroupedState>>> {
        successors_dpsa(s, &self.decomposition, self.t, self.k)
    }
    fn flatten(&self, s: &GroupedState) -> Vec<u32> {
        s.0.concat()
    }
}

/// Result of the hashed kernel together with the terminal states it reached.
#[derive(Debug, Clone)]
pub struct HashedRun {
    pub result: SolveResult,
    /// Flattened terminal states in the order they were absorbed.
    pub terminals: Vec<Vec<u32>>,
}

pub fn run_hashed(problem: &Problem, representation: Representation, options: &SolveOptions) -> Result<HashedRun> {
    let (k, t) = (problem.k(), problem.t());
    match representation {
        Representation::Full => run_chain(&FullChain { problem }, k, representation, options),
        Representation::Multiplicity => {
            if !problem.dist().is_uniform() {
                return Err(CcpError::NotUniform);
            }
            run_chain(&MultiplicityChain { n: problem.n(), k, t }, k, representation, options)
        }
        Representation::Grouped => run_chain(
            &GroupedChain {
                decomposition: group_decompose(problem.dist()),
                k,
                t,
            },
            k,
            representation,
            options,
        ),
    }
}

/// Algorithm: walk layers in tracked-draw order; terminal states are absorbed,
/// every other state pushes its moments to its successors.
pub fn run_chain<M: ChainModel>(
    model: &M,
    k: usize,
    representation: Representation,
    options: &SolveOptions,
) -> Result<HashedRun> {
    let started = Instant::now();
    let mut tally = Tally::default();
    let mut terminals = Vec::new();
    let mut layer: Vec<(M::State, StateMoments)> = vec![(model.initial(), StateMoments::INITIAL)];
    let mut b = 0;
    loop {
        let mut next: FxHashMap<M::State, MomentsSum> = FxHashMap::default();
        let (mut live, mut terminal) = (0u64, 0u64);
        let mut live_mass = CompensatedSum::ZERO;
        for (state, m) in &layer {
            tally.states_expanded += 1;
            if model.completed(state) >= k {
                terminal += 1;
                tally.terminal.add(m);
                terminals.push(model.flatten(state));
                continue;
            }
            live += 1;
            live_mass.add(m.p);
            let pf = model.p_complete(state);
            let successors = model.successors(state)?;
            tally.edges += successors.len() as u64;
            for tr in successors {
                let d = accumulate_successor(m, tr.prob, pf)?;
                next.entry(tr.successor).or_default().add(&d);
            }
        }
        tally.check_cap(options.state_cap)?;
        tally.close_layer(b, live, terminal, live_mass.value());
        if next.is_empty() {
            break;
        }
        let mut sorted: Vec<(M::State, StateMoments)> = next.into_iter().map(|(s, acc)| (s, acc.value())).collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        layer = sorted;
        b += 1;
    }
    Ok(HashedRun {
        result: tally.finish(representation.engine(), started),
        terminals,
    })
}
