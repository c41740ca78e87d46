//! The three state representations and their one-draw successor relations.
//!
//! Every successor list is conditioned on drawing an incomplete coupon, so the
//! probabilities of a non-terminal state's transitions sum to one. Lists are
//! produced in a canonical order: coupon index for full states, copy count `i`
//! for multiplicity vectors and `(g, i)` lexicographically for grouped states.

use serde::Serialize;

use super::{DrawingDistribution, GroupDecomposition, Problem};
use crate::error::{CcpError, Result};

/// One conditional step of the tracked-draw chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transition<S> {
    pub successor: S,
    pub prob: f64,
}

/// Copies held of every coupon, each capped at `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FullState(pub Vec<u32>);

/// `x[i]` = number of coupons holding exactly `i` copies, `i = 0..=t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MultiplicityState(pub Vec<u32>);

/// One multiplicity vector per probability group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GroupedState(pub Vec<Vec<u32>>);

impl FullState {
    pub fn initial(n: usize) -> Self {
        FullState(vec![0; n])
    }

    /// Number of complete coupons, `|F(s)|`.
    pub fn completed(&self, t: usize) -> usize {
        self.0.iter().filter(|&&c| c as usize == t).count()
    }

    /// Tracked draws so far.
    pub fn tracked(&self) -> usize {
        self.0.iter().map(|&c| c as usize).sum()
    }

    /// Probability of drawing an already complete coupon.
    pub fn p_complete(&self, dist: &DrawingDistribution, t: usize) -> f64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &c)| c as usize == t)
            .map(|(i, _)| dist.prob(i))
            .sum()
    }

    /// Count-of-counts image of the state.
    pub fn multiplicity(&self, t: usize) -> MultiplicityState {
        let mut x = vec![0; t + 1];
        for &c in &self.0 {
            x[c as usize] += 1;
        }
        MultiplicityState(x)
    }

    /// Per-group count-of-counts image of the state.
    pub fn grouped(&self, decomposition: &GroupDecomposition, t: usize) -> GroupedState {
        let mut gx = vec![vec![0; t + 1]; decomposition.len()];
        for (i, &c) in self.0.iter().enumerate() {
            gx[decomposition.group_of(i)][c as usize] += 1;
        }
        GroupedState(gx)
    }
}

impl MultiplicityState {
    pub fn initial(n: usize, t: usize) -> Self {
        let mut x = vec![0; t + 1];
        x[0] = n as u32;
        MultiplicityState(x)
    }

    pub fn completed(&self) -> usize {
        *self.0.last().expect("multiplicity vector has t+1 entries") as usize
    }

    /// `x_t / n`.
    pub fn p_complete(&self, n: usize) -> f64 {
        self.completed() as f64 / n as f64
    }
}

impl GroupedState {
    pub fn initial(decomposition: &GroupDecomposition, t: usize) -> Self {
        GroupedState(
            decomposition
                .groups()
                .iter()
                .map(|g| {
                    let mut x = vec![0; t + 1];
                    x[0] = g.size as u32;
                    x
                })
                .collect(),
        )
    }

    pub fn completed(&self) -> usize {
        self.0.iter().map(|x| *x.last().unwrap() as usize).sum()
    }

    /// `sum_g x[g][t] * q_g`.
    pub fn p_complete(&self, decomposition: &GroupDecomposition) -> f64 {
        self.0
            .iter()
            .zip(decomposition.groups())
            .map(|(x, g)| *x.last().unwrap() as f64 * g.q)
            .sum()
    }
}

pub fn successors_ba(state: &FullState, problem: &Problem) -> Result<Vec<Transition<FullState>>> {
    let t = problem.t();
    if state.0.len() != problem.n() {
        return Err(CcpError::DimensionMismatch {
            expected: problem.n(),
            got: state.0.len(),
        });
    }
    if state.completed(t) >= problem.k() {
        return Err(CcpError::TerminalState);
    }
    let dist = problem.dist();
    let hold = 1.0 - state.p_complete(dist, t);
    Ok(state
        .0
        .iter()
        .enumerate()
        .filter(|(_, &c)| (c as usize) < t)
        .map(|(i, _)| {
            let mut next = state.0.clone();
            next[i] += 1;
            Transition {
                successor: FullState(next),
                prob: dist.prob(i) / hold,
            }
        })
        .collect())
}

pub fn successors_uda(
    state: &MultiplicityState,
    n: usize,
    t: usize,
    k: usize,
) -> Result<Vec<Transition<MultiplicityState>>> {
    let x = &state.0;
    if x.len() != t + 1 {
        return Err(CcpError::DimensionMismatch {
            expected: t + 1,
            got: x.len(),
        });
    }
    let done = x[t] as usize;
    if done >= k {
        return Err(CcpError::TerminalState);
    }
    let incomplete = (n - done) as f64;
    Ok((0..t)
        .filter(|&i| x[i] > 0)
        .map(|i| {
            let mut next = x.clone();
            next[i] -= 1;
            next[i + 1] += 1;
            Transition {
                successor: MultiplicityState(next),
                prob: x[i] as f64 / incomplete,
            }
        })
        .collect())
}

pub fn successors_dpsa(
    state: &GroupedState,
    decomposition: &GroupDecomposition,
    t: usize,
    k: usize,
) -> Result<Vec<Transition<GroupedState>>> {
    if state.0.len() != decomposition.len() {
        return Err(CcpError::DimensionMismatch {
            expected: decomposition.len(),
            got: state.0.len(),
        });
    }
    if state.completed() >= k {
        return Err(CcpError::TerminalState);
    }
    let hold = 1.0 - state.p_complete(decomposition);
    let mut out = Vec::new();
    for (g, (x, group)) in state.0.iter().zip(decomposition.groups()).enumerate() {
        for i in 0..t {
            if x[i] == 0 {
                continue;
            }
            let mut next = state.0.clone();
            next[g][i] -= 1;
            next[g][i + 1] += 1;
            out.push(Transition {
                successor: GroupedState(next),
                prob: x[i] as f64 * group.q / hold,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::group_decompose;
    use std::collections::BTreeMap;

    fn example1() -> Problem {
        Problem::new(3, 2, 2, DrawingDistribution::explicit(vec![0.2, 0.3, 0.5])).unwrap()
    }

    fn probs<S>(ts: &[Transition<S>]) -> f64 {
        ts.iter().map(|t| t.prob).sum()
    }

    #[test]
    fn p_complete_all_representations() {
        let p = example1();
        assert_eq!(FullState(vec![1, 2, 0]).p_complete(p.dist(), 2), 0.3);
        assert_eq!(MultiplicityState(vec![3, 2, 1, 0]).p_complete(6), 0.0);

        let d = group_decompose(&DrawingDistribution::explicit(vec![0.35, 0.35, 0.15, 0.15]));
        let gs = GroupedState(vec![vec![0, 0, 2], vec![1, 1, 0]]);
        assert_eq!(gs.p_complete(&d), 2.0 * 0.35);
    }

    #[test]
    fn ba_successors_example() {
        let p = example1();
        let ts = successors_ba(&FullState(vec![1, 2, 0]), &p).unwrap();
        assert_eq!(ts.len(), 2);
        assert_eq!(ts[0].successor, FullState(vec![2, 2, 0]));
        assert_eq!(ts[0].prob, 0.2 / 0.7);
        assert_eq!(ts[1].successor, FullState(vec![1, 2, 1]));
        assert_eq!(ts[1].prob, 0.5 / 0.7);
        assert!((probs(&ts) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ba_single_coupon() {
        let p = Problem::new(1, 1, 2, DrawingDistribution::explicit(vec![1.0])).unwrap();
        let ts = successors_ba(&FullState(vec![0]), &p).unwrap();
        assert_eq!(
            ts,
            vec![Transition {
                successor: FullState(vec![1]),
                prob: 1.0
            }]
        );
    }

    #[test]
    fn ba_terminal() {
        let p = example1();
        assert_eq!(
            successors_ba(&FullState(vec![2, 2, 0]), &p),
            Err(CcpError::TerminalState)
        );
    }

    #[test]
    fn uda_successors_example() {
        let ts = successors_uda(&MultiplicityState(vec![3, 2, 1, 0]), 6, 3, 6).unwrap();
        let got: Vec<_> = ts.iter().map(|t| (t.successor.0.clone(), t.prob)).collect();
        assert_eq!(
            got,
            vec![
                (vec![2, 3, 1, 0], 3.0 / 6.0),
                (vec![3, 1, 2, 0], 2.0 / 6.0),
                (vec![3, 2, 0, 1], 1.0 / 6.0),
            ]
        );
    }

    #[test]
    fn uda_single_incomplete_and_conservation() {
        let ts = successors_uda(&MultiplicityState(vec![0, 1, 0]), 1, 2, 1).unwrap();
        assert_eq!(
            ts,
            vec![Transition {
                successor: MultiplicityState(vec![0, 0, 1]),
                prob: 1.0
            }]
        );
        let ts = successors_uda(&MultiplicityState(vec![1, 1, 0]), 2, 2, 2).unwrap();
        assert!((probs(&ts) - 1.0).abs() < 1e-12);
        assert_eq!(
            successors_uda(&MultiplicityState(vec![0, 0, 2]), 2, 2, 2),
            Err(CcpError::TerminalState)
        );
    }

    #[test]
    fn dpsa_successors() {
        let d = group_decompose(&DrawingDistribution::explicit(vec![0.7, 0.3]));
        let ts = successors_dpsa(&GroupedState(vec![vec![1, 0], vec![1, 0]]), &d, 1, 2).unwrap();
        assert_eq!(ts.len(), 2);
        assert_eq!(ts[0].successor, GroupedState(vec![vec![0, 1], vec![1, 0]]));
        assert_eq!(ts[0].prob, 0.7);
        assert_eq!(ts[1].successor, GroupedState(vec![vec![1, 0], vec![0, 1]]));
        assert_eq!(ts[1].prob, 0.3);

        let ts = successors_dpsa(&GroupedState(vec![vec![0, 1], vec![1, 0]]), &d, 1, 2).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].successor, GroupedState(vec![vec![0, 1], vec![0, 1]]));
        assert!((ts[0].prob - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dpsa_with_one_group_matches_uda() {
        let d = group_decompose(&DrawingDistribution::uniform(4));
        let x = vec![1, 2, 1, 0];
        let a = successors_dpsa(&GroupedState(vec![x.clone()]), &d, 3, 4).unwrap();
        let b = successors_uda(&MultiplicityState(x), 4, 3, 4).unwrap();
        assert_eq!(a.len(), b.len());
        for (ta, tb) in a.iter().zip(&b) {
            assert_eq!(ta.successor.0[0], tb.successor.0);
            assert!((ta.prob - tb.prob).abs() < 1e-15);
        }
    }

    fn all_full_states(n: usize, t: usize) -> Vec<FullState> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|s: Vec<u32>| {
                    (0..=t as u32).map(move |c| {
                        let mut s = s.clone();
                        s.push(c);
                        s
                    })
                })
                .collect();
        }
        out.into_iter().map(FullState).collect()
    }

    #[test]
    fn full_and_multiplicity_stepping_commute_under_uniform() {
        for n in 1..=5 {
            for t in 1..=3 {
                let p = Problem::uniform(n, n, t).unwrap();
                for s in all_full_states(n, t) {
                    if s.completed(t) >= n {
                        continue;
                    }
                    let mut merged: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
                    for tr in successors_ba(&s, &p).unwrap() {
                        *merged.entry(tr.successor.multiplicity(t).0).or_default() += tr.prob;
                    }
                    let uda = successors_uda(&s.multiplicity(t), n, t, n).unwrap();
                    assert_eq!(merged.len(), uda.len());
                    for tr in uda {
                        let m = merged[&tr.successor.0];
                        assert!((m - tr.prob).abs() < 1e-12, "{s:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn p_complete_agrees_between_full_and_grouped() {
        let dist = DrawingDistribution::explicit(vec![0.1, 0.25, 0.1, 0.3, 0.25]);
        let d = group_decompose(&dist);
        for s in all_full_states(5, 2) {
            let a = s.p_complete(&dist, 2);
            let b = s.grouped(&d, 2).p_complete(&d);
            assert!((a - b).abs() < 1e-15, "{s:?}");
        }
    }

    #[test]
    fn outgoing_probabilities_sum_to_one() {
        let dist = DrawingDistribution::explicit(vec![0.1, 0.25, 0.1, 0.3, 0.25]);
        let p = Problem::new(5, 4, 2, dist.clone()).unwrap();
        let d = group_decompose(&dist);
        for s in all_full_states(5, 2) {
            if s.completed(2) >= 4 {
                continue;
            }
            assert!((probs(&successors_ba(&s, &p).unwrap()) - 1.0).abs() < 1e-12);
            let g = s.grouped(&d, 2);
            assert!((probs(&successors_dpsa(&g, &d, 2, 4).unwrap()) - 1.0).abs() < 1e-12);
        }
    }
}
