use crate::error::{CcpError, Result};
use crate::summation::CompensatedSum;

/// Reach probability and probability-weighted draw moments of one state.
///
/// `u1 = p * E[D | X = s]` and `u2 = p * E[D^2 | X = s]`, where `D` counts all
/// draws (tracked or not) made until the state is entered.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StateMoments {
    pub p: f64,
    pub u1: f64,
    pub u2: f64,
}

impl StateMoments {
    pub const INITIAL: StateMoments = StateMoments {
        p: 1.0,
        u1: 0.0,
        u2: 0.0,
    };
    pub const ZERO: StateMoments = StateMoments {
        p: 0.0,
        u1: 0.0,
        u2: 0.0,
    };

    /// Moments of "reach this state, then leave it": the holding time is
    /// geometric with success probability `1 - p_complete`, independent of the past.
    #[inline]
    pub fn propagated(&self, p_complete: f64) -> StateMoments {
        let hold = 1.0 - p_complete;
        let g1 = 1.0 / hold;
        let g2 = (1.0 + p_complete) / (hold * hold);
        StateMoments {
            p: self.p,
            u1: self.u1 + self.p * g1,
            u2: self.u2 + 2.0 * self.u1 * g1 + self.p * g2,
        }
    }

    #[inline]
    pub fn scaled(&self, w: f64) -> StateMoments {
        StateMoments {
            p: w * self.p,
            u1: w * self.u1,
            u2: w * self.u2,
        }
    }

    /// Conditional expectation `E[D | X = s]`, if the state is reachable.
    pub fn expectation(&self) -> Option<f64> {
        (self.p > 0.0).then(|| self.u1 / self.p)
    }

    pub fn second_moment(&self) -> Option<f64> {
        (self.p > 0.0).then(|| self.u2 / self.p)
    }
}

/// Contribution of one ancestor to a successor's weighted moments:
/// `dP = e P'`, `dU1 = e (U1' + P' g1)`, `dU2 = e (U2' + 2 U1' g1 + P' g2)`
/// with `g1 = 1/(1-pF)` and `g2 = (1+pF)/(1-pF)^2`.
pub fn accumulate_successor(ancestor: &StateMoments, edge_prob: f64, p_complete: f64) -> Result<StateMoments> {
    if !(p_complete < 1.0) {
        return Err(CcpError::AbsorbingAncestor { p_complete });
    }
    Ok(ancestor.propagated(p_complete).scaled(edge_prob))
}

/// Compensated accumulator for the three weighted moments.
#[derive(Debug, Clone, Copy, Default)]
pub struct MomentsSum {
    p: CompensatedSum,
    u1: CompensatedSum,
    u2: CompensatedSum,
}

impl MomentsSum {
    #[inline]
    pub fn add(&mut self, m: &StateMoments) {
        self.p.add(m.p);
        self.u1.add(m.u1);
        self.u2.add(m.u2);
    }

    #[inline]
    pub fn add_scaled(&mut self, w: f64, m: &StateMoments) {
        self.p.add(w * m.p);
        self.u1.add(w * m.u1);
        self.u2.add(w * m.u2);
    }

    pub fn merge(&mut self, other: &MomentsSum) {
        self.p.merge(&other.p);
        self.u1.merge(&other.u1);
        self.u2.merge(&other.u2);
    }

    #[inline]
    pub fn value(&self) -> StateMoments {
        StateMoments {
            p: self.p.value(),
            u1: self.u1.value(),
            u2: self.u2.value(),
        }
    }
}
