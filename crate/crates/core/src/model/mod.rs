//! Problem instances, drawing distributions and the chain's state representations.

mod distribution;
mod groups;
mod problem;
mod state;

pub use distribution::DrawingDistribution;
pub use groups::{group_decompose, Group, GroupDecomposition};
pub use problem::{validate_problem, Normalization, Problem, NORMALIZATION_TOLERANCE, RENORMALIZE_TOLERANCE};
pub use state::{
    successors_ba, successors_dpsa, successors_uda, FullState, GroupedState, MultiplicityState, Transition,
};
