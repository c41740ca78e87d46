use serde::Serialize;

use super::DrawingDistribution;

/// Coupons sharing one drawing probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Group {
    /// Per-coupon drawing probability.
    pub q: f64,
    /// Number of coupons in the group.
    pub size: usize,
}

/// Partition of the coupons by equal drawing probability, largest probability first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupDecomposition {
    groups: Vec<Group>,
    #[serde(skip)]
    assignment: Vec<usize>,
}

impl GroupDecomposition {
    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    /// Number of groups, `G`.
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.groups.iter().map(|g| g.size as u64).collect()
    }

    pub fn coupons(&self) -> usize {
        self.assignment.len()
    }

    /// Group index of coupon `i`.
    pub fn group_of(&self, i: usize) -> usize {
        self.assignment[i]
    }
}

/// Groups coupons by exact equality of their probabilities.
pub fn group_decompose(dist: &DrawingDistribution) -> GroupDecomposition {
    match dist {
        DrawingDistribution::Uniform { n } => GroupDecomposition {
            groups: vec![Group {
                q: 1.0 / *n as f64,
                size: *n,
            }],
            assignment: vec![0; *n],
        },
        DrawingDistribution::Explicit(p) => {
            let mut order: Vec<usize> = (0..p.len()).collect();
            order.sort_by(|&a, &b| p[b].total_cmp(&p[a]));
            let mut groups: Vec<Group> = Vec::new();
            let mut assignment = vec![0; p.len()];
            for i in order {
                match groups.last_mut() {
                    Some(g) if g.q == p[i] => g.size += 1,
                    _ => groups.push(Group { q: p[i], size: 1 }),
                }
                assignment[i] = groups.len() - 1;
            }
            GroupDecomposition { groups, assignment }
        }
    }
}
