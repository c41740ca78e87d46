//! First and second moments of the absorption time of the raw chain.
//!
//! States are all count vectors in `[0, t]^n`, indexed mixed-radix with coupon
//! `n-1` least significant. Every draw is a step: an incomplete coupon moves
//! the state up, a complete one leaves it in place. With `Q` the transient
//! block,
//!
//! ```text
//! (I - Q) m1 = 1
//! (I - Q) m2 = 1 + 2 Q m1
//! ```
//!
//! Small systems are solved by dense Gaussian elimination with partial
//! pivoting. Every move raises the index, so `I - Q` is upper triangular and
//! larger systems are solved by sparse back substitution instead.

use super::OracleResult;
use crate::error::{CcpError, Result};
use crate::model::Problem;

/// Largest raw state space the oracle accepts.
pub const BRUTE_FORCE_STATE_CAP: u128 = 20_000;

/// Systems up to this many transient states go through dense elimination.
const DENSE_LIMIT: usize = 400;

const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Sparse row of `Q`: `(column, probability)`, self-loop first.
type Row = Vec<(usize, f64)>;

type Solver<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>> + 'a;

struct RawChain {
    /// Transient states in increasing index order.
    rows: Vec<Row>,
}

fn raw_chain(problem: &Problem) -> Result<RawChain> {
    let (n, k, t) = (problem.n(), problem.k(), problem.t());
    let radix = (t + 1) as u128;
    let states = (0..n)
        .try_fold(1u128, |acc, _| acc.checked_mul(radix))
        .unwrap_or(u128::MAX);
    if states > BRUTE_FORCE_STATE_CAP {
        return Err(CcpError::TooLarge {
            states,
            cap: BRUTE_FORCE_STATE_CAP,
        });
    }
    let states = states as usize;
    let p = problem.dist().probabilities();
    let mut place = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        place[i] = place[i + 1] * (t + 1);
    }

    let mut transient_index = vec![usize::MAX; states];
    let mut counts = vec![0usize; n];
    let mut transient = Vec::new();
    for (s, index) in transient_index.iter_mut().enumerate() {
        let mut rem = s;
        for i in 0..n {
            counts[i] = rem / place[i];
            rem %= place[i];
        }
        if counts.iter().filter(|&&c| c == t).count() < k {
            *index = transient.len();
            transient.push(s);
        }
    }

    let mut rows = Vec::with_capacity(transient.len());
    for &s in &transient {
        let mut rem = s;
        for i in 0..n {
            counts[i] = rem / place[i];
            rem %= place[i];
        }
        let mut row: Row = vec![(transient_index[s], 0.0)];
        for i in 0..n {
            if counts[i] == t {
                row[0].1 += p[i];
            } else {
                let j = transient_index[s + place[i]];
                if j != usize::MAX {
                    row.push((j, p[i]));
                }
            }
        }
        rows.push(row);
    }
    Ok(RawChain { rows })
}

fn q_times(rows: &[Row], x: &[f64]) -> Vec<f64> {
    rows.iter()
        .map(|row| row.iter().map(|&(j, q)| q * x[j]).sum())
        .collect()
}

/// `||(I - Q) x - b||_inf / (||I - Q||_inf ||x||_inf + ||b||_inf)`.
fn relative_residual(rows: &[Row], x: &[f64], b: &[f64]) -> f64 {
    let qx = q_times(rows, x);
    let mut r: f64 = 0.0;
    let mut a_norm: f64 = 0.0;
    for (i, row) in rows.iter().enumerate() {
        r = r.max((x[i] - qx[i] - b[i]).abs());
        let row_sum: f64 = row.iter().map(|&(j, q)| if j == i { (1.0 - q).abs() } else { q }).sum();
        a_norm = a_norm.max(row_sum.max(1.0));
    }
    let x_norm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let b_norm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    r / (a_norm * x_norm + b_norm)
}

/// LU factorization with partial pivoting of a dense row-major matrix.
struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl DenseLu {
    fn factor(mut a: Vec<f64>, n: usize) -> Result<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
                .expect("non-empty pivot range");
            if a[pivot * n + col] == 0.0 {
                return Err(CcpError::Numerical(format!("singular matrix at column {col}")));
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                perm.swap(pivot, col);
            }
            let d = a[col * n + col];
            for i in col + 1..n {
                let f = a[i * n + col] / d;
                if f == 0.0 {
                    continue;
                }
                a[i * n + col] = f;
                for j in col + 1..n {
                    a[i * n + j] -= f * a[col * n + j];
                }
            }
        }
        Ok(DenseLu { n, lu: a, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.lu[i * n + j] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.lu[i * n + j] * y[j];
            }
            y[i] /= self.lu[i * n + i];
        }
        y
    }
}

/// Back substitution on the upper-triangular `I - Q`.
fn triangular_solve(rows: &[Row], b: &[f64]) -> Result<Vec<f64>> {
    let mut x = vec![0.0; rows.len()];
    for i in (0..rows.len()).rev() {
        let row = &rows[i];
        let stay = row[0].1;
        if !(stay < 1.0) {
            return Err(CcpError::Numerical(format!("absorbing transient state {i}")));
        }
        let carried: f64 = row[1..].iter().map(|&(j, q)| q * x[j]).sum();
        x[i] = (b[i] + carried) / (1.0 - stay);
    }
    Ok(x)
}

fn check_residual(rows: &[Row], x: &[f64], b: &[f64]) -> Result<()> {
    let res = relative_residual(rows, x, b);
    if !(res <= RESIDUAL_TOLERANCE) {
        return Err(CcpError::Numerical(format!(
            "relative residual {res:e} exceeds {RESIDUAL_TOLERANCE:e}"
        )));
    }
    Ok(())
}

/// Exact mean and variance of the number of draws, from the raw chain.
pub fn brute_force_linear_solve(problem: &Problem) -> Result<OracleResult> {
    let chain = raw_chain(problem)?;
    let rows = &chain.rows;
    let m = rows.len();
    let ones = vec![1.0; m];

    let solve: Box<Solver> = if m <= DENSE_LIMIT {
        let mut a = vec![0.0; m * m];
        for (i, row) in rows.iter().enumerate() {
            a[i * m + i] = 1.0;
            for &(j, q) in row {
                a[i * m + j] -= q;
            }
        }
        let lu = DenseLu::factor(a, m)?;
        Box::new(move |b| Ok(lu.solve(b)))
    } else {
        Box::new(|b| triangular_solve(rows, b))
    };

    let m1 = solve(&ones)?;
    check_residual(rows, &m1, &ones)?;
    let b2: Vec<f64> = q_times(rows, &m1).iter().map(|v| 1.0 + 2.0 * v).collect();
    let m2 = solve(&b2)?;
    check_residual(rows, &m2, &b2)?;

    // the initial state (all zeros) has index 0 and is always transient
    let (e, e2) = (m1[0], m2[0]);
    Ok(OracleResult {
        expectation: e,
        variance: Some((e2 - e * e).max(0.0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DrawingDistribution;

    #[test]
    fn two_uniform_coupons() {
        let r = brute_force_linear_solve(&Problem::uniform(2, 2, 1).unwrap()).unwrap();
        assert!((r.expectation - 3.0).abs() < 1e-12);
        assert!((r.variance.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_coupon_is_deterministic() {
        let p = Problem::new(1, 1, 2, DrawingDistribution::explicit(vec![1.0])).unwrap();
        let r = brute_force_linear_solve(&p).unwrap();
        assert!((r.expectation - 2.0).abs() < 1e-12);
        assert!(r.variance.unwrap().abs() < 1e-12);
    }

    #[test]
    fn dense_and_triangular_agree() {
        let p = Problem::new(4, 3, 2, DrawingDistribution::explicit(vec![0.1, 0.2, 0.3, 0.4])).unwrap();
        let chain = raw_chain(&p).unwrap();
        let m = chain.rows.len();
        let mut a = vec![0.0; m * m];
        for (i, row) in chain.rows.iter().enumerate() {
            a[i * m + i] = 1.0;
            for &(j, q) in row {
                a[i * m + j] -= q;
            }
        }
        let ones = vec![1.0; m];
        let dense = DenseLu::factor(a, m).unwrap().solve(&ones);
        let tri = triangular_solve(&chain.rows, &ones).unwrap();
        for (x, y) in dense.iter().zip(&tri) {
            assert!((x - y).abs() <= 1e-12 * x.abs());
        }
    }

    #[test]
    fn rejects_large_chains() {
        let p = Problem::uniform(10, 10, 2).unwrap();
        assert!(matches!(
            brute_force_linear_solve(&p),
            Err(CcpError::TooLarge {
                states: 59049,
                cap: 20000
            })
        ));
    }
}
