//! Closed-form sizes of the tracked-draw chains.
//!
//! Counts are exact big integers. The grouped-chain bounds are real numbers.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{CcpError, Result};

/// Vertices and edges of a chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainSize {
    #[serde(serialize_with = "as_decimal")]
    pub vertices: BigUint,
    #[serde(serialize_with = "as_decimal")]
    pub edges: BigUint,
}

fn as_decimal<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::Error;
    let raw = serde_json::value::RawValue::from_string(v.to_string()).map_err(S::Error::custom)?;
    raw.serialize(s)
}

/// Upper bounds on the grouped chain's size for any decomposition into `G` groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DpsaBounds {
    pub vertices: f64,
    pub edges: f64,
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn check(n: u64, k: u64, t: u64) -> Result<()> {
    if k < 1 || k > n || t < 1 {
        return Err(CcpError::BadBounds {
            n: n as usize,
            k: k as usize,
            t: t as usize,
        });
    }
    Ok(())
}

/// `sum_{h=0}^{k} C(n,h) t^(n-h)`: vectors in `[0,t]^n` with at most `k` entries equal to `t`.
fn full_vertices(n: u64, k: u64, t: u64) -> BigUint {
    let base = BigUint::from(t);
    (0..=k.min(n)).map(|h| binomial(n, h) * base.pow((n - h) as u32)).sum()
}

/// Chain size of the full-state representation.
pub fn count_ba(n: u64, k: u64, t: u64) -> Result<ChainSize> {
    check(n, k, t)?;
    // each edge raises one coupon from below t; the other n-1 coupons form a
    // vertex of the (n-1, k-1) chain
    let edges = BigUint::from(n * t) * full_vertices(n - 1, k - 1, t);
    Ok(ChainSize {
        vertices: full_vertices(n, k, t),
        edges,
    })
}

/// Chain size of the multiplicity-vector representation (uniform drawing).
pub fn count_uda(n: u64, k: u64, t: u64) -> Result<ChainSize> {
    check(n, k, t)?;
    let mut vertices = binomial(n + t, n);
    let mut edges = BigUint::from(t) * binomial(n + t - 1, t);
    if k < n {
        vertices -= binomial(n + t - k - 1, n - k - 1);
        edges -= BigUint::from(t) * binomial(n + t - k - 1, t);
    }
    Ok(ChainSize { vertices, edges })
}

/// Chain size of the grouped representation with `k = n`, given the group sizes.
pub fn count_dpsa(sizes: &[u64], t: u64) -> Result<ChainSize> {
    let n: u64 = sizes.iter().sum();
    if sizes.is_empty() || sizes.contains(&0) || t < 1 {
        return Err(CcpError::BadBounds {
            n: n as usize,
            k: n as usize,
            t: t as usize,
        });
    }
    let factors: Vec<BigUint> = sizes.iter().map(|&c| binomial(c + t, t)).collect();
    let vertices: BigUint = factors.iter().product();
    // c/(c+t) * C(c+t, t) = C(c+t-1, t), so the edge count stays integral
    let mut edges = BigUint::zero();
    for (g, &c) in sizes.iter().enumerate() {
        let mut term = BigUint::from(t) * binomial(c + t - 1, t);
        for (h, f) in factors.iter().enumerate() {
            if h != g {
                term *= f;
            }
        }
        edges += term;
    }
    Ok(ChainSize { vertices, edges })
}

/// Real-valued `C(x + t, t)`.
fn real_binomial(x: f64, t: u64) -> f64 {
    (1..=t).map(|y| (x + y as f64) / y as f64).product()
}

/// Bounds for `G` groups over `n` coupons with `k = n`, evaluated at `c = n/G`.
pub fn dpsa_bounds(n: u64, groups: u64, t: u64) -> Result<DpsaBounds> {
    if n < 1 || groups < 1 || groups > n || t < 1 {
        return Err(CcpError::BadBounds {
            n: n as usize,
            k: n as usize,
            t: t as usize,
        });
    }
    let c = n as f64 / groups as f64;
    let vertices = real_binomial(c, t).powi(groups as i32);
    let edges = t as f64 * (n as f64 / (c + t as f64)) * vertices;
    Ok(DpsaBounds { vertices, edges })
}
