//! Exponent tuples and the counting/enumeration helpers built on them.
//!
//! `MultiIndex` orders *graded*: first by total degree, then lexicographically.
//! That is the iteration order of every coefficient table in the crate. Plain
//! lexicographic comparison is available through [`lex_compare`].

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    /// The all-zero index θ.
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The standard index e_i (0-based `i`).
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Componentwise sum. Lengths must agree.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise `self - other`, or `None` if some entry would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    /// True if every entry of `self` is ≥ the matching entry of `other`.
    pub fn dominates(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    pub fn scaled(&self, k: u32) -> MultiIndex {
        MultiIndex(self.0.iter().map(|e| e * k).collect())
    }

    pub(crate) fn with_entry(&self, i: usize, value: u32) -> MultiIndex {
        let mut e = self.0.clone();
        e[i] = value;
        MultiIndex(e)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl From<&[u32]> for MultiIndex {
    fn from(v: &[u32]) -> Self {
        MultiIndex(v.to_vec())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Lexicographic comparison: decided by the first differing coordinate.
pub fn lex_compare(a: &MultiIndex, b: &MultiIndex) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.0.cmp(&b.0))
}

/// Number of multi-indices in ℕ₀ⁿ of total degree `k`, i.e. C(n+k−1, n−1).
pub fn multiindex_count(n: usize, k: u32) -> u64 {
    if n == 0 {
        return u64::from(k == 0);
    }
    num_integer::binomial((n as u64) + u64::from(k) - 1, (n as u64) - 1)
}

/// All multi-indices of length `n` and total degree `k`, in increasing lex order.
pub fn enumerate_degree(n: usize, k: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    if n == 0 {
        if k == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return out;
    }
    let mut current = vec![0u32; n];
    fill_degree(&mut current, 0, k, &mut out);
    out
}

fn fill_degree(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for e in 0..=remaining {
        current[pos] = e;
        fill_degree(current, pos + 1, remaining - e, out);
    }
}

/// All multi-indices of length `n` with total degree ≤ `max_degree`, graded order.
pub fn enumerate_up_to(n: usize, max_degree: u32) -> Vec<MultiIndex> {
    (0..=max_degree)
        .flat_map(|k| enumerate_degree(n, k))
        .collect()
}

/// Nonnegative solutions (v₀,…,v_k) of v₀+…+v_k = m and v₁+2v₂+…+k·v_k = k,
/// returned in increasing lexicographic order.
pub fn enumerate_partition_solutions(m: u32, k: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut v = vec![0u32; k as usize + 1];
    partition_rec(&mut v, k as usize, k, m, &mut out);
    out.sort();
    out
}

// Assigns v[part] for part = k, k-1, ..., 1; v[0] takes whatever count is left.
fn partition_rec(v: &mut [u32], part: usize, degree_left: u32, count_left: u32, out: &mut Vec<Vec<u32>>) {
    if part == 0 {
        if degree_left == 0 {
            v[0] = count_left;
            out.push(v.to_vec());
            v[0] = 0;
        }
        return;
    }
    let max_here = (degree_left / part as u32).min(count_left);
    for c in 0..=max_here {
        v[part] = c;
        partition_rec(v, part - 1, degree_left - c * part as u32, count_left - c, out);
    }
    v[part] = 0;
}
