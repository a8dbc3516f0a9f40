//! Block-by-block assembly of a unit composition in two variables.
//!
//! For exponent m ≥ k the degree-k part of (b + h)^m only depends on the
//! solutions (v₁,…,v_k) of Σ i·v_i = k, grouped by s = Σ v_i:
//!
//! ```text
//! d_{k,s}(g) = Σ_{v₁+…+v_k = s, v₁+2v₂+…+k·v_k = k} g[1]^{v₁}⋯g[k]^{v_k} / (v₁!⋯v_k!)
//! ```
//!
//! and the (k₁,k₂) block of f∘(g₁,g₂) is
//!
//! ```text
//! w_{k₁,k₂} = Σ_{s₁,s₂} s₁!·s₂!·c_{s₁,s₂}·d_{k₁,s₁}(g₁)·d_{k₂,s₂}(g₂)
//! ```
//!
//! with c_{s₁,s₂} the condition series at β = (s₁,s₂). This module sums each
//! c over growing squares max(α₁,α₂) ≤ m rather than by total degree, and
//! builds the d's from partition enumeration rather than from powers of h,
//! so it is an independent check on [`compose_unit`](super::compose_unit).

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::multiindex::{enumerate_partition_solutions, MultiIndex};
use crate::series::{factorial, Rational, TruncatedSeries};

use super::convergence::{classify, shift_weight, ConvergenceReport, ConvergenceStatus, SummationBudget};
use super::oracle::{rational_to_f64, CoefficientOracle};

/// d_{k,s}(g) for 1 ≤ s ≤ k ≤ order(g).
pub fn d_term(g: &TruncatedSeries, k: u32, s: u32) -> Result<TruncatedSeries> {
    if s < 1 || s > k {
        return Err(Error::arg(format!("need 1 ≤ s ≤ k, got s = {s}, k = {k}")));
    }
    if i64::from(k) > i64::from(g.order()) {
        return Err(Error::arg(format!(
            "degree {k} exceeds truncation order {}",
            g.order()
        )));
    }
    Ok(d_term_ext(g, k, s))
}

// Also covers the degenerate pair: d_{0,0} = 1 and d_{k,0} = 0 for k > 0.
fn d_term_ext(g: &TruncatedSeries, k: u32, s: u32) -> TruncatedSeries {
    let blocks: Vec<TruncatedSeries> = (0..=k).map(|d| g.block_unchecked(d)).collect();
    let mut out = TruncatedSeries::zero(g.n(), g.order());
    for v in enumerate_partition_solutions(s, k) {
        if v[0] != 0 {
            continue;
        }
        let mut term = TruncatedSeries::one(g.n(), g.order());
        let mut denom = num_bigint::BigInt::one();
        for (d, &count) in v.iter().enumerate().skip(1) {
            if count > 0 {
                term = term.mul(&blocks[d].pow(count)).expect("same shape");
                denom *= factorial(count);
            }
        }
        out = out
            .add(&term.scale(&Rational::new(num_bigint::BigInt::one(), denom)))
            .expect("same shape");
    }
    out
}

/// The (k₁,k₂) block contribution w_{k₁,k₂} of f∘(g₁,g₂), with its condition
/// series summed along the diagonal of the (α₁,α₂) square.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockContribution {
    pub k1: u32,
    pub k2: u32,
    pub coefficients: BTreeMap<MultiIndex, f64>,
    pub reports: Vec<ConvergenceReport>,
}

fn s_range(k: u32) -> std::ops::RangeInclusive<u32> {
    if k == 0 {
        0..=0
    } else {
        1..=k
    }
}

// Square-ordered partial sums of Σ_{α ≥ s} C(α₁,s₁)C(α₂,s₂) a_α b₁^{α₁−s₁} b₂^{α₂−s₂}.
fn square_sum(
    table: &[Vec<f64>],
    b_theta: &[f64; 2],
    s: &MultiIndex,
    budget: &SummationBudget,
) -> ConvergenceReport {
    let m_max = table.len() - 1;
    let (s1, s2) = (s.exponents()[0] as usize, s.exponents()[1] as usize);
    let start = s1.max(s2);
    let mut sums = Vec::new();
    let mut graded = Vec::new();
    let mut acc = 0.0;
    let mut terms_used = 0;
    for m in start..=m_max {
        let mut shell = 0.0;
        // shell max(α₁, α₂) = m with α ≥ s: the row α₂ = m, then the column α₁ = m
        let row = (s1..=m).map(|a1| (a1, m));
        let col = (s2..m).map(|a2| (m, a2));
        for (a1, a2) in row.chain(col) {
            let a = table[a1][a2];
            terms_used += 1;
            if a == 0.0 {
                continue;
            }
            let alpha = MultiIndex::new(vec![a1 as u32, a2 as u32]);
            shell += a * shift_weight(&alpha, s, b_theta);
        }
        acc += shell;
        graded.push(shell);
        sums.push(acc);
    }
    classify(s.clone(), &sums, &graded, terms_used, false, budget)
}

fn oracle_square(f: &CoefficientOracle, side: usize) -> Vec<Vec<f64>> {
    (0..=side)
        .map(|a1| {
            (0..=side)
                .map(|a2| f.coefficient_f64(&MultiIndex::new(vec![a1 as u32, a2 as u32])))
                .collect()
        })
        .collect()
}

/// Computes w_{k₁,k₂} for a two-variable oracle and inner pair (g₁, g₂).
///
/// The square side is `budget.max_degree`. Any diverged or undecided
/// condition series is reported as an error, as in `compose_unit`.
pub fn unit_coefficient_by_blocks(
    f: &CoefficientOracle,
    g1: &TruncatedSeries,
    g2: &TruncatedSeries,
    k1: u32,
    k2: u32,
    budget: &SummationBudget,
) -> Result<BlockContribution> {
    let table = oracle_square(f, budget.max_degree as usize);
    block_with_table(f, &table, g1, g2, k1, k2, budget)
}

fn block_with_table(
    f: &CoefficientOracle,
    table: &[Vec<f64>],
    g1: &TruncatedSeries,
    g2: &TruncatedSeries,
    k1: u32,
    k2: u32,
    budget: &SummationBudget,
) -> Result<BlockContribution> {
    budget.validate()?;
    if f.n() != 2 || g1.n() != 2 || g2.n() != 2 {
        return Err(Error::arg("block assembly is implemented for two variables only"));
    }
    if g1.order() != g2.order() {
        return Err(Error::OrderMismatch {
            left: g1.order(),
            right: g2.order(),
        });
    }
    if i64::from(k1 + k2) > i64::from(g1.order()) {
        return Err(Error::arg(format!(
            "block ({k1},{k2}) exceeds truncation order {}",
            g1.order()
        )));
    }
    let b_theta = [
        rational_to_f64(&g1.constant_term()),
        rational_to_f64(&g2.constant_term()),
    ];
    let mut coefficients: BTreeMap<MultiIndex, f64> = BTreeMap::new();
    let mut reports = Vec::new();
    for s1 in s_range(k1) {
        let d1 = d_term_ext(g1, k1, s1);
        if d1.is_zero() {
            continue;
        }
        for s2 in s_range(k2) {
            let d2 = d_term_ext(g2, k2, s2);
            if d2.is_zero() {
                continue;
            }
            let product = d1.mul(&d2)?;
            if product.is_zero() {
                continue;
            }
            let s = MultiIndex::new(vec![s1, s2]);
            let report = square_sum(table, &b_theta, &s, budget);
            match report.status {
                ConvergenceStatus::Diverged => return Err(Error::Diverged { beta: s }),
                ConvergenceStatus::Inconclusive => return Err(Error::Undecided { beta: s }),
                ConvergenceStatus::Converged => {}
            }
            let c = report.value.expect("converged") * rational_to_f64(&Rational::from_integer(factorial(s1) * factorial(s2)));
            for (gamma, coef) in product.terms() {
                *coefficients.entry(gamma.clone()).or_insert(0.0) += c * rational_to_f64(coef);
            }
            reports.push(report);
        }
    }
    coefficients.retain(|_, v| !v.is_zero());
    Ok(BlockContribution {
        k1,
        k2,
        coefficients,
        reports,
    })
}

/// Σ_{k₁+k₂ ≤ order} w_{k₁,k₂}: the whole composition rebuilt from blocks.
pub fn assemble_by_blocks(
    f: &CoefficientOracle,
    g1: &TruncatedSeries,
    g2: &TruncatedSeries,
    order: u32,
    budget: &SummationBudget,
) -> Result<BTreeMap<MultiIndex, f64>> {
    let table = oracle_square(f, budget.max_degree as usize);
    let g1 = g1.retruncate(order as i32)?;
    let g2 = g2.retruncate(order as i32)?;
    let mut out: BTreeMap<MultiIndex, f64> = BTreeMap::new();
    for k in 0..=order {
        for k1 in 0..=k {
            let w = block_with_table(f, &table, &g1, &g2, k1, k - k1, budget)?;
            for (gamma, c) in w.coefficients {
                *out.entry(gamma).or_insert(0.0) += c;
            }
        }
    }
    out.retain(|_, v| *v != 0.0);
    Ok(out)
}
