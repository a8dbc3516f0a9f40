//! Semi-decision procedure for the composability condition with unit inner
//! series, and the approximate composition it justifies.
//!
//! Write g_i = b_i + h_i with b_i the constant term and h_i a nonunit. Then
//!
//! ```text
//! f∘G = Σ_α a_α Π_i (b_i + h_i)^{α_i} = Σ_β c_β · h^β,
//! c_β = Σ_{α ≥ β} Π_i C(α_i, β_i) · a_α · Π_i b_i^{α_i − β_i},
//! ```
//!
//! and since val(h^β) ≥ |β| only |β| ≤ N matters for an N-jet. Each c_β is
//! a numerical series; the composition exists iff all of them converge. We
//! sum them in binary64 by total degree of α and classify the partial sums.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::{enumerate_up_to, MultiIndex};
use crate::series::TruncatedSeries;
use crate::vector::SeriesVector;

use super::oracle::{rational_to_f64, CoefficientOracle, SupportHint};
use super::{compose, compose_oracle, monomial_power};

/// Knobs for numerically summing a condition series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummationBudget {
    /// Largest total degree |α| summed.
    pub max_degree: u32,
    /// Relative spread allowed across the stabilization window.
    pub tolerance: f64,
    /// Partial sums beyond this magnitude count as divergence.
    pub bound: f64,
    /// Number of trailing partial sums that must agree.
    pub window: usize,
}

impl Default for SummationBudget {
    fn default() -> Self {
        SummationBudget {
            max_degree: 200,
            tolerance: 1e-9,
            bound: 1e12,
            window: 8,
        }
    }
}

impl SummationBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::arg("tolerance must be > 0"));
        }
        if !(self.bound > 0.0) {
            return Err(Error::arg("divergence bound must be > 0"));
        }
        if self.window < 2 {
            return Err(Error::arg("stabilization window must be ≥ 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvergenceStatus {
    Converged,
    Diverged,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DivergenceWitness {
    /// |S_m| exceeded the budget bound (or stopped being finite) at degree m.
    BoundExceeded { degree: u32, partial_sum: f64 },
    /// The degree-graded terms do not shrink: the largest term in the final
    /// window is at least the largest term in the first window.
    TermsDoNotVanish { head_max: f64, tail_max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub beta: MultiIndex,
    pub status: ConvergenceStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<f64>,
    pub terms_used: usize,
    pub partial_sum_trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<DivergenceWitness>,
}

impl ConvergenceReport {
    pub fn is_converged(&self) -> bool {
        self.status == ConvergenceStatus::Converged
    }
}

/// Nonzero oracle coefficients with |α| ≤ max degree, in binary64.
pub(crate) struct CoefficientTable {
    entries: Vec<(MultiIndex, f64)>,
    exhaustive: bool,
}

impl CoefficientTable {
    pub(crate) fn build(f: &CoefficientOracle, max_degree: u32) -> Self {
        let (limit, exhaustive) = match f.support() {
            SupportHint::Finite(d) if d <= max_degree => (d, true),
            _ => (max_degree, false),
        };
        let entries = enumerate_up_to(f.n(), limit)
            .into_iter()
            .filter_map(|idx| {
                let c = f.coefficient(&idx);
                if num_traits::Zero::is_zero(&c) {
                    None
                } else {
                    Some((idx, rational_to_f64(&c)))
                }
            })
            .collect();
        CoefficientTable {
            entries,
            exhaustive,
        }
    }
}

pub(crate) fn binomial_f64(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Π_i C(α_i, β_i) · b_i^{α_i − β_i}, with 0⁰ = 1; zero unless α ≥ β.
pub(crate) fn shift_weight(alpha: &MultiIndex, beta: &MultiIndex, b_theta: &[f64]) -> f64 {
    let mut w = 1.0;
    for ((&a, &s), &b) in alpha.exponents().iter().zip(beta.exponents()).zip(b_theta) {
        if a < s {
            return 0.0;
        }
        w *= binomial_f64(a, s) * powi(b, a - s);
        if w == 0.0 {
            return 0.0;
        }
    }
    w
}

fn powi(b: f64, e: u32) -> f64 {
    match i32::try_from(e) {
        Ok(e) => b.powi(e),
        Err(_) => b.powf(f64::from(e)),
    }
}

/// Classifies a sequence of partial sums.
///
/// `sums[i]` is the partial sum after `graded_terms[i]` was added. When
/// `exhaustive` is set every nonzero term has been included and the last sum
/// is exact up to rounding.
pub(crate) fn classify(
    beta: MultiIndex,
    sums: &[f64],
    graded_terms: &[f64],
    terms_used: usize,
    exhaustive: bool,
    budget: &SummationBudget,
) -> ConvergenceReport {
    let w = budget.window;
    let trace: Vec<f64> = sums[sums.len().saturating_sub(w)..].to_vec();
    let last = sums.last().copied().unwrap_or(0.0);
    let mut report = ConvergenceReport {
        beta,
        status: ConvergenceStatus::Inconclusive,
        value: None,
        terms_used,
        partial_sum_trace: trace,
        witness: None,
    };

    if let Some((m, s)) = sums
        .iter()
        .enumerate()
        .find(|(_, s)| !s.is_finite() || s.abs() > budget.bound)
    {
        report.status = ConvergenceStatus::Diverged;
        report.witness = Some(DivergenceWitness::BoundExceeded {
            degree: m as u32,
            partial_sum: *s,
        });
        return report;
    }
    if exhaustive {
        report.status = ConvergenceStatus::Converged;
        report.value = Some(last);
        return report;
    }
    if sums.len() < w {
        return report;
    }

    let scale = last.abs().max(1.0);
    let tail = &sums[sums.len() - w..];
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= budget.tolerance * scale {
        report.status = ConvergenceStatus::Converged;
        report.value = Some(last);
        return report;
    }

    let max_abs = |ts: &[f64]| ts.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    let head_max = max_abs(&graded_terms[..w]);
    let tail_max = max_abs(&graded_terms[graded_terms.len() - w..]);
    if tail_max >= head_max && tail_max > budget.tolerance * scale {
        report.status = ConvergenceStatus::Diverged;
        report.witness = Some(DivergenceWitness::TermsDoNotVanish { head_max, tail_max });
    }
    report
}

fn check_with_table(
    table: &CoefficientTable,
    b_theta: &[f64],
    beta: &MultiIndex,
    budget: &SummationBudget,
) -> ConvergenceReport {
    let start = beta.total_degree();
    let top = if table.exhaustive {
        table
            .entries
            .iter()
            .map(|(a, _)| a.total_degree())
            .max()
            .unwrap_or(0)
            .max(start)
    } else {
        budget.max_degree.max(start)
    };
    let mut graded = vec![0.0; (top - start + 1) as usize];
    let mut terms_used = 0;
    for (alpha, a) in &table.entries {
        let d = alpha.total_degree();
        if d < start || d > top || !alpha.dominates(beta) {
            continue;
        }
        terms_used += 1;
        graded[(d - start) as usize] += a * shift_weight(alpha, beta, b_theta);
    }
    let mut sums = Vec::with_capacity(graded.len());
    let mut acc = 0.0;
    for t in &graded {
        acc += t;
        sums.push(acc);
    }
    classify(beta.clone(), &sums, &graded, terms_used, table.exhaustive, budget)
}

/// Sums c_β = Σ_{α ≥ β} Π C(α_i, β_i) a_α Π b_i^{α_i − β_i} by increasing |α|
/// up to the budget's max degree and classifies the partial sums.
pub fn check_composability(
    f: &CoefficientOracle,
    b_theta: &[f64],
    beta: &MultiIndex,
    budget: &SummationBudget,
) -> Result<ConvergenceReport> {
    budget.validate()?;
    if b_theta.len() != f.n() {
        return Err(Error::Dimension {
            expected: f.n(),
            found: b_theta.len(),
        });
    }
    if beta.len() != f.n() {
        return Err(Error::Dimension {
            expected: f.n(),
            found: beta.len(),
        });
    }
    let table = CoefficientTable::build(f, budget.max_degree.max(beta.total_degree()));
    Ok(check_with_table(&table, b_theta, beta, budget))
}

/// Result of [`compose_unit`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitComposition {
    pub n: usize,
    pub order: i32,
    /// Present when the outer series has finite support or G is nonunit:
    /// then the composition is computed exactly.
    pub exact: Option<TruncatedSeries>,
    /// Coefficients of f∘G with |γ| ≤ order (nonzero entries only).
    pub coefficients: BTreeMap<MultiIndex, f64>,
    /// One report per β that contributes to the result.
    pub reports: Vec<ConvergenceReport>,
}

impl UnitComposition {
    pub fn coefficient(&self, idx: &MultiIndex) -> f64 {
        self.coefficients.get(idx).copied().unwrap_or(0.0)
    }

    fn from_exact(s: TruncatedSeries, reports: Vec<ConvergenceReport>) -> Self {
        let coefficients = s
            .terms()
            .map(|(k, v)| (k.clone(), rational_to_f64(v)))
            .collect();
        UnitComposition {
            n: s.n(),
            order: s.order(),
            exact: Some(s),
            coefficients,
            reports,
        }
    }
}

/// Numerically composes an oracle series with a vector that may have unit
/// components, up to total degree `order`.
///
/// Fails with [`Error::Diverged`] or [`Error::Undecided`] naming the first β
/// whose condition series does not converge under the budget.
pub fn compose_unit(
    f: &CoefficientOracle,
    g: &SeriesVector,
    order: u32,
    budget: &SummationBudget,
) -> Result<UnitComposition> {
    budget.validate()?;
    let n = g.n();
    if f.n() != n {
        return Err(Error::Dimension {
            expected: n,
            found: f.n(),
        });
    }
    let order = i32::try_from(order).map_err(|_| Error::arg("order too large"))?;
    let g = g.retruncate(order)?;

    if !g.has_unit_component() {
        return Ok(UnitComposition::from_exact(compose_oracle(f, &g)?, Vec::new()));
    }

    let b_theta: Vec<f64> = g
        .components()
        .iter()
        .map(|gi| rational_to_f64(&gi.constant_term()))
        .collect();
    let h = SeriesVector::new(
        g.components()
            .iter()
            .map(|gi| gi.sub(&TruncatedSeries::constant(n, order, gi.constant_term())))
            .collect::<Result<Vec<_>>>()?,
    )?;

    let table = CoefficientTable::build(f, budget.max_degree.max(order as u32));
    let mut reports = Vec::new();
    let mut coefficients: BTreeMap<MultiIndex, f64> = BTreeMap::new();
    for beta in enumerate_up_to(n, order as u32) {
        let h_beta = monomial_power(&h, &beta)?;
        if h_beta.is_zero() {
            continue;
        }
        let report = check_with_table(&table, &b_theta, &beta, budget);
        match report.status {
            ConvergenceStatus::Diverged => return Err(Error::Diverged { beta }),
            ConvergenceStatus::Inconclusive => return Err(Error::Undecided { beta }),
            ConvergenceStatus::Converged => {}
        }
        let c = report.value.expect("converged reports carry a value");
        for (gamma, coef) in h_beta.terms() {
            *coefficients.entry(gamma.clone()).or_insert(0.0) += c * rational_to_f64(coef);
        }
        reports.push(report);
    }

    if let SupportHint::Finite(d) = f.support() {
        let exact = compose(&f.materialize(d.max(order as u32)), &g)?;
        return Ok(UnitComposition::from_exact(exact, reports));
    }

    coefficients.retain(|_, v| *v != 0.0);
    Ok(UnitComposition {
        n,
        order,
        exact: None,
        coefficients,
        reports,
    })
}
