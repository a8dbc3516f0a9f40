//! Formal composition f∘G.
//!
//! Two tiers:
//!
//! * [`compose`] is exact. It applies when every g_i is a nonunit (each output
//!   coefficient then receives finitely many contributions) or when the outer
//!   series is a polynomial, in which case its coefficient table is taken as
//!   the full support.
//! * [`compose_unit`] handles an outer series of infinite support given by a
//!   [`CoefficientOracle`] and an inner vector with unit components. Whether
//!   the composition exists is an analytic question, decided (or not) by
//!   [`check_composability`] under an explicit [`SummationBudget`].
//!
//! [`blocks`] reassembles unit compositions block by block as a second,
//! independent route.

pub mod blocks;
mod convergence;
mod oracle;

use crate::calculus::{jacobian, partial_derivative, JacobianMatrix};
use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;
use crate::series::TruncatedSeries;
pub use crate::vector::SeriesVector;

pub use convergence::{
    check_composability, compose_unit, ConvergenceReport, ConvergenceStatus, DivergenceWitness,
    SummationBudget, UnitComposition,
};
pub use oracle::{rational_to_f64, CoefficientOracle, SupportHint};

/// G^α = g₁^{α₁}⋯gₙ^{αₙ}; G^θ = 1.
pub fn monomial_power(g: &SeriesVector, alpha: &MultiIndex) -> Result<TruncatedSeries> {
    if alpha.len() != g.n() {
        return Err(Error::Dimension {
            expected: g.n(),
            found: alpha.len(),
        });
    }
    let mut out = TruncatedSeries::one(g.n(), g.order());
    for (gi, &e) in g.components().iter().zip(alpha.exponents()) {
        if e > 0 {
            out = out.mul(&gi.pow(e))?;
        }
    }
    Ok(out)
}

// Caches g_i^k so that each G^α costs at most n − 1 products.
pub(crate) struct PowerCache<'a> {
    g: &'a SeriesVector,
    powers: Vec<Vec<TruncatedSeries>>,
}

impl<'a> PowerCache<'a> {
    pub(crate) fn new(g: &'a SeriesVector) -> Self {
        let powers = g
            .components()
            .iter()
            .map(|_| vec![TruncatedSeries::one(g.n(), g.order())])
            .collect();
        PowerCache { g, powers }
    }

    fn power(&mut self, i: usize, e: u32) -> &TruncatedSeries {
        let cache = &mut self.powers[i];
        while cache.len() <= e as usize {
            let next = cache
                .last()
                .expect("cache starts with g^0")
                .mul(self.g.component(i))
                .expect("same shape");
            cache.push(next);
        }
        &cache[e as usize]
    }

    pub(crate) fn monomial(&mut self, alpha: &MultiIndex) -> TruncatedSeries {
        let mut out: Option<TruncatedSeries> = None;
        for (i, &e) in alpha.exponents().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let p = self.power(i, e).clone();
            out = Some(match out {
                None => p,
                Some(acc) => acc.mul(&p).expect("same shape"),
            });
        }
        out.unwrap_or_else(|| TruncatedSeries::one(self.g.n(), self.g.order()))
    }
}

/// Exact f∘G = Σ a_α G^α.
///
/// With a nonunit G the result has order min(order(f), order(G)). If some
/// g_i is a unit, `f` is read as a polynomial (every stored term is used,
/// whatever its order) and the result has the order of G. The all-zero
/// vector θ gives the constant 1, as the definition prescribes.
pub fn compose(f: &TruncatedSeries, g: &SeriesVector) -> Result<TruncatedSeries> {
    if f.n() != g.n() {
        return Err(Error::Dimension {
            expected: g.n(),
            found: f.n(),
        });
    }
    if g.is_zero() {
        return Ok(TruncatedSeries::one(g.n(), f.order().min(g.order())));
    }
    let (outer, inner) = if g.has_unit_component() {
        (f.clone(), g.clone())
    } else {
        let order = f.order().min(g.order());
        (f.with_order(order), g.with_order(order))
    };
    let mut cache = PowerCache::new(&inner);
    let mut out = TruncatedSeries::zero(inner.n(), inner.order());
    for (alpha, a) in outer.terms() {
        let term = cache.monomial(alpha).scale(a);
        out = out.add(&term)?;
    }
    Ok(out)
}

/// Exact composition for an oracle-described outer series. Infinite support
/// with a unit inner vector is refused; use [`compose_unit`] for that case.
pub fn compose_oracle(f: &CoefficientOracle, g: &SeriesVector) -> Result<TruncatedSeries> {
    if f.n() != g.n() {
        return Err(Error::Dimension {
            expected: g.n(),
            found: f.n(),
        });
    }
    match f.support() {
        SupportHint::Finite(d) => compose(&f.materialize(d.max(g.order().max(0) as u32)), g),
        SupportHint::Infinite if g.has_unit_component() => Err(Error::Composability(
            "inner vector has a unit component and the outer series has infinite support; \
             use compose_unit with a summation budget"
                .into(),
        )),
        SupportHint::Infinite => {
            let order = g.order().max(0) as u32;
            compose(&f.materialize(order), g)
        }
    }
}

/// F∘G = (f₁∘G, …, fₙ∘G).
pub fn compose_vector(f: &SeriesVector, g: &SeriesVector) -> Result<SeriesVector> {
    let comps = f
        .components()
        .iter()
        .map(|fi| compose(fi, g))
        .collect::<Result<Vec<_>>>()?;
    SeriesVector::new(comps)
}

/// Entrywise composition of a series matrix with G.
pub fn compose_matrix(m: &JacobianMatrix, g: &SeriesVector) -> Result<JacobianMatrix> {
    let entries = m
        .rows()
        .iter()
        .map(|row| row.iter().map(|e| compose(e, g)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    JacobianMatrix::from_entries(entries)
}

/// Largest |α| whose G^α can reach a coefficient of total degree ≤ `order`,
/// or `None` if infinitely many can.
///
/// If every g_i has valuation ≥ v ≥ 1 then val(G^α) ≥ v·|α|, so only
/// |α| ≤ order / v matter. A unit component breaks this: g_i^k keeps a
/// nonzero constant term for every k.
pub fn summation_bound(g: &SeriesVector, order: i32) -> Option<u32> {
    let mut min_val: Option<u32> = None;
    for gi in g.components() {
        match gi.valuation() {
            Some(0) => return None,
            Some(v) => min_val = Some(min_val.map_or(v, |m| m.min(v))),
            None => {}
        }
    }
    let order = order.max(0) as u32;
    // all-zero: only α = θ contributes
    Some(min_val.map_or(0, |v| order / v))
}

/// Whether the family (G^α)_α admits addition up to `order`: each
/// coefficient of degree ≤ `order` gets finitely many contributions.
pub fn admits_addition_check(g: &SeriesVector, order: i32) -> bool {
    summation_bound(g, order).is_some()
}

/// Right-hand side of the chain rule: Σᵢ (D_i f ∘ G)·D_j g_i, at order
/// min(order(f), order(G)) − 1.
pub fn chain_rule_rhs(f: &TruncatedSeries, g: &SeriesVector, j: usize) -> Result<TruncatedSeries> {
    if f.n() != g.n() {
        return Err(Error::Dimension {
            expected: g.n(),
            found: f.n(),
        });
    }
    if j >= g.n() {
        return Err(Error::arg(format!(
            "variable index {} out of range for n = {}",
            j + 1,
            g.n()
        )));
    }
    let order = f.order().min(g.order());
    if !admits_addition_check(g, order) {
        return Err(Error::Precondition(
            "the family (G^α) does not admit addition (unit inner component)".into(),
        ));
    }
    let f = f.retruncate(order)?;
    let g = g.retruncate(order)?;
    let target = (order - 1).max(-1);
    let mut acc = TruncatedSeries::zero(g.n(), target);
    for i in 0..g.n() {
        let outer = compose(&partial_derivative(&f, i)?, &g)?.retruncate(target)?;
        let inner = partial_derivative(g.component(i), j)?.retruncate(target)?;
        acc = acc.add(&outer.mul(&inner)?)?;
    }
    Ok(acc)
}

/// J_F(G)·J_G, the right-hand side of the Jacobian chain rule.
pub fn jacobian_chain_rhs(f: &SeriesVector, g: &SeriesVector) -> Result<JacobianMatrix> {
    let order = f.order().min(g.order());
    let jf = jacobian(&f.retruncate(order)?)?;
    let jg = jacobian(&g.retruncate(order)?)?;
    let outer = compose_matrix(&jf, &g.retruncate(order)?)?;
    let target = outer.order().min(jg.order());
    outer.retruncate(target)?.mul(&jg.retruncate(target)?)
}
