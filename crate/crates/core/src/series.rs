//! Truncated multivariate formal power series over ℚ.
//!
//! A [`TruncatedSeries`] is the N-jet of a formal power series in `n`
//! variables: every coefficient with total degree ≤ N, nothing above. All
//! ring operations work modulo the ideal of monomials of degree > N and
//! require both operands to carry the same N. Coefficient tables are kept in
//! canonical form (no stored zeros), so structural equality is series
//! equality.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::multiindex::{enumerate_partition_solutions, MultiIndex};

pub type Rational = BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn integer(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    n: usize,
    /// Inclusive total-degree bound. `-1` denotes the empty jet left behind by
    /// differentiating an order-0 series.
    order: i32,
    coeffs: BTreeMap<MultiIndex, Rational>,
}

impl TruncatedSeries {
    /// Builds a canonical series from raw terms. Duplicates are summed; terms
    /// above `order` are dropped.
    pub fn make(n: usize, order: i64, terms: impl IntoIterator<Item = (MultiIndex, Rational)>) -> Result<Self> {
        if order < 0 {
            return Err(Error::arg(format!("truncation order must be ≥ 0, got {order}")));
        }
        let order = i32::try_from(order).map_err(|_| Error::arg("truncation order too large"))?;
        let mut s = TruncatedSeries::zero(n, order);
        for (idx, c) in terms {
            if idx.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: idx.len(),
                });
            }
            s.accumulate(idx, c);
        }
        Ok(s)
    }

    pub fn zero(n: usize, order: i32) -> Self {
        TruncatedSeries {
            n,
            order,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, order: i32, c: Rational) -> Self {
        let mut s = TruncatedSeries::zero(n, order);
        s.accumulate(MultiIndex::zero(n), c);
        s
    }

    pub fn one(n: usize, order: i32) -> Self {
        TruncatedSeries::constant(n, order, Rational::one())
    }

    /// The coordinate series x_{i+1} (0-based `i`).
    pub fn variable(n: usize, order: i32, i: usize) -> Self {
        let mut s = TruncatedSeries::zero(n, order);
        s.accumulate(MultiIndex::unit(n, i), Rational::one());
        s
    }

    pub fn monomial(n: usize, order: i32, idx: MultiIndex, c: Rational) -> Self {
        debug_assert_eq!(idx.len(), n);
        let mut s = TruncatedSeries::zero(n, order);
        s.accumulate(idx, c);
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Nonzero terms in (total degree, lex) order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.coeffs.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficient(&self, idx: &MultiIndex) -> Rational {
        self.coeffs.get(idx).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&MultiIndex::zero(self.n))
    }

    /// A series is a unit iff its constant term is nonzero.
    pub fn is_unit(&self) -> bool {
        self.coeffs.contains_key(&MultiIndex::zero(self.n))
    }

    /// Lowest total degree carrying a nonzero coefficient; `None` for zero.
    pub fn valuation(&self) -> Option<u32> {
        self.coeffs.keys().next().map(MultiIndex::total_degree)
    }

    /// Highest total degree carrying a nonzero coefficient; `None` for zero.
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().map(MultiIndex::total_degree).max()
    }

    // Adds `c` at `idx`, honouring truncation and canonical form.
    pub(crate) fn accumulate(&mut self, idx: MultiIndex, c: Rational) {
        if c.is_zero() || i64::from(idx.total_degree()) > i64::from(self.order) {
            return;
        }
        match self.coeffs.entry(idx) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_compatible(&self, other: &TruncatedSeries) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: other.n,
            });
        }
        if self.order != other.order {
            return Err(Error::OrderMismatch {
                left: self.order,
                right: other.order,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &TruncatedSeries) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (idx, c) in &other.coeffs {
            out.accumulate(idx.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &TruncatedSeries) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (idx, c) in &other.coeffs {
            out.accumulate(idx.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        TruncatedSeries {
            n: self.n,
            order: self.order,
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), -v.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return TruncatedSeries::zero(self.n, self.order);
        }
        TruncatedSeries {
            n: self.n,
            order: self.order,
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    /// Cauchy product, truncated at the shared order.
    pub fn mul(&self, other: &TruncatedSeries) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = TruncatedSeries::zero(self.n, self.order);
        let limit = i64::from(self.order);
        for (a, ca) in &self.coeffs {
            let da = i64::from(a.total_degree());
            // `other` iterates by increasing degree, so stop at the first overflow.
            for (b, cb) in &other.coeffs {
                if da + i64::from(b.total_degree()) > limit {
                    break;
                }
                out.accumulate(a.add(b), ca * cb);
            }
        }
        Ok(out)
    }

    /// `self^m` by binary exponentiation; `self^0 = 1`.
    pub fn pow(&self, m: u32) -> Self {
        let mut result = TruncatedSeries::one(self.n, self.order);
        let mut base = self.clone();
        let mut e = m;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).expect("same shape");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same shape");
            }
        }
        result
    }

    /// The homogeneous part of total degree `k`.
    pub fn block(&self, k: u32) -> Result<Self> {
        if i64::from(k) > i64::from(self.order) {
            return Err(Error::arg(format!(
                "block degree {k} exceeds truncation order {}",
                self.order
            )));
        }
        Ok(self.block_unchecked(k))
    }

    pub(crate) fn block_unchecked(&self, k: u32) -> Self {
        TruncatedSeries {
            n: self.n,
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(idx, _)| idx.total_degree() == k)
                .map(|(a, b)| (a.clone(), b.clone()))
                .collect(),
        }
    }

    /// Drops to a lower truncation order. Raising the order is refused: the
    /// missing coefficients are unknown, not zero.
    pub fn retruncate(&self, order: i32) -> Result<Self> {
        if order > self.order {
            return Err(Error::arg(format!(
                "cannot raise truncation order from {} to {order}",
                self.order
            )));
        }
        Ok(self.with_order(order))
    }

    /// Reinterprets the coefficient table at `order`, dropping terms above it.
    /// Unlike [`retruncate`](Self::retruncate) this may raise the order; use it
    /// only when the table is known to be complete (e.g. a polynomial).
    pub fn with_order(&self, order: i32) -> Self {
        TruncatedSeries {
            n: self.n,
            order,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(idx, _)| i64::from(idx.total_degree()) <= i64::from(order))
                .map(|(a, b)| (a.clone(), b.clone()))
                .collect(),
        }
    }

    /// Coefficient of `self^m` at `idx`, assembled from block products:
    /// Σ m!/(v₀!…v_k!) · (f[0]^{v₀}…f[k]^{v_k})_idx over the solutions of
    /// v₀+…+v_k = m, v₁+2v₂+…+k·v_k = k, where k = |idx|.
    pub fn pow_block_coefficient(&self, m: u32, idx: &MultiIndex) -> Result<Rational> {
        if idx.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: idx.len(),
            });
        }
        let k = idx.total_degree();
        if i64::from(k) > i64::from(self.order) {
            return Err(Error::arg(format!(
                "index {idx} exceeds truncation order {}",
                self.order
            )));
        }
        let blocks: Vec<TruncatedSeries> = (0..=k).map(|d| self.block_unchecked(d)).collect();
        let mut total = Rational::zero();
        for v in enumerate_partition_solutions(m, k) {
            let mut product = TruncatedSeries::one(self.n, self.order);
            for (d, &count) in v.iter().enumerate() {
                if count > 0 {
                    product = product.mul(&blocks[d].pow(count))?;
                }
            }
            let c = product.coefficient(idx);
            if !c.is_zero() {
                total += multinomial(m, &v) * c;
            }
        }
        Ok(total)
    }

    /// Largest absolute numerator/denominator; handy for test generators.
    pub fn height(&self) -> BigInt {
        self.coeffs
            .values()
            .map(|c| c.numer().abs().max(c.denom().clone()))
            .max()
            .unwrap_or_else(BigInt::zero)
    }
}

/// m! / (v₀!·…·v_k!) for Σv = m.
pub(crate) fn multinomial(m: u32, parts: &[u32]) -> Rational {
    let mut num = factorial(m);
    for &p in parts {
        num /= factorial(p);
    }
    Rational::from_integer(num)
}

pub(crate) fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}
