use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::multiindex::{enumerate_up_to, MultiIndex};
use crate::series::{factorial, Rational, TruncatedSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportHint {
    /// `rule(α) = 0` whenever `|α|` exceeds the bound.
    Finite(u32),
    Infinite,
}

type Rule = dyn Fn(&MultiIndex) -> Rational + Send + Sync;

/// Closed-form coefficient rule α ↦ a_α for an outer series whose support
/// may be infinite.
#[derive(Clone)]
pub struct CoefficientOracle {
    n: usize,
    name: String,
    support: SupportHint,
    rule: Arc<Rule>,
}

impl fmt::Debug for CoefficientOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientOracle")
            .field("n", &self.n)
            .field("name", &self.name)
            .field("support", &self.support)
            .finish()
    }
}

impl CoefficientOracle {
    pub fn new(
        n: usize,
        name: impl Into<String>,
        support: SupportHint,
        rule: impl Fn(&MultiIndex) -> Rational + Send + Sync + 'static,
    ) -> Self {
        CoefficientOracle {
            n,
            name: name.into(),
            support,
            rule: Arc::new(rule),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> SupportHint {
        self.support
    }

    pub fn coefficient(&self, idx: &MultiIndex) -> Rational {
        if let SupportHint::Finite(d) = self.support {
            if idx.total_degree() > d {
                return Rational::zero();
            }
        }
        (self.rule)(idx)
    }

    pub fn coefficient_f64(&self, idx: &MultiIndex) -> f64 {
        rational_to_f64(&self.coefficient(idx))
    }

    /// All coefficients with |α| ≤ `order` as an exact truncated series.
    pub fn materialize(&self, order: u32) -> TruncatedSeries {
        let terms = enumerate_up_to(self.n, order)
            .into_iter()
            .map(|idx| {
                let c = self.coefficient(&idx);
                (idx, c)
            })
            .collect::<Vec<_>>();
        TruncatedSeries::make(self.n, i64::from(order), terms).expect("indices have length n")
    }

    /// A polynomial viewed as an oracle; its table is taken as the full support.
    pub fn polynomial(f: &TruncatedSeries) -> Self {
        let degree = f.degree().unwrap_or(0);
        let table = f.clone();
        CoefficientOracle::new(f.n(), "poly", SupportHint::Finite(degree), move |idx| {
            table.coefficient(idx)
        })
    }

    /// a_α = c^{α₁} if α₁ = α₂, else 0. At c = 1 this is 1/(1 − x₁x₂).
    pub fn geom2(c: Rational) -> Self {
        CoefficientOracle::new(2, format!("geom2({c})"), SupportHint::Infinite, move |idx| {
            let e = idx.exponents();
            if e[0] == e[1] {
                rational_pow(&c, e[0])
            } else {
                Rational::zero()
            }
        })
    }

    /// a_α = r^{α_axis} on the `axis` coordinate line (0-based), 0 elsewhere.
    pub fn geom1(n: usize, r: Rational, axis: usize) -> Result<Self> {
        if axis >= n {
            return Err(Error::arg(format!("axis {} out of range for n = {n}", axis + 1)));
        }
        Ok(CoefficientOracle::new(
            n,
            format!("geom1({r},{})", axis + 1),
            SupportHint::Infinite,
            move |idx| {
                let e = idx.exponents();
                if e.iter().enumerate().all(|(i, &x)| i == axis || x == 0) {
                    rational_pow(&r, e[axis])
                } else {
                    Rational::zero()
                }
            },
        ))
    }

    /// a_α = 1/(α₁!⋯αₙ!), i.e. exp(x₁+⋯+xₙ).
    pub fn expprod(n: usize) -> Self {
        CoefficientOracle::new(n, "expprod", SupportHint::Infinite, |idx| {
            let denom = idx
                .exponents()
                .iter()
                .fold(BigInt::one(), |acc, &e| acc * factorial(e));
            Rational::new(BigInt::one(), denom)
        })
    }
}

pub(crate) fn rational_pow(c: &Rational, e: u32) -> Rational {
    num_traits::pow::pow(c.clone(), e as usize)
}

/// Nearest binary64 value; tiny values flush to 0 and huge ones saturate to ±∞.
pub fn rational_to_f64(c: &Rational) -> f64 {
    if c.is_zero() {
        return 0.0;
    }
    c.to_f64().unwrap_or_else(|| {
        // fall back to the quotient of the two integer parts
        let n = c.numer().to_f64().unwrap_or(f64::NAN);
        let d = c.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}
