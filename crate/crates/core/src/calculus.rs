//! Formal partial derivatives and Jacobians.
//!
//! Differentiating an N-jet only determines an (N−1)-jet, so every derivative
//! lowers the carried order by one (bottoming out at −1, the empty jet).

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::multiindex::MultiIndex;
use crate::series::{Rational, TruncatedSeries};
use crate::vector::SeriesVector;

pub use crate::linalg::det;

/// D_j f for 0-based variable index `j`: coefficient at α is (α_j+1)·f_{α+e_j}.
pub fn partial_derivative(f: &TruncatedSeries, j: usize) -> Result<TruncatedSeries> {
    if j >= f.n() {
        return Err(Error::arg(format!(
            "variable index {} out of range for n = {}",
            j + 1,
            f.n()
        )));
    }
    let order = (f.order() - 1).max(-1);
    let mut out = TruncatedSeries::zero(f.n(), order);
    for (idx, c) in f.terms() {
        let e = idx.exponents()[j];
        if e == 0 {
            continue;
        }
        out.accumulate(idx.with_entry(j, e - 1), c * Rational::from_integer(e.into()));
    }
    Ok(out)
}

/// D_j^m f.
pub fn higher_derivative(f: &TruncatedSeries, j: usize, m: u32) -> Result<TruncatedSeries> {
    if j >= f.n() {
        return Err(Error::arg(format!(
            "variable index {} out of range for n = {}",
            j + 1,
            f.n()
        )));
    }
    let mut out = f.clone();
    for _ in 0..m {
        out = partial_derivative(&out, j)?;
    }
    Ok(out)
}

/// The formal Jacobian [D_j g_i].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JacobianMatrix {
    entries: Vec<Vec<TruncatedSeries>>,
}

impl JacobianMatrix {
    pub fn from_entries(entries: Vec<Vec<TruncatedSeries>>) -> Result<Self> {
        let n = entries.len();
        let order = entries.first().and_then(|r| r.first()).map(TruncatedSeries::order);
        for row in &entries {
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: row.len(),
                });
            }
            for e in row {
                if e.n() != n {
                    return Err(Error::Dimension {
                        expected: n,
                        found: e.n(),
                    });
                }
                if Some(e.order()) != order {
                    return Err(Error::OrderMismatch {
                        left: order.unwrap_or(0),
                        right: e.order(),
                    });
                }
            }
        }
        Ok(JacobianMatrix { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &TruncatedSeries {
        &self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<TruncatedSeries>] {
        &self.entries
    }

    pub fn order(&self) -> i32 {
        self.entries[0][0].order()
    }

    /// Series-matrix product `self · other`.
    pub fn mul(&self, other: &JacobianMatrix) -> Result<JacobianMatrix> {
        let n = self.n();
        if other.n() != n {
            return Err(Error::Dimension {
                expected: n,
                found: other.n(),
            });
        }
        let mut entries = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let mut acc = TruncatedSeries::zero(n, self.order());
                for k in 0..n {
                    acc = acc.add(&self.entries[i][k].mul(&other.entries[k][j])?)?;
                }
                row.push(acc);
            }
            entries.push(row);
        }
        Ok(JacobianMatrix { entries })
    }

    pub fn retruncate(&self, order: i32) -> Result<JacobianMatrix> {
        let entries = self
            .entries
            .iter()
            .map(|row| row.iter().map(|e| e.retruncate(order)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(JacobianMatrix { entries })
    }

    /// Entrywise constant terms, i.e. the matrix evaluated at θ.
    pub fn at_origin(&self) -> Matrix {
        self.entries
            .iter()
            .map(|row| row.iter().map(TruncatedSeries::constant_term).collect())
            .collect()
    }
}

pub fn jacobian(g: &SeriesVector) -> Result<JacobianMatrix> {
    let n = g.n();
    let entries = g
        .components()
        .iter()
        .map(|gi| (0..n).map(|j| partial_derivative(gi, j)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    JacobianMatrix::from_entries(entries)
}

/// J_G(θ): entry (i, j) is the coefficient of x_j in g_i.
pub fn jacobian_at_origin(g: &SeriesVector) -> Matrix {
    let n = g.n();
    g.components()
        .iter()
        .map(|gi| (0..n).map(|j| gi.coefficient(&MultiIndex::unit(n, j))).collect())
        .collect()
}

pub fn jacobian_determinant_at_origin(g: &SeriesVector) -> Rational {
    let m = jacobian_at_origin(g);
    if m.is_empty() {
        return Rational::zero();
    }
    det(&m)
}
