use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

/// An n-tuple G = (g₁,…,gₙ) of series in n variables sharing one truncation
/// order. The inner argument of composition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesVector {
    components: Vec<TruncatedSeries>,
}

impl SeriesVector {
    pub fn new(components: Vec<TruncatedSeries>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::arg("a series vector needs at least one component"));
        }
        let order = components[0].order();
        for g in &components {
            if g.n() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: g.n(),
                });
            }
            if g.order() != order {
                return Err(Error::OrderMismatch {
                    left: order,
                    right: g.order(),
                });
            }
        }
        Ok(SeriesVector { components })
    }

    /// I = (x₁,…,xₙ).
    pub fn identity(n: usize, order: i32) -> Self {
        SeriesVector {
            components: (0..n).map(|i| TruncatedSeries::variable(n, order, i)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn order(&self) -> i32 {
        self.components[0].order()
    }

    pub fn components(&self) -> &[TruncatedSeries] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &TruncatedSeries {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<TruncatedSeries> {
        self.components
    }

    /// θ = (0,…,0).
    pub fn is_zero(&self) -> bool {
        self.components.iter().all(TruncatedSeries::is_zero)
    }

    pub fn has_unit_component(&self) -> bool {
        self.components.iter().any(TruncatedSeries::is_unit)
    }

    pub fn retruncate(&self, order: i32) -> Result<Self> {
        Ok(SeriesVector {
            components: self
                .components
                .iter()
                .map(|g| g.retruncate(order))
                .collect::<Result<_>>()?,
        })
    }

    pub(crate) fn with_order(&self, order: i32) -> Self {
        SeriesVector {
            components: self.components.iter().map(|g| g.with_order(order)).collect(),
        }
    }
}
