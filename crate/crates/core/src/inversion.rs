//! Compositional inverses.
//!
//! A nonunit vector G has an inverse iff det J_G(θ) ≠ 0. We build it degree by
//! degree: the linear part is J_G(θ)⁻¹, and for each degree j ≥ 2 the new
//! block H[j] solves J_G(θ)·H[j] = −(G∘H_{<j})[j], since the linear part of G
//! is the only place H[j] enters at degree j.
//!
//! Affine unit vectors (constant + linear) are also invertible; this is the
//! one unit case handled here.

use num_traits::Zero;

use crate::calculus::{jacobian_at_origin, jacobian_determinant_at_origin};
use crate::composition::compose_vector;
use crate::error::{Error, InversionFailure, Result};
use crate::linalg::{inverse, Matrix};
use crate::multiindex::MultiIndex;
use crate::series::{Rational, TruncatedSeries};
use crate::vector::SeriesVector;

fn first_unit(g: &SeriesVector) -> Option<usize> {
    g.components().iter().position(TruncatedSeries::is_unit)
}

/// Nonunit with an exactly nonsingular linear part.
pub fn is_invertible(g: &SeriesVector) -> bool {
    first_unit(g).is_none() && !jacobian_determinant_at_origin(g).is_zero()
}

// L·X as a vector of linear series, plus a constant shift.
fn linear_map(m: &Matrix, shift: &[Rational], n: usize, order: i32) -> SeriesVector {
    let comps = m
        .iter()
        .zip(shift)
        .map(|(row, c)| {
            let mut s = TruncatedSeries::constant(n, order, c.clone());
            for (j, a) in row.iter().enumerate() {
                s.accumulate(MultiIndex::unit(n, j), a.clone());
            }
            s
        })
        .collect();
    SeriesVector::new(comps).expect("n components in n variables")
}

/// The inverse H of a nonunit G, with H∘G = G∘H = I up to total degree `order`.
pub fn compose_inverse(g: &SeriesVector, order: i32) -> Result<SeriesVector> {
    if let Some(index) = first_unit(g) {
        return Err(Error::Inversion(InversionFailure::UnitComponent { index }));
    }
    let g = g.retruncate(order)?;
    let n = g.n();
    let linear = jacobian_at_origin(&g);
    let linear_inv = inverse(&linear).ok_or(Error::Inversion(InversionFailure::SingularJacobian))?;
    let zero_shift = vec![Rational::zero(); n];

    let mut h = linear_map(&linear_inv, &zero_shift, n, order);
    for degree in 2..=order.max(0) as u32 {
        let residual = compose_vector(&g, &h)?;
        let rhs: Vec<TruncatedSeries> = residual
            .components()
            .iter()
            .map(|r| r.block_unchecked(degree).neg())
            .collect();
        let mut comps = h.into_components();
        for (i, hi) in comps.iter_mut().enumerate() {
            for (k, r) in rhs.iter().enumerate() {
                let c = &linear_inv[i][k];
                if c.is_zero() {
                    continue;
                }
                for (alpha, v) in r.terms() {
                    hi.accumulate(alpha.clone(), c * v);
                }
            }
        }
        h = SeriesVector::new(comps)?;
    }
    Ok(h)
}

/// Inverse of an affine G(X) = c + L·X, namely H(X) = L⁻¹·(X − c).
pub fn invert_affine(g: &SeriesVector) -> Result<SeriesVector> {
    for (index, gi) in g.components().iter().enumerate() {
        if gi.degree().unwrap_or(0) > 1 {
            return Err(Error::arg(format!(
                "affine inversion needs total degree ≤ 1; {}",
                InversionFailure::NonAffine { index }
            )));
        }
    }
    let n = g.n();
    let linear = jacobian_at_origin(g);
    let linear_inv = inverse(&linear).ok_or(Error::Inversion(InversionFailure::SingularJacobian))?;
    let constants: Vec<Rational> = g.components().iter().map(TruncatedSeries::constant_term).collect();
    let shift: Vec<Rational> = linear_inv
        .iter()
        .map(|row| -row.iter().zip(&constants).map(|(a, c)| a * c).sum::<Rational>())
        .collect();
    Ok(linear_map(&linear_inv, &shift, n, g.order()))
}

/// Routes to the applicable procedure: nonunit vectors via
/// [`compose_inverse`], affine unit vectors via [`invert_affine`].
pub fn invert(g: &SeriesVector, order: i32) -> Result<SeriesVector> {
    if first_unit(g).is_none() {
        return compose_inverse(g, order);
    }
    if g.components().iter().all(|gi| gi.degree().unwrap_or(0) <= 1) {
        return invert_affine(&g.retruncate(order)?);
    }
    Err(Error::Inversion(InversionFailure::NonAffineUnit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::det;
    use crate::series::{integer, rational};

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::from(v)
    }

    fn series(n: usize, order: i64, terms: &[(&[u32], i64)]) -> TruncatedSeries {
        TruncatedSeries::make(n, order, terms.iter().map(|(e, c)| (mi(e), integer(*c)))).unwrap()
    }

    fn vector(comps: Vec<TruncatedSeries>) -> SeriesVector {
        SeriesVector::new(comps).unwrap()
    }

    #[test]
    fn invertibility_predicate() {
        let g = vector(vec![series(2, 3, &[(&[1, 0], 1), (&[0, 2], 1)]), series(2, 3, &[(&[0, 1], 1)])]);
        assert!(is_invertible(&g));
        let s = vector(vec![
            series(2, 3, &[(&[1, 0], 1), (&[0, 1], 1)]),
            series(2, 3, &[(&[1, 0], 1), (&[0, 1], 1)]),
        ]);
        assert!(!is_invertible(&s));
        let u = vector(vec![series(2, 3, &[(&[0, 0], 1), (&[1, 0], 1)]), series(2, 3, &[(&[0, 1], 1)])]);
        assert!(!is_invertible(&u));
    }

    #[test]
    fn identity_and_swap() {
        let id = SeriesVector::identity(2, 4);
        assert_eq!(compose_inverse(&id, 4).unwrap(), id);
        let swap = vector(vec![TruncatedSeries::variable(2, 4, 1), TruncatedSeries::variable(2, 4, 0)]);
        assert_eq!(compose_inverse(&swap, 4).unwrap(), swap);
    }

    #[test]
    fn nonlinear_inverse_is_two_sided() {
        let g = vector(vec![series(2, 4, &[(&[1, 0], 1), (&[1, 1], 1)]), series(2, 4, &[(&[0, 1], 1)])]);
        let h = compose_inverse(&g, 4).unwrap();
        let id = SeriesVector::identity(2, 4);
        assert_eq!(compose_vector(&h, &g).unwrap(), id);
        assert_eq!(compose_vector(&g, &h).unwrap(), id);
        // x1/(1+x2) = x1 − x1x2 + x1x2² − x1x2³
        assert_eq!(
            h.component(0),
            &series(2, 4, &[(&[1, 0], 1), (&[1, 1], -1), (&[1, 2], 1), (&[1, 3], -1)])
        );
    }

    #[test]
    fn failures_are_named() {
        let s = vector(vec![
            series(2, 3, &[(&[1, 0], 1), (&[0, 1], 1)]),
            series(2, 3, &[(&[1, 0], 2), (&[0, 1], 2)]),
        ]);
        assert_eq!(
            compose_inverse(&s, 3),
            Err(Error::Inversion(InversionFailure::SingularJacobian))
        );
        let u = vector(vec![series(2, 3, &[(&[1, 0], 1)]), series(2, 3, &[(&[0, 0], 2), (&[0, 1], 1)])]);
        assert_eq!(
            compose_inverse(&u, 3),
            Err(Error::Inversion(InversionFailure::UnitComponent { index: 1 }))
        );
        let nonaffine_unit = vector(vec![
            series(2, 3, &[(&[0, 0], 1), (&[2, 0], 1), (&[1, 0], 1)]),
            series(2, 3, &[(&[0, 1], 1)]),
        ]);
        assert_eq!(
            invert(&nonaffine_unit, 3),
            Err(Error::Inversion(InversionFailure::NonAffineUnit))
        );
        assert!(matches!(invert_affine(&nonaffine_unit), Err(Error::Argument(_))));
    }

    #[test]
    fn affine_example() {
        let g = vector(vec![
            series(2, 3, &[(&[0, 0], 1), (&[1, 0], 1), (&[0, 1], 1)]),
            series(2, 3, &[(&[0, 0], 1), (&[1, 0], 1), (&[0, 1], -1)]),
        ]);
        let h = invert_affine(&g).unwrap();
        let half = rational(1, 2);
        let expected = vector(vec![
            TruncatedSeries::make(
                2,
                3,
                [(mi(&[0, 0]), integer(-1)), (mi(&[1, 0]), half.clone()), (mi(&[0, 1]), half.clone())],
            )
            .unwrap(),
            TruncatedSeries::make(2, 3, [(mi(&[1, 0]), half.clone()), (mi(&[0, 1]), -half)]).unwrap(),
        ]);
        assert_eq!(h, expected);
        assert_eq!(invert(&g, 3).unwrap(), expected);
    }

    #[test]
    fn determinant_reciprocity() {
        let g = vector(vec![
            series(2, 3, &[(&[1, 0], 2), (&[0, 1], 1), (&[2, 0], 5)]),
            series(2, 3, &[(&[1, 0], 1), (&[0, 1], 3), (&[1, 1], -1)]),
        ]);
        let h = compose_inverse(&g, 3).unwrap();
        let dg = det(&jacobian_at_origin(&g));
        let dh = det(&jacobian_at_origin(&h));
        assert_eq!(dg * dh, integer(1));
    }
}
