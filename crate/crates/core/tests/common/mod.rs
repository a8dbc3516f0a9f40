//! Test-side oracles and generators. The oracles work on plain coefficient
//! maps and never call library arithmetic, so they check it independently.

#![allow(dead_code)]

use std::collections::BTreeMap;

use mfps::{MultiIndex, Rational, SeriesVector, TruncatedSeries};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Poly = BTreeMap<Vec<u32>, Rational>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn mi(v: &[u32]) -> MultiIndex {
    MultiIndex::from(v)
}

// ---- plain-map oracles ----

pub fn to_poly(s: &TruncatedSeries) -> Poly {
    s.terms().map(|(k, v)| (k.exponents().to_vec(), v.clone())).collect()
}

pub fn from_poly(n: usize, order: i32, p: &Poly) -> TruncatedSeries {
    TruncatedSeries::make(n, i64::from(order), p.iter().map(|(k, v)| (MultiIndex::new(k.clone()), v.clone())))
        .unwrap()
}

fn deg(e: &[u32]) -> i64 {
    e.iter().map(|&x| i64::from(x)).sum()
}

fn put(p: &mut Poly, k: Vec<u32>, v: Rational) {
    if v.is_zero() {
        return;
    }
    let e = p.entry(k).or_insert_with(Rational::zero);
    *e += v;
    if e.is_zero() {
        p.retain(|_, c| !c.is_zero());
    }
}

pub fn naive_add(a: &Poly, b: &Poly) -> Poly {
    let mut out = a.clone();
    for (k, v) in b {
        put(&mut out, k.clone(), v.clone());
    }
    out
}

pub fn naive_scale(a: &Poly, c: &Rational) -> Poly {
    let mut out = Poly::new();
    for (k, v) in a {
        put(&mut out, k.clone(), v * c);
    }
    out
}

pub fn naive_mul(a: &Poly, b: &Poly, order: i32) -> Poly {
    let mut out = Poly::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            let k: Vec<u32> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
            if deg(&k) <= i64::from(order) {
                put(&mut out, k, va * vb);
            }
        }
    }
    out
}

pub fn naive_one(n: usize) -> Poly {
    let mut p = Poly::new();
    p.insert(vec![0; n], Rational::one());
    p
}

pub fn naive_pow(a: &Poly, n: usize, m: u32, order: i32) -> Poly {
    let mut out = naive_one(n);
    for _ in 0..m {
        out = naive_mul(&out, a, order);
    }
    out
}

pub fn naive_derivative(a: &Poly, j: usize) -> Poly {
    let mut out = Poly::new();
    for (k, v) in a {
        if k[j] > 0 {
            let mut e = k.clone();
            e[j] -= 1;
            put(&mut out, e, v * Rational::from_integer(BigInt::from(k[j])));
        }
    }
    out
}

/// Σ a_α Π g_i^{α_i}, with every monomial power expanded by repeated multiplication.
pub fn naive_compose(f: &Poly, g: &[Poly], order: i32) -> Poly {
    let n = g.len();
    let mut out = Poly::new();
    for (alpha, a) in f {
        let mut term = naive_one(n);
        for (gi, &e) in g.iter().zip(alpha) {
            for _ in 0..e {
                term = naive_mul(&term, gi, order);
            }
        }
        out = naive_add(&out, &naive_scale(&term, a));
    }
    out
}

/// Cofactor expansion along the first row.
pub fn cofactor_det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    if n == 0 {
        return Rational::one();
    }
    let mut acc = Rational::zero();
    for j in 0..n {
        let minor: Vec<Vec<Rational>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = &m[0][j] * cofactor_det(&minor);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Gauss–Jordan solve; None unless the solution exists and is unique.
pub fn unique_solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>, unknowns: usize) -> Option<Vec<Rational>> {
    let rows = a.len();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..unknowns {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        b.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        b[r] *= &inv;
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in 0..unknowns {
                    let d = &f * &a[r][k];
                    a[i][k] -= d;
                }
                let d = &f * &b[r];
                b[i] -= d;
            }
        }
        pivots.push(c);
        r += 1;
    }
    if b[r..].iter().any(|v| !v.is_zero()) || pivots.len() < unknowns {
        return None;
    }
    let mut x = vec![Rational::zero(); unknowns];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = b[i].clone();
    }
    Some(x)
}

fn exponents_up_to(n: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for p in &out {
            for e in 0..=max {
                let mut q = p.clone();
                q.push(e);
                next.push(q);
            }
        }
        out = next;
    }
    out.retain(|e| deg(e) <= i64::from(max));
    out
}

/// Solves H∘G = I for all coefficients of H at once. H∘G is linear in the
/// unknown coefficients of H, so this is a single linear system.
pub fn brute_left_inverse(g: &[Poly], n: usize, order: i32) -> Option<Vec<Poly>> {
    let alphas: Vec<Vec<u32>> = exponents_up_to(n, order as u32).into_iter().filter(|a| deg(a) >= 1).collect();
    let gammas = exponents_up_to(n, order as u32);
    let powers: Vec<Poly> = alphas
        .iter()
        .map(|a| {
            let mut t = naive_one(n);
            for (gi, &e) in g.iter().zip(a) {
                for _ in 0..e {
                    t = naive_mul(&t, gi, order);
                }
            }
            t
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let a: Vec<Vec<Rational>> = gammas
            .iter()
            .map(|gm| powers.iter().map(|p| p.get(gm).cloned().unwrap_or_else(Rational::zero)).collect())
            .collect();
        let b: Vec<Rational> = gammas
            .iter()
            .map(|gm| {
                let is_xi = deg(gm) == 1 && gm[i] == 1;
                if is_xi {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        let x = unique_solve(a, b, alphas.len())?;
        let mut h = Poly::new();
        for (alpha, c) in alphas.iter().zip(x) {
            put(&mut h, alpha.clone(), c);
        }
        out.push(h);
    }
    Some(out)
}

/// C(n, k) as an exact integer.
pub fn binom(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

// ---- random generators ----

pub fn rand_rational(r: &mut ChaCha8Rng, max_num: i64, max_den: i64) -> Rational {
    loop {
        let num = r.gen_range(-max_num..=max_num);
        if num != 0 {
            return q(num, r.gen_range(1..=max_den));
        }
    }
}

/// Random sparse series with terms of total degree in `min_deg..=max_deg`.
pub fn rand_series(
    r: &mut ChaCha8Rng,
    n: usize,
    order: i32,
    terms: usize,
    min_deg: u32,
    max_deg: u32,
    max_num: i64,
) -> TruncatedSeries {
    let max_deg = max_deg.min(order.max(0) as u32);
    let mut out = Vec::new();
    for _ in 0..terms {
        let d = r.gen_range(min_deg..=max_deg);
        let mut e = vec![0u32; n];
        for _ in 0..d {
            e[r.gen_range(0..n)] += 1;
        }
        out.push((MultiIndex::new(e), rand_rational(r, max_num, 4)));
    }
    TruncatedSeries::make(n, i64::from(order), out).unwrap()
}

/// Nonunit, non-constant: zero constant term and at least one linear or higher term.
pub fn rand_nonunit(r: &mut ChaCha8Rng, n: usize, order: i32, max_num: i64) -> TruncatedSeries {
    loop {
        let terms = r.gen_range(1..=5);
        let s = rand_series(r, n, order, terms, 1, 3, max_num);
        if !s.is_zero() {
            return s;
        }
    }
}

pub fn rand_nonunit_vector(r: &mut ChaCha8Rng, n: usize, order: i32, max_num: i64) -> SeriesVector {
    SeriesVector::new((0..n).map(|_| rand_nonunit(r, n, order, max_num)).collect()).unwrap()
}

/// Nonunit vector whose linear part is a random nonsingular matrix.
pub fn rand_invertible(r: &mut ChaCha8Rng, n: usize, order: i32, max_num: i64) -> SeriesVector {
    loop {
        let lin: Vec<Vec<Rational>> = (0..n)
            .map(|_| (0..n).map(|_| q(r.gen_range(-max_num..=max_num), r.gen_range(1..=3))).collect())
            .collect();
        if cofactor_det(&lin).is_zero() {
            continue;
        }
        let comps = (0..n)
            .map(|i| {
                let mut terms: Vec<(MultiIndex, Rational)> =
                    (0..n).map(|j| (MultiIndex::unit(n, j), lin[i][j].clone())).collect();
                let extra = r.gen_range(0..=3);
                let nonlinear = rand_series(r, n, order, extra, 2, 3, max_num);
                terms.extend(nonlinear.terms().map(|(k, v)| (k.clone(), v.clone())));
                TruncatedSeries::make(n, i64::from(order), terms).unwrap()
            })
            .collect();
        return SeriesVector::new(comps).unwrap();
    }
}

/// Nonunit vector with a singular linear part (second row a multiple of the first).
pub fn rand_singular(r: &mut ChaCha8Rng, n: usize, order: i32, max_num: i64) -> SeriesVector {
    let row: Vec<Rational> = (0..n).map(|_| q(r.gen_range(-max_num..=max_num), 1)).collect();
    let k = q(r.gen_range(-3..=3), 1);
    let comps = (0..n)
        .map(|i| {
            let lin: Vec<Rational> = match i {
                0 => row.clone(),
                1 => row.iter().map(|v| v * &k).collect(),
                _ => (0..n).map(|j| if j == i { Rational::one() } else { Rational::zero() }).collect(),
            };
            let mut terms: Vec<(MultiIndex, Rational)> =
                lin.into_iter().enumerate().map(|(j, v)| (MultiIndex::unit(n, j), v)).collect();
            let nonlinear = rand_series(r, n, order, 2, 2, 3, max_num);
            terms.extend(nonlinear.terms().map(|(k, v)| (k.clone(), v.clone())));
            TruncatedSeries::make(n, i64::from(order), terms).unwrap()
        })
        .collect();
    SeriesVector::new(comps).unwrap()
}

// ---- proptest strategies ----

pub fn rational_strategy() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(a, b)| q(a, b))
}

/// Random series in `n` variables at `order`; exponents beyond `order` are truncated away.
pub fn series_strategy(n: usize, order: i32, max_terms: usize) -> impl Strategy<Value = TruncatedSeries> {
    let cap = order.max(0) as u32;
    prop::collection::vec((prop::collection::vec(0..=cap, n), rational_strategy()), 0..=max_terms).prop_map(
        move |terms| {
            TruncatedSeries::make(n, i64::from(order), terms.into_iter().map(|(e, c)| (MultiIndex::new(e), c)))
                .unwrap()
        },
    )
}

/// Nonzero series with zero constant term.
pub fn nonunit_strategy(n: usize, order: i32, max_terms: usize) -> impl Strategy<Value = TruncatedSeries> {
    series_strategy(n, order, max_terms)
        .prop_map(|s| s.sub(&TruncatedSeries::constant(s.n(), s.order(), s.constant_term())).unwrap())
        .prop_filter("non-constant", |s| !s.is_zero())
}

pub fn nonunit_vector_strategy(n: usize, order: i32, max_terms: usize) -> impl Strategy<Value = SeriesVector> {
    prop::collection::vec(nonunit_strategy(n, order, max_terms), n).prop_map(|c| SeriesVector::new(c).unwrap())
}

pub fn abs_max(p: &Poly) -> Rational {
    p.values().map(|v| v.abs()).max().unwrap_or_else(Rational::zero)
}
