//! Coefficient field abstraction shared by exact rationals and the
//! high-precision complex numbers used for Bethe states.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::rational::Rat;

pub trait Scalar: Clone + Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn from_rat(r: &Rat) -> Self;
    /// Size estimate used for pivot choice and residual reports.
    fn magnitude(&self) -> f64;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn from_i64(n: i64) -> Self {
        Self::from_rat(&Rat::from(n))
    }

    /// Inverse of a row-major `n x n` matrix, `None` if singular.
    fn invert_matrix(n: usize, a: &[Self]) -> Option<Vec<Self>> {
        gauss_jordan(n, a)
    }
}

/// Partial-pivot Gauss-Jordan elimination with zero skipping.
pub fn gauss_jordan<S: Scalar>(n: usize, a: &[S]) -> Option<Vec<S>> {
    let w = 2 * n;
    let mut m: Vec<S> = Vec::with_capacity(n * w);
    for i in 0..n {
        m.extend_from_slice(&a[i * n..(i + 1) * n]);
        for j in 0..n {
            m.push(if i == j { S::one() } else { S::zero() });
        }
    }
    for col in 0..n {
        let mut best = None;
        let mut best_mag = 0.0;
        for r in col..n {
            let e = &m[r * w + col];
            if !e.is_zero() {
                let mag = e.magnitude();
                if best.is_none() || mag > best_mag {
                    best = Some(r);
                    best_mag = mag;
                }
            }
        }
        let p = best?;
        if p != col {
            for j in 0..w {
                m.swap(p * w + j, col * w + j);
            }
        }
        let pinv = m[col * w + col].inv()?;
        for j in 0..w {
            if !m[col * w + j].is_zero() {
                m[col * w + j] = m[col * w + j].mul(&pinv);
            }
        }
        let pivot_row: Vec<(usize, S)> =
            (0..w).filter(|&j| !m[col * w + j].is_zero()).map(|j| (j, m[col * w + j].clone())).collect();
        for r in 0..n {
            if r == col || m[r * w + col].is_zero() {
                continue;
            }
            let f = m[r * w + col].clone();
            for (j, v) in &pivot_row {
                let t = m[r * w + j].sub(&f.mul(v));
                m[r * w + j] = t;
            }
        }
    }
    Some((0..n).flat_map(|i| m[i * w + n..(i + 1) * w].to_vec()).collect())
}

impl Scalar for Rat {
    fn zero() -> Self {
        Rat::zero()
    }
    fn one() -> Self {
        Rat::one()
    }
    fn is_zero(&self) -> bool {
        Rat::is_zero(self)
    }
    fn is_one(&self) -> bool {
        Rat::is_one(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        self.recip()
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
    fn invert_matrix(n: usize, a: &[Self]) -> Option<Vec<Self>> {
        bareiss_inverse(n, a)
    }
}

/// Exact inverse by fraction-free Gauss-Jordan elimination.
///
/// Each row is scaled to integers, `[S A | S]` is reduced with Bareiss
/// updates so every intermediate stays integral, and the final division by
/// the determinant happens once per entry.
pub fn bareiss_inverse(n: usize, a: &[Rat]) -> Option<Vec<Rat>> {
    let w = 2 * n;
    let mut m: Vec<BigInt> = Vec::with_capacity(n * w);
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        let mut l = BigInt::one();
        for x in row {
            let d = x.denom();
            if !d.is_one() {
                l = num_integer::Integer::lcm(&l, &d);
            }
        }
        for x in row {
            if x.is_zero() {
                m.push(BigInt::zero());
            } else {
                m.push(x.numer() * (&l / x.denom()));
            }
        }
        for j in 0..n {
            m.push(if i == j { l.clone() } else { BigInt::zero() });
        }
    }
    let mut prev = BigInt::one();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r * w + col].is_zero())?;
        if p != col {
            for j in 0..w {
                m.swap(p * w + j, col * w + j);
            }
        }
        let piv = m[col * w + col].clone();
        let pivot_row: Vec<(usize, BigInt)> =
            (0..w).filter(|&j| !m[col * w + j].is_zero()).map(|j| (j, m[col * w + j].clone())).collect();
        let trivial_scale = piv == prev;
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * w + col].clone();
            if f.is_zero() {
                if !trivial_scale {
                    for j in 0..w {
                        let e = &mut m[r * w + j];
                        if !e.is_zero() {
                            *e = &*e * &piv / &prev;
                        }
                    }
                }
                continue;
            }
            let mut row: Vec<BigInt> = m[r * w..(r + 1) * w].iter().map(|e| e * &piv).collect();
            for (j, v) in &pivot_row {
                row[*j] -= &f * v;
            }
            for (j, e) in row.into_iter().enumerate() {
                m[r * w + j] = if prev.is_one() { e } else { e / &prev };
            }
        }
        prev = piv;
    }
    // The left block is now det * I; rows above the last pivot carry the
    // same factor because every row was rescaled at each later step.
    let det = prev;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let diag = m[i * w + i].clone();
        debug_assert_eq!(diag, det);
        for j in 0..n {
            let e = &m[i * w + n + j];
            out.push(if e.is_zero() { Rat::zero() } else { Rat::from_big(BigRational::new(e.clone(), diag.clone())) });
        }
    }
    Some(out)
}
