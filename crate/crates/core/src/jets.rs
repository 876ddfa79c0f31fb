//! Truncated multivariate jets with named nilpotent generators.
//!
//! A monomial is packed into a `u64` with one byte per generator, so at most
//! eight generators with truncation order at most 127 are supported. A
//! generator of order `n` satisfies `x^n = 0`. Adding a generator at the end
//! of an algebra leaves every existing monomial code unchanged, which makes
//! lifting into a larger algebra free.

use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::error::{LaxError, Result};
use crate::rational::Rat;
use crate::scalar::Scalar;

pub type Mono = u64;

pub const MAX_GENERATORS: usize = 8;
pub const MAX_ORDER: u32 = 127;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetAlgebra {
    gens: Vec<(String, u32)>,
    carry: u64,
    mask: u64,
}

impl JetAlgebra {
    pub fn new(gens: &[(&str, u32)]) -> Result<Arc<JetAlgebra>> {
        let owned: Vec<(String, u32)> = gens.iter().map(|(n, o)| (n.to_string(), *o)).collect();
        JetAlgebra::from_owned(owned).map(Arc::new)
    }

    /// The algebra of plain rationals.
    pub fn trivial() -> Arc<JetAlgebra> {
        Arc::new(JetAlgebra { gens: vec![], carry: 0, mask: 0 })
    }

    fn from_owned(gens: Vec<(String, u32)>) -> Result<JetAlgebra> {
        if gens.len() > MAX_GENERATORS {
            return Err(LaxError::InvalidArgument(format!("at most {MAX_GENERATORS} jet generators")));
        }
        let mut carry = 0u64;
        let mut mask = 0u64;
        for (i, (name, order)) in gens.iter().enumerate() {
            if *order < 1 || *order > MAX_ORDER {
                return Err(LaxError::InvalidArgument(format!("generator {name} has order {order}")));
            }
            if name == "λ" && *order != 2 {
                return Err(LaxError::InvalidArgument("the λ generator must have order 2".into()));
            }
            if gens[..i].iter().any(|(n, _)| n == name) {
                return Err(LaxError::InvalidArgument(format!("duplicate generator {name}")));
            }
            carry |= ((128 - *order) as u64) << (8 * i);
            mask |= 0x80u64 << (8 * i);
        }
        Ok(JetAlgebra { gens, carry, mask })
    }

    /// The algebra with one more generator appended.
    pub fn with_generator(&self, name: &str, order: u32) -> Result<Arc<JetAlgebra>> {
        let mut gens = self.gens.clone();
        gens.push((name.to_string(), order));
        JetAlgebra::from_owned(gens).map(Arc::new)
    }

    /// The algebra with the last generator removed.
    pub fn without_last(&self) -> Arc<JetAlgebra> {
        let mut gens = self.gens.clone();
        gens.pop();
        Arc::new(JetAlgebra::from_owned(gens).expect("prefix of a valid algebra"))
    }

    pub fn generators(&self) -> &[(String, u32)] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.gens
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| LaxError::InvalidArgument(format!("unknown generator {name}")))
    }

    pub fn order(&self, idx: usize) -> u32 {
        self.gens[idx].1
    }

    #[inline]
    pub fn truncated(&self, m: Mono) -> bool {
        (m.wrapping_add(self.carry)) & self.mask != 0
    }

    /// Largest total degree a nonzero monomial can have.
    pub fn max_degree(&self) -> u32 {
        self.gens.iter().map(|(_, o)| o - 1).sum()
    }

    pub fn same(a: &Arc<JetAlgebra>, b: &Arc<JetAlgebra>) -> bool {
        Arc::ptr_eq(a, b) || **a == **b
    }
}

#[inline]
pub fn exponent(m: Mono, idx: usize) -> u32 {
    ((m >> (8 * idx)) & 0xff) as u32
}

#[inline]
pub fn mono_of(idx: usize, e: u32) -> Mono {
    (e as u64) << (8 * idx)
}

pub fn degree(m: Mono) -> u32 {
    (0..MAX_GENERATORS).map(|i| exponent(m, i)).sum()
}

/// Sparse jet: sorted monomials with nonzero coefficients.
#[derive(Clone, PartialEq)]
pub struct Jet<S> {
    terms: SmallVec<[(Mono, S); 1]>,
}

impl<S: Scalar> Default for Jet<S> {
    fn default() -> Self {
        Jet::zero()
    }
}

impl<S: Scalar> Jet<S> {
    pub fn zero() -> Jet<S> {
        Jet { terms: SmallVec::new() }
    }

    pub fn one() -> Jet<S> {
        Jet::constant(S::one())
    }

    pub fn constant(c: S) -> Jet<S> {
        let mut terms = SmallVec::new();
        if !c.is_zero() {
            terms.push((0, c));
        }
        Jet { terms }
    }

    pub fn from_rat(r: &Rat) -> Jet<S> {
        Jet::constant(S::from_rat(r))
    }

    pub fn from_i64(n: i64) -> Jet<S> {
        Jet::constant(S::from_i64(n))
    }

    /// The generator at `idx` raised to `e`, or zero when truncated.
    pub fn monomial(alg: &JetAlgebra, idx: usize, e: u32, c: S) -> Jet<S> {
        let m = mono_of(idx, e);
        if alg.truncated(m) || c.is_zero() {
            Jet::zero()
        } else {
            let mut terms = SmallVec::new();
            terms.push((m, c));
            Jet { terms }
        }
    }

    pub fn generator(alg: &JetAlgebra, name: &str) -> Result<Jet<S>> {
        let idx = alg.index_of(name)?;
        Ok(Jet::monomial(alg, idx, 1, S::one()))
    }

    /// `base + generator`, the usual way a spectral parameter gets a
    /// derivative direction.
    pub fn shifted(base: S, alg: &JetAlgebra, name: &str) -> Result<Jet<S>> {
        Ok(Jet::constant(base).add(&Jet::generator(alg, name)?))
    }

    /// Builds a jet from arbitrary terms, dropping zeros and truncated
    /// monomials and merging duplicates.
    pub fn from_terms(alg: &JetAlgebra, terms: impl IntoIterator<Item = (Mono, S)>) -> Jet<S> {
        let mut v: Vec<(Mono, S)> = terms.into_iter().filter(|(m, c)| !alg.truncated(*m) && !c.is_zero()).collect();
        v.sort_by_key(|(m, _)| *m);
        let mut out: SmallVec<[(Mono, S); 1]> = SmallVec::new();
        for (m, c) in v {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc = lc.add(&c),
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Jet { terms: out }
    }

    pub fn terms(&self) -> &[(Mono, S)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0 == 0)
    }

    pub fn constant_term(&self) -> S {
        match self.terms.first() {
            Some((0, c)) => c.clone(),
            _ => S::zero(),
        }
    }

    pub fn coeff(&self, m: Mono) -> S {
        match self.terms.binary_search_by_key(&m, |(k, _)| *k) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => S::zero(),
        }
    }

    pub fn add(&self, o: &Jet<S>) -> Jet<S> {
        if o.terms.is_empty() {
            return self.clone();
        }
        if self.terms.is_empty() {
            return o.clone();
        }
        let (a, b) = (&self.terms, &o.terms);
        let mut out: SmallVec<[(Mono, S); 1]> = SmallVec::with_capacity(a.len().max(b.len()));
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i].0 < b[j].0 {
                out.push(a[i].clone());
                i += 1;
            } else if a[i].0 > b[j].0 {
                out.push(b[j].clone());
                j += 1;
            } else {
                let c = a[i].1.add(&b[j].1);
                if !c.is_zero() {
                    out.push((a[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
        out.extend(a[i..].iter().cloned());
        out.extend(b[j..].iter().cloned());
        Jet { terms: out }
    }

    pub fn add_assign(&mut self, o: &Jet<S>) {
        if o.terms.is_empty() {
            return;
        }
        if self.terms.len() == 1 && o.terms.len() == 1 && self.terms[0].0 == o.terms[0].0 {
            let c = self.terms[0].1.add(&o.terms[0].1);
            if c.is_zero() {
                self.terms.clear();
            } else {
                self.terms[0].1 = c;
            }
            return;
        }
        *self = self.add(o);
    }

    pub fn neg(&self) -> Jet<S> {
        Jet { terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect() }
    }

    pub fn sub(&self, o: &Jet<S>) -> Jet<S> {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &S) -> Jet<S> {
        if s.is_zero() {
            return Jet::zero();
        }
        Jet { terms: self.terms.iter().map(|(m, c)| (*m, c.mul(s))).filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn mul(&self, o: &Jet<S>, alg: &JetAlgebra) -> Jet<S> {
        let (a, b) = (&self.terms, &o.terms);
        if a.is_empty() || b.is_empty() {
            return Jet::zero();
        }
        if a.len() == 1 && a[0].0 == 0 {
            return o.scale(&a[0].1);
        }
        if b.len() == 1 && b[0].0 == 0 {
            return self.scale(&b[0].1);
        }
        let mut v: SmallVec<[(Mono, S); 8]> = SmallVec::new();
        for (ma, ca) in a.iter() {
            for (mb, cb) in b.iter() {
                let m = ma + mb;
                if !alg.truncated(m) {
                    v.push((m, ca.mul(cb)));
                }
            }
        }
        v.sort_by_key(|(m, _)| *m);
        let mut out: SmallVec<[(Mono, S); 1]> = SmallVec::new();
        for (m, c) in v {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc = lc.add(&c),
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Jet { terms: out }
    }

    /// `self += a * b`
    pub fn mul_add_assign(&mut self, a: &Jet<S>, b: &Jet<S>, alg: &JetAlgebra) {
        if a.terms.is_empty() || b.terms.is_empty() {
            return;
        }
        if a.terms.len() == 1 && b.terms.len() == 1 {
            let m = a.terms[0].0 + b.terms[0].0;
            if alg.truncated(m) {
                return;
            }
            let c = a.terms[0].1.mul(&b.terms[0].1);
            if self.terms.is_empty() {
                self.terms.push((m, c));
                return;
            }
            if self.terms.len() == 1 && self.terms[0].0 == m {
                let s = self.terms[0].1.add(&c);
                if s.is_zero() {
                    self.terms.clear();
                } else {
                    self.terms[0].1 = s;
                }
                return;
            }
            let mut t = SmallVec::new();
            t.push((m, c));
            *self = self.add(&Jet { terms: t });
            return;
        }
        let p = a.mul(b, alg);
        self.add_assign(&p);
    }

    /// Multiplicative inverse by the geometric series around the constant
    /// term.
    pub fn inv(&self, alg: &JetAlgebra) -> Result<Jet<S>> {
        let c = self.constant_term();
        let ci = c.inv().ok_or_else(|| LaxError::PoleAtEvaluationPoint("jet with zero constant term".into()))?;
        if self.is_constant() {
            return Ok(Jet::constant(ci));
        }
        // self = c (1 + n) with n nilpotent
        let n = Jet { terms: self.terms.iter().filter(|(m, _)| *m != 0).map(|(m, x)| (*m, x.mul(&ci))).collect() };
        let neg_n = n.neg();
        let mut acc = Jet::one();
        let mut power = Jet::one();
        for _ in 0..alg.max_degree() {
            power = power.mul(&neg_n, alg);
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power);
        }
        Ok(acc.scale(&ci))
    }

    /// Partial derivative along generator `idx`.
    pub fn diff(&self, idx: usize) -> Jet<S> {
        let mut out: SmallVec<[(Mono, S); 1]> = SmallVec::new();
        for (m, c) in &self.terms {
            let e = exponent(*m, idx);
            if e > 0 {
                out.push((m - mono_of(idx, 1), c.mul(&S::from_i64(e as i64))));
            }
        }
        // subtracting one unit from a single byte keeps the sort order
        Jet { terms: out }
    }

    /// Coefficient of `gen^e` as a jet in the remaining generators; the
    /// generator's byte is cleared.
    pub fn coefficient_of(&self, idx: usize, e: u32) -> Jet<S> {
        let clear = !(0xffu64 << (8 * idx));
        Jet {
            terms: self.terms.iter().filter(|(m, _)| exponent(*m, idx) == e).map(|(m, c)| (m & clear, c.clone())).collect(),
        }
    }

    /// Drops every term containing generator `idx` (evaluation at zero).
    pub fn at_zero(&self, idx: usize) -> Jet<S> {
        self.coefficient_of(idx, 0)
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Jet<T> {
        Jet { terms: self.terms.iter().map(|(m, c)| (*m, f(c))).filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.magnitude()).fold(0.0, f64::max)
    }
}

impl Jet<Rat> {
    /// `order! * [gen^order] a` with other generators at degree zero.
    pub fn derivative_coeff(&self, alg: &JetAlgebra, gen: &str, order: u32) -> Result<Rat> {
        let idx = alg.index_of(gen)?;
        if order >= alg.order(idx) {
            return Err(LaxError::JetOrder(format!("derivative of order {order} along {gen} exceeds truncation")));
        }
        Ok(&self.coeff(mono_of(idx, order)) * &Rat::factorial(order))
    }

    pub fn max_abs(&self) -> Rat {
        self.terms.iter().map(|(_, c)| c.abs()).max().unwrap_or_else(Rat::zero)
    }
}

impl<S: Scalar> fmt::Debug for Jet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("{c:?}@{m:x}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Multi-degree key used in the JSON format, e.g. `"0,1"`.
pub fn mono_key(alg: &JetAlgebra, m: Mono) -> String {
    (0..alg.len()).map(|i| exponent(m, i).to_string()).collect::<Vec<_>>().join(",")
}

pub fn parse_mono_key(alg: &JetAlgebra, key: &str) -> Result<Mono> {
    if alg.is_empty() {
        return if key.is_empty() { Ok(0) } else { Err(LaxError::Parse(format!("bad multidegree {key:?}"))) };
    }
    let parts: Vec<&str> = key.split(',').collect();
    if parts.len() != alg.len() {
        return Err(LaxError::Parse(format!("multidegree {key:?} has wrong arity")));
    }
    let mut m = 0u64;
    for (i, p) in parts.iter().enumerate() {
        let e: u32 = p.trim().parse().map_err(|_| LaxError::Parse(format!("bad exponent {p:?}")))?;
        if e >= alg.order(i) {
            return Err(LaxError::Parse(format!("exponent {e} exceeds truncation")));
        }
        m |= mono_of(i, e);
    }
    Ok(m)
}

/// A jet bundled with its algebra; the checked, user-facing scalar.
#[derive(Clone, Debug)]
pub struct JetScalar {
    pub alg: Arc<JetAlgebra>,
    pub jet: Jet<Rat>,
}

impl PartialEq for JetScalar {
    fn eq(&self, o: &JetScalar) -> bool {
        JetAlgebra::same(&self.alg, &o.alg) && self.jet == o.jet
    }
}

impl JetScalar {
    pub fn new(alg: &Arc<JetAlgebra>, jet: Jet<Rat>) -> JetScalar {
        JetScalar { alg: alg.clone(), jet }
    }

    pub fn constant(alg: &Arc<JetAlgebra>, r: Rat) -> JetScalar {
        JetScalar::new(alg, Jet::constant(r))
    }

    /// Builds `Σ c · Π gen^e` from `(exponents, c)` pairs in generator order.
    pub fn from_poly(alg: &Arc<JetAlgebra>, terms: &[(&[u32], Rat)]) -> JetScalar {
        let jet = Jet::from_terms(
            alg,
            terms.iter().map(|(es, c)| (es.iter().enumerate().map(|(i, e)| mono_of(i, *e)).sum::<u64>(), c.clone())),
        );
        JetScalar::new(alg, jet)
    }

    fn check(&self, o: &JetScalar) -> Result<()> {
        if JetAlgebra::same(&self.alg, &o.alg) {
            Ok(())
        } else {
            Err(LaxError::AlgebraMismatch)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.jet.is_zero()
    }
}

pub fn jet_add(a: &JetScalar, b: &JetScalar) -> Result<JetScalar> {
    a.check(b)?;
    Ok(JetScalar::new(&a.alg, a.jet.add(&b.jet)))
}

pub fn jet_mul(a: &JetScalar, b: &JetScalar) -> Result<JetScalar> {
    a.check(b)?;
    Ok(JetScalar::new(&a.alg, a.jet.mul(&b.jet, &a.alg)))
}

pub fn jet_inv(a: &JetScalar) -> Result<JetScalar> {
    Ok(JetScalar::new(&a.alg, a.jet.inv(&a.alg)?))
}

pub fn derivative_coeff(a: &JetScalar, gen: &str, order: u32) -> Result<Rat> {
    a.jet.derivative_coeff(&a.alg, gen, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use proptest::prelude::*;

    fn eps3() -> Arc<JetAlgebra> {
        JetAlgebra::new(&[("ε", 3)]).unwrap()
    }

    fn poly(alg: &Arc<JetAlgebra>, cs: &[Rat]) -> JetScalar {
        let terms: Vec<(Vec<u32>, Rat)> = cs.iter().enumerate().map(|(i, c)| (vec![i as u32], c.clone())).collect();
        let refs: Vec<(&[u32], Rat)> = terms.iter().map(|(e, c)| (e.as_slice(), c.clone())).collect();
        JetScalar::from_poly(alg, &refs)
    }

    #[test]
    fn addition_examples() {
        let alg = eps3();
        let a = poly(&alg, &[qi(1), qi(1)]);
        let b = poly(&alg, &[qi(2), qi(-1)]);
        assert_eq!(jet_add(&a, &b).unwrap(), JetScalar::constant(&alg, qi(3)));
        let z = JetScalar::constant(&alg, qi(0));
        assert_eq!(jet_add(&z, &a).unwrap(), a);
        let lam = JetAlgebra::new(&[("λ", 2)]).unwrap();
        let x = JetScalar::from_poly(&lam, &[(&[0], q(1, 2)), (&[1], qi(1))]);
        let y = JetScalar::constant(&lam, q(1, 3));
        let want = JetScalar::from_poly(&lam, &[(&[0], q(5, 6)), (&[1], qi(1))]);
        assert_eq!(jet_add(&x, &y).unwrap(), want);
    }

    #[test]
    fn multiplication_examples() {
        let lam = JetAlgebra::new(&[("λ", 2)]).unwrap();
        let l = JetScalar::from_poly(&lam, &[(&[1], qi(1))]);
        assert!(jet_mul(&l, &l).unwrap().is_zero());
        let e2 = JetAlgebra::new(&[("ε", 2)]).unwrap();
        let a = poly(&e2, &[qi(1), qi(1)]);
        let b = poly(&e2, &[qi(1), qi(-1)]);
        assert_eq!(jet_mul(&a, &b).unwrap(), JetScalar::constant(&e2, qi(1)));
        let alg = eps3();
        let a = poly(&alg, &[qi(1), qi(2), qi(3)]);
        let b = poly(&alg, &[qi(2), qi(1)]);
        // naive convolution of [1,2,3] and [2,1] truncated at degree 3
        let (pa, pb) = ([1i64, 2, 3], [2i64, 1]);
        let mut conv = [0i64; 3];
        for (i, x) in pa.iter().enumerate() {
            for (j, y) in pb.iter().enumerate() {
                if i + j < 3 {
                    conv[i + j] += x * y;
                }
            }
        }
        assert_eq!(conv, [2, 5, 8]);
        assert_eq!(jet_mul(&a, &b).unwrap(), poly(&alg, &[qi(2), qi(5), qi(8)]));
    }

    #[test]
    fn inverse_examples() {
        let alg = eps3();
        assert_eq!(jet_inv(&JetScalar::constant(&alg, qi(2))).unwrap(), JetScalar::constant(&alg, q(1, 2)));
        let a = poly(&alg, &[qi(1), qi(-1)]);
        assert_eq!(jet_inv(&a).unwrap(), poly(&alg, &[qi(1), qi(1), qi(1)]));
        let e = poly(&alg, &[qi(0), qi(1)]);
        assert!(matches!(jet_inv(&e), Err(LaxError::PoleAtEvaluationPoint(_))));
    }

    #[test]
    fn derivative_examples() {
        let alg = eps3();
        let a = poly(&alg, &[qi(3), qi(5), qi(7)]);
        assert_eq!(derivative_coeff(&a, "ε", 1).unwrap(), qi(5));
        assert_eq!(derivative_coeff(&a, "ε", 2).unwrap(), qi(14));
        assert!(derivative_coeff(&a, "ε", 3).is_err());
    }

    #[test]
    fn mismatched_algebras_error() {
        let a = JetScalar::constant(&eps3(), qi(1));
        let b = JetScalar::constant(&JetAlgebra::new(&[("λ", 2)]).unwrap(), qi(1));
        assert_eq!(jet_add(&a, &b), Err(LaxError::AlgebraMismatch));
        assert_eq!(jet_mul(&a, &b), Err(LaxError::AlgebraMismatch));
    }

    #[test]
    fn algebra_validation() {
        assert!(JetAlgebra::new(&[("λ", 3)]).is_err());
        assert!(JetAlgebra::new(&[("a", 2), ("a", 2)]).is_err());
        assert!(JetAlgebra::new(&[("a", 0)]).is_err());
        assert!(JetAlgebra::new(&[("a", 128)]).is_err());
    }

    #[test]
    fn lifting_keeps_codes() {
        let alg = eps3();
        let big = alg.with_generator("δ", 4).unwrap();
        let a = poly(&alg, &[qi(1), qi(2), qi(3)]).jet;
        let d = Jet::<Rat>::generator(&big, "δ").unwrap();
        let p = a.mul(&d, &big);
        assert_eq!(p.coefficient_of(1, 1), a);
        assert!(p.coefficient_of(1, 0).is_zero());
        assert_eq!(p.diff(1), a);
    }

    // Rational function oracle: f(x) = (a x + b) / (c x + d), derivatives
    // from the closed form f^(n)(x0) = (-1)^(n+1) n! c^(n-1) (ad - bc) / (c x0 + d)^(n+1).
    proptest! {
        #[test]
        fn mobius_derivatives(a in -5i64..5, b in -5i64..5, c in -5i64..5, d in -5i64..5, x0 in -4i64..4) {
            let den0 = c * x0 + d;
            prop_assume!(den0 != 0);
            let alg = JetAlgebra::new(&[("ε", 5)]).unwrap();
            let x = Jet::<Rat>::shifted(qi(x0), &alg, "ε").unwrap();
            let num = x.scale(&qi(a)).add(&Jet::from_i64(b));
            let den = x.scale(&qi(c)).add(&Jet::from_i64(d));
            let f = num.mul(&den.inv(&alg).unwrap(), &alg);
            for n in 1u32..5 {
                let sign = if (n + 1) % 2 == 0 { 1 } else { -1 };
                let want = &(&qi(sign) * &Rat::factorial(n)) * &(&qi(c).pow(n - 1) * &qi(a * d - b * c));
                let want = &want / &qi(den0).pow(n + 1);
                prop_assert_eq!(f.derivative_coeff(&alg, "ε", n).unwrap(), want);
            }
        }
    }

    fn arb_jet() -> impl Strategy<Value = Vec<(u32, u32, i64, i64)>> {
        proptest::collection::vec((0u32..3, 0u32..2, -5i64..5, 1i64..4), 0..5)
    }

    fn build(alg: &JetAlgebra, t: &[(u32, u32, i64, i64)]) -> Jet<Rat> {
        Jet::from_terms(alg, t.iter().map(|(e0, e1, n, d)| (mono_of(0, *e0) | mono_of(1, *e1), q(*n, *d))))
    }

    proptest! {
        #[test]
        fn ring_axioms(x in arb_jet(), y in arb_jet(), z in arb_jet()) {
            let alg = JetAlgebra::new(&[("ε", 3), ("λ", 2)]).unwrap();
            let (a, b, c) = (build(&alg, &x), build(&alg, &y), build(&alg, &z));
            prop_assert_eq!(a.mul(&b, &alg).mul(&c, &alg), a.mul(&b.mul(&c, &alg), &alg));
            prop_assert_eq!(a.mul(&b.add(&c), &alg), a.mul(&b, &alg).add(&a.mul(&c, &alg)));
            prop_assert_eq!(a.mul(&b, &alg), b.mul(&a, &alg));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert!(a.sub(&a).is_zero());
            let mut acc = a.clone();
            acc.mul_add_assign(&b, &c, &alg);
            prop_assert_eq!(acc, a.add(&b.mul(&c, &alg)));
        }

        #[test]
        fn inverse_is_two_sided(x in arb_jet(), c0 in 1i64..6) {
            let alg = JetAlgebra::new(&[("ε", 3), ("λ", 2)]).unwrap();
            let a = build(&alg, &x).add(&Jet::from_i64(c0)).sub(&Jet::constant(build(&alg, &x).constant_term()));
            let inv = a.inv(&alg).unwrap();
            prop_assert_eq!(a.mul(&inv, &alg), Jet::one());
            prop_assert_eq!(inv.mul(&a, &alg), Jet::one());
        }
    }
}
