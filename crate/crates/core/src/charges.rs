//! Algebraic charge densities, reduced densities and the identities they
//! satisfy.
//!
//! Every density is computed on its own legs only: first group on
//! `1..=|first|`, second group after it. Callers embed the result.

use std::sync::Arc;

use crate::error::{LaxError, Result};
use crate::jets::{Jet, JetAlgebra};
use crate::rational::Rat;
use crate::rmatrix::{coproduct_groups, coproduct_groups_inv, coproduct_r, coproduct_r_inv, Check, Model};
use crate::scalar::Scalar;
use crate::tensor::TensorOperator;

type Op<S> = TensorOperator<S>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Plain,
    Tilde,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::Tilde => "tilde",
        }
    }
}

/// A fresh generator name for the derivative direction.
fn fresh_generator(alg: &JetAlgebra) -> String {
    let mut name = String::from("∂");
    while alg.index_of(&name).is_ok() {
        name.push('\'');
    }
    name
}

/// `Q^(k)(first, second)` or `Q~^(k)(first, second)`.
///
/// The differentiated group (first for plain, second for tilde) gets a
/// nilpotent `e` with `e^k = 0` added to every parameter. With
/// `F = R_{(first)(second)}` and `G = F^-1 dF/de`, the result is
/// `(k-2)! [e^(k-2)] G`, negated for the tilde variant.
pub fn algebraic_q<S: Scalar>(
    model: &Model,
    alg: &Arc<JetAlgebra>,
    k: u32,
    variant: Variant,
    first: &[Jet<S>],
    second: &[Jet<S>],
) -> Result<Op<S>> {
    if k < 2 {
        return Err(LaxError::InvalidArgument(format!("charge index k = {k} must be at least 2")));
    }
    let total = first.len() + second.len();
    if total == 0 {
        return Err(LaxError::InvalidLegs("density on zero legs".into()));
    }
    let d = model.site_dim();
    if first.is_empty() || second.is_empty() {
        return Ok(Op::zero(total, d, alg));
    }
    let name = fresh_generator(alg);
    let big = alg.with_generator(&name, k)?;
    let idx = big.len() - 1;
    let e: Jet<S> = Jet::generator(&big, &name)?;
    let shift = |g: &[Jet<S>]| g.iter().map(|u| u.add(&e)).collect::<Vec<_>>();
    let (f, s) = match variant {
        Variant::Plain => (shift(first), second.to_vec()),
        Variant::Tilde => (first.to_vec(), shift(second)),
    };
    let fr = coproduct_groups(model, &big, &f, &s)?;
    let finv = coproduct_groups_inv(model, &big, &f, &s)?;
    let g = &finv * &fr.derivative(idx);
    let mut out = g.coefficient_of(idx, k - 2, alg).scale_scalar(&S::from_rat(&Rat::factorial(k - 2)));
    if variant == Variant::Tilde {
        out = -&out;
    }
    Ok(out)
}

/// Reduced density on legs ordered `(a, b, c)`.
///
/// Plain: `Q(a, bc) - R_ab^-1 Q(a, c) R_ab`.
/// Tilde: `Q~(ab, c) - R_bc^-1 Q~(a, c) R_bc`.
pub fn reduced_q<S: Scalar>(
    model: &Model,
    alg: &Arc<JetAlgebra>,
    k: u32,
    variant: Variant,
    a: &[Jet<S>],
    b: &[Jet<S>],
    c: &[Jet<S>],
) -> Result<Op<S>> {
    let (na, nb, nc) = (a.len(), b.len(), c.len());
    let total = na + nb + nc;
    let la: Vec<usize> = (1..=na).collect();
    let lb: Vec<usize> = (na + 1..=na + nb).collect();
    let lc: Vec<usize> = (na + nb + 1..=total).collect();
    let with = |legs: &[usize], ps: &[Jet<S>]| legs.iter().copied().zip(ps.iter().cloned()).collect::<Vec<_>>();
    match variant {
        Variant::Plain => {
            let bc: Vec<Jet<S>> = b.iter().chain(c).cloned().collect();
            let full = algebraic_q(model, alg, k, variant, a, &bc)?;
            if na == 0 || nc == 0 {
                return Ok(full);
            }
            let inner = algebraic_q(model, alg, k, variant, a, c)?;
            let pos: Vec<usize> = la.iter().chain(&lc).copied().collect();
            let inner = inner.embed(&pos, total)?;
            let r = coproduct_r(model, alg, &with(&la, a), &with(&lb, b), total)?;
            let rinv = coproduct_r_inv(model, alg, &with(&la, a), &with(&lb, b), total)?;
            Ok(&full - &inner.conjugate(&rinv, &r))
        }
        Variant::Tilde => {
            let ab: Vec<Jet<S>> = a.iter().chain(b).cloned().collect();
            let full = algebraic_q(model, alg, k, variant, &ab, c)?;
            if na == 0 || nc == 0 {
                return Ok(full);
            }
            let inner = algebraic_q(model, alg, k, variant, a, c)?;
            let pos: Vec<usize> = la.iter().chain(&lc).copied().collect();
            let inner = inner.embed(&pos, total)?;
            let r = coproduct_r(model, alg, &with(&lb, b), &with(&lc, c), total)?;
            let rinv = coproduct_r_inv(model, alg, &with(&lb, b), &with(&lc, c), total)?;
            Ok(&full - &inner.conjugate(&rinv, &r))
        }
    }
}

fn zeros<S: Scalar>(n: usize) -> Vec<Jet<S>> {
    vec![Jet::zero(); n]
}

/// Charge densities on `k` legs built from algebraic densities at zero
/// parameters: `q = Q_{1(2..k)} - Q_{2(3..k)}` and
/// `q~ = Q~_{(1..k-1)k} - Q~_{(1..k-2)k-1}`.
pub fn conjecture_density<S: Scalar>(model: &Model, alg: &Arc<JetAlgebra>, k: u32) -> Result<(Op<S>, Op<S>)> {
    if k < 2 {
        return Err(LaxError::InvalidArgument("k must be at least 2".into()));
    }
    let ku = k as usize;
    let z = zeros::<S>;
    let q_full = algebraic_q(model, alg, k, Variant::Plain, &z(1), &z(ku - 1))?;
    let q = if ku >= 3 {
        let tail = algebraic_q(model, alg, k, Variant::Plain, &z(1), &z(ku - 2))?;
        let pos: Vec<usize> = (2..=ku).collect();
        &q_full - &tail.embed(&pos, ku)?
    } else {
        q_full
    };
    let qt_full = algebraic_q(model, alg, k, Variant::Tilde, &z(ku - 1), &z(1))?;
    let qt = if ku >= 3 {
        let head = algebraic_q(model, alg, k, Variant::Tilde, &z(ku - 2), &z(1))?;
        let pos: Vec<usize> = (1..ku).collect();
        &qt_full - &head.embed(&pos, ku)?
    } else {
        qt_full
    };
    Ok((q, qt))
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `c^k_{l1..ln} = prod_{m=2..n} binom(l1+..+lm - 1, l1+..+l(m-1))`.
pub fn coproduct_coefficient(k: u32, composition: &[u32]) -> Result<u128> {
    if composition.is_empty() || composition.contains(&0) || composition.iter().sum::<u32>() != k {
        return Err(LaxError::InvalidArgument(format!("{composition:?} is not a composition of {k}")));
    }
    let mut acc: u128 = 1;
    let mut partial = composition[0] as u64;
    for &l in &composition[1..] {
        let next = partial + l as u64;
        acc *= binomial(next - 1, partial);
        partial = next;
    }
    Ok(acc)
}

/// All compositions of `total` into `parts` positive integers.
pub fn compositions(total: u32, parts: u32) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if total < parts {
        return vec![];
    }
    let mut out = Vec::new();
    for first in 1..=total - (parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn rat_jets(xs: &[&Rat]) -> Vec<Jet<Rat>> {
    xs.iter().map(|x| Jet::from_rat(x)).collect()
}

/// Nested-commutator expansion of `Q^(k)_{1(23)}` and `Q~^(k)_{(12)3}` at
/// parameters `1@u, 2@v, 3@w`, compared with the direct computation.
pub fn verify_coproduct_prop(model: &Model, k: u32, u: &Rat, v: &Rat, w: &Rat) -> Result<Vec<Check>> {
    if k < 2 {
        return Err(LaxError::InvalidArgument("k must be at least 2".into()));
    }
    let alg = JetAlgebra::trivial();
    let [ju, jv, jw]: [Jet<Rat>; 3] = rat_jets(&[u, v, w]).try_into().expect("three parameters");
    let d = model.site_dim();
    let r12 = model.eval(&alg, &ju, &jv)?.embed(&[1, 2], 3)?;
    let r12i = model.r_inverse(&alg, &ju, &jv)?.embed(&[1, 2], 3)?;
    let r23 = model.eval(&alg, &jv, &jw)?.embed(&[2, 3], 3)?;
    let r23i = model.r_inverse(&alg, &jv, &jw)?.embed(&[2, 3], 3)?;
    let mut q12 = vec![Op::zero(3, d, &alg); k as usize + 1];
    let mut q13 = q12.clone();
    let mut t23 = q12.clone();
    let mut t13 = q12.clone();
    for j in 2..=k {
        let ju1 = std::slice::from_ref(&ju);
        q12[j as usize] = algebraic_q(model, &alg, j, Variant::Plain, ju1, std::slice::from_ref(&jv))?.embed(&[1, 2], 3)?;
        q13[j as usize] = algebraic_q(model, &alg, j, Variant::Plain, ju1, std::slice::from_ref(&jw))?.embed(&[1, 3], 3)?;
        t23[j as usize] =
            algebraic_q(model, &alg, j, Variant::Tilde, std::slice::from_ref(&jv), std::slice::from_ref(&jw))?.embed(&[2, 3], 3)?;
        t13[j as usize] = algebraic_q(model, &alg, j, Variant::Tilde, ju1, std::slice::from_ref(&jw))?.embed(&[1, 3], 3)?;
    }
    let ku = k as usize;
    let mut plain = &q12[ku] + &q13[ku].conjugate(&r12i, &r12);
    let mut tilde = &t23[ku] + &t13[ku].conjugate(&r23i, &r23);
    for n in 2..k {
        for comp in compositions(k - 1, n) {
            let c = Rat::from(coproduct_coefficient(k - 1, &comp)? as i64);
            let last = *comp.last().expect("nonempty") as usize + 1;
            let mut x = q13[last].conjugate(&r12i, &r12);
            let mut y = t13[last].conjugate(&r23i, &r23);
            for &l in &comp[..comp.len() - 1] {
                let l = l as usize + 1;
                x = x.commutator(&q12[l])?;
                y = t23[l].commutator(&y)?;
            }
            plain = &plain + &x.scale_scalar(&c);
            tilde = &tilde + &y.scale_scalar(&c);
        }
    }
    let direct_plain = algebraic_q(model, &alg, k, Variant::Plain, std::slice::from_ref(&ju), &[jv.clone(), jw.clone()])?;
    let direct_tilde = algebraic_q(model, &alg, k, Variant::Tilde, &[ju.clone(), jv.clone()], std::slice::from_ref(&jw))?;
    Ok(vec![
        Check::from_difference(&format!("coproduct Q^({k})_1(23)"), &direct_plain, &plain),
        Check::from_difference(&format!("coproduct Q~^({k})_(12)3"), &direct_tilde, &tilde),
    ])
}

/// Leg layout helper: consecutive blocks of legs with their parameters.
struct Layout {
    total: usize,
}

impl Layout {
    fn block(&mut self, n: usize) -> Vec<usize> {
        let v = (self.total + 1..=self.total + n).collect();
        self.total += n;
        v
    }
}

fn legs_with<S: Scalar>(legs: &[usize], ps: &[Jet<S>]) -> Vec<(usize, Jet<S>)> {
    legs.iter().copied().zip(ps.iter().cloned()).collect()
}

fn cat(parts: &[&[usize]]) -> Vec<usize> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

/// `L_{ā(S)}`: the coproduct of the auxiliary group against sites at zero.
fn lax_segment(model: &Model, alg: &Arc<JetAlgebra>, aux: &[(usize, Jet<Rat>)], sites: &[usize], total: usize) -> Result<Op<Rat>> {
    let s: Vec<(usize, Jet<Rat>)> = sites.iter().map(|l| (*l, Jet::zero())).collect();
    coproduct_r(model, alg, aux, &s, total)
}

/// Commutator of a range-`k` density with a monodromy segment against the
/// two reduced-density insertions.
pub fn verify_sutherland(model: &Model, k: u32, variant: Variant, aux: &[Rat]) -> Result<Check> {
    if k < 2 || aux.is_empty() {
        return Err(LaxError::InvalidArgument("need k >= 2 and at least one auxiliary leg".into()));
    }
    let alg = JetAlgebra::trivial();
    let ku = k as usize;
    let m = aux.len();
    let total = m + ku;
    let ap: Vec<Jet<Rat>> = aux.iter().map(Jet::from_rat).collect();
    let al: Vec<usize> = (1..=m).collect();
    let aux_legs = legs_with(&al, &ap);
    let site = |i: usize| m + i;
    let sites = |from: usize, to: usize| -> Vec<usize> { (from..=to).map(site).collect() };
    let (q, qt) = conjecture_density::<Rat>(model, &alg, k)?;
    let density = match variant {
        Variant::Plain => q,
        Variant::Tilde => qt,
    };
    let lhs = density.embed(&sites(1, ku), total)?.commutator(&lax_segment(model, &alg, &aux_legs, &sites(1, ku), total)?)?;
    let z = zeros::<Rat>;
    let seg = |from: usize, to: usize| lax_segment(model, &alg, &aux_legs, &sites(from, to), total);
    let rhs = match variant {
        Variant::Plain => {
            let r1 = reduced_q(model, &alg, k, variant, &z(1), &ap, &z(ku.saturating_sub(2)))?
                .embed(&cat(&[&[site(1)], &al, &sites(2, ku - 1)]), total)?;
            let r2 = reduced_q(model, &alg, k, variant, &z(1), &ap, &z(ku - 2))?.embed(&cat(&[&[site(2)], &al, &sites(3, ku)]), total)?;
            let t1 = &(&seg(2, ku)? * &r1) * &seg(1, 1)?;
            let t2 = &(&seg(3, ku)? * &r2) * &seg(1, 2)?;
            &t1 - &t2
        }
        Variant::Tilde => {
            let r1 = reduced_q(model, &alg, k, variant, &z(ku - 2), &ap, &z(1))?
                .embed(&cat(&[&sites(1, ku - 2), &al, &[site(ku - 1)]]), total)?;
            let r2 = reduced_q(model, &alg, k, variant, &z(ku - 2), &ap, &z(1))?.embed(&cat(&[&sites(2, ku - 1), &al, &[site(ku)]]), total)?;
            let t1 = &(&seg(ku - 1, ku)? * &r1) * &seg(1, ku - 2)?;
            let t2 = &(&seg(ku, ku)? * &r2) * &seg(1, ku - 1)?;
            &t1 - &t2
        }
    };
    Ok(Check::from_difference(&format!("sutherland {} k={k} aux={m}", variant.name()), &lhs, &rhs))
}

/// Finite-length identities of the algebraic densities and the splitting
/// rule of the reduced densities, for spectral groups `ā` and `b̄`.
pub fn verify_lemma_simplify(model: &Model, k: u32, a_params: &[Rat], b_params: &[Rat]) -> Result<Vec<Check>> {
    if k < 2 {
        return Err(LaxError::InvalidArgument("k must be at least 2".into()));
    }
    let alg = JetAlgebra::trivial();
    let ku = k as usize;
    let ap: Vec<Jet<Rat>> = a_params.iter().map(Jet::from_rat).collect();
    let bp: Vec<Jet<Rat>> = b_params.iter().map(Jet::from_rat).collect();
    let (na, nb) = (ap.len(), bp.len());
    let z = zeros::<Rat>;
    let mut checks = Vec::new();
    let q = |v: Variant, f: &[Jet<Rat>], s: &[Jet<Rat>]| algebraic_q(model, &alg, k, v, f, s);
    let cjoin = |parts: &[&[Jet<Rat>]]| -> Vec<Jet<Rat>> { parts.iter().flat_map(|p| p.iter().cloned()).collect() };

    // Q_{1(ā,2..k-1,b̄)} - R_{1ā}^-1 Q_{1(2..k-1,b̄)} R_{1ā}
    //   = Q_{1(ā,2..k-1)} - R_{1ā}^-1 Q_{1(2..k-1)} R_{1ā}
    {
        let mut lay = Layout { total: 0 };
        let l1 = lay.block(1);
        let la = lay.block(na);
        let lm = lay.block(ku - 2);
        let lb = lay.block(nb);
        let t = lay.total;
        let r = coproduct_r(model, &alg, &legs_with(&l1, &z(1)), &legs_with(&la, &ap), t)?;
        let ri = coproduct_r_inv(model, &alg, &legs_with(&l1, &z(1)), &legs_with(&la, &ap), t)?;
        let lhs = &q(Variant::Plain, &z(1), &cjoin(&[&ap, &z(ku - 2), &bp]))?
            - &q(Variant::Plain, &z(1), &cjoin(&[&z(ku - 2), &bp]))?.embed(&cat(&[&l1, &lm, &lb]), t)?.conjugate(&ri, &r);
        let rhs = &q(Variant::Plain, &z(1), &cjoin(&[&ap, &z(ku - 2)]))?.embed(&cat(&[&l1, &la, &lm]), t)?
            - &q(Variant::Plain, &z(1), &z(ku - 2))?.embed(&cat(&[&l1, &lm]), t)?.conjugate(&ri, &r);
        checks.push(Check::from_difference("finite length Q", &lhs, &rhs));
    }
    // Q~_{(ā,1..k-1,b̄)k} - R_{b̄k}^-1 Q~_{(ā,1..k-1)k} R_{b̄k}
    //   = Q~_{(1..k-1,b̄)k} - R_{b̄k}^-1 Q~_{(1..k-1)k} R_{b̄k}
    {
        let mut lay = Layout { total: 0 };
        let la = lay.block(na);
        let lm = lay.block(ku - 1);
        let lb = lay.block(nb);
        let lk = lay.block(1);
        let t = lay.total;
        let r = coproduct_r(model, &alg, &legs_with(&lb, &bp), &legs_with(&lk, &z(1)), t)?;
        let ri = coproduct_r_inv(model, &alg, &legs_with(&lb, &bp), &legs_with(&lk, &z(1)), t)?;
        let lhs = &q(Variant::Tilde, &cjoin(&[&ap, &z(ku - 1), &bp]), &z(1))?
            - &q(Variant::Tilde, &cjoin(&[&ap, &z(ku - 1)]), &z(1))?.embed(&cat(&[&la, &lm, &lk]), t)?.conjugate(&ri, &r);
        let rhs = &q(Variant::Tilde, &cjoin(&[&z(ku - 1), &bp]), &z(1))?.embed(&cat(&[&lm, &lb, &lk]), t)?
            - &q(Variant::Tilde, &z(ku - 1), &z(1))?.embed(&cat(&[&lm, &lk]), t)?.conjugate(&ri, &r);
        checks.push(Check::from_difference("finite length Q~", &lhs, &rhs));
    }
    // ^rQ_{1,ā,(2..k-1,b̄)} = ^rQ_{1,ā,(2..k-1)}
    {
        let lhs = reduced_q(model, &alg, k, Variant::Plain, &z(1), &ap, &cjoin(&[&z(ku - 2), &bp]))?;
        let rhs = reduced_q(model, &alg, k, Variant::Plain, &z(1), &ap, &z(ku - 2))?;
        let t = 1 + na + ku - 2 + nb;
        let rhs = rhs.embed(&(1..=1 + na + ku - 2).collect::<Vec<_>>(), t)?;
        checks.push(Check::from_difference("finite length ^rQ", &lhs, &rhs));
    }
    // ^rQ~_{(b̄,2..k-1),ā,k} = ^rQ~_{(2..k-1),ā,k}
    {
        let lhs = reduced_q(model, &alg, k, Variant::Tilde, &cjoin(&[&bp, &z(ku - 2)]), &ap, &z(1))?;
        let rhs = reduced_q(model, &alg, k, Variant::Tilde, &z(ku - 2), &ap, &z(1))?;
        let t = nb + ku - 2 + na + 1;
        let rhs = rhs.embed(&(nb + 1..=t).collect::<Vec<_>>(), t)?;
        checks.push(Check::from_difference("finite length ^rQ~", &lhs, &rhs));
    }
    if na > 0 && nb > 0 {
        for n in [ku - 1, ku].into_iter().filter(|n| *n >= 1) {
            checks.extend(splitting_checks(model, &alg, k, n, &ap, &bp)?);
        }
    }
    Ok(checks)
}

fn splitting_checks(model: &Model, alg: &Arc<JetAlgebra>, k: u32, n: usize, ap: &[Jet<Rat>], bp: &[Jet<Rat>]) -> Result<Vec<Check>> {
    let z = zeros::<Rat>;
    let (na, nb) = (ap.len(), bp.len());
    let ab: Vec<Jet<Rat>> = ap.iter().chain(bp).cloned().collect();
    // ^rQ_{1,āb̄,(2..n)} = R_{b̄(2..n)}^-1 ^rQ_{1,ā,(2..n)} R_{b̄(2..n)} + R_{1ā}^-1 ^rQ_{1,b̄,(2..n)} R_{1ā}
    let mut lay = Layout { total: 0 };
    let l1 = lay.block(1);
    let la = lay.block(na);
    let lb = lay.block(nb);
    let lm = lay.block(n - 1);
    let t = lay.total;
    let lhs = reduced_q(model, alg, k, Variant::Plain, &z(1), &ab, &z(n - 1))?;
    let ra = reduced_q(model, alg, k, Variant::Plain, &z(1), ap, &z(n - 1))?.embed(&cat(&[&l1, &la, &lm]), t)?;
    let rb = reduced_q(model, alg, k, Variant::Plain, &z(1), bp, &z(n - 1))?.embed(&cat(&[&l1, &lb, &lm]), t)?;
    let c1 = coproduct_r(model, alg, &legs_with(&lb, bp), &legs_with(&lm, &z(n - 1)), t)?;
    let c1i = coproduct_r_inv(model, alg, &legs_with(&lb, bp), &legs_with(&lm, &z(n - 1)), t)?;
    let c2 = coproduct_r(model, alg, &legs_with(&l1, &z(1)), &legs_with(&la, ap), t)?;
    let c2i = coproduct_r_inv(model, alg, &legs_with(&l1, &z(1)), &legs_with(&la, ap), t)?;
    let rhs = &ra.conjugate(&c1i, &c1) + &rb.conjugate(&c2i, &c2);
    Ok(vec![
        Check::from_difference(&format!("splitting ^rQ n={n}"), &lhs, &rhs),
        tilde_splitting(model, alg, k, n, n - 1, ap, bp, &format!("splitting ^rQ~ n={n}"))?,
    ])
}

/// `^rQ~_{(1..n-1),āb̄,n} = R_{(1..n-1)ā}^-1 ^rQ~_{(X),b̄,n} R_{(1..n-1)ā} + R_{b̄n}^-1 ^rQ~_{(1..n-1),ā,n} R_{b̄n}`
/// where `X` is the last `x` legs of `1..n-1`.
#[allow(clippy::too_many_arguments)]
fn tilde_splitting(
    model: &Model,
    alg: &Arc<JetAlgebra>,
    k: u32,
    n: usize,
    x: usize,
    ap: &[Jet<Rat>],
    bp: &[Jet<Rat>],
    name: &str,
) -> Result<Check> {
    let z = zeros::<Rat>;
    let (na, nb) = (ap.len(), bp.len());
    let ab: Vec<Jet<Rat>> = ap.iter().chain(bp).cloned().collect();
    let mut lay = Layout { total: 0 };
    let lm = lay.block(n - 1);
    let la = lay.block(na);
    let lb = lay.block(nb);
    let ln = lay.block(1);
    let t = lay.total;
    let lhs = reduced_q(model, alg, k, Variant::Tilde, &z(n - 1), &ab, &z(1))?;
    let ra = reduced_q(model, alg, k, Variant::Tilde, &z(n - 1), ap, &z(1))?.embed(&cat(&[&lm, &la, &ln]), t)?;
    let rb = reduced_q(model, alg, k, Variant::Tilde, &z(x), bp, &z(1))?.embed(&cat(&[&lm[lm.len() - x..], &lb, &ln]), t)?;
    let c1 = coproduct_r(model, alg, &legs_with(&lm, &z(n - 1)), &legs_with(&la, ap), t)?;
    let c1i = coproduct_r_inv(model, alg, &legs_with(&lm, &z(n - 1)), &legs_with(&la, ap), t)?;
    let c2 = coproduct_r(model, alg, &legs_with(&lb, bp), &legs_with(&ln, &z(1)), t)?;
    let c2i = coproduct_r_inv(model, alg, &legs_with(&lb, bp), &legs_with(&ln, &z(1)), t)?;
    let rhs = &rb.conjugate(&c1i, &c1) + &ra.conjugate(&c2i, &c2);
    Ok(Check::from_difference(name, &lhs, &rhs))
}

/// The tilde splitting rule with the inner group shortened to `1..n-2`.
/// It agrees with the `1..n-1` form only once `n-2 >= k-1`.
pub fn tilde_splitting_short_group(model: &Model, k: u32, n: usize, a_params: &[Rat], b_params: &[Rat]) -> Result<Check> {
    if n < 2 || a_params.is_empty() || b_params.is_empty() {
        return Err(LaxError::InvalidArgument("need n >= 2 and nonempty groups".into()));
    }
    let ap: Vec<Jet<Rat>> = a_params.iter().map(Jet::from_rat).collect();
    let bp: Vec<Jet<Rat>> = b_params.iter().map(Jet::from_rat).collect();
    tilde_splitting(model, &JetAlgebra::trivial(), k, n, n - 2, &ap, &bp, &format!("splitting ^rQ~ n={n} short group"))
}
