//! First-order long-range deformations.
//!
//! Elements of the enlarged auxiliary algebra are evaluated tuples: a group of
//! legs carrying spectral parameters followed by a group of legs at parameter
//! zero. Twists are bilinear in such tuples and are returned as operators on
//! the global leg numbering. Deformed objects carry the nilpotent `λ` with
//! `λ^2 = 0`, so every "up to second order" statement is an exact identity.

use std::sync::Arc;

use crate::chain::{charges_from_transfer, monodromy_from_lax, transfer_from_lax};
use crate::charges::{conjecture_density, reduced_q, Variant};
use crate::error::{LaxError, Result};
use crate::jets::{Jet, JetAlgebra};
use crate::rational::Rat;
use crate::rmatrix::{coproduct_r, coproduct_r_inv, Check, Model};
use crate::scalar::Scalar;
use crate::tensor::TensorOperator;

type Op<S = Rat> = TensorOperator<S>;
type J<S = Rat> = Jet<S>;

pub const LAMBDA: &str = "λ";

/// The algebra holding only `λ` with `λ^2 = 0`.
pub fn lambda_algebra() -> Arc<JetAlgebra> {
    JetAlgebra::new(&[(LAMBDA, 2)]).expect("valid algebra")
}

#[derive(Clone, Debug)]
pub enum DeformationFamily {
    /// Local operator `m` on `k` legs.
    Local { k: u32, m: Op },
    /// Boost of the `k`-th charge.
    Boost { k: u32 },
    /// Bilocal of the `k`-th and `l`-th charges.
    Bilocal { k: u32, l: u32 },
}

impl DeformationFamily {
    pub fn local(m: Op) -> Result<DeformationFamily> {
        let k = m.legs() as u32;
        if k < 2 {
            return Err(LaxError::InvalidArgument("local operator needs at least 2 legs".into()));
        }
        if !m.algebra().is_empty() {
            return Err(LaxError::InvalidArgument("local operator must have constant entries".into()));
        }
        Ok(DeformationFamily::Local { k, m })
    }

    pub fn boost(k: u32) -> Result<DeformationFamily> {
        if k < 3 {
            return Err(LaxError::InvalidArgument(format!("boost needs k >= 3, got {k}")));
        }
        Ok(DeformationFamily::Boost { k })
    }

    pub fn bilocal(k: u32, l: u32) -> Result<DeformationFamily> {
        if k < 2 || l <= k {
            return Err(LaxError::InvalidArgument(format!("bilocal needs 2 <= k < l, got ({k}, {l})")));
        }
        Ok(DeformationFamily::Bilocal { k, l })
    }

    pub fn name(&self) -> String {
        match self {
            DeformationFamily::Local { k, .. } => format!("local{k}"),
            DeformationFamily::Boost { k } => format!("boost{k}"),
            DeformationFamily::Bilocal { k, l } => format!("bilocal{k}_{l}"),
        }
    }

    /// Number of auxiliary legs of the Lax operator: one spectral leg plus
    /// [`Self::trivial_legs`] legs at parameter zero.
    pub fn rank(&self) -> usize {
        self.trivial_legs() + 1
    }

    /// Minimal number of trivial legs that keeps a tuple with spectral legs
    /// inside the associative subalgebra.
    pub fn trivial_legs(&self) -> usize {
        match self {
            DeformationFamily::Local { k, .. } => *k as usize - 1,
            DeformationFamily::Boost { k } => *k as usize - 2,
            DeformationFamily::Bilocal { l, .. } => *l as usize - 1,
        }
    }

    fn validate(&self, model: &Model) -> Result<()> {
        if let DeformationFamily::Local { k, m } = self {
            if m.legs() != *k as usize || m.site_dim() != model.site_dim() {
                return Err(LaxError::ShapeMismatch("local operator does not match the model".into()));
            }
        }
        Ok(())
    }
}

/// `T_ā ⊗ T_1 ... T_N` at matrix level: spectral legs with parameters, then
/// trivial legs at parameter zero, each in product order.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluatedTuple<S: Scalar = Rat> {
    pub spectral: Vec<(usize, J<S>)>,
    pub trivial: Vec<usize>,
}

impl<S: Scalar> EvaluatedTuple<S> {
    pub fn new(spectral: Vec<(usize, J<S>)>, trivial: Vec<usize>) -> Result<EvaluatedTuple<S>> {
        let t = EvaluatedTuple { spectral, trivial };
        let legs = t.legs();
        for (i, l) in legs.iter().enumerate() {
            if *l == 0 || legs[..i].contains(l) {
                return Err(LaxError::InvalidLegs(format!("tuple leg {l} invalid or repeated")));
            }
        }
        Ok(t)
    }

    /// The unit element.
    pub fn unit() -> EvaluatedTuple<S> {
        EvaluatedTuple { spectral: Vec::new(), trivial: Vec::new() }
    }

    pub fn legs(&self) -> Vec<usize> {
        self.spectral.iter().map(|(l, _)| *l).chain(self.trivial.iter().copied()).collect()
    }

    /// Spectral then trivial legs with their parameters.
    pub fn with_params(&self) -> Vec<(usize, J<S>)> {
        self.spectral.iter().cloned().chain(self.trivial.iter().map(|l| (*l, J::zero()))).collect()
    }

    fn trivial_params(&self) -> Vec<(usize, J<S>)> {
        self.trivial.iter().map(|l| (*l, J::zero())).collect()
    }

    /// Concatenation `(ā c̄, B D)`; the double-crossed product is this tuple
    /// conjugated by `R_{B c̄}(0, v)`, see [`product_conjugator`].
    pub fn concat(&self, o: &EvaluatedTuple<S>) -> EvaluatedTuple<S> {
        EvaluatedTuple {
            spectral: self.spectral.iter().chain(&o.spectral).cloned().collect(),
            trivial: self.trivial.iter().chain(&o.trivial).copied().collect(),
        }
    }
}

/// `(R_{B c̄}, R_{B c̄}^-1)` on `total` legs, where `x = T_ā ⊗ T_B` and
/// `y = T_c̄ ⊗ T_D`, so that `x y = R^-1 [x.concat(y)] R`.
pub fn product_conjugator<S: Scalar>(
    model: &Model,
    alg: &Arc<JetAlgebra>,
    x: &EvaluatedTuple<S>,
    y: &EvaluatedTuple<S>,
    total: usize,
) -> Result<(Op<S>, Op<S>)> {
    let b = x.trivial_params();
    Ok((coproduct_r(model, alg, &b, &y.spectral, total)?, coproduct_r_inv(model, alg, &b, &y.spectral, total)?))
}

/// Operators restricted to a subset of the global legs.
struct Frame<'a, S: Scalar> {
    model: &'a Model,
    alg: &'a Arc<JetAlgebra>,
    legs: Vec<usize>,
    _s: std::marker::PhantomData<S>,
}

impl<'a, S: Scalar> Frame<'a, S> {
    fn n(&self) -> usize {
        self.legs.len()
    }

    fn at(&self, g: usize) -> usize {
        self.legs.iter().position(|l| *l == g).expect("leg in frame") + 1
    }

    fn loc(&self, xs: &[(usize, J<S>)]) -> Vec<(usize, J<S>)> {
        xs.iter().map(|(l, u)| (self.at(*l), u.clone())).collect()
    }

    fn r(&self, first: &[(usize, J<S>)], second: &[(usize, J<S>)]) -> Result<Op<S>> {
        coproduct_r(self.model, self.alg, &self.loc(first), &self.loc(second), self.n())
    }

    fn r_inv(&self, first: &[(usize, J<S>)], second: &[(usize, J<S>)]) -> Result<Op<S>> {
        coproduct_r_inv(self.model, self.alg, &self.loc(first), &self.loc(second), self.n())
    }

    /// `R^-1 x R` with `R = R_{(first)(second)}`.
    fn conj(&self, x: &Op<S>, first: &[(usize, J<S>)], second: &[(usize, J<S>)]) -> Result<Op<S>> {
        Ok(x.conjugate(&self.r_inv(first, second)?, &self.r(first, second)?))
    }

    /// `R x R^-1` with `R = R_{(first)(second)}`.
    fn conj_back(&self, x: &Op<S>, first: &[(usize, J<S>)], second: &[(usize, J<S>)]) -> Result<Op<S>> {
        Ok(x.conjugate(&self.r(first, second)?, &self.r_inv(first, second)?))
    }

    fn place(&self, op: &Op<S>, globals: &[usize]) -> Result<Op<S>> {
        let pos: Vec<usize> = globals.iter().map(|g| self.at(*g)).collect();
        op.embed(&pos, self.n())
    }

    fn zero(&self) -> Op<S> {
        Op::zero(self.n(), self.model.site_dim(), self.alg)
    }
}

fn zeros<S: Scalar>(n: usize) -> Vec<J<S>> {
    vec![J::zero(); n]
}

fn params<S: Scalar>(xs: &[(usize, J<S>)]) -> Vec<J<S>> {
    xs.iter().map(|(_, u)| u.clone()).collect()
}

fn ids<S: Scalar>(xs: &[(usize, J<S>)]) -> Vec<usize> {
    xs.iter().map(|(l, _)| *l).collect()
}

/// First-order twist `γ^(1)(left, right)` on `total` legs.
///
/// Trivial legs of both tuples are numbered `1..=M` in order. Terms whose
/// charge densities would need a position outside `1..=M` are dropped.
pub fn twist_gamma1<S: Scalar>(
    model: &Model,
    alg: &Arc<JetAlgebra>,
    family: &DeformationFamily,
    left: &EvaluatedTuple<S>,
    right: &EvaluatedTuple<S>,
    total: usize,
) -> Result<Op<S>> {
    family.validate(model)?;
    let mut legs = left.legs();
    legs.extend(right.legs());
    for (i, l) in legs.iter().enumerate() {
        if *l < 1 || *l > total || legs[..i].contains(l) {
            return Err(LaxError::InvalidLegs(format!("twist leg {l} invalid or shared between arguments")));
        }
    }
    if legs.is_empty() {
        return Ok(Op::zero(total, model.site_dim(), alg));
    }
    let frame = Frame { model, alg, legs: legs.clone(), _s: std::marker::PhantomData };
    let g = match family {
        DeformationFamily::Local { k, m } => local_twist(&frame, *k as usize, m, left, right)?,
        DeformationFamily::Boost { k } => boost_twist(&frame, *k, left, right)?,
        DeformationFamily::Bilocal { k, l } => bilocal_twist(&frame, *k, *l, left, right)?,
    };
    g.embed(&legs, total)
}

/// Trivial positions `1..=M` across both arguments.
struct Positions {
    legs: Vec<usize>,
}

impl Positions {
    fn new<S: Scalar>(left: &EvaluatedTuple<S>, right: &EvaluatedTuple<S>) -> Positions {
        Positions { legs: left.trivial.iter().chain(&right.trivial).copied().collect() }
    }

    fn m(&self) -> usize {
        self.legs.len()
    }

    fn pos(&self, n: usize) -> usize {
        self.legs[n - 1]
    }

    /// Legs at positions `i..=j`, empty when `j < i`.
    fn seg(&self, i: usize, j: usize) -> Vec<usize> {
        if j < i {
            return Vec::new();
        }
        self.legs[i - 1..j].to_vec()
    }

    fn seg_params<S: Scalar>(&self, i: usize, j: usize) -> Vec<(usize, J<S>)> {
        self.seg(i, j).into_iter().map(|l| (l, J::zero())).collect()
    }
}

fn local_twist<S: Scalar>(
    frame: &Frame<S>,
    k: usize,
    m: &Op,
    left: &EvaluatedTuple<S>,
    right: &EvaluatedTuple<S>,
) -> Result<Op<S>> {
    let p = Positions::new(left, right);
    let (n_left, total) = (left.trivial.len(), p.m());
    let m = m.map_scalars(S::from_rat).lift(frame.alg)?;
    let b = &right.spectral;
    let after = p.seg_params(n_left + 1, total);
    let before = p.seg_params(1, n_left);
    let mut acc = frame.zero();
    for n in 1..=n_left {
        if n + k - 1 > total {
            continue;
        }
        let mn = frame.place(&m, &p.seg(n, n + k - 1))?;
        acc = &acc + &frame.conj(&mn, b, &after)?;
        acc = &acc - &frame.conj(&mn, &before, b)?;
    }
    Ok(acc)
}

/// `^rQ^(k)_{n, b̄, c}` placed in the frame; `c` is cut to its first `k - 2`
/// legs, which leaves the reduced density unchanged.
fn reduced_plain<S: Scalar>(frame: &Frame<S>, k: u32, n: usize, b: &[(usize, J<S>)], c: &[usize]) -> Result<Op<S>> {
    let c = &c[..c.len().min(k as usize - 2)];
    let q = reduced_q(frame.model, frame.alg, k, Variant::Plain, &zeros(1), &params(b), &zeros(c.len()))?;
    let mut at = vec![n];
    at.extend(ids(b));
    at.extend(c);
    frame.place(&q, &at)
}

/// `^rQ~^(k)_{a, ā, n}` placed in the frame; `a` is cut to its last `k - 2`
/// legs.
fn reduced_tilde<S: Scalar>(frame: &Frame<S>, k: u32, a: &[usize], b: &[(usize, J<S>)], n: usize) -> Result<Op<S>> {
    let a = &a[a.len().saturating_sub(k as usize - 2)..];
    let q = reduced_q(frame.model, frame.alg, k, Variant::Tilde, &zeros(a.len()), &params(b), &zeros(1))?;
    let mut at = a.to_vec();
    at.extend(ids(b));
    at.push(n);
    frame.place(&q, &at)
}

fn boost_twist<S: Scalar>(frame: &Frame<S>, k: u32, left: &EvaluatedTuple<S>, right: &EvaluatedTuple<S>) -> Result<Op<S>> {
    let p = Positions::new(left, right);
    let (n_left, total) = (left.trivial.len(), p.m());
    let b = &right.spectral;
    let mut acc = frame.zero();
    if b.is_empty() {
        return Ok(acc);
    }
    for n in 1..=n_left {
        let q = reduced_plain(frame, k, p.pos(n), b, &p.seg(n + 1, total))?;
        acc = &acc + &frame.conj(&q, &p.seg_params(n + 1, n_left), b)?;
    }
    Ok(acc)
}

fn bilocal_twist<S: Scalar>(
    frame: &Frame<S>,
    k: u32,
    l: u32,
    left: &EvaluatedTuple<S>,
    right: &EvaluatedTuple<S>,
) -> Result<Op<S>> {
    let p = Positions::new(left, right);
    let (nl, mt) = (left.trivial.len() as i64, p.m() as i64);
    let (ki, li) = (k as i64, l as i64);
    let a = &left.spectral;
    let b = &right.spectral;
    let mut acc = frame.zero();
    let (q_plain, _) = conjecture_density::<S>(frame.model, frame.alg, l)?;
    let (_, q_tilde) = conjecture_density::<S>(frame.model, frame.alg, k)?;
    let u = |x: i64| x as usize;
    let all = p.seg_params(1, u(mt));
    // R_{ā(1..M)}^-1 x R_{ā(1..M)} and R_{b̄(1..M)} x R_{b̄(1..M)}^-1
    let inner_a = |x: &Op<S>| frame.conj(x, a, &all);
    let inner_b = |x: &Op<S>| frame.conj_back(x, b, &all);

    // first block
    let (top, low) = (nl + li - 1, nl + 2 - li);
    if top <= mt && low >= 1 {
        let group = p.seg(1, u(top - 1));
        let t = reduced_tilde(frame, k, &group, a, p.pos(u(top)))?;
        let t = frame.conj(&t, a, &p.seg_params(1, u(top - 1)))?;
        let rest = p.seg(u(low + 1), u(mt));
        let q = reduced_plain(frame, l, p.pos(u(low)), b, &rest)?;
        let q = frame.conj_back(&q, b, &p.seg_params(u(low + 1), u(mt)))?;
        acc = &acc + &(&t * &q);
    }
    // second block
    for n in nl + 2..=nl + li - 1 {
        if n > mt || n - ki + 1 < 1 {
            continue;
        }
        let qt = frame.place(&q_tilde.lift(frame.alg)?, &p.seg(u(n - ki + 1), u(n)))?;
        let left_factor = &inner_a(&qt)? - &qt;
        for m in nl + 2 - li..=n - li {
            if m < 1 || m + li - 1 > mt {
                continue;
            }
            let q = frame.place(&q_plain.lift(frame.alg)?, &p.seg(u(m), u(m + li - 1)))?;
            let right_factor = &q - &inner_b(&q)?;
            acc = &acc + &(&left_factor * &right_factor);
        }
    }
    // third block
    for n in 1..=nl {
        if n + li - 1 > mt {
            continue;
        }
        let qt = frame.place(&q_tilde.lift(frame.alg)?, &p.seg(u(n + li - ki), u(n + li - 1)))?;
        let rest = p.seg(u(n + 1), u(mt));
        let q = reduced_plain(frame, l, p.pos(u(n)), b, &rest)?;
        let q = frame.conj_back(&q, b, &p.seg_params(u(n + 1), u(mt)))?;
        acc = &acc + &(&inner_a(&qt)? * &q);
    }
    // fourth block
    for n in nl + 1..=mt {
        if n - li + 1 < 1 {
            continue;
        }
        let group = p.seg(1, u(n - 1));
        let t = reduced_tilde(frame, k, &group, a, p.pos(u(n)))?;
        let t = frame.conj(&t, a, &p.seg_params(1, u(n - 1)))?;
        let q = frame.place(&q_plain.lift(frame.alg)?, &p.seg(u(n - li + 1), u(n)))?;
        acc = &acc + &(&t * &inner_b(&q)?);
    }
    // the formula is stated for the second argument reordered as
    // (1 ⊗ T_{N+1..M})(T_b̄ ⊗ 1)
    frame.conj_back(&acc, &p.seg_params(u(nl + 1), u(mt)), b)
}

/// `r^γ(x, y) = R + λ (γ(y, x) R - R γ(x, y))` with `R` the doubled
/// r-form, i.e. the coproduct R-matrix of the concatenated groups.
pub fn deformed_r<S: Scalar>(
    model: &Model,
    alg: &Arc<JetAlgebra>,
    family: &DeformationFamily,
    x: &EvaluatedTuple<S>,
    y: &EvaluatedTuple<S>,
    total: usize,
) -> Result<Op<S>> {
    let lam = J::<S>::generator(alg, LAMBDA)?;
    let r = coproduct_r(model, alg, &x.with_params(), &y.with_params(), total)?;
    let gyx = twist_gamma1(model, alg, family, y, x, total)?;
    let gxy = twist_gamma1(model, alg, family, x, y, total)?;
    let corr = &(&gyx * &r) - &(&r * &gxy);
    Ok(&r + &corr.scale(&lam))
}

/// Auxiliary tuple `T_ā(u) ⊗ T_{b_1} ... T_{b_m}` on legs `offset+1..=offset+rank`.
pub fn aux_tuple<S: Scalar>(family: &DeformationFamily, offset: usize, u: &J<S>) -> EvaluatedTuple<S> {
    EvaluatedTuple {
        spectral: vec![(offset + 1, u.clone())],
        trivial: (offset + 2..=offset + family.rank()).collect(),
    }
}

/// Deformed Lax operator: auxiliary legs `1..=rank`, site leg `rank + 1`.
pub fn deformed_lax<S: Scalar>(model: &Model, alg: &Arc<JetAlgebra>, family: &DeformationFamily, u: &J<S>) -> Result<Op<S>> {
    let r = family.rank();
    let site = EvaluatedTuple { spectral: Vec::new(), trivial: vec![r + 1] };
    deformed_r(model, alg, family, &aux_tuple(family, 0, u), &site, r + 1)
}

/// Deformed R-matrix on two auxiliary groups `1..=rank` and `rank+1..=2 rank`.
pub fn deformed_rmatrix<S: Scalar>(
    model: &Model,
    alg: &Arc<JetAlgebra>,
    family: &DeformationFamily,
    u: &J<S>,
    v: &J<S>,
) -> Result<Op<S>> {
    let r = family.rank();
    deformed_r(model, alg, family, &aux_tuple(family, 0, u), &aux_tuple(family, r, v), 2 * r)
}

fn rat_jet(x: &Rat) -> J {
    J::from_rat(x)
}

/// `R^γ L^γ_A(u) L^γ_C(v) = L^γ_C(v) L^γ_A(u) R^γ` with `λ^2 = 0`.
pub fn verify_rll(model: &Model, family: &DeformationFamily, u: &Rat, v: &Rat) -> Result<Check> {
    let alg = lambda_algebra();
    let r = family.rank();
    let total = 2 * r + 1;
    let rm = deformed_rmatrix(model, &alg, family, &rat_jet(u), &rat_jet(v))?;
    let lu = deformed_lax(model, &alg, family, &rat_jet(u))?;
    let lv = deformed_lax(model, &alg, family, &rat_jet(v))?;
    let ga: Vec<usize> = (1..=r).chain(std::iter::once(total)).collect();
    let gc: Vec<usize> = (r + 1..=2 * r).chain(std::iter::once(total)).collect();
    let gr: Vec<usize> = (1..=2 * r).collect();
    let lhs = rm.embed(&gr, total)?.apply_local_right(&lu, &ga)?.apply_local_right(&lv, &gc)?;
    let rhs = lv.embed(&gc, total)?.apply_local_right(&lu, &ga)?.apply_local_right(&rm, &gr)?;
    Ok(Check::from_difference(&format!("{} RLL", family.name()), &lhs, &rhs))
}

/// `R^γ_12 R^γ_13 R^γ_23 = R^γ_23 R^γ_13 R^γ_12` with `λ^2 = 0`.
pub fn verify_deformed_ybe(model: &Model, family: &DeformationFamily, u: &Rat, v: &Rat, w: &Rat) -> Result<Check> {
    let alg = lambda_algebra();
    let r = family.rank();
    let total = 3 * r;
    let g = |i: usize, j: usize| -> Vec<usize> { (i * r + 1..=(i + 1) * r).chain(j * r + 1..=(j + 1) * r).collect() };
    let (u, v, w) = (rat_jet(u), rat_jet(v), rat_jet(w));
    let r12 = deformed_rmatrix(model, &alg, family, &u, &v)?;
    let r13 = deformed_rmatrix(model, &alg, family, &u, &w)?;
    let r23 = deformed_rmatrix(model, &alg, family, &v, &w)?;
    let lhs = r12.embed(&g(0, 1), total)?.apply_local_right(&r13, &g(0, 2))?.apply_local_right(&r23, &g(1, 2))?;
    let rhs = r23.embed(&g(1, 2), total)?.apply_local_right(&r13, &g(0, 2))?.apply_local_right(&r12, &g(0, 1))?;
    Ok(Check::from_difference(&format!("{} deformed YBE", family.name()), &lhs, &rhs))
}

/// First-order associator
/// `φ(a,b,c) = ε(a) γ(b,c) + γ(a, bc) - γ(ab, c) - γ(a,b) ε(c)`,
/// with products taken in the double-crossed algebra and `ε` the identity.
pub fn drinfeld_phi1<S: Scalar>(
    model: &Model,
    alg: &Arc<JetAlgebra>,
    family: &DeformationFamily,
    a: &EvaluatedTuple<S>,
    b: &EvaluatedTuple<S>,
    c: &EvaluatedTuple<S>,
    total: usize,
) -> Result<Op<S>> {
    let g_bc = twist_gamma1(model, alg, family, b, c, total)?;
    let g_ab = twist_gamma1(model, alg, family, a, b, total)?;
    let (r, rinv) = product_conjugator(model, alg, b, c, total)?;
    let g_a_bc = twist_gamma1(model, alg, family, a, &b.concat(c), total)?.conjugate(&rinv, &r);
    let (r, rinv) = product_conjugator(model, alg, a, b, total)?;
    let g_ab_c = twist_gamma1(model, alg, family, &a.concat(b), c, total)?.conjugate(&rinv, &r);
    Ok(&(&(&g_bc + &g_a_bc) - &g_ab_c) - &g_ab)
}

/// Deformed monodromy `L^γ_L(u) ... L^γ_1(u)`: auxiliary legs `1..=rank`,
/// sites after.
pub fn deformed_monodromy<S: Scalar>(
    model: &Model,
    alg: &Arc<JetAlgebra>,
    family: &DeformationFamily,
    length: usize,
    u: &J<S>,
) -> Result<Op<S>> {
    let lax = deformed_lax(model, alg, family, u)?;
    monodromy_from_lax(&vec![lax; length], family.rank())
}

/// Trace of [`deformed_monodromy`] over all auxiliary legs.
pub fn deformed_transfer<S: Scalar>(
    model: &Model,
    alg: &Arc<JetAlgebra>,
    family: &DeformationFamily,
    length: usize,
    u: &J<S>,
) -> Result<Op<S>> {
    if length == 0 {
        return Err(LaxError::InvalidArgument("empty chain".into()));
    }
    let lax = deformed_lax(model, alg, family, u)?;
    transfer_from_lax(&vec![lax; length], family.rank())
}

/// Charges `Q_2(λ) .. Q_{k_max}(λ)` from the log-derivative of the deformed
/// transfer matrix at `u = 0`, returned over [`lambda_algebra`].
///
/// The chain must hold the first-order density of `Q_{k_max}`, whose range
/// is at most `rank + k_max`.
pub fn deformed_charges(model: &Model, family: &DeformationFamily, length: usize, k_max: u32) -> Result<Vec<Op>> {
    if k_max < 2 {
        return Err(LaxError::InvalidArgument("charges start at k = 2".into()));
    }
    let need = family.rank() + k_max as usize;
    if length < need {
        return Err(LaxError::InvalidArgument(format!(
            "chain of length {length} is shorter than the first-order range {need}"
        )));
    }
    let lam = lambda_algebra();
    let big = lam.with_generator("ε", k_max)?;
    let eps = J::generator(&big, "ε")?;
    let t = deformed_transfer(model, &big, family, length, &eps)?;
    charges_from_transfer(&t, big.len() - 1, k_max, &lam)
}

/// Splits a λ-jet operator into its constant and first-order parts.
pub fn lambda_parts<S: Scalar>(op: &Op<S>) -> Result<(Op<S>, Op<S>)> {
    let alg = op.algebra();
    let idx = alg.index_of(LAMBDA)?;
    let rest = if idx + 1 == alg.len() {
        alg.without_last()
    } else {
        return Err(LaxError::InvalidArgument("λ must be the last generator".into()));
    };
    Ok((op.coefficient_of(idx, 0, &rest), op.coefficient_of(idx, 1, &rest)))
}

/// Samples `(a, b, c)` from `A_0 ⊕ (A^{≥1} ⋈ A_0^{≥m})` with `m` the family's
/// [`DeformationFamily::trivial_legs`], numbering legs consecutively and using
/// at most `max_legs` legs in total. Returns the tuples and the leg count.
pub fn sample_subalgebra_triple(
    family: &DeformationFamily,
    sampler: &mut crate::sampling::Sampler,
    max_legs: usize,
) -> (EvaluatedTuple, EvaluatedTuple, EvaluatedTuple, usize) {
    let min = family.trivial_legs();
    loop {
        let mut shapes = Vec::new();
        for _ in 0..3 {
            let shape = match sampler.index(4) {
                0 => (0, 0),
                1 => (0, 1 + sampler.index(2)),
                _ => (1 + sampler.index(2), min + sampler.index(2)),
            };
            shapes.push(shape);
        }
        let total: usize = shapes.iter().map(|(s, t)| s + t).sum();
        if total > max_legs || total == 0 {
            continue;
        }
        let n_spec: usize = shapes.iter().map(|(s, _)| s).sum();
        let ps = sampler.params(n_spec);
        let mut next = 1;
        let mut pi = 0;
        let mut out = Vec::new();
        for (s, t) in shapes {
            let spectral: Vec<(usize, J)> = (0..s)
                .map(|_| {
                    let e = (next, J::from_rat(&ps[pi]));
                    next += 1;
                    pi += 1;
                    e
                })
                .collect();
            let trivial: Vec<usize> = (next..next + t).collect();
            next += t;
            out.push(EvaluatedTuple { spectral, trivial });
        }
        let c = out.pop().expect("three");
        let b = out.pop().expect("three");
        let a = out.pop().expect("three");
        return (a, b, c, total);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{extract_charge, global_charge, ChainSpec};
    use crate::rational::{q, qi};
    use crate::sampling::Sampler;

    type T = EvaluatedTuple;

    fn xxx() -> Model {
        Model::yangian(2)
    }

    fn perm(legs: usize, i: usize, j: usize) -> Op {
        Op::permutation(legs, 2, i, j, &JetAlgebra::trivial()).unwrap()
    }

    fn id(legs: usize) -> Op {
        Op::identity(legs, 2, &JetAlgebra::trivial())
    }

    fn lifted(op: &Op, alg: &Arc<JetAlgebra>) -> Op {
        op.lift(alg).unwrap()
    }

    fn tup(spectral: &[(usize, Rat)], trivial: &[usize]) -> T {
        T::new(spectral.iter().map(|(l, u)| (*l, J::from_rat(u))).collect(), trivial.to_vec()).unwrap()
    }

    /// `^rQ^(3)_{1,2̄,3}(0,u,0)` from its closed form on the permutation basis.
    fn reduced3_closed(u: &Rat, legs: [usize; 3], total: usize) -> Op {
        let [x, y, z] = legs;
        let d = u * u - qi(1);
        let d2 = &d * &d;
        let c1 = &(qi(2) * u.clone()) / &d2;
        let c2 = &(qi(1) + u * u) / &d2;
        let (pxy, pyz, pxz) = (perm(total, x, y), perm(total, y, z), perm(total, x, z));
        let sym = &(&(&pxy + &pyz) - &pxz) - &id(total);
        let comm = &(&pxy * &pxz) - &(&pxz * &pxy);
        &sym.scale_scalar(&c1) + &comm.scale_scalar(&c2)
    }

    fn random_local(s: &mut Sampler) -> Op {
        let entries: Vec<Rat> = (0..16).map(|_| s.rat()).collect();
        Op::from_scalars(2, 2, &JetAlgebra::trivial(), &entries).unwrap()
    }

    fn r_at(u: &Rat, v: &Rat, i: usize, j: usize, total: usize) -> Op {
        xxx().eval(&JetAlgebra::trivial(), &J::from_rat(u), &J::from_rat(v)).unwrap().embed(&[i, j], total).unwrap()
    }

    #[test]
    fn family_validation() {
        assert!(DeformationFamily::boost(2).is_err());
        assert!(DeformationFamily::bilocal(3, 3).is_err());
        assert!(DeformationFamily::bilocal(1, 3).is_err());
        assert!(DeformationFamily::local(id(1)).is_err());
        assert_eq!(DeformationFamily::boost(3).unwrap().rank(), 2);
        assert_eq!(DeformationFamily::bilocal(2, 3).unwrap().rank(), 3);
        assert_eq!(DeformationFamily::local(id(2)).unwrap().rank(), 2);
        assert!(T::new(vec![(1, J::zero())], vec![1]).is_err());
    }

    #[test]
    fn boost_evaluations() {
        let m = xxx();
        let alg = JetAlgebra::trivial();
        let f = DeformationFamily::boost(3).unwrap();
        let u = q(2, 7);
        let x = tup(&[(1, u.clone())], &[2]);
        let site = tup(&[], &[3]);
        assert!(twist_gamma1(&m, &alg, &f, &x, &site, 3).unwrap().is_zero());
        let g = twist_gamma1(&m, &alg, &f, &site, &x, 3).unwrap();
        assert_eq!(g, reduced3_closed(&u, [3, 1, 2], 3));
    }

    #[test]
    fn local_evaluations() {
        let m = xxx();
        let alg = JetAlgebra::trivial();
        let mut s = Sampler::new(3);
        let loc = random_local(&mut s);
        let f = DeformationFamily::local(loc.clone()).unwrap();
        let u = q(-3, 5);
        let x = tup(&[(1, u.clone())], &[2]);
        let site = tup(&[], &[3]);
        assert!(twist_gamma1(&m, &alg, &f, &x, &site, 3).unwrap().is_zero());
        let g = twist_gamma1(&m, &alg, &f, &site, &x, 3).unwrap();
        // R_{ā b}^-1 m_{3 2} R_{ā b} - R_{3 ā}^-1 m_{3 2} R_{3 ā}
        let m32 = loc.embed(&[3, 2], 3).unwrap();
        let (z, uu) = (qi(0), u.clone());
        let first = m32.conjugate(&r_at(&z, &uu, 2, 1, 3), &r_at(&uu, &z, 1, 2, 3));
        let second = m32.conjugate(&r_at(&uu, &z, 1, 3, 3), &r_at(&z, &uu, 3, 1, 3));
        assert_eq!(g, &first - &second);
    }

    #[test]
    fn bilocal_evaluations() {
        let m = xxx();
        let alg = JetAlgebra::trivial();
        let f = DeformationFamily::bilocal(2, 3).unwrap();
        let u = q(1, 3);
        let x = tup(&[(1, u.clone())], &[2, 3]);
        let site = tup(&[], &[4]);
        let g = twist_gamma1(&m, &alg, &f, &site, &x, 4).unwrap();
        // R_{ā(23)}^-1 q~_{23} R_{ā(23)} ^rQ^(3)_{4,ā,2}
        let z = qi(0);
        let ra = &r_at(&u, &z, 1, 3, 4) * &r_at(&u, &z, 1, 2, 4);
        let rai = &r_at(&z, &u, 2, 1, 4) * &r_at(&z, &u, 3, 1, 4);
        let qt = &id(4) - &perm(4, 2, 3);
        let expect = &qt.conjugate(&rai, &ra) * &reduced3_closed(&u, [4, 1, 2], 4);
        assert_eq!(g, expect);
        // γ(x, site) = R_{ā(23)}^-1 Q~_{ā4} R_{ā(23)} q^(3)_{234}
        let g = twist_gamma1(&m, &alg, &f, &x, &site, 4).unwrap();
        let d = &(&u * &u) - &qi(1);
        let qt14 = (&perm(4, 1, 4) - &id(4)).scale_scalar(&d.recip().unwrap());
        let q3 = &(&perm(4, 2, 3) * &perm(4, 2, 4)) - &(&perm(4, 2, 4) * &perm(4, 2, 3));
        let expect = &qt14.conjugate(&rai, &ra) * &q3;
        assert_eq!(g, expect);
    }

    #[test]
    fn undeformed_subalgebras() {
        let m = xxx();
        let alg = JetAlgebra::trivial();
        let mut s = Sampler::new(11);
        let p = s.params(3);
        let families = [
            DeformationFamily::local(Op::from_fn(2, 2, &alg, |r, c| J::from_i64((r * 3 + c) as i64 - 5))).unwrap(),
            DeformationFamily::boost(3).unwrap(),
            DeformationFamily::bilocal(2, 3).unwrap(),
        ];
        for f in &families {
            let a = tup(&[(1, p[0].clone()), (2, p[1].clone())], &[]);
            let c = tup(&[(3, p[2].clone())], &[]);
            assert!(twist_gamma1(&m, &alg, f, &a, &c, 3).unwrap().is_zero(), "{}", f.name());
            let a = tup(&[], &[1, 2]);
            let c = tup(&[], &[3]);
            assert!(twist_gamma1(&m, &alg, f, &a, &c, 3).unwrap().is_zero(), "{}", f.name());
            let e = T::unit();
            let x = tup(&[(1, p[0].clone())], &[2, 3]);
            assert!(twist_gamma1(&m, &alg, f, &e, &x, 3).unwrap().is_zero());
            assert!(twist_gamma1(&m, &alg, f, &x, &e, 3).unwrap().is_zero());
        }
    }

    #[test]
    fn boost3_lax_matches_closed_form() {
        let m = xxx();
        let alg = lambda_algebra();
        let f = DeformationFamily::boost(3).unwrap();
        let u = q(1, 2);
        let lax = deformed_lax(&m, &alg, &f, &J::from_rat(&u)).unwrap();
        let base = &r_at(&u, &qi(0), 1, 3, 3) * &perm(3, 2, 3);
        let lam = Op::identity(3, 2, &alg).scale(&J::generator(&alg, LAMBDA).unwrap());
        let expect = &(&Op::identity(3, 2, &alg) + &(&lam * &lifted(&reduced3_closed(&u, [3, 1, 2], 3), &alg)))
            * &lifted(&base, &alg);
        assert_eq!(lax, expect);
        // at u = 0 the constant part is the permutation product
        let lax0 = deformed_lax(&m, &alg, &f, &J::zero()).unwrap();
        let (c, _) = lambda_parts(&lax0).unwrap();
        assert_eq!(c, &perm(3, 1, 3) * &perm(3, 2, 3));
    }

    #[test]
    fn boost3_rmatrix_matches_closed_form() {
        let m = xxx();
        let alg = lambda_algebra();
        let f = DeformationFamily::boost(3).unwrap();
        let (u, v) = (q(1, 2), q(1, 5));
        let rm = deformed_rmatrix(&m, &alg, &f, &J::from_rat(&u), &J::from_rat(&v)).unwrap();
        let z = qi(0);
        let r0 = &(&(&r_at(&u, &z, 1, 4, 4) * &r_at(&u, &v, 1, 3, 4)) * &perm(4, 2, 4)) * &r_at(&z, &v, 2, 3, 4);
        let corr = &(&reduced3_closed(&u, [4, 1, 2], 4) * &r0) - &(&r0 * &reduced3_closed(&v, [2, 3, 4], 4));
        let (c, l) = lambda_parts(&rm).unwrap();
        assert_eq!(c, r0);
        assert_eq!(l, corr);
        let rm0 = deformed_rmatrix(&m, &alg, &f, &J::zero(), &J::zero()).unwrap();
        let (c0, _) = lambda_parts(&rm0).unwrap();
        assert_eq!(c0, &(&(&perm(4, 1, 4) * &perm(4, 1, 3)) * &perm(4, 2, 4)) * &perm(4, 2, 3));
    }

    /// The bilocal twist against its explicit six-term expansion on the
    /// tripled auxiliary space.
    #[test]
    fn bilocal_twist_explicit() {
        let m = xxx();
        let alg = JetAlgebra::trivial();
        let f = DeformationFamily::bilocal(2, 3).unwrap();
        let (u, v) = (q(1, 3), q(-1, 4));
        let z = qi(0);
        let x = tup(&[(1, u.clone())], &[2, 3]);
        let y = tup(&[(4, v.clone())], &[5, 6]);
        let g = twist_gamma1(&m, &alg, &f, &x, &y, 6).unwrap();
        let n = 6;
        // R_{ā(i1..in)} = R_{ā in} ... R_{ā i1}
        let ra = |p: &Rat, a: usize, legs: &[usize]| -> Op {
            legs.iter().rev().fold(id(n), |acc, &i| &acc * &r_at(p, &z, a, i, n))
        };
        let rai = |p: &Rat, a: usize, legs: &[usize]| -> Op {
            legs.iter().fold(id(n), |acc, &i| &acc * &r_at(&z, p, i, a, n))
        };
        let qt = |i: usize, j: usize| &id(n) - &perm(n, i, j);
        let q3 = |a: usize, b: usize, c: usize| &(&perm(n, a, b) * &perm(n, a, c)) - &(&perm(n, a, c) * &perm(n, a, b));
        let big_qt = |p: &Rat, a: usize, i: usize| {
            let d = &(p * p) - &qi(1);
            (&perm(n, a, i) - &id(n)).scale_scalar(&d.recip().unwrap())
        };
        let rq = |i: usize, a: usize, j: usize| reduced3_closed(&v, [i, a, j], n);
        let lead = rai(&v, 4, &[5, 6]);
        let c = |x: &Op, p: &Rat, a: usize, legs: &[usize]| &(&rai(p, a, legs) * x) * &ra(p, a, legs);
        let comm = |x: &Op, y: &Op| &(x * y) - &(y * x);
        let terms = [
            &(&c(&big_qt(&u, 1, 6), &u, 1, &[2, 3, 5]) * &ra(&v, 4, &[3, 5, 6])) * &(&rq(2, 4, 3) * &rai(&v, 4, &[3])),
            &(&(&rai(&u, 1, &[2, 3, 5, 6]) * &comm(&qt(5, 6), &ra(&u, 1, &[2, 3, 5, 6])))
                * &comm(&q3(2, 3, 5), &ra(&v, 4, &[2, 3, 5, 6])))
                * &rai(&v, 4, &[2, 3]),
            &(&c(&qt(3, 5), &u, 1, &[2, 3, 5, 6]) * &ra(&v, 4, &[3, 5, 6])) * &(&rq(2, 4, 3) * &rai(&v, 4, &[3])),
            &(&c(&qt(5, 6), &u, 1, &[2, 3, 5, 6]) * &ra(&v, 4, &[5, 6])) * &rq(3, 4, 5),
            &(&(&c(&big_qt(&u, 1, 5), &u, 1, &[2, 3]) * &ra(&v, 4, &[2, 3, 5, 6])) * &q3(2, 3, 5)) * &rai(&v, 4, &[2, 3]),
            &(&(&c(&big_qt(&u, 1, 6), &u, 1, &[2, 3, 5]) * &ra(&v, 4, &[2, 3, 5, 6])) * &q3(3, 5, 6))
                * &rai(&v, 4, &[2, 3]),
        ];
        let sum = terms.iter().fold(Op::zero(n, 2, &alg), |acc, t| &acc + t);
        assert_eq!(g, &lead * &sum);
    }

    #[test]
    fn boost3_rll_and_ybe() {
        let m = xxx();
        let f = DeformationFamily::boost(3).unwrap();
        assert!(verify_rll(&m, &f, &q(1, 2), &q(1, 5)).unwrap().passed);
        assert!(verify_deformed_ybe(&m, &f, &q(1, 2), &q(1, 5), &q(-1, 3)).unwrap().passed);
        assert!(verify_deformed_ybe(&m, &f, &q(2, 7), &q(2, 7), &q(2, 7)).unwrap().passed);
    }

    #[test]
    fn bilocal_rll() {
        let f = DeformationFamily::bilocal(2, 3).unwrap();
        assert!(verify_rll(&xxx(), &f, &q(1, 3), &q(-1, 4)).unwrap().passed);
    }

    #[test]
    fn local_rll_and_ybe() {
        let m = xxx();
        let (qd, _) = conjecture_density::<Rat>(&m, &JetAlgebra::trivial(), 2).unwrap();
        let f = DeformationFamily::local(qd).unwrap();
        assert!(verify_rll(&m, &f, &q(1, 3), &q(-2, 5)).unwrap().passed);
        assert!(verify_deformed_ybe(&m, &f, &q(1, 3), &q(-2, 5), &q(3, 4)).unwrap().passed);
    }

    #[test]
    fn lax_factorizes_on_sites() {
        let m = xxx();
        let alg = lambda_algebra();
        for f in [DeformationFamily::boost(3).unwrap(), DeformationFamily::bilocal(2, 3).unwrap()] {
            let r = f.rank();
            let u = J::from_rat(&q(2, 5));
            let x = aux_tuple(&f, 0, &u);
            let two = tup(&[], &[r + 1, r + 2]);
            let lhs = deformed_r(&m, &alg, &f, &x, &two, r + 2).unwrap();
            let lax = deformed_lax(&m, &alg, &f, &u).unwrap();
            let aux: Vec<usize> = (1..=r).collect();
            let at = |s: usize| -> Vec<usize> { aux.iter().copied().chain(std::iter::once(s)).collect() };
            let rhs = lax.embed(&at(r + 2), r + 2).unwrap().apply_local_right(&lax, &at(r + 1)).unwrap();
            assert_eq!(lhs, rhs, "{}", f.name());
        }
    }

    #[test]
    fn rmatrix_does_not_factorize() {
        let m = xxx();
        let alg = lambda_algebra();
        let f = DeformationFamily::boost(3).unwrap();
        let u = J::from_rat(&q(2, 5));
        let x = aux_tuple(&f, 0, &u);
        let as_spectral = T::new(vec![(3, J::zero())], vec![4]).unwrap();
        let as_trivial = tup(&[], &[3, 4]);
        let a = deformed_r(&m, &alg, &f, &x, &as_spectral, 4).unwrap();
        let b = deformed_r(&m, &alg, &f, &x, &as_trivial, 4).unwrap();
        assert_ne!(a, b);
        assert_eq!(lambda_parts(&a).unwrap().0, lambda_parts(&b).unwrap().0);
    }

    #[test]
    fn counterexample_associator() {
        let m = xxx();
        let alg = JetAlgebra::trivial();
        let mut s = Sampler::new(5);
        let loc = random_local(&mut s);
        let f = DeformationFamily::local(loc).unwrap();
        let u = q(3, 7);
        let a = tup(&[], &[1]);
        let b = tup(&[(2, u.clone())], &[]);
        let c = tup(&[], &[3]);
        let phi = drinfeld_phi1(&m, &alg, &f, &a, &b, &c, 3).unwrap();
        let g = twist_gamma1(&m, &alg, &f, &a, &tup(&[(2, u)], &[3]), 3).unwrap();
        assert!(!phi.is_zero());
        assert_eq!(phi, g);
    }

    #[test]
    fn boost_associator_outside_subalgebra() {
        let m = xxx();
        let alg = JetAlgebra::trivial();
        let f = DeformationFamily::boost(4).unwrap();
        let u = q(3, 7);
        let a = tup(&[], &[1]);
        let b = tup(&[(2, u.clone())], &[]);
        let c = tup(&[], &[3, 4]);
        let phi = drinfeld_phi1(&m, &alg, &f, &a, &b, &c, 4).unwrap();
        let g1 = twist_gamma1(&m, &alg, &f, &a, &tup(&[(2, u.clone())], &[3, 4]), 4).unwrap();
        let g0 = twist_gamma1(&m, &alg, &f, &a, &tup(&[(2, u)], &[]), 4).unwrap();
        assert!(!phi.is_zero());
        assert_eq!(phi, &g1 - &g0);
    }

    #[test]
    fn associator_vanishes_on_subalgebra() {
        let m = xxx();
        let alg = JetAlgebra::trivial();
        let mut s = Sampler::new(21);
        let loc = random_local(&mut s);
        let families =
            [DeformationFamily::local(loc).unwrap(), DeformationFamily::boost(3).unwrap(), DeformationFamily::bilocal(2, 3).unwrap()];
        for f in &families {
            for _ in 0..4 {
                let (a, b, c, total) = sample_subalgebra_triple(f, &mut s, 7);
                let phi = drinfeld_phi1(&m, &alg, f, &a, &b, &c, total).unwrap();
                assert!(phi.is_zero(), "{} {:?} {:?} {:?}", f.name(), a, b, c);
            }
        }
    }

    #[test]
    fn twist_respects_trivial_exchange() {
        let m = xxx();
        let alg = JetAlgebra::trivial();
        let f = DeformationFamily::bilocal(2, 3).unwrap();
        let x = tup(&[(1, q(1, 3))], &[2, 3]);
        let y = tup(&[(4, q(-2, 5))], &[5, 6]);
        let swapped = tup(&[(1, q(1, 3))], &[3, 2]);
        let p = perm(6, 2, 3);
        let g = twist_gamma1(&m, &alg, &f, &x, &y, 6).unwrap();
        let h = twist_gamma1(&m, &alg, &f, &swapped, &y, 6).unwrap();
        assert_eq!(&p * &g, &h * &p);
    }

    #[test]
    fn boost3_transfer_commutes() {
        let m = xxx();
        let alg = lambda_algebra();
        let f = DeformationFamily::boost(3).unwrap();
        let a = deformed_transfer(&m, &alg, &f, 4, &J::<Rat>::from_rat(&q(1, 2))).unwrap();
        let b = deformed_transfer(&m, &alg, &f, 4, &J::from_rat(&q(-2, 3))).unwrap();
        assert!(a.commutator(&b).unwrap().is_zero());
        let (_, first) = lambda_parts(&a).unwrap();
        assert!(!first.is_zero());
    }

    fn shift_product(n: usize, seq: &[usize]) -> Op {
        // P_{n1..nk} = P_{n1 nk} ... P_{n1 n2}
        seq[1..].iter().rev().fold(id(n), |acc, &j| &acc * &perm(n, seq[0], j))
    }

    #[test]
    fn two_loop_charge() {
        let m = xxx();
        let l = 6;
        let qs = deformed_charges(&m, &DeformationFamily::boost(3).unwrap(), l, 2).unwrap();
        let (c, first) = lambda_parts(&qs[0]).unwrap();
        let h = &id(2) - &perm(2, 1, 2);
        let h2 = &id(3) - &perm(3, 1, 3);
        assert_eq!(c, global_charge(&h, l).unwrap());
        let q4 = extract_charge(&m, &JetAlgebra::trivial(), &ChainSpec::homogeneous(l, 2).unwrap(), 4).unwrap();
        let expect = &(&global_charge(&h2, l).unwrap() - &global_charge(&h, l).unwrap().scale_scalar(&qi(4)))
            + &q4.scale_scalar(&q(1, 2));
        assert_eq!(first, expect);
    }

    #[test]
    fn deformed_charges_need_room() {
        assert!(deformed_charges(&xxx(), &DeformationFamily::boost(3).unwrap(), 3, 2).is_err());
    }

    #[test]
    fn bilocal_ybe() {
        let f = DeformationFamily::bilocal(2, 3).unwrap();
        assert!(verify_deformed_ybe(&xxx(), &f, &q(1, 3), &q(-1, 4), &q(2, 5)).unwrap().passed);
    }

    #[test]
    fn bilocal_transfer_commutes() {
        let m = xxx();
        let alg = lambda_algebra();
        let f = DeformationFamily::bilocal(2, 3).unwrap();
        let a = deformed_transfer(&m, &alg, &f, 5, &J::<Rat>::from_rat(&q(1, 3))).unwrap();
        let b = deformed_transfer(&m, &alg, &f, 5, &J::from_rat(&q(-3, 4))).unwrap();
        assert!(a.commutator(&b).unwrap().is_zero());
    }

    #[test]
    fn bilocal_charge_correction() {
        let l = 8;
        let qs = deformed_charges(&xxx(), &DeformationFamily::bilocal(2, 3).unwrap(), l, 2).unwrap();
        let (c, first) = lambda_parts(&qs[0]).unwrap();
        assert_eq!(c, global_charge(&(&id(2) - &perm(2, 1, 2)), l).unwrap());
        let n = 4;
        let one = id(n);
        let p = |i: usize, j: usize| perm(n, i, j);
        let sp = |seq: &[usize]| shift_product(n, seq);
        let terms = [
            (&p(1, 2) - &one).scale_scalar(&qi(4)),
            &p(1, 4) - &one,
            &one - &p(1, 3),
            &sp(&[1, 2, 4]) - &sp(&[1, 4, 2]),
            (&(&p(1, 2) * &p(3, 4)) - &one).scale_scalar(&qi(-2)),
            &sp(&[1, 3, 4, 2]) - &sp(&[1, 3, 2, 4]),
            &sp(&[1, 2, 4, 3]) - &sp(&[1, 2, 3, 4]),
        ];
        let density = terms.iter().fold(Op::zero(n, 2, &JetAlgebra::trivial()), |acc, t| &acc + t);
        assert_eq!(first, global_charge(&density, l).unwrap());
    }
}
