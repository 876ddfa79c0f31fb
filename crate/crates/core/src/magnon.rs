//! Boost(3)-deformed XXX chain: second derivatives in the inhomogeneities,
//! the closed-form first-order monodromy, Bethe roots and magnon states.
//!
//! Operators at rational parameters are built exactly. Anything that depends
//! on a Bethe root runs through the same generic code over [`Complex`].

use std::sync::Arc;

use serde::Serialize;

use crate::charges::conjecture_density;
use crate::deform::{deformed_lax, deformed_monodromy, deformed_r, lambda_algebra, lambda_parts, DeformationFamily};
use crate::deform::{EvaluatedTuple, LAMBDA};
use crate::error::{LaxError, Result};
use crate::hp::{self, Complex};
use crate::jets::{Jet, JetAlgebra};
use crate::rational::Rat;
use crate::rmatrix::{coproduct_r, Model};
use crate::scalar::{gauss_jordan, Scalar};
use crate::tensor::{LegSplit, TensorOperator};

type Op<S = Rat> = TensorOperator<S>;

/// `base` extended by the site variables `v_n`, `v_m`, each with cube zero.
pub fn site_pair_algebra(base: &Arc<JetAlgebra>, n: usize, m: usize) -> Result<Arc<JetAlgebra>> {
    base.with_generator(&format!("v{n}"), 3)?.with_generator(&format!("v{m}"), 3)
}

/// `ξ_{n,m}(g) = (-D_m^2 g + D_n D_m g - [q_nm, g] q_nm)` at zero site
/// variables, with `q = Q^(2)(0,0)` on legs `n`, `m` of `g`.
///
/// The algebra of `g` must be `out` followed by the variables of `n` and `m`
/// (in that order), both of order at least 3.
pub fn xi_apply<S: Scalar>(model: &Model, g: &Op<S>, n: usize, m: usize, out: &Arc<JetAlgebra>) -> Result<Op<S>> {
    if n == m {
        return Err(LaxError::InvalidLegs("ξ needs two distinct legs".into()));
    }
    let gens = g.algebra().generators();
    let base = out.generators();
    if gens.len() != base.len() + 2 || &gens[..base.len()] != base {
        return Err(LaxError::AlgebraMismatch);
    }
    if gens[base.len()].1 < 3 || gens[base.len() + 1].1 < 3 {
        return Err(LaxError::JetOrder("ξ needs second derivatives in both site variables".into()));
    }
    let (in_, im) = (base.len(), base.len() + 1);
    let mid = g.algebra().without_last();
    let at = |e_n: u32, e_m: u32| g.coefficient_of(im, e_m, &mid).coefficient_of(in_, e_n, out);
    let g0 = at(0, 0);
    let dmm = at(0, 2).scale_scalar(&S::from_i64(2));
    let dnm = at(1, 1);
    let (q, _) = conjecture_density::<S>(model, out, 2)?;
    let q = q.embed(&[n, m], g.legs())?;
    let comm = &(&q * &g0) - &(&g0 * &q);
    Ok(&(&dnm - &dmm) - &(&comm * &q))
}

fn check_xxx(model: &Model) -> Result<()> {
    if model.site_dim() != 2 || !model.difference_form() {
        return Err(LaxError::InvalidArgument("magnon routines need a two-dimensional difference-form model".into()));
    }
    Ok(())
}

/// Legs of the doubled monodromy: `ā = 1`, `b = 2`, site `n` on `n + 2`.
fn site_leg(n: usize) -> usize {
    n + 2
}

/// `T_ā(u) = R_{āL}(u, v_L) ... R_{ā1}(u, v_1)` on `L + 2` legs with only
/// sites `n` and `m` carrying variables, followed by `ξ_{n,m}`.
fn xi_of_monodromy(model: &Model, length: usize, u: &Rat, n: usize, m: usize) -> Result<Op> {
    let base = JetAlgebra::trivial();
    let alg = site_pair_algebra(&base, n, m)?;
    let vn = Jet::generator(&alg, &format!("v{n}"))?;
    let vm = Jet::generator(&alg, &format!("v{m}"))?;
    let sites: Vec<(usize, Jet<Rat>)> = (1..=length)
        .map(|k| {
            let v = if k == n {
                vn.clone()
            } else if k == m {
                vm.clone()
            } else {
                Jet::zero()
            };
            (site_leg(k), v)
        })
        .collect();
    let t = coproduct_r(model, &alg, &[(1, Jet::from_rat(u))], &sites, length + 2)?;
    xi_apply(model, &t, site_leg(n), site_leg(m), &base)
}

/// `R^-1_{āb} ξ_{nb}(R_{ā(nb)}) R_{bn}` on legs `(ā, b, n) = (1, 2, 3)`.
fn lax_xi_term(model: &Model, u: &Rat) -> Result<Op> {
    let base = JetAlgebra::trivial();
    let alg = site_pair_algebra(&base, 3, 2)?;
    let vn = Jet::generator(&alg, "v3")?;
    let vb = Jet::generator(&alg, "v2")?;
    let g = coproduct_r(model, &alg, &[(1, Jet::from_rat(u))], &[(3, vn), (2, vb)], 3)?;
    let xi = xi_apply(model, &g, 3, 2, &base)?;
    let u = Jet::from_rat(u);
    let r_ab_inv = model.r_inverse(&base, &u, &Jet::zero())?.embed(&[1, 2], 3)?;
    let r_bn = model.eval(&base, &Jet::zero(), &Jet::zero())?.embed(&[2, 3], 3)?;
    Ok(&(&r_ab_inv * &xi) * &r_bn)
}

/// Minimal-norm exact solution of `Σ_k x_k a_k = b`, `None` if inconsistent.
fn min_norm_solve(columns: &[Op], rhs: &Op) -> Option<Vec<Rat>> {
    let unknowns = columns.len();
    let n = rhs.dim();
    // reduced row echelon form of [A | b]
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for e in 0..n * n {
        let (r, c) = (e / n, e % n);
        let mut row: Vec<Rat> = columns.iter().map(|a| a.entry(r, c).constant_term()).collect();
        row.push(rhs.entry(r, c).constant_term());
        for (p, prow) in pivots.iter().zip(&rows) {
            if !row[*p].is_zero() {
                let f = row[*p].clone();
                for (x, y) in row.iter_mut().zip(prow) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        match (0..unknowns).find(|&j| !row[j].is_zero()) {
            None => {
                if !row[unknowns].is_zero() {
                    return None;
                }
            }
            Some(p) => {
                let inv = row[p].recip().expect("nonzero pivot");
                for x in row.iter_mut() {
                    *x = &*x * &inv;
                }
                for prow in rows.iter_mut() {
                    if !prow[p].is_zero() {
                        let f = prow[p].clone();
                        for (x, y) in prow.iter_mut().zip(&row) {
                            *x = &*x - &(&f * y);
                        }
                    }
                }
                rows.push(row);
                pivots.push(p);
            }
        }
    }
    let mut x0 = vec![Rat::zero(); unknowns];
    for (p, row) in pivots.iter().zip(&rows) {
        x0[*p] = row[unknowns].clone();
    }
    // null space basis from the free columns
    let free: Vec<usize> = (0..unknowns).filter(|j| !pivots.contains(j)).collect();
    if free.is_empty() {
        return Some(x0);
    }
    let basis: Vec<Vec<Rat>> = free
        .iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); unknowns];
            v[f] = Rat::one();
            for (p, row) in pivots.iter().zip(&rows) {
                v[*p] = -&row[f];
            }
            v
        })
        .collect();
    // project x0 onto the orthogonal complement of the null space
    let dot = |a: &[Rat], b: &[Rat]| a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| &acc + &(x * y));
    let k = basis.len();
    let gram: Vec<Rat> = (0..k * k).map(|i| dot(&basis[i / k], &basis[i % k])).collect();
    let ginv = Rat::invert_matrix(k, &gram)?;
    let proj: Vec<Rat> = basis.iter().map(|b| dot(b, &x0)).collect();
    let mut x = x0;
    for i in 0..k {
        let c = (0..k).fold(Rat::zero(), |acc, j| &acc + &(&ginv[i * k + j] * &proj[j]));
        for (xv, bv) in x.iter_mut().zip(&basis[i]) {
            *xv = &*xv - &(&c * bv);
        }
    }
    Some(x)
}

/// The similarity generator `m_{āb}(u)`: the minimal-norm solution of
/// `L^(1) - R^-1_{āb} ξ_{nb}(R_{ā(nb)}) R_{bn} = [m_{āb}, R_{(āb)n}]`
/// for the Boost(3) Lax operator, as a two-leg operator.
pub fn solve_m(model: &Model, u: &Rat) -> Result<Op> {
    check_xxx(model)?;
    let family = DeformationFamily::boost(3)?;
    let lam = lambda_algebra();
    let (_, l1) = lambda_parts(&deformed_lax(model, &lam, &family, &Jet::from_rat(u))?)?;
    let base = JetAlgebra::trivial();
    let target = l1.try_sub(&lax_xi_term(model, u)?)?;
    let r = coproduct_r(model, &base, &[(1, Jet::from_rat(u)), (2, Jet::zero())], &[(3, Jet::zero())], 3)?;
    let d2 = 4;
    let units: Vec<Op> = (0..d2 * d2)
        .map(|k| Op::from_fn(2, 2, &base, |i, j| if i * d2 + j == k { Jet::one() } else { Jet::zero() }))
        .collect();
    let columns: Vec<Op> =
        units.iter().map(|e| e.embed(&[1, 2], 3).and_then(|e| e.commutator(&r))).collect::<Result<_>>()?;
    let x = min_norm_solve(&columns, &target)
        .ok_or_else(|| LaxError::InvalidArgument("no similarity generator solves the Lax equation".into()))?;
    Op::from_scalars(2, 2, &base, &x)
}

/// Closed-form first-order part of the Boost(3) monodromy on `L + 2` legs
/// (`ā = 1`, `b = 2`, sites after):
/// `Σ_n ξ_{n,n+1}(T_ā) T_b + R^-1_{āb} [T_b ξ_{L-1,L}(T_ā)] R_{āb}
///  - ξ_{L,1}(T_ā) T_b + [m, T_{āb}]`.
pub fn theta_monodromy_first_order(model: &Model, length: usize, u: &Rat) -> Result<Op> {
    check_xxx(model)?;
    if length < 2 {
        return Err(LaxError::InvalidArgument("the closed form needs at least two sites".into()));
    }
    let base = JetAlgebra::trivial();
    let total = length + 2;
    let d = model.site_dim();
    let uj = Jet::from_rat(u);
    let mut t_b = Op::identity(total, d, &base);
    for n in 1..=length {
        t_b = t_b.apply_local_left(&Op::permutation(2, d, 1, 2, &base)?, &[2, site_leg(n)])?;
    }
    let next = |n: usize| if n == length { 1 } else { n + 1 };
    let mut acc = Op::zero(total, d, &base);
    for n in 1..=length {
        acc = &acc + &(&xi_of_monodromy(model, length, u, n, next(n))? * &t_b);
    }
    let r_ab = model.eval(&base, &uj, &Jet::zero())?.embed(&[1, 2], total)?;
    let r_ab_inv = model.r_inverse(&base, &uj, &Jet::zero())?.embed(&[1, 2], total)?;
    let boundary = &t_b * &xi_of_monodromy(model, length, u, length - 1, length)?;
    acc = &acc + &boundary.conjugate(&r_ab_inv, &r_ab);
    acc = &acc - &(&xi_of_monodromy(model, length, u, length, 1)? * &t_b);
    let sites: Vec<(usize, Jet<Rat>)> = (1..=length).map(|n| (site_leg(n), Jet::zero())).collect();
    let t0 = coproduct_r(model, &base, &[(1, uj), (2, Jet::zero())], &sites, total)?;
    let m = solve_m(model, u)?.embed(&[1, 2], total)?;
    Ok(&acc + &m.commutator(&t0)?)
}

/// First-order part of the Boost(3) monodromy from the deformed Lax
/// operators, for comparison with [`theta_monodromy_first_order`].
pub fn boost3_monodromy_first_order(model: &Model, length: usize, u: &Rat) -> Result<Op> {
    let family = DeformationFamily::boost(3)?;
    let t = deformed_monodromy(model, &lambda_algebra(), &family, length, &Jet::from_rat(u))?;
    Ok(lambda_parts(&t)?.1)
}

/// State vectors with jet entries; leg 1 is the most significant digit.
type Vector<S> = Vec<Jet<S>>;

/// `local` on `positions` of a vector on `legs` tensor factors.
fn apply_local_vec<S: Scalar>(v: &[Jet<S>], legs: usize, local: &Op<S>, positions: &[usize]) -> Vector<S> {
    let split = LegSplit::new(legs, local.site_dim(), positions);
    let alg = local.algebra();
    let mut out = vec![Jet::zero(); v.len()];
    for (idx, x) in v.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let (s, r) = split.split[idx];
        for row in 0..local.dim() {
            let e = local.entry(row, s as usize);
            if !e.is_zero() {
                out[split.merge(row, r as usize)].mul_add_assign(e, x, alg);
            }
        }
    }
    out
}

/// `<row| L_L ... L_1 |col> ψ` for Lax operators with `aux` auxiliary legs.
fn monodromy_element_apply<S: Scalar>(laxes: &[Op<S>], aux: usize, row: usize, col: usize, psi: &[Jet<S>]) -> Vector<S> {
    let length = laxes.len();
    let sites = psi.len();
    let mut v = vec![Jet::zero(); sites * laxes[0].site_dim().pow(aux as u32)];
    v[col * sites..(col + 1) * sites].clone_from_slice(psi);
    for (n, lax) in laxes.iter().enumerate() {
        let pos: Vec<usize> = (1..=aux).chain(std::iter::once(aux + n + 1)).collect();
        v = apply_local_vec(&v, aux + length, lax, &pos);
    }
    v[row * sites..(row + 1) * sites].to_vec()
}

fn add_vec<S: Scalar>(a: &mut [Jet<S>], b: &[Jet<S>]) {
    for (x, y) in a.iter_mut().zip(b) {
        x.add_assign(y);
    }
}

fn vacuum<S: Scalar>(length: usize) -> Vector<S> {
    let mut v = vec![Jet::zero(); 1 << length];
    v[0] = Jet::one();
    v
}

/// `û = i/2 - i u`.
pub fn to_hat(u: &Complex) -> Complex {
    let half_i = Complex::from_parts(&Rat::zero(), &Rat::new(1, 2));
    half_i.sub(&Complex::i().mul(u))
}

/// `u = 1/2 + i û`.
pub fn from_hat(h: &Complex) -> Complex {
    Complex::from_rat(&Rat::new(1, 2)).add(&Complex::i().mul(h))
}

#[derive(Clone, Debug)]
pub struct BetheRoots {
    pub length: usize,
    /// Rapidities in the `u` convention.
    pub roots: Vec<Complex>,
    pub digits: usize,
    pub residual: f64,
}

impl BetheRoots {
    pub fn n(&self) -> usize {
        self.roots.len()
    }

    /// Same roots, residual recomputed; used for shifted negative controls.
    pub fn with_roots(&self, roots: Vec<Complex>) -> Result<BetheRoots> {
        let residual = bethe_residual(self.length, &roots)?;
        Ok(BetheRoots { length: self.length, roots, digits: self.digits, residual })
    }
}

/// `max_n |((û_n + i/2)/(û_n - i/2))^L - Π_{m≠n} (û_n - û_m + i)/(û_n - û_m - i)|`.
pub fn bethe_residual(length: usize, roots: &[Complex]) -> Result<f64> {
    let hats: Vec<Complex> = roots.iter().map(to_hat).collect();
    let half_i = Complex::from_parts(&Rat::zero(), &Rat::new(1, 2));
    let i = Complex::i();
    let pole = || LaxError::PoleAtEvaluationPoint("Bethe equations at a pole".into());
    let mut worst: f64 = 0.0;
    for (n, h) in hats.iter().enumerate() {
        let lhs = h.add(&half_i).div(&h.sub(&half_i)).ok_or_else(pole)?.powi(length as u32);
        let mut rhs = Complex::one();
        for (m, g) in hats.iter().enumerate() {
            if m != n {
                let x = h.sub(g);
                rhs = rhs.mul(&x.add(&i).div(&x.sub(&i)).ok_or_else(pole)?);
            }
        }
        worst = worst.max(lhs.sub(&rhs).abs());
    }
    Ok(worst)
}

/// Polynomial form `(û_n + i/2)^L Π (û_n - û_m - i) - (û_n - i/2)^L Π (û_n - û_m + i)`
/// over jets, so the Jacobian comes from the first-order coefficients.
fn bethe_polynomials(length: usize, hats: &[Jet<Complex>], alg: &JetAlgebra) -> Vec<Jet<Complex>> {
    let half_i = Jet::constant(Complex::from_parts(&Rat::zero(), &Rat::new(1, 2)));
    let i = Jet::constant(Complex::i());
    let pow = |x: &Jet<Complex>| (0..length).fold(Jet::one(), |acc: Jet<Complex>, _| acc.mul(x, alg));
    hats.iter()
        .enumerate()
        .map(|(n, h)| {
            let mut a = pow(&h.add(&half_i));
            let mut b = pow(&h.sub(&half_i));
            for (m, g) in hats.iter().enumerate() {
                if m != n {
                    let x = h.sub(g);
                    a = a.mul(&x.sub(&i), alg);
                    b = b.mul(&x.add(&i), alg);
                }
            }
            a.sub(&b)
        })
        .collect()
}

fn newton(length: usize, start: Vec<Complex>, digits: usize) -> Result<Vec<Complex>> {
    let k = start.len();
    let names: Vec<String> = (1..=k).map(|j| format!("x{j}")).collect();
    let gens: Vec<(&str, u32)> = names.iter().map(|s| (s.as_str(), 2)).collect();
    let alg = JetAlgebra::new(&gens)?;
    let size = |f: &[Jet<Complex>]| f.iter().map(|x| x.constant_term().abs()).fold(0.0, f64::max);
    let target = 10f64.powi(-(digits as i32) * 3 / 4);
    let mut hats = start;
    let mut last = f64::INFINITY;
    for _ in 0..200 {
        let jets: Vec<Jet<Complex>> = hats
            .iter()
            .enumerate()
            .map(|(j, h)| Jet::constant(h.clone()).add(&Jet::generator(&alg, &names[j]).expect("generator")))
            .collect();
        let f = bethe_polynomials(length, &jets, &alg);
        let roots: Vec<Complex> = hats.iter().map(from_hat).collect();
        if let Ok(r) = bethe_residual(length, &roots) {
            last = r;
            if r < target {
                return Ok(hats);
            }
        }
        let jac: Vec<Complex> =
            (0..k * k).map(|e| f[e / k].coefficient_of(e % k, 1).constant_term()).collect();
        let jinv = gauss_jordan(k, &jac).ok_or_else(|| LaxError::NoConvergence("singular Jacobian".into()))?;
        let fval: Vec<Complex> = f.iter().map(|x| x.constant_term()).collect();
        let step: Vec<Complex> =
            (0..k).map(|r| (0..k).fold(Complex::zero(), |acc, c| acc.sub(&jinv[r * k + c].mul(&fval[c])))).collect();
        let f0 = size(&f);
        let mut t = Complex::one();
        let half = Complex::from_rat(&Rat::new(1, 2));
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<Complex> = hats.iter().zip(&step).map(|(h, s)| h.add(&t.mul(s))).collect();
            let tj: Vec<Jet<Complex>> = trial.iter().map(|h| Jet::constant(h.clone())).collect();
            if size(&bethe_polynomials(length, &tj, &alg)) < f0 {
                hats = trial;
                accepted = true;
                break;
            }
            t = t.mul(&half);
        }
        if !accepted {
            break;
        }
    }
    Err(LaxError::NoConvergence(format!("Bethe residual stalled at {last:e}")))
}

/// Bethe roots for `N <= 2` magnons on `L` sites at `digits` decimal digits,
/// choosing the first admissible branch. Sets the process-wide precision.
pub fn bethe_solve(length: usize, n: usize, digits: usize) -> Result<BetheRoots> {
    bethe_solve_branch(length, n, digits, 0)
}

/// As [`bethe_solve`], with `branch` selecting the momentum number:
/// `k = branch + 1` for one magnon (`û = cot(π k / L) / 2`), and the
/// symmetric pair `±p` with `p = 2π (branch + 1) / L` as Newton start for two.
pub fn bethe_solve_branch(length: usize, n: usize, digits: usize, branch: usize) -> Result<BetheRoots> {
    if length < 2 {
        return Err(LaxError::InvalidArgument("Bethe states need at least two sites".into()));
    }
    if digits < 30 {
        return Err(LaxError::InvalidArgument("Bethe roots need at least 30 digits".into()));
    }
    hp::set_digits(digits);
    let hats: Vec<Complex> = match n {
        0 => Vec::new(),
        1 => {
            let k = branch + 1;
            if k >= length {
                return Err(LaxError::InvalidArgument(format!("one-magnon branch {branch} out of range")));
            }
            let c = Complex::cot_pi(&Rat::new(k as i64, length as i64))
                .ok_or_else(|| LaxError::InvalidArgument("zero momentum".into()))?;
            vec![c.mul(&Complex::from_rat(&Rat::new(1, 2)))]
        }
        2 => {
            let k = branch + 1;
            if 2 * k >= length {
                return Err(LaxError::InvalidArgument(format!("two-magnon branch {branch} out of range")));
            }
            let c = Complex::cot_pi(&Rat::new(k as i64, length as i64))
                .ok_or_else(|| LaxError::InvalidArgument("zero momentum".into()))?;
            let h = c.mul(&Complex::from_rat(&Rat::new(1, 2)));
            let hats = newton(length, vec![h.clone(), h.neg()], digits)?;
            if hats[0].sub(&hats[1]).abs() < 1e-8 {
                return Err(LaxError::NoConvergence("roots collapsed onto each other".into()));
            }
            hats
        }
        _ => return Err(LaxError::InvalidArgument("only N <= 2 is supported".into())),
    };
    let roots: Vec<Complex> = hats.iter().map(from_hat).collect();
    let residual = bethe_residual(length, &roots)?;
    let bound = 10f64.powf(-(digits as f64) / 2.0);
    if residual >= bound {
        return Err(LaxError::NoConvergence(format!("Bethe residual {residual:e} above {bound:e}")));
    }
    Ok(BetheRoots { length, roots, digits, residual })
}

/// `f_0^±(u) = Π_n u_n / (u_n ± 1)`.
pub fn f0(roots: &[Complex], plus: bool) -> Result<Complex> {
    let one = Complex::one();
    roots.iter().try_fold(Complex::one(), |acc, u| {
        let den = if plus { u.add(&one) } else { u.sub(&one) };
        let q = u.div(&den).ok_or_else(|| LaxError::PoleAtEvaluationPoint("root at u = ±1".into()))?;
        Ok(acc.mul(&q))
    })
}

/// First-order rapidity corrections `δu_j` that keep the roots on shell for
/// the Boost(3) chain.
///
/// With inhomogeneities `v_n` the roots solve
/// `Π_n a(û_j + i v_n) = Π_{m≠j} s(û_j − û_m)`. The state's bulk term is
/// `−½ Σ_n (D_n − D_{n+1})²` acting on the on-shell Bethe vector, so the
/// roots move by `−½ Σ_n (D_n − D_{n+1})² u_j`. First derivatives of the
/// roots agree on every site and drop out; differentiating the log of the
/// Bethe equations twice gives the linear system
/// `L a'(û_j) Δ_j − Σ_{m≠j} s'(û_j − û_m) (Δ_j − Δ_m) = 2 L a''(û_j)`
/// for `Δ_j = Σ_n (D_n − D_{n+1})² û_j`, with `a = log((x + i/2)/(x − i/2))`
/// and `s = log((x + i)/(x − i))`. Then `δu_j = −(i/2) Δ_j`.
pub fn rapidity_shifts(roots: &BetheRoots) -> Result<Vec<Complex>> {
    let n = roots.n();
    if n == 0 {
        return Ok(Vec::new());
    }
    let hats: Vec<Complex> = roots.roots.iter().map(to_hat).collect();
    let i = Complex::i();
    let quarter = Complex::from_rat(&Rat::new(1, 4));
    let pole = || LaxError::PoleAtEvaluationPoint("singular root configuration".into());
    // a'(x) = −i / (x² + 1/4), a''(x) = 2 i x / (x² + 1/4)², s'(x) = −2 i / (x² + 1)
    let a1 = |x: &Complex| i.neg().div(&x.mul(x).add(&quarter));
    let a2 = |x: &Complex| {
        let d = x.mul(x).add(&quarter);
        i.mul(x).mul(&Complex::from_i64(2)).div(&d.mul(&d))
    };
    let s1 = |x: &Complex| i.mul(&Complex::from_i64(-2)).div(&x.mul(x).add(&Complex::one()));
    let len = Complex::from_i64(roots.length as i64);
    let mut mat = vec![Complex::zero(); n * n];
    let mut rhs = Vec::with_capacity(n);
    for j in 0..n {
        let mut diag = len.mul(&a1(&hats[j]).ok_or_else(pole)?);
        for m in (0..n).filter(|&m| m != j) {
            let sp = s1(&hats[j].sub(&hats[m])).ok_or_else(pole)?;
            diag = diag.sub(&sp);
            mat[j * n + m] = sp;
        }
        mat[j * n + j] = diag;
        rhs.push(len.mul(&Complex::from_i64(2)).mul(&a2(&hats[j]).ok_or_else(pole)?));
    }
    let inv = gauss_jordan(n, &mat).ok_or_else(pole)?;
    let half_i = i.mul(&Complex::from_rat(&Rat::new(-1, 2)));
    Ok((0..n)
        .map(|j| {
            let delta = (0..n).fold(Complex::zero(), |acc, m| acc.add(&inv[j * n + m].mul(&rhs[m])));
            half_i.mul(&delta)
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct MagnonState {
    pub length: usize,
    pub roots: BetheRoots,
    /// First-order rapidity corrections used to build the state.
    pub shifts: Vec<Complex>,
    /// `λ^0` and `λ^1` parts of the state on the `2^L` site basis.
    pub zeroth: Vec<Complex>,
    pub first: Vec<Complex>,
}

fn split_lambda(v: &[Jet<Complex>], alg: &JetAlgebra) -> Result<(Vec<Complex>, Vec<Complex>)> {
    let idx = alg.index_of(LAMBDA)?;
    let part = |e: u32| v.iter().map(|j| j.coefficient_of(idx, e).constant_term()).collect();
    Ok((part(0), part(1)))
}

/// The magnon state with rapidities `u_j + λ δu_j` kept on shell, see
/// [`rapidity_shifts`].
pub fn build_magnon_state(model: &Model, roots: &BetheRoots) -> Result<MagnonState> {
    let shifts = rapidity_shifts(roots)?;
    build_magnon_state_shifted(model, roots, &shifts)
}

/// The magnon state at rapidities held fixed at the undeformed roots.
pub fn build_magnon_state_fixed(model: &Model, roots: &BetheRoots) -> Result<MagnonState> {
    build_magnon_state_shifted(model, roots, &vec![Complex::zero(); roots.n()])
}

/// `(B(u_1) ... B(u_N) ⊗^λ [t_11(0) + f_0^-/f_0^+ t_22(0)]) |Ω>` for the
/// Boost(3) deformation, with `|Ω>` the all-first-basis-state vacuum and
/// rapidities `u_j + λ shifts_j`.
///
/// The deformed Lax operator acts on the tuple `T_{ā_1..ā_N}(u) ⊗ T_b`, so
/// the auxiliary space has `N + 1` legs; `B = t_12`.
pub fn build_magnon_state_shifted(model: &Model, roots: &BetheRoots, shifts: &[Complex]) -> Result<MagnonState> {
    check_xxx(model)?;
    let n = roots.n();
    if shifts.len() != n {
        return Err(LaxError::InvalidArgument(format!("{} shifts for {n} roots", shifts.len())));
    }
    let length = roots.length;
    let fp = f0(&roots.roots, true)?;
    let ratio = f0(&roots.roots, false)?
        .div(&fp)
        .ok_or_else(|| LaxError::PoleAtEvaluationPoint("f_0^+ vanishes".into()))?;
    let lam = lambda_algebra();
    let lgen = Jet::<Complex>::generator(&lam, LAMBDA)?;
    let family = DeformationFamily::boost(3)?;
    let x = EvaluatedTuple::new(
        roots
            .roots
            .iter()
            .zip(shifts)
            .enumerate()
            .map(|(i, (u, du))| (i + 1, Jet::constant(u.clone()).add(&lgen.scale(du))))
            .collect(),
        vec![n + 1],
    )?;
    let site = EvaluatedTuple::new(Vec::new(), vec![n + 2])?;
    let lax = deformed_r(model, &lam, &family, &x, &site, n + 2)?;
    let laxes = vec![lax; length];
    let omega = vacuum::<Complex>(length);
    // auxiliary digits (0..0, k) and (1..1, k)
    let ones: usize = (1..=n).map(|i| 1 << i).sum();
    let mut psi = monodromy_element_apply(&laxes, n + 1, 0, ones, &omega);
    let d = monodromy_element_apply(&laxes, n + 1, 1, ones + 1, &omega);
    let r = Jet::constant(ratio);
    for (p, x) in psi.iter_mut().zip(&d) {
        p.mul_add_assign(&r, x, &lam);
    }
    let (zeroth, first) = split_lambda(&psi, &lam)?;
    Ok(MagnonState { length, roots: roots.clone(), shifts: shifts.to_vec(), zeroth, first })
}

/// Undeformed `B(u_1) ... B(u_N) |Ω>` with site variables set by `sites`.
fn b_product_on_vacuum<S: Scalar>(
    model: &Model,
    alg: &Arc<JetAlgebra>,
    roots: &[Jet<S>],
    sites: &[Jet<S>],
) -> Result<Vector<S>> {
    let n = roots.len();
    let first: Vec<(usize, Jet<S>)> = roots.iter().enumerate().map(|(i, u)| (i + 1, u.clone())).collect();
    let laxes: Vec<Op<S>> =
        sites.iter().map(|v| coproduct_r(model, alg, &first, &[(n + 1, v.clone())], n + 1)).collect::<Result<_>>()?;
    let ones: usize = (0..n).map(|i| 1 << i).sum();
    Ok(monodromy_element_apply(&laxes, n, 0, ones, &vacuum(sites.len())))
}

/// Undeformed Bethe vector `B(u_1) ... B(u_N) |Ω>`.
pub fn bethe_vector(model: &Model, roots: &BetheRoots) -> Result<Vec<Complex>> {
    let alg = JetAlgebra::trivial();
    let us: Vec<Jet<Complex>> = roots.roots.iter().map(|u| Jet::constant(u.clone())).collect();
    let v = b_product_on_vacuum(model, &alg, &us, &vec![Jet::zero(); roots.length])?;
    Ok(v.iter().map(|j| j.constant_term()).collect())
}

/// `Σ_n ξ_{n,n+1}(B(u_1) ... B(u_N)) |Ω>`. The commutator part of `ξ`
/// drops out because `q_{n,n+1} |Ω> = 0`.
pub fn bulk_term(model: &Model, roots: &BetheRoots) -> Result<Vec<Complex>> {
    let length = roots.length;
    let base = JetAlgebra::trivial();
    let us: Vec<Jet<Complex>> = roots.roots.iter().map(|u| Jet::constant(u.clone())).collect();
    let mut acc = vec![Complex::zero(); 1 << length];
    for n in 1..=length {
        let m = if n == length { 1 } else { n + 1 };
        let alg = site_pair_algebra(&base, n, m)?;
        let vn = Jet::generator(&alg, &format!("v{n}"))?;
        let vm = Jet::generator(&alg, &format!("v{m}"))?;
        let sites: Vec<Jet<Complex>> = (1..=length)
            .map(|k| if k == n { vn.clone() } else if k == m { vm.clone() } else { Jet::zero() })
            .collect();
        let v = b_product_on_vacuum(model, &alg, &us, &sites)?;
        let (i_n, i_m) = (0, 1);
        let two = Complex::from_i64(2);
        for (a, j) in acc.iter_mut().zip(&v) {
            let dnm = j.coefficient_of(i_m, 1).coefficient_of(i_n, 1).constant_term();
            let dmm = j.coefficient_of(i_m, 2).coefficient_of(i_n, 0).constant_term().mul(&two);
            *a = a.add(&dnm.sub(&dmm));
        }
    }
    Ok(acc)
}

fn argmax(v: &[Complex]) -> (usize, f64) {
    v.iter().enumerate().map(|(i, x)| (i, x.abs())).fold((0, 0.0), |best, c| if c.1 > best.1 { c } else { best })
}

fn max_abs(v: &[Complex]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenReport {
    pub residual_order0: f64,
    pub residual_order1: f64,
    pub eigenvalue_order0: String,
    pub eigenvalue_order1: String,
}

/// `t^λ(u) |ψ> - τ(u) |ψ>` for the Boost(3) transfer matrix, with `τ` read
/// off the largest component and `|ψ>` scaled so that component is 1.
/// Residuals are max-abs per `λ` order.
/// Order-0 and order-1 parts of `t^λ(u) (ψ0 + λ ψ1)` for the Boost(3) chain.
pub fn transfer_apply(model: &Model, u: &Rat, p0: &[Complex], p1: &[Complex]) -> Result<(Vec<Complex>, Vec<Complex>)> {
    let length = p0.len().trailing_zeros() as usize;
    let lam = lambda_algebra();
    let family = DeformationFamily::boost(3)?;
    let lax = deformed_lax(model, &lam, &family, &Jet::from_rat(u))?.map_scalars(Complex::from_rat);
    let laxes = vec![lax; length];
    let lgen = Jet::<Complex>::generator(&lam, LAMBDA)?;
    let psi: Vector<Complex> =
        p0.iter().zip(p1).map(|(a, b)| Jet::constant(a.clone()).add(&lgen.scale(b))).collect();
    let mut out = vec![Jet::zero(); psi.len()];
    for a in 0..4 {
        add_vec(&mut out, &monodromy_element_apply(&laxes, 2, a, a, &psi));
    }
    split_lambda(&out, &lam)
}

pub fn eigencheck(model: &Model, state: &MagnonState, u: &Rat) -> Result<EigenReport> {
    check_xxx(model)?;
    let (j, top) = argmax(&state.zeroth);
    if top < 1e-30 {
        return Err(LaxError::InvalidArgument("state vanishes at zeroth order".into()));
    }
    let scale = state.zeroth[j].inv().expect("nonzero component");
    let p0: Vec<Complex> = state.zeroth.iter().map(|x| x.mul(&scale)).collect();
    let p1: Vec<Complex> = state.first.iter().map(|x| x.mul(&scale)).collect();
    let (t0, t1) = transfer_apply(model, u, &p0, &p1)?;
    let tau0 = t0[j].clone();
    let r0: Vec<Complex> = t0.iter().zip(&p0).map(|(t, p)| t.sub(&tau0.mul(p))).collect();
    let tau1 = t1[j].sub(&tau0.mul(&p1[j]));
    let r1: Vec<Complex> =
        (0..p0.len()).map(|i| t1[i].sub(&tau0.mul(&p1[i])).sub(&tau1.mul(&p0[i]))).collect();
    Ok(EigenReport {
        residual_order0: max_abs(&r0),
        residual_order1: max_abs(&r1),
        eigenvalue_order0: tau0.to_decimal_string(20),
        eigenvalue_order1: tau1.to_decimal_string(20),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtraTermsReport {
    pub g: String,
    pub residual: f64,
}

/// Fits `g` in `ψ_1 - Σ_n ξ_{n,n+1}(B...B)|Ω> = (-q_{L,1} Q_2 + g) ψ_0` at
/// the largest component of `ψ_0` and reports the remaining max-abs
/// mismatch relative to `max |ψ_0|`.
pub fn extra_terms_check(model: &Model, roots: &BetheRoots) -> Result<ExtraTermsReport> {
    let state = build_magnon_state_fixed(model, roots)?;
    let length = state.length;
    let bulk = bulk_term(model, &state.roots)?;
    let extra: Vec<Complex> = state.first.iter().zip(&bulk).map(|(a, b)| a.sub(b)).collect();
    let (q2, _) = conjecture_density::<Complex>(model, &JetAlgebra::trivial(), 2)?;
    let as_jets = |v: &[Complex]| -> Vector<Complex> { v.iter().map(|x| Jet::constant(x.clone())).collect() };
    let mut h = vec![Jet::zero(); 1 << length];
    let psi = as_jets(&state.zeroth);
    for n in 1..=length {
        let m = if n == length { 1 } else { n + 1 };
        add_vec(&mut h, &apply_local_vec(&psi, length, &q2, &[n, m]));
    }
    let w = apply_local_vec(&h, length, &q2, &[length, 1]);
    let w: Vec<Complex> = w.iter().map(|j| j.constant_term().neg()).collect();
    let (j, top) = argmax(&state.zeroth);
    if top < 1e-30 {
        return Err(LaxError::InvalidArgument("state vanishes at zeroth order".into()));
    }
    let g = extra[j].sub(&w[j]).div(&state.zeroth[j]).expect("nonzero component");
    let resid: Vec<Complex> =
        (0..extra.len()).map(|i| extra[i].sub(&w[i]).sub(&g.mul(&state.zeroth[i]))).collect();
    Ok(ExtraTermsReport { g: g.to_decimal_string(20), residual: max_abs(&resid) / top })
}

#[derive(Clone, Debug, Serialize)]
pub struct MagnonReport {
    #[serde(rename = "L")]
    pub length: usize,
    #[serde(rename = "N")]
    pub magnons: usize,
    pub digits: usize,
    pub u: String,
    pub roots: Vec<String>,
    pub bethe_residual: f64,
    pub rapidity_shifts: Vec<String>,
    pub residual_order0: f64,
    pub residual_order1: f64,
    pub eigenvalue_order0: String,
    pub eigenvalue_order1: String,
    /// Order-1 residual of the state with rapidities held at the undeformed roots.
    pub fixed_rapidity_residual_order1: f64,
    pub fitted_g: String,
    pub extra_terms_residual: f64,
}

/// Solves the Bethe equations, builds the on-shell state and runs all checks
/// against `t^λ(u)`. Sets the process-wide precision to `digits`.
pub fn magnon_report(model: &Model, length: usize, n: usize, u: &Rat, digits: usize) -> Result<MagnonReport> {
    check_xxx(model)?;
    let roots = bethe_solve(length, n, digits)?;
    let state = build_magnon_state(model, &roots)?;
    let fixed = build_magnon_state_fixed(model, &roots)?;
    let eig = eigencheck(model, &state, u)?;
    let eig_fixed = eigencheck(model, &fixed, u)?;
    let extra = extra_terms_check(model, &roots)?;
    let show = |v: &[Complex]| v.iter().map(|c| c.to_decimal_string(digits.min(40))).collect();
    Ok(MagnonReport {
        length,
        magnons: n,
        digits,
        u: u.to_string(),
        roots: show(&roots.roots),
        bethe_residual: roots.residual,
        rapidity_shifts: show(&state.shifts),
        residual_order0: eig.residual_order0,
        residual_order1: eig.residual_order1,
        eigenvalue_order0: eig.eigenvalue_order0,
        eigenvalue_order1: eig.eigenvalue_order1,
        fixed_rapidity_residual_order1: eig_fixed.residual_order1,
        fitted_g: extra.g,
        extra_terms_residual: extra.residual,
    })
}
