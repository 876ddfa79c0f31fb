//! Periodic chains: monodromy, transfer matrices, charges extracted from the
//! transfer matrix, and open-window boost and bilocal sums.

use std::sync::Arc;

use rayon::prelude::*;

use crate::charges::{conjecture_density, reduced_q, Variant};
use crate::error::{LaxError, Result};
use crate::jets::{Jet, JetAlgebra};
use crate::rational::Rat;
use crate::rmatrix::{coproduct_r, Check, Model};
use crate::scalar::Scalar;
use crate::tensor::TensorOperator;

type Op<S> = TensorOperator<S>;

#[derive(Clone, Debug)]
pub struct ChainSpec<S: Scalar> {
    pub length: usize,
    pub site_dim: usize,
    pub inhomogeneities: Vec<Jet<S>>,
}

impl<S: Scalar> ChainSpec<S> {
    pub fn homogeneous(length: usize, site_dim: usize) -> Result<ChainSpec<S>> {
        ChainSpec::new(site_dim, vec![Jet::zero(); length])
    }

    pub fn new(site_dim: usize, inhomogeneities: Vec<Jet<S>>) -> Result<ChainSpec<S>> {
        if inhomogeneities.is_empty() {
            return Err(LaxError::InvalidArgument("chain length must be at least 1".into()));
        }
        Ok(ChainSpec { length: inhomogeneities.len(), site_dim, inhomogeneities })
    }
}

/// Lax operators `R_{a n}(u, v_n)` on legs `(a, n)`.
pub fn lax_operators<S: Scalar>(model: &Model, alg: &Arc<JetAlgebra>, chain: &ChainSpec<S>, u: &Jet<S>) -> Result<Vec<Op<S>>> {
    chain.inhomogeneities.iter().map(|v| model.eval(alg, u, v)).collect()
}

/// `L_{aL}(u) ... L_{a1}(u)` with the auxiliary leg first.
pub fn monodromy<S: Scalar>(model: &Model, alg: &Arc<JetAlgebra>, chain: &ChainSpec<S>, u: &Jet<S>) -> Result<Op<S>> {
    let second: Vec<(usize, Jet<S>)> = chain.inhomogeneities.iter().enumerate().map(|(i, v)| (i + 2, v.clone())).collect();
    coproduct_r(model, alg, &[(1, u.clone())], &second, chain.length + 1)
}

/// Ordered product of Lax operators with `aux` auxiliary legs each; legs
/// `1..=aux` are auxiliary, sites follow.
pub fn monodromy_from_lax<S: Scalar>(laxes: &[Op<S>], aux: usize) -> Result<Op<S>> {
    let first = laxes.first().ok_or_else(|| LaxError::InvalidArgument("empty chain".into()))?;
    let total = aux + laxes.len();
    let mut acc = Op::identity(total, first.site_dim(), first.algebra());
    for (n, lax) in laxes.iter().enumerate() {
        let pos: Vec<usize> = (1..=aux).chain(std::iter::once(aux + n + 1)).collect();
        acc = acc.apply_local_left(lax, &pos)?;
    }
    Ok(acc)
}

pub fn transfer<S: Scalar>(model: &Model, alg: &Arc<JetAlgebra>, chain: &ChainSpec<S>, u: &Jet<S>) -> Result<Op<S>> {
    transfer_from_lax(&lax_operators(model, alg, chain, u)?, 1)
}

/// Trace over the auxiliary legs of the ordered Lax product, computed as a
/// matrix product state: only one auxiliary column is live at a time, so the
/// full monodromy is never formed.
pub fn transfer_from_lax<S: Scalar>(laxes: &[Op<S>], aux: usize) -> Result<Op<S>> {
    let first = laxes.first().ok_or_else(|| LaxError::InvalidArgument("empty chain".into()))?;
    let d = first.site_dim();
    let alg = first.algebra().clone();
    for l in laxes {
        if l.legs() != aux + 1 || l.site_dim() != d || !JetAlgebra::same(l.algebra(), &alg) {
            return Err(LaxError::ShapeMismatch("Lax operators must share shape and algebra".into()));
        }
    }
    let da = d.pow(aux as u32);
    // blocks[n][α][γ] is the d x d site block of Lax n
    let blocks: Vec<Vec<Vec<Vec<Jet<S>>>>> = laxes
        .iter()
        .map(|l| {
            (0..da)
                .map(|a| (0..da).map(|g| (0..d * d).map(|i| l.entry(a * d + i / d, g * d + i % d).clone()).collect()).collect())
                .collect()
        })
        .collect();
    let len = laxes.len();
    let dim = d.pow(len as u32);
    let parts: Vec<Vec<Jet<S>>> = (0..da)
        .into_par_iter()
        .map(|beta| {
            let mut cur: Vec<Vec<Jet<S>>> = (0..da).map(|a| blocks[0][a][beta].clone()).collect();
            let mut n = d;
            for (step, lax) in blocks.iter().enumerate().skip(1) {
                let last = step + 1 == len;
                let targets: Vec<usize> = if last { vec![beta] } else { (0..da).collect() };
                let mut next: Vec<Vec<Jet<S>>> = vec![Vec::new(); da];
                for a in targets {
                    let mut out = vec![Jet::zero(); n * d * n * d];
                    for (g, block) in cur.iter().enumerate() {
                        kron_accumulate(&mut out, block, n, &lax[a][g], d, &alg);
                    }
                    next[a] = out;
                }
                cur = next;
                n *= d;
            }
            std::mem::take(&mut cur[beta])
        })
        .collect();
    let mut data = vec![Jet::zero(); dim * dim];
    for p in parts {
        for (o, x) in data.iter_mut().zip(p) {
            if !x.is_zero() {
                o.add_assign(&x);
            }
        }
    }
    Op::from_jets(len, d, &alg, data)
}

/// `out += a ⊗ b` with `a` of size `n x n` and `b` of size `d x d`.
fn kron_accumulate<S: Scalar>(out: &mut [Jet<S>], a: &[Jet<S>], n: usize, b: &[Jet<S>], d: usize, alg: &JetAlgebra) {
    let nb: Vec<(usize, usize, &Jet<S>)> =
        b.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i / d, i % d, x)).collect();
    if nb.is_empty() {
        return;
    }
    let w = n * d;
    for i in 0..n {
        for j in 0..n {
            let x = &a[i * n + j];
            if x.is_zero() {
                continue;
            }
            for (s, t, y) in &nb {
                out[(i * d + s) * w + j * d + t].mul_add_assign(x, y, alg);
            }
        }
    }
}

/// `(j-2)! [e^(j-2)] t^-1 dt/de` for `j = 2..=k_max`, where `t` is a transfer
/// matrix whose spectral parameter carries the nilpotent `idx`.
pub fn charges_from_transfer<S: Scalar>(t: &Op<S>, idx: usize, k_max: u32, out: &Arc<JetAlgebra>) -> Result<Vec<Op<S>>> {
    let g = &t.inverse()? * &t.derivative(idx);
    Ok((2..=k_max)
        .map(|k| g.coefficient_of(idx, k - 2, out).scale_scalar(&S::from_rat(&Rat::factorial(k - 2))))
        .collect())
}

/// Charges `Q_2..Q_{k_max}` from the log-derivative of `t(u)` at `u = 0`.
pub fn extract_charges<S: Scalar>(model: &Model, alg: &Arc<JetAlgebra>, chain: &ChainSpec<S>, k_max: u32) -> Result<Vec<Op<S>>> {
    if k_max < 2 {
        return Err(LaxError::InvalidArgument("charges start at k = 2".into()));
    }
    let mut name = String::from("ε");
    while alg.index_of(&name).is_ok() {
        name.push('\'');
    }
    let big = alg.with_generator(&name, k_max)?;
    let idx = big.len() - 1;
    let eps: Jet<S> = Jet::generator(&big, &name)?;
    let inh: Vec<Jet<S>> = chain.inhomogeneities.to_vec();
    let lifted = ChainSpec { length: chain.length, site_dim: chain.site_dim, inhomogeneities: inh };
    let t = transfer(model, &big, &lifted, &eps)?;
    charges_from_transfer(&t, idx, k_max, alg)
}

pub fn extract_charge<S: Scalar>(model: &Model, alg: &Arc<JetAlgebra>, chain: &ChainSpec<S>, k: u32) -> Result<Op<S>> {
    Ok(extract_charges(model, alg, chain, k)?.pop().expect("k >= 2"))
}

/// Periodic sum of a range-`k` density, positions taken mod `length`.
pub fn global_charge<S: Scalar>(density: &Op<S>, length: usize) -> Result<Op<S>> {
    let k = density.legs();
    if length < k {
        return Err(LaxError::InvalidArgument(format!("chain of length {length} is shorter than density range {k}")));
    }
    let mut acc = Op::zero(length, density.site_dim(), density.algebra());
    for n in 0..length {
        let pos: Vec<usize> = (0..k).map(|i| (n + i) % length + 1).collect();
        acc = &acc + &density.embed(&pos, length)?;
    }
    Ok(acc)
}

/// Densities of equal range generate the same global charges on chains of
/// length `k` and `k + 1`.
pub fn densities_equivalent<S: Scalar>(a: &Op<S>, b: &Op<S>) -> Result<bool> {
    let k = a.legs();
    if b.legs() != k {
        return Ok(false);
    }
    for l in [k, k + 1] {
        if global_charge(a, l)? != global_charge(b, l)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact coefficients `c` with `target = Σ c_i basis_i`, if they exist.
pub fn linear_relation(target: &Op<Rat>, basis: &[Op<Rat>]) -> Option<Vec<Rat>> {
    let m = basis.len();
    // reduced rows [coeffs | rhs] kept in echelon form with pivot columns
    let mut rows: Vec<(usize, Vec<Rat>)> = Vec::new();
    let n = target.dim() * target.dim();
    for e in 0..n {
        let r = e / target.dim();
        let c = e % target.dim();
        let mut row: Vec<Rat> = basis.iter().map(|b| b.entry(r, c).constant_term()).collect();
        row.push(target.entry(r, c).constant_term());
        if row.iter().all(|x| x.is_zero()) {
            continue;
        }
        for (p, prow) in &rows {
            if !row[*p].is_zero() {
                let f = row[*p].clone();
                for (x, y) in row.iter_mut().zip(prow) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        match (0..m).find(|&j| !row[j].is_zero()) {
            None => {
                if !row[m].is_zero() {
                    return None;
                }
            }
            Some(p) => {
                let inv = row[p].recip().expect("nonzero pivot");
                for x in row.iter_mut() {
                    *x = &*x * &inv;
                }
                for (_, prow) in rows.iter_mut() {
                    if !prow[p].is_zero() {
                        let f = prow[p].clone();
                        for (x, y) in prow.iter_mut().zip(&row) {
                            *x = &*x - &(&f * y);
                        }
                    }
                }
                rows.push((p, row));
            }
        }
    }
    let mut out = vec![Rat::zero(); m];
    for (p, row) in rows {
        out[p] = row[m].clone();
    }
    Some(out)
}

/// Conjectured densities against the transfer-matrix charge on one chain.
#[derive(Clone, Debug)]
pub struct ConjectureReport {
    pub k: u32,
    pub length: usize,
    /// Plain and tilde global charges against the extracted `Q_k`.
    pub checks: Vec<Check>,
    /// Coefficients of `Q_k` over the plain global charge, the identity and
    /// `Q_2..Q_{k-1}`, when such a relation exists.
    pub relation: Option<Vec<Rat>>,
}

/// Compares the global charges of [`conjecture_density`] with
/// [`extract_charge`] on a homogeneous periodic chain of `length` sites.
pub fn verify_conjecture(model: &Model, k: u32, length: usize) -> Result<ConjectureReport> {
    if k < 2 || length < k as usize {
        return Err(LaxError::InvalidArgument(format!("need 2 <= k <= L, got k = {k}, L = {length}")));
    }
    let alg = JetAlgebra::trivial();
    let chain = ChainSpec::homogeneous(length, model.site_dim())?;
    let qs = extract_charges(model, &alg, &chain, k)?;
    let (q, qt) = conjecture_density::<Rat>(model, &alg, k)?;
    let target = qs.last().expect("k >= 2");
    let plain = global_charge(&q, length)?;
    let tilde = global_charge(&qt, length)?;
    let checks = vec![
        Check::from_difference(&format!("conjecture plain k={k} L={length}"), &plain, target),
        Check::from_difference(&format!("conjecture tilde k={k} L={length}"), &tilde, target),
    ];
    let mut basis = vec![plain, Op::identity(length, model.site_dim(), &alg)];
    basis.extend(qs[..qs.len() - 1].iter().cloned());
    let relation = linear_relation(target, &basis);
    Ok(ConjectureReport { k, length, checks, relation })
}

/// Open-window boost sum `Σ_{n=n0..n1} n q_{n..n+k-1}` on `window` sites.
pub fn boost_window<S: Scalar>(density: &Op<S>, n0: usize, n1: usize, window: usize) -> Result<Op<S>> {
    let k = density.legs();
    let mut acc = Op::zero(window, density.site_dim(), density.algebra());
    if n0 > n1 {
        return Ok(acc);
    }
    if n0 < 1 || n1 + k - 1 > window {
        return Err(LaxError::InvalidArgument(format!("window of {window} sites cannot hold densities {n0}..={n1} of range {k}")));
    }
    for n in n0..=n1 {
        let pos: Vec<usize> = (n..n + k).collect();
        acc = &acc + &density.embed(&pos, window)?.scale_scalar(&S::from_i64(n as i64));
    }
    Ok(acc)
}

/// Open-window bilocal sum `Σ_{n<=m} q~_{n+l-k..n+l-1} q_{m..m+l-1}` over all
/// placements inside `window` sites.
pub fn bilocal_window<S: Scalar>(qa: &Op<S>, qb: &Op<S>, window: usize) -> Result<Op<S>> {
    let (k, l) = (qa.legs(), qb.legs());
    if k >= l {
        return Err(LaxError::InvalidArgument(format!("bilocal needs k < l, got {k} and {l}")));
    }
    if window < l {
        return Err(LaxError::InvalidArgument(format!("window of {window} sites is shorter than range {l}")));
    }
    let mut acc = Op::zero(window, qa.site_dim(), qa.algebra());
    for (n, a) in shifted_tilde(qa, l, window)? {
        let mmax = window - l + 1;
        for m in n.max(1)..=mmax as i64 {
            let b = qb.embed(&(m as usize..m as usize + l).collect::<Vec<_>>(), window)?;
            acc = &acc + &(&a * &b);
        }
    }
    Ok(acc)
}

/// Embeddings of `q~` at `n + l - k` for every `n` whose placement fits.
fn shifted_tilde<S: Scalar>(qa: &Op<S>, l: usize, window: usize) -> Result<Vec<(i64, Op<S>)>> {
    let k = qa.legs();
    let nmin = k as i64 - l as i64 + 1;
    let mmax = (window - l + 1) as i64;
    let mut out = Vec::new();
    for n in nmin..=mmax {
        let p = (n + l as i64 - k as i64) as usize;
        if p + k - 1 > window {
            continue;
        }
        out.push((n, qa.embed(&(p..p + k).collect::<Vec<_>>(), window)?));
    }
    Ok(out)
}

/// Window of `w` sites with an auxiliary leg in front: leg 1 is auxiliary,
/// site `i` is leg `i + 1`.
struct Window<'a> {
    model: &'a Model,
    alg: Arc<JetAlgebra>,
    u: Jet<Rat>,
    w: usize,
}

impl Window<'_> {
    fn total(&self) -> usize {
        self.w + 1
    }

    /// `T_{(i..j)} = L_{aj} ... L_{ai}`, identity when empty.
    fn segment(&self, i: usize, j: usize) -> Result<Op<Rat>> {
        let sites: Vec<(usize, Jet<Rat>)> = (i..=j).map(|s| (s + 1, Jet::zero())).collect();
        coproduct_r(self.model, &self.alg, &[(1, self.u.clone())], &sites, self.total())
    }

    /// Reduced density with site group `before`, the auxiliary leg, then
    /// site group `after`, embedded in the window.
    fn reduced(&self, k: u32, variant: Variant, before: &[usize], after: &[usize]) -> Result<Op<Rat>> {
        let z = |n: usize| vec![Jet::<Rat>::zero(); n];
        let op = reduced_q(self.model, &self.alg, k, variant, &z(before.len()), std::slice::from_ref(&self.u), &z(after.len()))?;
        let pos: Vec<usize> = before.iter().map(|s| s + 1).chain(std::iter::once(1)).chain(after.iter().map(|s| s + 1)).collect();
        op.embed(&pos, self.total())
    }

    fn sites(&self, op: &Op<Rat>) -> Result<Op<Rat>> {
        op.embed(&(2..=self.total()).collect::<Vec<_>>(), self.total())
    }
}

/// `[B, T] = Σ_{n=1..N} A_n - N A_{N+1}` for the window boost sum with
/// `N = w - k + 1` and `A_n = T_{(n+1..w)} ^rQ_{n,a,(n+1..n+k-2)} T_{(1..n)}`.
pub fn verify_boost_window(model: &Model, k: u32, u: &Rat, w: usize) -> Result<Check> {
    let ku = k as usize;
    if k < 2 || w < ku {
        return Err(LaxError::InvalidArgument("window must hold one density".into()));
    }
    let win = Window { model, alg: JetAlgebra::trivial(), u: Jet::from_rat(u), w };
    let (q, _) = conjecture_density::<Rat>(model, &win.alg, k)?;
    let big_n = w - ku + 1;
    let b = win.sites(&boost_window(&q, 1, big_n, w)?)?;
    let t = win.segment(1, w)?;
    let lhs = b.commutator(&t)?;
    let a = |n: usize| -> Result<Op<Rat>> {
        let after: Vec<usize> = (n + 1..n + ku - 1).collect();
        let r = win.reduced(k, Variant::Plain, &[n], &after)?;
        Ok(&(&win.segment(n + 1, w)? * &r) * &win.segment(1, n)?)
    };
    let mut rhs = a(big_n + 1)?.scale_scalar(&Rat::from(-(big_n as i64)));
    for n in 1..=big_n {
        rhs = &rhs + &a(n)?;
    }
    Ok(Check::from_difference(&format!("boost window k={k} w={w}"), &lhs, &rhs))
}

/// Commutator of the window bilocal sum of `q~^(k)` and `q^(l)` with the
/// window monodromy against its telescoped form.
pub fn verify_bilocal_window(model: &Model, k: u32, l: u32, u: &Rat, w: usize) -> Result<Check> {
    let (ku, lu) = (k as usize, l as usize);
    if k < 2 || k >= l || w < lu {
        return Err(LaxError::InvalidArgument("need 2 <= k < l <= window".into()));
    }
    let win = Window { model, alg: JetAlgebra::trivial(), u: Jet::from_rat(u), w };
    let (_, qt) = conjecture_density::<Rat>(model, &win.alg, k)?;
    let (q, _) = conjecture_density::<Rat>(model, &win.alg, l)?;
    let t = win.segment(1, w)?;
    let lhs = win.sites(&bilocal_window(&qt, &q, w)?)?.commutator(&t)?;
    let mmax = w - lu + 1;
    let a = |n: usize| -> Result<Op<Rat>> {
        let after: Vec<usize> = (n + 1..n + lu - 1).collect();
        let r = win.reduced(l, Variant::Plain, &[n], &after)?;
        Ok(&(&win.segment(n + 1, w)? * &r) * &win.segment(1, n)?)
    };
    let bt = |j: usize| -> Result<Op<Rat>> {
        let before: Vec<usize> = (j + 2 - ku..j).collect();
        let r = win.reduced(k, Variant::Tilde, &before, &[j])?;
        Ok(&(&win.segment(j, w)? * &r) * &win.segment(1, j - 1)?)
    };
    let a_end = a(mmax + 1)?;
    let mut rhs = Op::zero(w + 1, model.site_dim(), &win.alg);
    for (n, qn) in shifted_tilde(&qt, lu, w)? {
        let diff = &a(n.max(1) as usize)? - &a_end;
        rhs = &rhs + &(&win.sites(&qn)? * &diff);
    }
    let b_start = bt(ku - 1)?;
    for m in 1..=mmax {
        let qm = win.sites(&q.embed(&(m..m + lu).collect::<Vec<_>>(), w)?)?;
        rhs = &rhs + &(&(&b_start - &bt(m + lu - 1)?) * &qm);
    }
    Ok(Check::from_difference(&format!("bilocal window k={k} l={l} w={w}"), &lhs, &rhs))
}
