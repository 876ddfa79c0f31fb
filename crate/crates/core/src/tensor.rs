//! Dense jet-valued operators on tensor powers of the site space.
//!
//! Index convention: leg 1 is the most significant digit, so leg `p` of an
//! operator on `n` legs has stride `d^(n-p)`.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{LaxError, Result};
use crate::jets::{mono_key, parse_mono_key, Jet, JetAlgebra};
use crate::rational::Rat;
use crate::scalar::Scalar;

#[derive(Clone, PartialEq)]
pub struct TensorOperator<S> {
    legs: usize,
    d: usize,
    alg: Arc<JetAlgebra>,
    data: Vec<Jet<S>>,
}

/// Index bookkeeping for a subset of legs inside a larger tensor power.
#[derive(Clone, Debug)]
pub struct LegSplit {
    /// offset of each sub-index (digits on the chosen legs)
    pub sub_off: Vec<usize>,
    /// offset of each rest-index (digits on the other legs, in order)
    pub rest_off: Vec<usize>,
    /// for every full index, its (sub, rest) decomposition
    pub split: Vec<(u32, u32)>,
}

impl LegSplit {
    pub fn new(total: usize, d: usize, positions: &[usize]) -> LegSplit {
        let stride = |p: usize| d.pow((total - p) as u32);
        let rest: Vec<usize> = (1..=total).filter(|p| !positions.contains(p)).collect();
        let offsets = |legs: &[usize]| -> Vec<usize> {
            let n = d.pow(legs.len() as u32);
            (0..n)
                .map(|s| {
                    let mut off = 0;
                    let mut x = s;
                    for &p in legs.iter().rev() {
                        off += (x % d) * stride(p);
                        x /= d;
                    }
                    off
                })
                .collect()
        };
        let sub_off = offsets(positions);
        let rest_off = offsets(&rest);
        let full = d.pow(total as u32);
        let mut split = vec![(0u32, 0u32); full];
        for (s, so) in sub_off.iter().enumerate() {
            for (t, ro) in rest_off.iter().enumerate() {
                split[so + ro] = (s as u32, t as u32);
            }
        }
        LegSplit { sub_off, rest_off, split }
    }

    #[inline]
    pub fn merge(&self, sub: usize, rest: usize) -> usize {
        self.sub_off[sub] + self.rest_off[rest]
    }
}

fn check_positions(positions: &[usize], total: usize) -> Result<()> {
    for (i, p) in positions.iter().enumerate() {
        if *p < 1 || *p > total {
            return Err(LaxError::InvalidLegs(format!("leg {p} outside 1..={total}")));
        }
        if positions[..i].contains(p) {
            return Err(LaxError::InvalidLegs(format!("leg {p} repeated")));
        }
    }
    Ok(())
}

impl<S: Scalar> TensorOperator<S> {
    pub fn zero(legs: usize, d: usize, alg: &Arc<JetAlgebra>) -> TensorOperator<S> {
        let n = d.pow(legs as u32);
        TensorOperator { legs, d, alg: alg.clone(), data: vec![Jet::zero(); n * n] }
    }

    pub fn identity(legs: usize, d: usize, alg: &Arc<JetAlgebra>) -> TensorOperator<S> {
        let mut op = TensorOperator::zero(legs, d, alg);
        let n = op.dim();
        for i in 0..n {
            op.data[i * n + i] = Jet::one();
        }
        op
    }

    pub fn from_fn(legs: usize, d: usize, alg: &Arc<JetAlgebra>, f: impl Fn(usize, usize) -> Jet<S>) -> TensorOperator<S> {
        let n = d.pow(legs as u32);
        let data = (0..n * n).map(|i| f(i / n, i % n)).collect();
        TensorOperator { legs, d, alg: alg.clone(), data }
    }

    pub fn from_scalars(legs: usize, d: usize, alg: &Arc<JetAlgebra>, entries: &[S]) -> Result<TensorOperator<S>> {
        let n = d.pow(legs as u32);
        if entries.len() != n * n {
            return Err(LaxError::ShapeMismatch(format!("expected {} entries, got {}", n * n, entries.len())));
        }
        Ok(TensorOperator { legs, d, alg: alg.clone(), data: entries.iter().map(|c| Jet::constant(c.clone())).collect() })
    }

    /// Row-major entries; fails on a length mismatch.
    pub fn from_jets(legs: usize, d: usize, alg: &Arc<JetAlgebra>, data: Vec<Jet<S>>) -> Result<TensorOperator<S>> {
        let n = d.pow(legs as u32);
        if data.len() != n * n {
            return Err(LaxError::ShapeMismatch(format!("{} entries for dimension {n}", data.len())));
        }
        Ok(TensorOperator { legs, d, alg: alg.clone(), data })
    }

    /// Transposition of legs `i` and `j`.
    pub fn permutation(legs: usize, d: usize, i: usize, j: usize, alg: &Arc<JetAlgebra>) -> Result<TensorOperator<S>> {
        if i == j || i < 1 || j < 1 || i > legs || j > legs {
            return Err(LaxError::InvalidLegs(format!("transposition ({i},{j}) on {legs} legs")));
        }
        let mut order: Vec<usize> = (1..=legs).collect();
        order.swap(i - 1, j - 1);
        Ok(TensorOperator::leg_permutation(d, &order, alg))
    }

    /// The operator sending the tensor factor at leg `p` to leg `sigma[p-1]`.
    pub fn leg_permutation(d: usize, sigma: &[usize], alg: &Arc<JetAlgebra>) -> TensorOperator<S> {
        let legs = sigma.len();
        let n = d.pow(legs as u32);
        let mut op = TensorOperator::zero(legs, d, alg);
        for col in 0..n {
            let mut row = 0;
            for p in 1..=legs {
                let digit = (col / d.pow((legs - p) as u32)) % d;
                row += digit * d.pow((legs - sigma[p - 1]) as u32);
            }
            op.data[row * n + col] = Jet::one();
        }
        op
    }

    pub fn legs(&self) -> usize {
        self.legs
    }

    pub fn site_dim(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.d.pow(self.legs as u32)
    }

    pub fn algebra(&self) -> &Arc<JetAlgebra> {
        &self.alg
    }

    pub fn entry(&self, r: usize, c: usize) -> &Jet<S> {
        &self.data[r * self.dim() + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Jet<S>) {
        let n = self.dim();
        self.data[r * n + c] = v;
    }

    pub fn entries(&self) -> &[Jet<S>] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Jet<S>] {
        let n = self.dim();
        &self.data[r * n..(r + 1) * n]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|j| j.is_zero())
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|j| !j.is_zero()).count()
    }

    fn same_shape(&self, o: &TensorOperator<S>) -> Result<()> {
        if self.legs != o.legs || self.d != o.d {
            return Err(LaxError::ShapeMismatch(format!(
                "{} legs (d={}) vs {} legs (d={})",
                self.legs, self.d, o.legs, o.d
            )));
        }
        if !JetAlgebra::same(&self.alg, &o.alg) {
            return Err(LaxError::AlgebraMismatch);
        }
        Ok(())
    }

    /// Reinterprets entries in an algebra that extends this one by appended
    /// generators.
    pub fn lift(&self, alg: &Arc<JetAlgebra>) -> Result<TensorOperator<S>> {
        let own = self.alg.generators();
        if alg.generators().len() < own.len() || &alg.generators()[..own.len()] != own {
            return Err(LaxError::AlgebraMismatch);
        }
        Ok(TensorOperator { legs: self.legs, d: self.d, alg: alg.clone(), data: self.data.clone() })
    }

    pub fn with_algebra_unchecked(mut self, alg: &Arc<JetAlgebra>) -> TensorOperator<S> {
        self.alg = alg.clone();
        self
    }

    pub fn map_jets(&self, alg: &Arc<JetAlgebra>, f: impl Fn(&Jet<S>) -> Jet<S> + Sync + Send) -> TensorOperator<S> {
        TensorOperator { legs: self.legs, d: self.d, alg: alg.clone(), data: self.data.par_iter().map(f).collect() }
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T + Sync + Send) -> TensorOperator<T> {
        TensorOperator {
            legs: self.legs,
            d: self.d,
            alg: self.alg.clone(),
            data: self.data.par_iter().map(|j| j.map_coeffs(&f)).collect(),
        }
    }

    /// Coefficient of `gen^e`, returned in `alg` (normally the algebra with
    /// that generator removed).
    pub fn coefficient_of(&self, idx: usize, e: u32, alg: &Arc<JetAlgebra>) -> TensorOperator<S> {
        self.map_jets(alg, |j| j.coefficient_of(idx, e))
    }

    pub fn derivative(&self, idx: usize) -> TensorOperator<S> {
        self.map_jets(&self.alg, |j| j.diff(idx))
    }

    pub fn constant_part(&self) -> TensorOperator<S> {
        self.map_jets(&self.alg, |j| Jet::constant(j.constant_term()))
    }

    pub fn embed(&self, positions: &[usize], total: usize) -> Result<TensorOperator<S>> {
        if positions.len() != self.legs {
            return Err(LaxError::InvalidLegs(format!("{} positions for {} legs", positions.len(), self.legs)));
        }
        check_positions(positions, total)?;
        let id = TensorOperator::identity(total, self.d, &self.alg);
        Ok(id.apply_local_left_unchecked(self, positions))
    }

    /// `embed(local, positions) * self` without materializing the embedding.
    pub fn apply_local_left(&self, local: &TensorOperator<S>, positions: &[usize]) -> Result<TensorOperator<S>> {
        if positions.len() != local.legs || local.d != self.d {
            return Err(LaxError::InvalidLegs("local operator does not match positions".into()));
        }
        check_positions(positions, self.legs)?;
        if !JetAlgebra::same(&self.alg, &local.alg) {
            return Err(LaxError::AlgebraMismatch);
        }
        Ok(self.apply_local_left_unchecked(local, positions))
    }

    fn apply_local_left_unchecked(&self, local: &TensorOperator<S>, positions: &[usize]) -> TensorOperator<S> {
        let n = self.dim();
        let ls = LegSplit::new(self.legs, self.d, positions);
        let ln = local.dim();
        let alg = &*self.alg;
        let mut data = vec![Jet::zero(); n * n];
        data.par_chunks_mut(n).enumerate().for_each(|(r, out)| {
            let (rs, rt) = ls.split[r];
            for cs in 0..ln {
                let a = &local.data[rs as usize * ln + cs];
                if a.is_zero() {
                    continue;
                }
                let src = ls.merge(cs, rt as usize);
                let row = &self.data[src * n..(src + 1) * n];
                for (o, b) in out.iter_mut().zip(row) {
                    if !b.is_zero() {
                        o.mul_add_assign(a, b, alg);
                    }
                }
            }
        });
        TensorOperator { legs: self.legs, d: self.d, alg: self.alg.clone(), data }
    }

    /// `self * embed(local, positions)` without materializing the embedding.
    pub fn apply_local_right(&self, local: &TensorOperator<S>, positions: &[usize]) -> Result<TensorOperator<S>> {
        if positions.len() != local.legs || local.d != self.d {
            return Err(LaxError::InvalidLegs("local operator does not match positions".into()));
        }
        check_positions(positions, self.legs)?;
        if !JetAlgebra::same(&self.alg, &local.alg) {
            return Err(LaxError::AlgebraMismatch);
        }
        let n = self.dim();
        let ls = LegSplit::new(self.legs, self.d, positions);
        let ln = local.dim();
        let local_rows: Vec<Vec<(usize, &Jet<S>)>> = (0..ln)
            .map(|k| (0..ln).filter_map(|c| Some((c, &local.data[k * ln + c])).filter(|(_, j)| !j.is_zero())).collect())
            .collect();
        let alg = &*self.alg;
        let mut data = vec![Jet::zero(); n * n];
        data.par_chunks_mut(n).enumerate().for_each(|(r, out)| {
            let row = &self.data[r * n..(r + 1) * n];
            for (k, a) in row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let (ks, kt) = ls.split[k];
                for (cs, b) in &local_rows[ks as usize] {
                    out[ls.merge(*cs, kt as usize)].mul_add_assign(a, b, alg);
                }
            }
        });
        Ok(TensorOperator { legs: self.legs, d: self.d, alg: self.alg.clone(), data })
    }

    pub fn try_mul(&self, o: &TensorOperator<S>) -> Result<TensorOperator<S>> {
        self.same_shape(o)?;
        let n = self.dim();
        let b_rows: Vec<Vec<(usize, &Jet<S>)>> = (0..n)
            .into_par_iter()
            .map(|k| o.row(k).iter().enumerate().filter(|(_, j)| !j.is_zero()).collect())
            .collect();
        let alg = &*self.alg;
        let mut data = vec![Jet::zero(); n * n];
        data.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
            for (k, a) in self.row(i).iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, b) in &b_rows[k] {
                    out[*j].mul_add_assign(a, b, alg);
                }
            }
        });
        Ok(TensorOperator { legs: self.legs, d: self.d, alg: self.alg.clone(), data })
    }

    pub fn try_add(&self, o: &TensorOperator<S>) -> Result<TensorOperator<S>> {
        self.same_shape(o)?;
        let data = self.data.par_iter().zip(o.data.par_iter()).map(|(a, b)| a.add(b)).collect();
        Ok(TensorOperator { legs: self.legs, d: self.d, alg: self.alg.clone(), data })
    }

    pub fn try_sub(&self, o: &TensorOperator<S>) -> Result<TensorOperator<S>> {
        self.same_shape(o)?;
        let data = self.data.par_iter().zip(o.data.par_iter()).map(|(a, b)| a.sub(b)).collect();
        Ok(TensorOperator { legs: self.legs, d: self.d, alg: self.alg.clone(), data })
    }

    pub fn scale(&self, s: &Jet<S>) -> TensorOperator<S> {
        let alg = self.alg.clone();
        self.map_jets(&self.alg, |j| s.mul(j, &alg))
    }

    pub fn scale_scalar(&self, s: &S) -> TensorOperator<S> {
        self.map_jets(&self.alg, |j| j.scale(s))
    }

    pub fn commutator(&self, o: &TensorOperator<S>) -> Result<TensorOperator<S>> {
        self.try_mul(o)?.try_sub(&o.try_mul(self)?)
    }

    /// `a^-1 x a` given both factors.
    pub fn conjugate(&self, left: &TensorOperator<S>, right: &TensorOperator<S>) -> TensorOperator<S> {
        &(left * self) * right
    }

    pub fn transpose(&self) -> TensorOperator<S> {
        let n = self.dim();
        TensorOperator::from_fn(self.legs, self.d, &self.alg, |r, c| self.data[c * n + r].clone())
    }

    pub fn partial_trace(&self, legs_to_trace: &[usize]) -> Result<TensorOperator<S>> {
        if legs_to_trace.is_empty() || legs_to_trace.len() > self.legs {
            return Err(LaxError::InvalidLegs("trace needs a nonempty proper leg set".into()));
        }
        check_positions(legs_to_trace, self.legs)?;
        if legs_to_trace.len() == self.legs {
            return Err(LaxError::InvalidLegs("full trace is a scalar; use trace()".into()));
        }
        let n = self.dim();
        let ls = LegSplit::new(self.legs, self.d, legs_to_trace);
        let rest_legs = self.legs - legs_to_trace.len();
        let m = self.d.pow(rest_legs as u32);
        let tn = ls.sub_off.len();
        let data: Vec<Jet<S>> = (0..m * m)
            .into_par_iter()
            .map(|idx| {
                let (r, c) = (idx / m, idx % m);
                let mut acc = Jet::zero();
                for t in 0..tn {
                    acc.add_assign(&self.data[ls.merge(t, r) * n + ls.merge(t, c)]);
                }
                acc
            })
            .collect();
        Ok(TensorOperator { legs: rest_legs, d: self.d, alg: self.alg.clone(), data })
    }

    pub fn trace(&self) -> Jet<S> {
        let n = self.dim();
        let mut acc = Jet::zero();
        for i in 0..n {
            acc.add_assign(&self.data[i * n + i]);
        }
        acc
    }

    /// Exact inverse: the constant part is inverted by elimination, the
    /// nilpotent remainder by a terminating Neumann series.
    pub fn inverse(&self) -> Result<TensorOperator<S>> {
        let n = self.dim();
        let c: Vec<S> = self.data.iter().map(|j| j.constant_term()).collect();
        let cinv = S::invert_matrix(n, &c).ok_or(LaxError::SingularOperator)?;
        let cinv = TensorOperator::from_scalars(self.legs, self.d, &self.alg, &cinv)?;
        let nil = self.map_jets(&self.alg, |j| j.sub(&Jet::constant(j.constant_term())));
        if nil.is_zero() {
            return Ok(cinv);
        }
        let x = -&(&cinv * &nil);
        let mut acc = cinv.clone();
        let mut term = cinv;
        for _ in 0..self.alg.max_degree() {
            term = &x * &term;
            if term.is_zero() {
                break;
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.data.iter().map(|j| j.max_magnitude()).fold(0.0, f64::max)
    }
}

impl TensorOperator<Rat> {
    /// Largest absolute coefficient over all entries and monomials.
    pub fn max_abs(&self) -> Rat {
        self.data.iter().map(|j| j.max_abs()).max().unwrap_or_else(Rat::zero)
    }

    pub fn to_json(&self) -> Value {
        let n = self.dim();
        let entries: Vec<Value> = (0..n)
            .map(|r| {
                Value::Array(
                    self.row(r)
                        .iter()
                        .map(|j| {
                            let mut m = Map::new();
                            for (mono, c) in j.terms() {
                                m.insert(mono_key(&self.alg, *mono), Value::String(c.to_fraction_string()));
                            }
                            Value::Object(m)
                        })
                        .collect(),
                )
            })
            .collect();
        let gens: Vec<Value> = self.alg.generators().iter().map(|(g, o)| json!([g, o])).collect();
        json!({"legs": self.legs, "site_dim": self.d, "generators": gens, "entries": entries})
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("operator json")
    }

    pub fn from_json(v: &Value) -> Result<TensorOperator<Rat>> {
        let bad = |m: &str| LaxError::Parse(format!("operator json: {m}"));
        let legs = v.get("legs").and_then(Value::as_u64).ok_or_else(|| bad("legs"))? as usize;
        let d = v.get("site_dim").and_then(Value::as_u64).ok_or_else(|| bad("site_dim"))? as usize;
        if legs < 1 || d < 2 {
            return Err(bad("legs >= 1 and site_dim >= 2 required"));
        }
        let mut gens = Vec::new();
        for g in v.get("generators").and_then(Value::as_array).ok_or_else(|| bad("generators"))? {
            let name = g.get(0).and_then(Value::as_str).ok_or_else(|| bad("generator name"))?;
            let order = g.get(1).and_then(Value::as_u64).ok_or_else(|| bad("generator order"))?;
            gens.push((name.to_string(), order as u32));
        }
        let refs: Vec<(&str, u32)> = gens.iter().map(|(n, o)| (n.as_str(), *o)).collect();
        let alg = JetAlgebra::new(&refs)?;
        let n = d.pow(legs as u32);
        let rows = v.get("entries").and_then(Value::as_array).ok_or_else(|| bad("entries"))?;
        if rows.len() != n {
            return Err(bad("row count"));
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_array().ok_or_else(|| bad("row"))?;
            if row.len() != n {
                return Err(bad("column count"));
            }
            for e in row {
                let obj = e.as_object().ok_or_else(|| bad("jet"))?;
                let mut terms = Vec::new();
                for (k, c) in obj {
                    let mono = parse_mono_key(&alg, k)?;
                    let c: Rat = c.as_str().ok_or_else(|| bad("coefficient"))?.parse()?;
                    terms.push((mono, c));
                }
                data.push(Jet::from_terms(&alg, terms));
            }
        }
        Ok(TensorOperator { legs, d, alg, data })
    }

    pub fn from_json_str(s: &str) -> Result<TensorOperator<Rat>> {
        let v: Value = serde_json::from_str(s).map_err(|e| LaxError::Parse(e.to_string()))?;
        TensorOperator::from_json(&v)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash_hex(&self) -> String {
        hex::encode(Sha256::digest(self.to_json_string().as_bytes()))
    }
}

impl<S: Scalar> std::fmt::Debug for TensorOperator<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let n = self.dim();
        writeln!(f, "TensorOperator(legs={}, d={})", self.legs, self.d)?;
        for r in 0..n.min(32) {
            let row: Vec<String> = self.row(r).iter().take(32).map(|j| format!("{j:?}")).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

// Operator sugar for internal formulas; panics on shape mismatch, which is a
// programming error there. Public entry points use the `try_` forms.
impl<'a, S: Scalar> Mul<&'a TensorOperator<S>> for &'a TensorOperator<S> {
    type Output = TensorOperator<S>;
    fn mul(self, o: &TensorOperator<S>) -> TensorOperator<S> {
        self.try_mul(o).expect("operator product shape")
    }
}

impl<'a, S: Scalar> Add<&'a TensorOperator<S>> for &'a TensorOperator<S> {
    type Output = TensorOperator<S>;
    fn add(self, o: &TensorOperator<S>) -> TensorOperator<S> {
        self.try_add(o).expect("operator sum shape")
    }
}

impl<'a, S: Scalar> Sub<&'a TensorOperator<S>> for &'a TensorOperator<S> {
    type Output = TensorOperator<S>;
    fn sub(self, o: &TensorOperator<S>) -> TensorOperator<S> {
        self.try_sub(o).expect("operator difference shape")
    }
}

impl<S: Scalar> Neg for &TensorOperator<S> {
    type Output = TensorOperator<S>;
    fn neg(self) -> TensorOperator<S> {
        self.map_jets(&self.alg, |j| j.neg())
    }
}

/// Product of a list of operators, left to right.
pub fn product<S: Scalar>(ops: &[&TensorOperator<S>]) -> TensorOperator<S> {
    let mut it = ops.iter();
    let first = (*it.next().expect("empty product")).clone();
    it.fold(first, |acc, o| &acc * o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use proptest::prelude::*;

    type Op = TensorOperator<Rat>;

    fn alg() -> Arc<JetAlgebra> {
        JetAlgebra::trivial()
    }

    fn perm(legs: usize, i: usize, j: usize) -> Op {
        Op::permutation(legs, 2, i, j, &alg()).unwrap()
    }

    fn basis(digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, x| acc * 2 + x)
    }

    #[test]
    fn identities() {
        assert_eq!(Op::identity(1, 2, &alg()).dim(), 2);
        assert_eq!(Op::identity(2, 2, &alg()).dim(), 4);
        assert_eq!(Op::identity(3, 2, &alg()).trace(), Jet::from_i64(8));
    }

    #[test]
    fn permutation_action() {
        let p = perm(2, 1, 2);
        // e1 ⊗ e2 is index (0,1); its image is e2 ⊗ e1
        let col = basis(&[0, 1]);
        let row = basis(&[1, 0]);
        assert_eq!(*p.entry(row, col), Jet::one());
        assert!(p.entry(col, col).is_zero());
        assert_eq!(&p * &p, Op::identity(2, 2, &alg()));
        assert!(Op::permutation(2, 2, 1, 3, &alg()).is_err());
        assert!(Op::permutation(2, 2, 2, 2, &alg()).is_err());
    }

    #[test]
    fn conjugated_transposition() {
        // brute force: P12 P13 P12 maps e_a e_b e_c to e_a e_c e_b
        let lhs = product(&[&perm(3, 1, 2), &perm(3, 1, 3), &perm(3, 1, 2)]);
        let mut want = Op::zero(3, 2, &alg());
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    want.set(basis(&[a, c, b]), basis(&[a, b, c]), Jet::one());
                }
            }
        }
        assert_eq!(lhs, want);
        assert_eq!(lhs, perm(3, 2, 3));
    }

    #[test]
    fn embedding() {
        let p = perm(2, 1, 2);
        assert_eq!(p.embed(&[1, 2], 3).unwrap(), perm(3, 1, 2));
        assert_eq!(p.embed(&[2, 1], 2).unwrap(), p);
        assert!(p.embed(&[1, 1], 3).is_err());
        assert!(p.embed(&[1, 4], 3).is_err());
    }

    fn random_op(legs: usize, vals: &[(i64, i64)]) -> Op {
        let n = 1 << legs;
        Op::from_fn(legs, 2, &alg(), |r, c| {
            let (a, b) = vals[(r * n + c) % vals.len()];
            Jet::from_rat(&q(a, b))
        })
    }

    #[test]
    fn shuffled_embedding_oracle() {
        let h = random_op(2, &[(1, 2), (-3, 1), (0, 1), (2, 7), (5, 3), (1, 1), (-1, 4)]);
        let e = h.embed(&[3, 1], 3).unwrap();
        // index-permutation oracle: entry (a b c; a' b' c') = h(c a; c' a') δ(b b')
        for r in 0..8 {
            for c in 0..8 {
                let (ra, rb, rc) = (r >> 2 & 1, r >> 1 & 1, r & 1);
                let (ca, cb, cc) = (c >> 2 & 1, c >> 1 & 1, c & 1);
                let want = if rb == cb { h.entry(rc * 2 + ra, cc * 2 + ca).clone() } else { Jet::zero() };
                assert_eq!(*e.entry(r, c), want);
            }
        }
    }

    #[test]
    fn product_matches_schoolbook() {
        let a = random_op(2, &[(1, 2), (-3, 1), (0, 1), (2, 7), (5, 3)]);
        let b = random_op(2, &[(4, 5), (1, 1), (-2, 3), (0, 1), (7, 2), (1, 9)]);
        let p = &a * &b;
        for i in 0..4 {
            for j in 0..4 {
                let mut s = Rat::zero();
                for k in 0..4 {
                    s = &s + &(&a.entry(i, k).constant_term() * &b.entry(k, j).constant_term());
                }
                assert_eq!(p.entry(i, j).constant_term(), s);
            }
        }
    }

    #[test]
    fn commutators() {
        let p12 = perm(3, 1, 2);
        assert!(p12.commutator(&p12).unwrap().is_zero());
        assert!(!p12.commutator(&perm(3, 1, 3)).unwrap().is_zero());
        assert!(p12.try_mul(&perm(2, 1, 2)).is_err());
    }

    #[test]
    fn traces() {
        let id = Op::identity(2, 2, &alg());
        assert_eq!(id.partial_trace(&[1]).unwrap(), Op::identity(1, 2, &alg()).scale_scalar(&qi(2)));
        for d in [2, 3] {
            let p = Op::permutation(2, d, 1, 2, &alg()).unwrap();
            assert_eq!(p.partial_trace(&[1]).unwrap(), Op::identity(1, d, &alg()));
        }
        assert!(id.partial_trace(&[]).is_err());
        assert!(id.partial_trace(&[3]).is_err());
    }

    #[test]
    fn shift_from_permutations() {
        // tr_a P_a2 P_a1 on legs (a,1,2) is the cyclic shift on two sites
        let t = &perm(3, 1, 3) * &perm(3, 1, 2);
        let u = t.partial_trace(&[1]).unwrap();
        assert_eq!(u, perm(2, 1, 2));
    }

    #[test]
    fn inverse_of_permutation() {
        let s = &perm(3, 1, 2) * &perm(3, 2, 3);
        assert_eq!(s.inverse().unwrap(), s.transpose());
        let z = Op::zero(1, 2, &alg());
        assert_eq!(z.inverse(), Err(LaxError::SingularOperator));
    }

    #[test]
    fn inverse_with_nilpotents() {
        let a = JetAlgebra::new(&[("ε", 3), ("λ", 2)]).unwrap();
        let e = Jet::<Rat>::generator(&a, "ε").unwrap();
        let l = Jet::<Rat>::generator(&a, "λ").unwrap();
        let p = Op::permutation(2, 2, 1, 2, &a).unwrap();
        let m = &p + &Op::identity(2, 2, &a).scale(&e.add(&l.scale(&q(1, 3))));
        let inv = m.inverse().unwrap();
        assert_eq!(&m * &inv, Op::identity(2, 2, &a));
        assert_eq!(&inv * &m, Op::identity(2, 2, &a));
    }

    #[test]
    fn json_roundtrip() {
        let a = JetAlgebra::new(&[("ε", 3), ("λ", 2)]).unwrap();
        let e = Jet::<Rat>::generator(&a, "ε").unwrap();
        let m = &Op::permutation(2, 2, 1, 2, &a).unwrap()
            + &Op::identity(2, 2, &a).scale(&e.scale(&"123456789012345678901/7".parse().unwrap()));
        let s = m.to_json_string();
        let back = Op::from_json_str(&s).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json_string(), s);
        assert_eq!(back.hash_hex(), m.hash_hex());
        assert!(Op::from_json_str("{\"legs\":1}").is_err());
    }

    fn arb_op(legs: usize) -> impl Strategy<Value = Op> {
        let n = 1usize << (2 * legs);
        proptest::collection::vec((-3i64..4, 1i64..3), n)
            .prop_map(move |v| Op::from_fn(legs, 2, &JetAlgebra::trivial(), |r, c| Jet::from_rat(&q(v[r * (1 << legs) + c].0, v[r * (1 << legs) + c].1))))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn embed_respects_products(a in arb_op(2), b in arb_op(2)) {
            let pos = [3, 1];
            let lhs = (&a * &b).embed(&pos, 3).unwrap();
            let rhs = &a.embed(&pos, 3).unwrap() * &b.embed(&pos, 3).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn disjoint_embeddings_commute(a in arb_op(1), b in arb_op(2)) {
            let x = a.embed(&[2], 3).unwrap();
            let y = b.embed(&[3, 1], 3).unwrap();
            prop_assert!(x.commutator(&y).unwrap().is_zero());
        }

        #[test]
        fn trace_is_cyclic(a in arb_op(2), b in arb_op(2)) {
            prop_assert_eq!((&a * &b).trace(), (&b * &a).trace());
        }

        #[test]
        fn local_application_matches_embedding(a in arb_op(2), t in arb_op(3)) {
            let e = a.embed(&[3, 1], 3).unwrap();
            prop_assert_eq!(t.apply_local_left(&a, &[3, 1]).unwrap(), &e * &t);
            prop_assert_eq!(t.apply_local_right(&a, &[3, 1]).unwrap(), &t * &e);
        }

        #[test]
        fn inverse_is_two_sided(a in arb_op(2)) {
            if let Ok(inv) = a.inverse() {
                let id = Op::identity(2, 2, &JetAlgebra::trivial());
                prop_assert_eq!(&a * &inv, id.clone());
                prop_assert_eq!(&inv * &a, id);
            }
        }
    }
}
