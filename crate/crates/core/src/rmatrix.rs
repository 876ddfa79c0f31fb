//! R-matrix models, factorized coproduct R-matrices and axiom checks.

use std::fmt;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{LaxError, Result};
use crate::jets::{Jet, JetAlgebra};
use crate::rational::Rat;
use crate::scalar::Scalar;
use crate::tensor::TensorOperator;

/// A two-leg R-matrix generator `R(u, v)`.
#[derive(Clone)]
pub enum Model {
    /// `R(u,v) = (u - v - P) / (u - v - 1)` on `C^n ⊗ C^n`.
    Yangian { n: usize },
    Table(Arc<TableModel>),
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Model({})", self.name())
    }
}

impl Model {
    pub fn yangian(n: usize) -> Model {
        Model::Yangian { n }
    }

    /// Accepts `yangian-gl(N)` and `yangian-glN`.
    pub fn builtin(name: &str) -> Result<Model> {
        let rest = name
            .strip_prefix("yangian-gl")
            .ok_or_else(|| LaxError::InvalidArgument(format!("unknown built-in model {name:?}")))?;
        let digits = rest.trim_start_matches('(').trim_end_matches(')');
        let n: usize = digits.parse().map_err(|_| LaxError::InvalidArgument(format!("bad model name {name:?}")))?;
        if n < 2 {
            return Err(LaxError::InvalidArgument("site dimension must be at least 2".into()));
        }
        Ok(Model::Yangian { n })
    }

    pub fn name(&self) -> String {
        match self {
            Model::Yangian { n } => format!("yangian-gl({n})"),
            Model::Table(t) => t.name.clone(),
        }
    }

    pub fn site_dim(&self) -> usize {
        match self {
            Model::Yangian { n } => *n,
            Model::Table(t) => t.site_dim,
        }
    }

    pub fn difference_form(&self) -> bool {
        match self {
            Model::Yangian { .. } => true,
            Model::Table(t) => t.difference_form,
        }
    }

    pub fn eval<S: Scalar>(&self, alg: &Arc<JetAlgebra>, u: &Jet<S>, v: &Jet<S>) -> Result<TensorOperator<S>> {
        match self {
            Model::Yangian { n } => {
                let n = *n;
                let x = u.sub(v);
                let den = x.sub(&Jet::one());
                let inv = den.inv(alg).map_err(|_| LaxError::PoleAtEvaluationPoint("u - v - 1 vanishes".into()))?;
                let diag = x.mul(&inv, alg);
                let swap = inv.neg();
                let mut op = TensorOperator::zero(2, n, alg);
                for i in 0..n {
                    for j in 0..n {
                        let r = i * n + j;
                        if i == j {
                            op.set(r, r, Jet::one());
                        } else {
                            op.set(r, r, diag.clone());
                            op.set(r, j * n + i, swap.clone());
                        }
                    }
                }
                Ok(op)
            }
            Model::Table(t) => t.eval(alg, u, v),
        }
    }

    /// `R_12(u,v)^-1 = R_21(v,u)`.
    pub fn r_inverse<S: Scalar>(&self, alg: &Arc<JetAlgebra>, u: &Jet<S>, v: &Jet<S>) -> Result<TensorOperator<S>> {
        let r = self.eval(alg, v, u)?;
        let p = TensorOperator::permutation(2, self.site_dim(), 1, 2, alg)?;
        Ok(&(&p * &r) * &p)
    }
}

#[derive(Clone, Debug)]
enum Expr {
    Int(i64),
    U,
    V,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

impl Expr {
    fn eval<S: Scalar>(&self, alg: &JetAlgebra, u: &Jet<S>, v: &Jet<S>) -> Result<Jet<S>> {
        Ok(match self {
            Expr::Int(n) => Jet::from_i64(*n),
            Expr::U => u.clone(),
            Expr::V => v.clone(),
            Expr::Neg(a) => a.eval(alg, u, v)?.neg(),
            Expr::Add(a, b) => a.eval(alg, u, v)?.add(&b.eval(alg, u, v)?),
            Expr::Sub(a, b) => a.eval(alg, u, v)?.sub(&b.eval(alg, u, v)?),
            Expr::Mul(a, b) => a.eval(alg, u, v)?.mul(&b.eval(alg, u, v)?, alg),
            Expr::Div(a, b) => {
                let den = b.eval(alg, u, v)?;
                let inv = den.inv(alg).map_err(|_| LaxError::PoleAtEvaluationPoint("table entry denominator".into()))?;
                a.eval(alg, u, v)?.mul(&inv, alg)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    U,
    V,
    Plus,
    Minus,
    Times,
    Slash,
    Open,
    Close,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => {}
            '+' => out.push(Tok::Plus),
            '-' | '−' => out.push(Tok::Minus),
            '*' | '·' => out.push(Tok::Times),
            '/' => out.push(Tok::Slash),
            '(' => out.push(Tok::Open),
            ')' => out.push(Tok::Close),
            'u' => out.push(Tok::U),
            'v' => out.push(Tok::V),
            '0'..='9' => {
                let start = i;
                while i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let lit: String = chars[start..=i].iter().collect();
                let n = lit.parse().map_err(|_| LaxError::Parse(format!("integer literal {lit} too large")))?;
                out.push(Tok::Int(n));
            }
            _ => return Err(LaxError::Parse(format!("unexpected character {c:?} in {s:?}"))),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Times) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Tok::Int(n)) => Ok(Expr::Int(n)),
            Some(Tok::U) => Ok(Expr::U),
            Some(Tok::V) => Ok(Expr::V),
            Some(Tok::Open) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Tok::Close) => Ok(e),
                    _ => Err(LaxError::Parse("missing ')'".into())),
                }
            }
            t => Err(LaxError::Parse(format!("unexpected token {t:?}"))),
        }
    }
}

fn parse_expr(s: &str) -> Result<Expr> {
    let mut p = Parser { toks: tokenize(s)?, pos: 0 };
    if p.toks.is_empty() {
        return Err(LaxError::Parse("empty expression".into()));
    }
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(LaxError::Parse(format!("trailing input in {s:?}")));
    }
    Ok(e)
}

/// A model given as a table of rational functions in `u` and `v`.
#[derive(Debug)]
pub struct TableModel {
    pub name: String,
    pub site_dim: usize,
    pub difference_form: bool,
    entries: Vec<Expr>,
    pub source: Vec<Vec<String>>,
}

#[derive(Deserialize)]
struct TableFile {
    name: String,
    site_dim: usize,
    difference_form: bool,
    entries: Vec<Vec<String>>,
}

impl TableModel {
    pub fn new(name: &str, site_dim: usize, difference_form: bool, entries: Vec<Vec<String>>) -> Result<TableModel> {
        let n = site_dim * site_dim;
        if site_dim < 2 {
            return Err(LaxError::InvalidArgument("site_dim must be at least 2".into()));
        }
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(LaxError::Parse(format!("model entries must be a {n}x{n} matrix")));
        }
        let parsed = entries.iter().flatten().map(|s| parse_expr(s)).collect::<Result<Vec<_>>>()?;
        Ok(TableModel { name: name.to_string(), site_dim, difference_form, entries: parsed, source: entries })
    }

    pub fn from_json_str(s: &str) -> Result<TableModel> {
        let f: TableFile = serde_json::from_str(s).map_err(|e| LaxError::Parse(e.to_string()))?;
        TableModel::new(&f.name, f.site_dim, f.difference_form, f.entries)
    }

    fn eval<S: Scalar>(&self, alg: &Arc<JetAlgebra>, u: &Jet<S>, v: &Jet<S>) -> Result<TensorOperator<S>> {
        let vals = self.entries.iter().map(|e| e.eval(alg, u, v)).collect::<Result<Vec<_>>>()?;
        let n = self.site_dim * self.site_dim;
        Ok(TensorOperator::from_fn(2, self.site_dim, alg, |r, c| vals[r * n + c].clone()))
    }
}

impl Model {
    pub fn from_table(t: TableModel) -> Model {
        Model::Table(Arc::new(t))
    }

    /// Loads a built-in name or a JSON model file path.
    pub fn load(selector: &str) -> Result<Model> {
        if selector.starts_with("yangian-gl") {
            return Model::builtin(selector);
        }
        let text = std::fs::read_to_string(selector)
            .map_err(|e| LaxError::InvalidArgument(format!("cannot read model file {selector}: {e}")))?;
        Ok(Model::from_table(TableModel::from_json_str(&text)?))
    }

    /// The entry table of a built-in Yangian model in the file format.
    pub fn yangian_table(n: usize) -> Vec<Vec<String>> {
        let m = n * n;
        let mut t = vec![vec!["0".to_string(); m]; m];
        for i in 0..n {
            for j in 0..n {
                let r = i * n + j;
                if i == j {
                    t[r][r] = "1".into();
                } else {
                    t[r][r] = "(u-v)/(u-v-1)".into();
                    t[r][j * n + i] = "-1/(u-v-1)".into();
                }
            }
        }
        t
    }
}

/// Factorized R-matrix `R_{(first)(second)}`: for each first leg in order,
/// multiply by `R_{ij}` for the second legs taken from last to first.
///
/// Legs are positions in `1..=total`; parameters are per-leg jets.
pub fn coproduct_r<S: Scalar>(
    model: &Model,
    alg: &Arc<JetAlgebra>,
    first: &[(usize, Jet<S>)],
    second: &[(usize, Jet<S>)],
    total: usize,
) -> Result<TensorOperator<S>> {
    let mut seen: Vec<usize> = Vec::new();
    for (l, _) in first.iter().chain(second) {
        if *l < 1 || *l > total || seen.contains(l) {
            return Err(LaxError::InvalidLegs(format!("coproduct leg {l} invalid or repeated")));
        }
        seen.push(*l);
    }
    let mut acc = TensorOperator::identity(total, model.site_dim(), alg);
    for (i, ui) in first {
        for (j, uj) in second.iter().rev() {
            let r = model.eval(alg, ui, uj)?;
            acc = acc.apply_local_right(&r, &[*i, *j])?;
        }
    }
    Ok(acc)
}

/// Inverse of [`coproduct_r`], assembled from braiding-unitarity inverses in
/// reverse order.
pub fn coproduct_r_inv<S: Scalar>(
    model: &Model,
    alg: &Arc<JetAlgebra>,
    first: &[(usize, Jet<S>)],
    second: &[(usize, Jet<S>)],
    total: usize,
) -> Result<TensorOperator<S>> {
    let mut acc = TensorOperator::identity(total, model.site_dim(), alg);
    for (i, ui) in first.iter().rev() {
        for (j, uj) in second {
            let r = model.r_inverse(alg, ui, uj)?;
            acc = acc.apply_local_right(&r, &[*i, *j])?;
        }
    }
    Ok(acc)
}

/// Coproduct on consecutive legs: `first` on `1..=|first|`, `second` after.
pub fn coproduct_groups<S: Scalar>(
    model: &Model,
    alg: &Arc<JetAlgebra>,
    first: &[Jet<S>],
    second: &[Jet<S>],
) -> Result<TensorOperator<S>> {
    let (f, s) = consecutive(first, second);
    coproduct_r(model, alg, &f, &s, first.len() + second.len())
}

pub fn coproduct_groups_inv<S: Scalar>(
    model: &Model,
    alg: &Arc<JetAlgebra>,
    first: &[Jet<S>],
    second: &[Jet<S>],
) -> Result<TensorOperator<S>> {
    let (f, s) = consecutive(first, second);
    coproduct_r_inv(model, alg, &f, &s, first.len() + second.len())
}

type Legs<S> = Vec<(usize, Jet<S>)>;

fn consecutive<S: Scalar>(first: &[Jet<S>], second: &[Jet<S>]) -> (Legs<S>, Legs<S>) {
    let f = first.iter().enumerate().map(|(i, u)| (i + 1, u.clone())).collect();
    let s = second.iter().enumerate().map(|(i, u)| (first.len() + i + 1, u.clone())).collect();
    (f, s)
}

/// Outcome of an exact identity check.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: Rat,
}

impl Check {
    pub fn from_residual(name: &str, residual: &TensorOperator<Rat>) -> Check {
        Check { name: name.to_string(), passed: residual.is_zero(), residual: residual.max_abs() }
    }

    pub fn from_difference(name: &str, lhs: &TensorOperator<Rat>, rhs: &TensorOperator<Rat>) -> Check {
        Check::from_residual(name, &(lhs - rhs))
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn rat_jet(r: &Rat) -> Jet<Rat> {
    Jet::from_rat(r)
}

/// `R12(u1,u2) R13(u1,u3) R23(u2,u3) = R23 R13 R12`.
pub fn check_ybe(model: &Model, u1: &Rat, u2: &Rat, u3: &Rat) -> Result<(bool, TensorOperator<Rat>)> {
    let alg = JetAlgebra::trivial();
    let (a, b, c) = (rat_jet(u1), rat_jet(u2), rat_jet(u3));
    let r12 = model.eval(&alg, &a, &b)?.embed(&[1, 2], 3)?;
    let r13 = model.eval(&alg, &a, &c)?.embed(&[1, 3], 3)?;
    let r23 = model.eval(&alg, &b, &c)?.embed(&[2, 3], 3)?;
    let lhs = &(&r12 * &r13) * &r23;
    let rhs = &(&r23 * &r13) * &r12;
    let res = &lhs - &rhs;
    Ok((res.is_zero(), res))
}

/// `R(u,u) = P`.
pub fn check_regularity(model: &Model, u: &Rat) -> Result<Check> {
    let alg = JetAlgebra::trivial();
    let r = model.eval(&alg, &rat_jet(u), &rat_jet(u))?;
    let p = TensorOperator::permutation(2, model.site_dim(), 1, 2, &alg)?;
    Ok(Check::from_difference("regularity", &r, &p))
}

/// `R12(u,v) R21(v,u) = 1`.
pub fn check_unitarity(model: &Model, u: &Rat, v: &Rat) -> Result<Check> {
    let alg = JetAlgebra::trivial();
    let r = model.eval(&alg, &rat_jet(u), &rat_jet(v))?;
    let p = TensorOperator::permutation(2, model.site_dim(), 1, 2, &alg)?;
    let r21 = &(&p * &model.eval(&alg, &rat_jet(v), &rat_jet(u))?) * &p;
    let id = TensorOperator::identity(2, model.site_dim(), &alg);
    Ok(Check::from_difference("braiding unitarity", &(&r * &r21), &id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    type Op = TensorOperator<Rat>;

    fn triv() -> Arc<JetAlgebra> {
        JetAlgebra::trivial()
    }

    fn c(r: Rat) -> Jet<Rat> {
        Jet::from_rat(&r)
    }

    #[test]
    fn regular_at_equal_arguments() {
        let m = Model::yangian(2);
        for u in [qi(0), q(1, 3), q(-7, 2)] {
            assert!(check_regularity(&m, &u).unwrap().passed);
        }
        assert!(check_regularity(&Model::yangian(3), &q(2, 5)).unwrap().passed);
    }

    #[test]
    fn pole_is_an_error() {
        let m = Model::yangian(2);
        let e = m.eval(&triv(), &c(qi(1)), &c(qi(0)));
        assert!(matches!(e, Err(LaxError::PoleAtEvaluationPoint(_))));
    }

    #[test]
    fn unitarity_by_direct_product() {
        let m = Model::yangian(2);
        let a = triv();
        let r = m.eval(&a, &c(q(1, 2)), &c(qi(0))).unwrap();
        let p = Op::permutation(2, 2, 1, 2, &a).unwrap();
        // transposed legs: R_21(0, 1/2) = P R(0, 1/2) P
        let r21 = &(&p * &m.eval(&a, &c(qi(0)), &c(q(1, 2))).unwrap()) * &p;
        assert_eq!(&r * &r21, Op::identity(2, 2, &a));
    }

    #[test]
    fn r_inverse_matches_elimination() {
        let m = Model::yangian(2);
        let a = triv();
        let u = c(q(1, 3));
        assert_eq!(m.r_inverse(&a, &u, &u).unwrap(), Op::permutation(2, 2, 1, 2, &a).unwrap());
        let r = m.eval(&a, &u, &c(qi(0))).unwrap();
        assert_eq!(&r * &m.r_inverse(&a, &u, &c(qi(0))).unwrap(), Op::identity(2, 2, &a));
        for (x, y) in [(q(1, 2), q(1, 5)), (q(-3, 4), q(2, 3)), (qi(3), q(1, 7)), (q(5, 6), q(-1, 9)), (qi(0), q(3, 2))] {
            let (x, y) = (c(x), c(y));
            assert_eq!(m.r_inverse(&a, &x, &y).unwrap(), m.eval(&a, &x, &y).unwrap().inverse().unwrap());
        }
        // the inverse at (1/3, 0) is R_21(0, 1/3)
        let p = Op::permutation(2, 2, 1, 2, &a).unwrap();
        let r21 = &(&p * &m.eval(&a, &c(qi(0)), &u).unwrap()) * &p;
        assert_eq!(m.eval(&a, &u, &c(qi(0))).unwrap().inverse().unwrap(), r21);
    }

    #[test]
    fn identity_entry_has_no_derivative() {
        let m = Model::yangian(2);
        let a = JetAlgebra::new(&[("ε", 2)]).unwrap();
        let u = Jet::shifted(Rat::zero(), &a, "ε").unwrap();
        let r = m.eval(&a, &u, &Jet::zero()).unwrap();
        assert_eq!(r.entry(0, 0).derivative_coeff(&a, "ε", 1).unwrap(), qi(0));
        // symbolic: d/du (u/(u-1)) at 0 is -1/(u-1)^2 = -1
        assert_eq!(r.entry(1, 1).derivative_coeff(&a, "ε", 1).unwrap(), qi(-1));
        // d/du (-1/(u-1)) at 0 is 1/(u-1)^2 = 1
        assert_eq!(r.entry(1, 2).derivative_coeff(&a, "ε", 1).unwrap(), qi(1));
    }

    #[test]
    fn ybe_holds() {
        let m = Model::yangian(2);
        assert!(check_ybe(&m, &q(1, 2), &q(1, 5), &q(-2, 3)).unwrap().0);
        assert!(check_ybe(&m, &q(1, 2), &q(1, 2), &q(1, 2)).unwrap().0);
        assert!(check_ybe(&Model::yangian(3), &q(1, 2), &q(1, 5), &q(-2, 3)).unwrap().0);
    }

    #[test]
    fn corrupted_model_fails_ybe() {
        let mut t = Model::yangian_table(2);
        t[0][0] = "1+1".into();
        let m = Model::from_table(TableModel::new("bad", 2, true, t).unwrap());
        let (ok, res) = check_ybe(&m, &q(1, 2), &q(1, 5), &q(-2, 3)).unwrap();
        assert!(!ok);
        assert!(!res.is_zero());
    }

    #[test]
    fn table_model_matches_builtin() {
        let t = TableModel::new("xxx", 2, true, Model::yangian_table(2)).unwrap();
        let m = Model::from_table(t);
        let a = triv();
        let (u, v) = (c(q(2, 7)), c(q(-1, 3)));
        assert_eq!(m.eval(&a, &u, &v).unwrap(), Model::yangian(2).eval(&a, &u, &v).unwrap());
        let json = serde_json::json!({"name": "x", "site_dim": 2, "difference_form": true, "entries": Model::yangian_table(2)});
        assert!(TableModel::from_json_str(&json.to_string()).is_ok());
    }

    #[test]
    fn parser() {
        let a = triv();
        let e = parse_expr("(u − v) · 2 / (1 + u*v) - -3").unwrap();
        let val = e.eval(&a, &c(qi(2)), &c(qi(1))).unwrap();
        assert_eq!(val.constant_term(), &q(2, 3) + &qi(3));
        assert!(parse_expr("u +").is_err());
        assert!(parse_expr("u x").is_err());
        assert!(parse_expr("(u").is_err());
        assert!(parse_expr("").is_err());
        assert!(matches!(parse_expr("1/(u-v)").unwrap().eval(&a, &c(qi(1)), &c(qi(1))), Err(LaxError::PoleAtEvaluationPoint(_))));
    }

    #[test]
    fn builtin_names() {
        assert_eq!(Model::builtin("yangian-gl(3)").unwrap().site_dim(), 3);
        assert_eq!(Model::builtin("yangian-gl2").unwrap().site_dim(), 2);
        assert!(Model::builtin("xyz").is_err());
        assert!(Model::builtin("yangian-gl1").is_err());
    }

    #[test]
    fn coproduct_examples() {
        let m = Model::yangian(2);
        let a = triv();
        let (u, v, w) = (c(q(1, 2)), c(q(1, 5)), c(q(-2, 3)));
        // groups are listed in bracket order, so R_{1(23)} = R13 R12
        let got = coproduct_r(&m, &a, &[(1, u.clone())], &[(2, v.clone()), (3, w.clone())], 3).unwrap();
        let r13 = m.eval(&a, &u, &w).unwrap().embed(&[1, 3], 3).unwrap();
        let r12 = m.eval(&a, &u, &v).unwrap().embed(&[1, 2], 3).unwrap();
        assert_eq!(got, &r13 * &r12);
        // all parameters equal gives a permutation product
        let same = coproduct_r(&m, &a, &[(1, u.clone())], &[(2, u.clone()), (3, u.clone())], 3).unwrap();
        let p = &Op::permutation(3, 2, 1, 3, &a).unwrap() * &Op::permutation(3, 2, 1, 2, &a).unwrap();
        assert_eq!(same, p);
    }

    #[test]
    fn doubled_coproduct() {
        let m = Model::yangian(2);
        let a = triv();
        let (u, v, z) = (c(q(1, 3)), c(q(-1, 4)), c(qi(0)));
        let got = coproduct_groups(&m, &a, &[u.clone(), z.clone()], &[v.clone(), z.clone()]).unwrap();
        let r = |x: &Jet<Rat>, y: &Jet<Rat>, i, j| m.eval(&a, x, y).unwrap().embed(&[i, j], 4).unwrap();
        let want = &(&(&r(&u, &z, 1, 4) * &r(&u, &v, 1, 3)) * &Op::permutation(4, 2, 2, 4, &a).unwrap()) * &r(&z, &v, 2, 3);
        assert_eq!(got, want);
        let inv = coproduct_groups_inv(&m, &a, &[u.clone(), z.clone()], &[v.clone(), z.clone()]).unwrap();
        assert_eq!(&got * &inv, Op::identity(4, 2, &a));
    }

    #[test]
    fn merged_group_factorizes() {
        let m = Model::yangian(2);
        let a = triv();
        let (u1, u2, u3, u4) = (c(q(1, 3)), c(q(2, 7)), c(q(-1, 5)), c(q(4, 9)));
        // R_{1(234)} = R_{1(34)} R_{12}
        let full = coproduct_r(&m, &a, &[(1, u1.clone())], &[(2, u2.clone()), (3, u3.clone()), (4, u4.clone())], 4).unwrap();
        let tail = coproduct_r(&m, &a, &[(1, u1.clone())], &[(3, u3.clone()), (4, u4.clone())], 4).unwrap();
        let head = coproduct_r(&m, &a, &[(1, u1.clone())], &[(2, u2.clone())], 4).unwrap();
        assert_eq!(full, &tail * &head);
        // R_{(12)3} = R_{13} R_{23} in the first-group order
        let left = coproduct_r(&m, &a, &[(1, u1.clone()), (2, u2.clone())], &[(3, u3.clone())], 3).unwrap();
        let r13 = m.eval(&a, &u1, &u3).unwrap().embed(&[1, 3], 3).unwrap();
        let r23 = m.eval(&a, &u2, &u3).unwrap().embed(&[2, 3], 3).unwrap();
        assert_eq!(left, &r13 * &r23);
        // single legs reduce to eval
        let single = coproduct_r(&m, &a, &[(1, u1.clone())], &[(2, u2.clone())], 2).unwrap();
        assert_eq!(single, m.eval(&a, &u1, &u2).unwrap());
    }

    #[test]
    fn difference_form_shift_invariance() {
        let m = Model::yangian(2);
        let a = triv();
        let ps = [q(1, 3), q(2, 7), q(-1, 5)];
        let s = q(5, 11);
        let at = |shift: &Rat| {
            coproduct_r(&m, &a, &[(1, c(&ps[0] + shift))], &[(2, c(&ps[1] + shift)), (3, c(&ps[2] + shift))], 3).unwrap()
        };
        assert_eq!(at(&qi(0)), at(&s));
    }

    #[test]
    fn repeated_legs_rejected() {
        let m = Model::yangian(2);
        let a = triv();
        assert!(coproduct_r(&m, &a, &[(1, c(qi(0)))], &[(1, c(qi(0)))], 2).is_err());
    }
}
