//! `laxforge verify <suite>`.

use rayon::prelude::*;
use serde_json::{json, Value};

use laxforge::chain::verify_conjecture;
use laxforge::charges::{verify_coproduct_prop, verify_lemma_simplify, verify_sutherland, Variant};
use laxforge::deform::{
    drinfeld_phi1, sample_subalgebra_triple, twist_gamma1, verify_deformed_ybe, verify_rll, DeformationFamily, EvaluatedTuple,
};
use laxforge::rmatrix::{check_regularity, check_unitarity, check_ybe, Check};
use laxforge::sampling::Sampler;
use laxforge::{Jet, JetAlgebra, Rat};

use crate::failure::Failure;
use crate::family;
use crate::report::{Report, Row};
use crate::{RunConfig, Suite, VerifyArgs};

/// Largest leg count for sampled associator triples.
const ASSOCIATOR_MAX_LEGS: usize = 7;

fn show(ps: &[Rat]) -> String {
    let parts: Vec<String> = ps.iter().map(Rat::to_string).collect();
    format!("({})", parts.join(", "))
}

fn tagged(mut c: Check, tag: &str) -> Row {
    c.name = format!("{} at {tag}", c.name);
    c.into()
}

/// Runs one job per sample on the worker pool, keeping sample order.
fn run_jobs<T: Sync>(jobs: &[T], f: impl Fn(&T) -> Result<Vec<Row>, Failure> + Sync + Send) -> Result<Vec<Row>, Failure> {
    let out: Vec<Result<Vec<Row>, Failure>> = jobs.par_iter().map(f).collect();
    let mut rows = Vec::new();
    for r in out {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn run(cfg: &RunConfig, a: &VerifyArgs) -> Result<Report, Failure> {
    let mut report = Report::new(&format!("verify-{}", a.suite.name()), cfg);
    let mut sampler = Sampler::new(cfg.seed);
    let model = &cfg.model;
    let default_samples = if a.suite == Suite::Associator { 20 } else { 3 };
    let samples = a.samples.unwrap_or(default_samples);
    if samples == 0 {
        return Err(Failure::Config("--samples must be positive".into()));
    }
    report.param("samples", samples);
    let rows = match a.suite {
        Suite::Ybe => {
            let jobs: Vec<Vec<Rat>> = (0..samples).map(|_| sampler.params(3)).collect();
            run_jobs(&jobs, |p| {
                let tag = show(p);
                let (ok, res) = check_ybe(model, &p[0], &p[1], &p[2])?;
                Ok(vec![
                    Row { name: format!("ybe at {tag}"), passed: ok, residual: res.max_abs().to_string() },
                    tagged(check_regularity(model, &p[0])?, &tag),
                    tagged(check_unitarity(model, &p[0], &p[1])?, &tag),
                ])
            })?
        }
        Suite::Sutherland => {
            let k = a.k.unwrap_or(3);
            report.param("k", k);
            let jobs: Vec<(Variant, Vec<Rat>)> = (0..samples)
                .flat_map(|_| {
                    let p = sampler.params(2);
                    [Variant::Plain, Variant::Tilde].into_iter().flat_map(move |v| [(v, p[..1].to_vec()), (v, p.clone())])
                })
                .collect();
            run_jobs(&jobs, |(v, p)| Ok(vec![tagged(verify_sutherland(model, k, *v, p)?, &show(p))]))?
        }
        Suite::Coproduct => {
            let k = a.k.unwrap_or(3);
            report.param("k", k);
            let jobs: Vec<Vec<Rat>> = (0..samples).map(|_| sampler.params(3)).collect();
            run_jobs(&jobs, |p| {
                Ok(verify_coproduct_prop(model, k, &p[0], &p[1], &p[2])?.into_iter().map(|c| tagged(c, &show(p))).collect())
            })?
        }
        Suite::Lemmas => {
            let k = a.k.unwrap_or(3);
            report.param("k", k);
            let jobs: Vec<(Vec<Rat>, Vec<Rat>)> = (0..samples)
                .map(|i| {
                    let na = 1 + i % 2;
                    let p = sampler.params(na + 1);
                    (p[..na].to_vec(), p[na..].to_vec())
                })
                .collect();
            run_jobs(&jobs, |(x, y)| {
                let tag = format!("{} {}", show(x), show(y));
                Ok(verify_lemma_simplify(model, k, x, y)?.into_iter().map(|c| tagged(c, &tag)).collect())
            })?
        }
        Suite::Conjecture => {
            let k_max = a.k.unwrap_or(4);
            if k_max < 2 {
                return Err(Failure::Config("--k must be at least 2".into()));
            }
            report.param("k_max", k_max);
            if let Some(l) = a.length {
                report.param("L", l);
            }
            let ks: Vec<u32> = (2..=k_max).collect();
            let out: Vec<Result<_, Failure>> =
                ks.par_iter().map(|&k| Ok(verify_conjecture(model, k, a.length.unwrap_or(k as usize + 2))?)).collect();
            let mut rows = Vec::new();
            let mut rel = serde_json::Map::new();
            for r in out {
                let r = r?;
                let coeffs = r.relation.as_ref().map(|c| c.iter().map(Rat::to_string).collect::<Vec<_>>());
                rel.insert(format!("k{}", r.k), json!({"L": r.length, "relation": coeffs}));
                rows.extend(r.checks.into_iter().map(Row::from));
            }
            report.data.insert(
                "relation_basis".into(),
                json!(["plain global density", "identity", "Q_2 .. Q_{k-1} from the transfer matrix"]),
            );
            report.data.insert("relations".into(), Value::Object(rel));
            rows
        }
        Suite::Twist => {
            let f = family::parse(a.family.as_deref().unwrap_or("boost"), a.k, model, &mut sampler)?;
            report.param("family", f.name());
            let jobs: Vec<Vec<Rat>> = (0..samples).map(|_| sampler.params(3)).collect();
            run_jobs(&jobs, |p| {
                let tag = show(p);
                Ok(vec![
                    tagged(verify_rll(model, &f, &p[0], &p[1])?, &tag),
                    tagged(verify_deformed_ybe(model, &f, &p[0], &p[1], &p[2])?, &tag),
                ])
            })?
        }
        Suite::Associator => {
            let families: Vec<DeformationFamily> = match &a.family {
                Some(sel) => vec![family::parse(sel, a.k, model, &mut sampler)?],
                None => vec![
                    family::parse("local", a.k, model, &mut sampler)?,
                    family::parse("boost", None, model, &mut sampler)?,
                    family::parse("bilocal", None, model, &mut sampler)?,
                ],
            };
            report.param("families", families.iter().map(|f| f.name()).collect::<Vec<_>>());
            associator(cfg, &families, samples, &mut sampler)?
        }
    };
    report.checks = rows;
    Ok(report)
}

fn describe(t: &EvaluatedTuple) -> String {
    let spec: Vec<String> = t.spectral.iter().map(|(l, u)| format!("{l}@{}", u.constant_term())).collect();
    let triv: Vec<String> = t.trivial.iter().map(|l| l.to_string()).collect();
    format!("[{}|{}]", spec.join(","), triv.join(","))
}

fn associator(cfg: &RunConfig, families: &[DeformationFamily], samples: usize, sampler: &mut Sampler) -> Result<Vec<Row>, Failure> {
    let model = &cfg.model;
    let alg = JetAlgebra::trivial();
    let mut jobs = Vec::new();
    for (fi, f) in families.iter().enumerate() {
        for _ in 0..samples {
            jobs.push((fi, sample_subalgebra_triple(f, sampler, ASSOCIATOR_MAX_LEGS)));
        }
    }
    let mut rows = run_jobs(&jobs, |(fi, (x, y, z, total))| {
        let f = &families[*fi];
        let phi = drinfeld_phi1(model, &alg, f, x, y, z, *total)?;
        let name = format!("associator {} vanishes at {} {} {}", f.name(), describe(x), describe(y), describe(z));
        Ok(vec![Row { name, passed: phi.is_zero(), residual: phi.max_abs().to_string() }])
    })?;
    // the local family is not associative off its subalgebra:
    // φ(1⊗T_1, T_ā⊗1, 1⊗T_2..T_k) = γ(1⊗T_1, T_ā⊗T_2..T_k) ≠ 0
    for f in families {
        if let DeformationFamily::Local { .. } = f {
            let k = f.rank();
            let u = sampler.params(1).remove(0);
            let tup = |s: Vec<(usize, Rat)>, t: Vec<usize>| {
                EvaluatedTuple::new(s.into_iter().map(|(l, u)| (l, Jet::from_rat(&u))).collect(), t)
            };
            let total = k + 1;
            let x = tup(vec![], vec![1])?;
            let y = tup(vec![(2, u.clone())], vec![])?;
            let z = tup(vec![], (3..=total).collect())?;
            let phi = drinfeld_phi1(model, &alg, f, &x, &y, &z, total)?;
            let g = twist_gamma1(model, &alg, f, &x, &tup(vec![(2, u.clone())], (3..=total).collect())?, total)?;
            rows.push(Row {
                name: format!("associator {} nonzero off the subalgebra at u={u}", f.name()),
                passed: !phi.is_zero(),
                residual: phi.max_abs().to_string(),
            });
            rows.push(Check::from_difference(&format!("associator {} equals the twist at u={u}", f.name()), &phi, &g).into());
        }
    }
    Ok(rows)
}
