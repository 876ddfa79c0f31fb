//! `laxforge charges`.

use rayon::prelude::*;
use serde_json::{json, Value};

use laxforge::chain::{extract_charges, transfer, ChainSpec};
use laxforge::deform::{deformed_charges, lambda_parts, DeformationFamily};
use laxforge::rmatrix::Check;
use laxforge::sampling::Sampler;
use laxforge::{Jet, JetAlgebra, Rat, TensorOperator};

use crate::failure::Failure;
use crate::report::{Report, Row};
use crate::{family, references, ChargesArgs, RunConfig};

type Op = TensorOperator<Rat>;

fn header() -> Vec<String> {
    ["k", "L", "order", "operator_hash", "commutation"].iter().map(|s| s.to_string()).collect()
}

/// A commutator verdict tagged with the two charge positions.
type Pair = ((usize, usize), Row);

fn pairwise(qs: &[Op], label: &str) -> Result<Vec<Pair>, Failure> {
    let pairs: Vec<(usize, usize)> = (0..qs.len()).flat_map(|i| (i + 1..qs.len()).map(move |j| (i, j))).collect();
    let out: Vec<Result<_, Failure>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let c = qs[i].commutator(&qs[j])?;
            Ok(((i, j), Check::from_residual(&format!("{label} [Q{}, Q{}] = 0", i + 2, j + 2), &c).into()))
        })
        .collect();
    out.into_iter().collect()
}

/// Whether charge `i` commutes with every other charge.
fn commutes_with_rest(comm: &[Pair], i: usize) -> bool {
    comm.iter().filter(|((a, b), _)| *a == i || *b == i).all(|(_, r)| r.passed)
}

pub fn run(cfg: &RunConfig, a: &ChargesArgs) -> Result<Report, Failure> {
    if a.order != 1 {
        return Err(Failure::Config(format!("only first order is supported, got --order {}", a.order)));
    }
    if a.k_max < 2 {
        return Err(Failure::Config("--k-max must be at least 2".into()));
    }
    if a.length < a.k_max as usize {
        return Err(Failure::Config(format!("chain of length {} cannot hold a range-{} charge", a.length, a.k_max)));
    }
    let mut sampler = Sampler::new(cfg.seed);
    match &a.family {
        None => undeformed(cfg, a, &mut sampler),
        Some(sel) => {
            let f = family::parse(sel, a.k, &cfg.model, &mut sampler)?;
            deformed(cfg, a, &f)
        }
    }
}

fn undeformed(cfg: &RunConfig, a: &ChargesArgs, sampler: &mut Sampler) -> Result<Report, Failure> {
    let model = &cfg.model;
    let l = a.length;
    let mut report = Report::new(&format!("charges-L{l}"), cfg);
    report.param("L", l);
    report.param("k_max", a.k_max);
    let alg = JetAlgebra::trivial();
    let chain = ChainSpec::homogeneous(l, model.site_dim())?;
    let qs = extract_charges(model, &alg, &chain, a.k_max)?;
    let u = sampler.params(1).remove(0);
    report.param("u", u.to_string());
    let t = transfer(model, &alg, &chain, &Jet::from_rat(&u))?;
    let mut rows = Vec::new();
    let mut ops = serde_json::Map::new();
    for (i, qk) in qs.iter().enumerate() {
        let k = i + 2;
        let c = Check::from_residual(&format!("[Q{k}, t({u})] = 0"), &qk.commutator(&t)?);
        rows.push(vec![k.to_string(), l.to_string(), "0".into(), qk.hash_hex(), c.passed.to_string()]);
        report.push(c);
        ops.insert(format!("Q{k}"), qk.to_json());
    }
    for (_, r) in pairwise(&qs, "undeformed")? {
        report.push(r);
    }
    report.data.insert("operators".into(), Value::Object(ops));
    report.table = Some((header(), rows));
    Ok(report)
}

fn deformed(cfg: &RunConfig, a: &ChargesArgs, f: &DeformationFamily) -> Result<Report, Failure> {
    let model = &cfg.model;
    let l = a.length;
    let mut report = Report::new(&format!("charges-L{l}-{}", f.name()), cfg);
    report.param("L", l);
    report.param("k_max", a.k_max);
    report.param("family", f.name());
    report.param("order", a.order);
    let qs = deformed_charges(model, f, l, a.k_max)?;
    let alg = JetAlgebra::trivial();
    let plain = extract_charges(model, &alg, &ChainSpec::homogeneous(l, model.site_dim())?, a.k_max)?;
    let mut rows = Vec::new();
    let mut ops = serde_json::Map::new();
    let mut firsts = Vec::new();
    for (i, qk) in qs.iter().enumerate() {
        let k = i + 2;
        let (c0, c1) = lambda_parts(qk)?;
        let same = Check::from_difference(&format!("Q{k}(λ) at λ = 0 is the undeformed charge"), &c0, &plain[i]);
        rows.push(vec![k.to_string(), l.to_string(), "0".into(), c0.hash_hex(), same.passed.to_string()]);
        rows.push(vec![k.to_string(), l.to_string(), "1".into(), c1.hash_hex(), String::new()]);
        report.push(same);
        ops.insert(format!("Q{k}"), json!({"order0": c0.to_json(), "order1": c1.to_json()}));
        firsts.push(c1);
    }
    let comm = pairwise(&qs, &format!("{} λ-truncated", f.name()))?;
    for (i, row) in rows.iter_mut().filter(|r| r[2] == "1").enumerate() {
        row[4] = commutes_with_rest(&comm, i).to_string();
    }
    for (_, r) in comm {
        report.push(r);
    }
    if references::applies(model) {
        let name = f.name();
        if name == "boost3" && l >= 6 {
            let want = references::two_loop(model, l)?;
            report.push(Check::from_difference(&format!("two-loop Q2 correction on L={l}"), &firsts[0], &want));
        }
        if name == "bilocal2_3" && l >= 8 {
            let want = references::bilocal_range_four(l)?;
            report.push(Check::from_difference(&format!("range-four Q2 correction on L={l}"), &firsts[0], &want));
        }
    }
    report.data.insert("operators".into(), Value::Object(ops));
    report.table = Some((header(), rows));
    Ok(report)
}
