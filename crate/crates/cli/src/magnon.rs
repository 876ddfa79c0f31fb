//! `laxforge magnon`.

use laxforge::magnon::magnon_report;
use laxforge::Rat;
use serde_json::Value;

use crate::failure::Failure;
use crate::report::{Report, Row};
use crate::{MagnonArgs, RunConfig};

/// Eigenvector residual bound at both orders.
pub const EIGEN_TOLERANCE: f64 = 1e-12;

fn bound(name: String, value: f64, tol: f64) -> Row {
    Row { name, passed: value < tol, residual: format!("{value:e}") }
}

pub fn run(cfg: &RunConfig, a: &MagnonArgs) -> Result<Report, Failure> {
    let u: Rat = a.u.parse()?;
    if a.magnons > a.length / 2 {
        return Err(Failure::Config(format!("N = {} exceeds L/2 for L = {}", a.magnons, a.length)));
    }
    let r = magnon_report(&cfg.model, a.length, a.magnons, &u, a.precision)?;
    let mut report = Report::new(&format!("magnon-L{}-N{}", a.length, a.magnons), cfg);
    report.param("L", a.length);
    report.param("N", a.magnons);
    report.param("u", u.to_string());
    report.param("precision", a.precision);
    let bethe_tol = 10f64.powf(-(a.precision as f64) / 2.0);
    report.push(bound("bethe equations".into(), r.bethe_residual, bethe_tol));
    report.push(bound(format!("eigenvector at order 0, u={u}"), r.residual_order0, EIGEN_TOLERANCE));
    report.push(bound(format!("eigenvector at order 1, u={u}"), r.residual_order1, EIGEN_TOLERANCE));
    report.data = match serde_json::to_value(&r).map_err(|e| Failure::Math(e.to_string()))? {
        Value::Object(m) => m,
        _ => unreachable!("magnon report serializes to an object"),
    };
    Ok(report)
}
