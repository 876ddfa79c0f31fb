//! Parsing of `--family` selectors.

use laxforge::deform::DeformationFamily;
use laxforge::sampling::Sampler;
use laxforge::{JetAlgebra, Model, Rat, TensorOperator};

use crate::failure::Failure;

/// A local deformation generator on `k` legs with seeded small rational
/// entries.
pub fn random_local(model: &Model, k: usize, sampler: &mut Sampler) -> Result<TensorOperator<Rat>, Failure> {
    let n = model.site_dim().pow(2 * k as u32);
    let entries: Vec<_> = (0..n).map(|_| sampler.rat()).collect();
    Ok(TensorOperator::from_scalars(k, model.site_dim(), &JetAlgebra::trivial(), &entries)?)
}

fn trailing_number(s: &str) -> Result<Option<u32>, Failure> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| Failure::Config(format!("bad family index {s:?}")))
}

/// Accepts `boost`, `boostK`, `bilocal`, `bilocalK_L`, `local`, `localK`.
/// A bare name takes its index from `k` (boost 3, bilocal 2, local 2 when
/// absent); bare `bilocal` pairs `k` with `k + 1`.
pub fn parse(sel: &str, k: Option<u32>, model: &Model, sampler: &mut Sampler) -> Result<DeformationFamily, Failure> {
    let sel = sel.trim().to_ascii_lowercase();
    if let Some(rest) = sel.strip_prefix("bilocal") {
        let (a, b) = match rest.split_once('_') {
            Some((a, b)) => (trailing_number(a)?, trailing_number(b)?),
            None => (trailing_number(rest)?, None),
        };
        let a = a.or(k).unwrap_or(2);
        let b = b.unwrap_or(a + 1);
        return Ok(DeformationFamily::bilocal(a, b)?);
    }
    if let Some(rest) = sel.strip_prefix("boost") {
        let k = trailing_number(rest)?.or(k).unwrap_or(3);
        return Ok(DeformationFamily::boost(k)?);
    }
    if let Some(rest) = sel.strip_prefix("local") {
        let k = trailing_number(rest)?.or(k).unwrap_or(2);
        if k < 2 {
            return Err(Failure::Config("local family needs at least two legs".into()));
        }
        return Ok(DeformationFamily::local(random_local(model, k as usize, sampler)?)?);
    }
    Err(Failure::Config(format!("unknown family {sel:?}; expected boost, bilocal or local")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors() {
        let m = Model::yangian(2);
        let mut s = Sampler::new(1);
        assert_eq!(parse("boost3", None, &m, &mut s).unwrap().name(), "boost3");
        assert_eq!(parse("boost", Some(4), &m, &mut s).unwrap().name(), "boost4");
        assert_eq!(parse("bilocal2_3", None, &m, &mut s).unwrap().name(), "bilocal2_3");
        assert_eq!(parse("bilocal", Some(2), &m, &mut s).unwrap().name(), "bilocal2_3");
        assert_eq!(parse("local", None, &m, &mut s).unwrap().name(), "local2");
        assert!(matches!(parse("boost2", None, &m, &mut s), Err(Failure::Config(_))));
        assert!(matches!(parse("twisted", None, &m, &mut s), Err(Failure::Config(_))));
        assert!(matches!(parse("boostx", None, &m, &mut s), Err(Failure::Config(_))));
    }
}
