//! Closed-form first-order charge corrections of the XXX chain, written out on
//! the permutation basis.

use laxforge::chain::{extract_charge, global_charge, ChainSpec};
use laxforge::{q, qi, JetAlgebra, Model, Rat, Result, TensorOperator};

type Op = TensorOperator<Rat>;

fn perm(legs: usize, i: usize, j: usize) -> Op {
    Op::permutation(legs, 2, i, j, &JetAlgebra::trivial()).expect("legs in range")
}

fn id(legs: usize) -> Op {
    Op::identity(legs, 2, &JetAlgebra::trivial())
}

/// `P_{n1..nk} = P_{n1 nk} ... P_{n1 n2}`.
fn cyclic(legs: usize, seq: &[usize]) -> Op {
    seq[1..].iter().rev().fold(id(legs), |acc, &j| &acc * &perm(legs, seq[0], j))
}

/// True for the built-in two-dimensional rational model the references use.
pub fn applies(model: &Model) -> bool {
    matches!(model, Model::Yangian { n: 2 })
}

/// First-order part of `Q_2` for the boost of `Q_3`:
/// `Σ(1 - P_{n,n+2}) - 4 Σ(1 - P_{n,n+1}) + Q_4 / 2`.
pub fn two_loop(model: &Model, length: usize) -> Result<Op> {
    let h = &id(2) - &perm(2, 1, 2);
    let h2 = &id(3) - &perm(3, 1, 3);
    let q4 = extract_charge(model, &JetAlgebra::trivial(), &ChainSpec::homogeneous(length, 2)?, 4)?;
    Ok(&(&global_charge(&h2, length)? - &global_charge(&h, length)?.scale_scalar(&qi(4))) + &q4.scale_scalar(&q(1, 2)))
}

/// Range-four density of the first-order `Q_2` correction for the bilocal
/// `[Q_2|Q_3]` deformation.
pub fn bilocal_range_four_density() -> Op {
    let n = 4;
    let one = id(n);
    let p = |i: usize, j: usize| perm(n, i, j);
    let c = |seq: &[usize]| cyclic(n, seq);
    let terms = [
        (&p(1, 2) - &one).scale_scalar(&qi(4)),
        &p(1, 4) - &one,
        &one - &p(1, 3),
        &c(&[1, 2, 4]) - &c(&[1, 4, 2]),
        (&(&p(1, 2) * &p(3, 4)) - &one).scale_scalar(&qi(-2)),
        &c(&[1, 3, 4, 2]) - &c(&[1, 3, 2, 4]),
        &c(&[1, 2, 4, 3]) - &c(&[1, 2, 3, 4]),
    ];
    terms.iter().fold(Op::zero(n, 2, &JetAlgebra::trivial()), |acc, t| &acc + t)
}

pub fn bilocal_range_four(length: usize) -> Result<Op> {
    global_charge(&bilocal_range_four_density(), length)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_products() {
        assert_eq!(cyclic(3, &[1, 2]), perm(3, 1, 2));
        assert_eq!(cyclic(3, &[1, 2, 3]), &perm(3, 1, 3) * &perm(3, 1, 2));
    }

    #[test]
    fn range_four_density_shape() {
        let d = bilocal_range_four_density();
        assert_eq!(d.legs(), 4);
        // each term is a difference of unit-weight permutations, so the
        // density annihilates the all-equal state
        let v = d.entry(0, 0).constant_term();
        assert!(v.is_zero());
        assert!(!d.is_zero());
    }
}
