//! Set-theoretic reference implementations of the second, fifth and sixth
//! approximation pairs, plus entrywise `Γ` and `Π`.
//!
//! Everything here works on `BTreeSet`s straight from the element member
//! lists and never touches the bit-packed kernels.

use std::collections::BTreeSet;

use crate::boolmat::BoolMatrix;
use crate::characteristic::{ApproxResult, Operator};
use crate::covering::{CoveringSpace, QuerySet};
use crate::error::Result;

type Set = BTreeSet<usize>;

fn element_sets(space: &CoveringSpace) -> Vec<Set> {
    space
        .elements()
        .iter()
        .map(|e| e.members.iter().copied().collect())
        .collect()
}

fn universe(space: &CoveringSpace) -> Set {
    (0..space.num_objects()).collect()
}

fn neighborhoods(space: &CoveringSpace) -> Vec<Set> {
    let elements = element_sets(space);
    (0..space.num_objects())
        .map(|x| {
            let mut n = universe(space);
            for c in elements.iter().filter(|c| c.contains(&x)) {
                n = n.intersection(c).copied().collect();
            }
            n
        })
        .collect()
}

fn query(space: &CoveringSpace, x: &QuerySet) -> Result<Set> {
    Ok(x.resolve(space)?.into_iter().collect())
}

fn second_upper(elements: &[Set], x: &Set) -> Set {
    let mut out = Set::new();
    for c in elements {
        if !c.is_disjoint(x) {
            out.extend(c.iter().copied());
        }
    }
    out
}

fn finish(
    space: &CoveringSpace,
    x: &QuerySet,
    ops: (Operator, Operator),
    sets: (Set, Set),
) -> (ApproxResult, ApproxResult) {
    let upper: Vec<usize> = sets.0.into_iter().collect();
    let lower: Vec<usize> = sets.1.into_iter().collect();
    (
        ApproxResult::from_ids(space, ops.0, x, &upper),
        ApproxResult::from_ids(space, ops.1, x, &lower),
    )
}

/// `SH(X) = ⋃{C : C ∩ X ≠ ∅}`, `SL(X) = SH(Xᶜ)ᶜ`.
pub fn oracle_second(space: &CoveringSpace, x: &QuerySet) -> Result<(ApproxResult, ApproxResult)> {
    let xs = query(space, x)?;
    let elements = element_sets(space);
    let u = universe(space);
    let upper = second_upper(&elements, &xs);
    let xc: Set = u.difference(&xs).copied().collect();
    let lower = u.difference(&second_upper(&elements, &xc)).copied().collect();
    Ok(finish(space, x, (Operator::SH, Operator::SL), (upper, lower)))
}

/// `IH(X) = ⋃{N(x) : N(x) ∩ X ≠ ∅}`, `IL(X) = ⋃{N(x) : N(x) ⊆ X}`.
pub fn oracle_fifth(space: &CoveringSpace, x: &QuerySet) -> Result<(ApproxResult, ApproxResult)> {
    let xs = query(space, x)?;
    let mut upper = Set::new();
    let mut lower = Set::new();
    for n in neighborhoods(space) {
        if !n.is_disjoint(&xs) {
            upper.extend(n.iter().copied());
        }
        if n.is_subset(&xs) {
            lower.extend(n.iter().copied());
        }
    }
    Ok(finish(space, x, (Operator::IH, Operator::IL), (upper, lower)))
}

/// `XH(X) = {x : N(x) ∩ X ≠ ∅}`, `XL(X) = {x : N(x) ⊆ X}`.
pub fn oracle_sixth(space: &CoveringSpace, x: &QuerySet) -> Result<(ApproxResult, ApproxResult)> {
    let xs = query(space, x)?;
    let mut upper = Set::new();
    let mut lower = Set::new();
    for (i, n) in neighborhoods(space).iter().enumerate() {
        if !n.is_disjoint(&xs) {
            upper.insert(i);
        }
        if n.is_subset(&xs) {
            lower.insert(i);
        }
    }
    Ok(finish(space, x, (Operator::XH, Operator::XL), (upper, lower)))
}

/// `Γ(i, j) = 1` iff some element contains both `x_i` and `x_j`;
/// `Π(i, j) = 1` iff `x_j ∈ N(x_i)`.
pub fn oracle_char_matrices(space: &CoveringSpace) -> Result<(BoolMatrix, BoolMatrix)> {
    space.ensure_valid()?;
    let n = space.num_objects();
    let elements = element_sets(space);
    let gamma = BoolMatrix::from_fn(n, n, |i, j| elements.iter().any(|c| c.contains(&i) && c.contains(&j)));
    let hoods = neighborhoods(space);
    let pi = BoolMatrix::from_fn(n, n, |i, j| hoods[i].contains(&j));
    Ok((gamma, pi))
}

/// Dispatches one operator through the set-theoretic definitions.
pub fn oracle_approx(space: &CoveringSpace, op: Operator, x: &QuerySet) -> Result<ApproxResult> {
    let (upper, lower) = match op {
        Operator::SH | Operator::SL => oracle_second(space, x)?,
        Operator::IH | Operator::IL => oracle_fifth(space, x)?,
        Operator::XH | Operator::XL => oracle_sixth(space, x)?,
    };
    Ok(if upper.op == op { upper } else { lower })
}
