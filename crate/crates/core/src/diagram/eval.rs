use super::env::Environment;
use super::typecheck::{Leaf, Typed, TypedKind};
use crate::finstoch::{compose, tensor, FinStochError, Morphism, Structural, WireList};
use crate::grouphopf::group_generators;

/// Evaluates a type-checked term to its matrix.
pub fn eval(term: &Typed, env: &Environment) -> Result<Morphism, FinStochError> {
    match &term.kind {
        TypedKind::Seq(items) => {
            let mut acc = eval(&items[0], env)?;
            for c in &items[1..] {
                acc = compose(&eval(c, env)?, &acc)?;
            }
            Ok(acc)
        }
        TypedKind::Par(items) => {
            let mut acc = eval(&items[0], env)?;
            for c in &items[1..] {
                acc = tensor(&acc, &eval(c, env)?);
            }
            Ok(acc)
        }
        TypedKind::Let(_, body) => eval(body, env),
        TypedKind::Leaf(leaf) => leaf_morphism(leaf, env),
    }
}

fn leaf_morphism(leaf: &Leaf, env: &Environment) -> Result<Morphism, FinStochError> {
    let one = |s: &crate::finstoch::FinSet| WireList::single(s.clone());
    Ok(match leaf {
        Leaf::Id(w) => Morphism::identity(w),
        Leaf::Swap(a, b) => Morphism::structural(&Structural::Swap, &WireList::new(vec![a.clone(), b.clone()]))?,
        Leaf::Copy(a) => Morphism::copy(&one(a)),
        Leaf::Del(a) => Morphism::delete(&one(a)),
        Leaf::Unif(a) => Morphism::uniform(&one(a)),
        Leaf::Mult(g) => group_generators(g).mult,
        Leaf::Unit(g) => group_generators(g).unit,
        Leaf::Inv(g) => group_generators(g).inv,
        Leaf::Act(zn, g) => {
            let order = g.order();
            Morphism::deterministic(WireList::new(vec![zn.clone(), g.carrier().clone()]), g.wires(), |c| {
                g.pow(c % order, c / order)
            })?
        }
        Leaf::Generator(name) => env.morphism(name).cloned().expect("generator bound at type-check time"),
    })
}
