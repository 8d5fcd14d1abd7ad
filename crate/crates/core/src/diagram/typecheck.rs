use std::collections::HashMap;

use super::ast::{Node, NodeKind, Obj, Program, Span};
use super::env::Environment;
use super::{TypeError, TypeErrorKind};
use crate::finstoch::{FinSet, WireList};
use crate::grouphopf::FiniteGroup;

/// A leaf with its objects resolved.
#[derive(Clone, Debug)]
pub enum Leaf {
    Id(WireList),
    Swap(FinSet, FinSet),
    Copy(FinSet),
    Del(FinSet),
    Unif(FinSet),
    Mult(FiniteGroup),
    Unit(FiniteGroup),
    Inv(FiniteGroup),
    Act(FinSet, FiniteGroup),
    Generator(String),
}

#[derive(Clone, Debug)]
pub enum TypedKind {
    Seq(Vec<Typed>),
    Par(Vec<Typed>),
    Leaf(Leaf),
    /// A `let`-bound name, with the binding's typed body.
    Let(String, Box<Typed>),
}

/// A node annotated with its interface.
#[derive(Clone, Debug)]
pub struct Typed {
    pub kind: TypedKind,
    pub dom: WireList,
    pub cod: WireList,
    pub span: Span,
}

pub type TypedDiagram = Typed;

pub fn typecheck(prog: &Program, env: &Environment) -> Result<TypedDiagram, TypeError> {
    let mut lets: HashMap<String, Typed> = HashMap::new();
    for d in &prog.decls {
        if env.contains(&d.name) || lets.contains_key(&d.name) {
            return Err(TypeError {
                span: d.span,
                kind: TypeErrorKind::Duplicate(d.name.clone()),
            });
        }
        let t = check(&d.body, env, &lets)?;
        lets.insert(d.name.clone(), t);
    }
    check(&prog.body, env, &lets)
}

fn obj(o: &Obj, span: Span, env: &Environment) -> Result<FinSet, TypeError> {
    match o {
        Obj::Int(n) => FinSet::new(*n).map_err(|_| TypeError {
            span,
            kind: TypeErrorKind::EmptyObject,
        }),
        Obj::Named(s) => env.object(s).map(|e| e.set.clone()).ok_or_else(|| TypeError {
            span,
            kind: TypeErrorKind::Unbound(s.clone()),
        }),
    }
}

fn group(o: &Obj, span: Span, env: &Environment) -> Result<FiniteGroup, TypeError> {
    obj(o, span, env)?;
    match o {
        Obj::Named(s) => env.object(s).and_then(|e| e.group.clone()),
        Obj::Int(_) => None,
    }
    .ok_or_else(|| TypeError {
        span,
        kind: TypeErrorKind::MissingGroup(o.to_string()),
    })
}

fn check(node: &Node, env: &Environment, lets: &HashMap<String, Typed>) -> Result<Typed, TypeError> {
    let span = node.span;
    let one = |s: &FinSet| WireList::single(s.clone());
    let typed = |leaf: Leaf, dom: WireList, cod: WireList| Typed {
        kind: TypedKind::Leaf(leaf),
        dom,
        cod,
        span,
    };
    Ok(match &node.kind {
        NodeKind::Seq(items) => {
            let children = items
                .iter()
                .map(|c| check(c, env, lets))
                .collect::<Result<Vec<_>, _>>()?;
            for w in children.windows(2) {
                if !w[0].cod.same_shape(&w[1].dom) {
                    return Err(TypeError {
                        span: w[1].span,
                        kind: TypeErrorKind::Mismatch {
                            left: w[0].cod.clone(),
                            right: w[1].dom.clone(),
                        },
                    });
                }
            }
            Typed {
                dom: children[0].dom.clone(),
                cod: children[children.len() - 1].cod.clone(),
                kind: TypedKind::Seq(children),
                span,
            }
        }
        NodeKind::Par(items) => {
            let children = items
                .iter()
                .map(|c| check(c, env, lets))
                .collect::<Result<Vec<_>, _>>()?;
            let dom = children.iter().fold(WireList::unit(), |a, c| a.concat(&c.dom));
            let cod = children.iter().fold(WireList::unit(), |a, c| a.concat(&c.cod));
            Typed {
                kind: TypedKind::Par(children),
                dom,
                cod,
                span,
            }
        }
        NodeKind::Id(a) => {
            let w = one(&obj(a, span, env)?);
            typed(Leaf::Id(w.clone()), w.clone(), w)
        }
        NodeKind::Swap(a, b) => {
            let (x, y) = (obj(a, span, env)?, obj(b, span, env)?);
            typed(
                Leaf::Swap(x.clone(), y.clone()),
                WireList::new(vec![x.clone(), y.clone()]),
                WireList::new(vec![y, x]),
            )
        }
        NodeKind::Copy(a) => {
            let x = obj(a, span, env)?;
            typed(Leaf::Copy(x.clone()), one(&x), WireList::new(vec![x.clone(), x]))
        }
        NodeKind::Del(a) => {
            let x = obj(a, span, env)?;
            typed(Leaf::Del(x.clone()), one(&x), WireList::unit())
        }
        NodeKind::Unif(a) => {
            let g = group(a, span, env)?;
            let x = g.carrier().clone();
            typed(Leaf::Unif(x.clone()), WireList::unit(), one(&x))
        }
        NodeKind::Mult(a) => {
            let g = group(a, span, env)?;
            let x = g.carrier().clone();
            typed(Leaf::Mult(g), WireList::new(vec![x.clone(), x.clone()]), one(&x))
        }
        NodeKind::Unit(a) => {
            let g = group(a, span, env)?;
            let x = g.carrier().clone();
            typed(Leaf::Unit(g), WireList::unit(), one(&x))
        }
        NodeKind::Inv(a) => {
            let g = group(a, span, env)?;
            let x = g.carrier().clone();
            typed(Leaf::Inv(g), one(&x), one(&x))
        }
        NodeKind::Act(n, a) => {
            let zn = obj(n, span, env)?;
            let g = group(a, span, env)?;
            let x = g.carrier().clone();
            typed(Leaf::Act(zn.clone(), g), WireList::new(vec![zn, x.clone()]), one(&x))
        }
        NodeKind::Ref(name) => {
            if let Some(t) = lets.get(name) {
                Typed {
                    dom: t.dom.clone(),
                    cod: t.cod.clone(),
                    kind: TypedKind::Let(name.clone(), Box::new(t.clone())),
                    span,
                }
            } else if let Some(m) = env.morphism(name) {
                typed(Leaf::Generator(name.clone()), m.dom().clone(), m.cod().clone())
            } else {
                return Err(TypeError {
                    span,
                    kind: TypeErrorKind::Unbound(name.clone()),
                });
            }
        }
    })
}
