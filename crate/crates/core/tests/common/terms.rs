use catsec::diagram::{eval, parse, typecheck, Environment, Node, NodeKind, Obj};
use catsec::finstoch::tensor_all;
use catsec::grouphopf::FiniteGroup;
use catsec::{Morphism, WireList};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::*;

pub fn data(name: &str) -> String {
    format!("{}/examples/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn env() -> Environment {
    let mut e = Environment::new();
    e.add_group("G", FiniteGroup::cyclic(3).unwrap()).unwrap();
    e.add_group("K", FiniteGroup::klein4()).unwrap();
    e.add_object("B", 2).unwrap();
    e.add_morphism("flip", Morphism::deterministic(wl(&[2]), wl(&[2]), |x| 1 - x).unwrap())
        .unwrap();
    e
}

/// Independent leaf semantics for the objects of `env()`.
pub fn table_morphism(n: usize, op: impl Fn(usize, usize) -> usize) -> Morphism {
    Morphism::deterministic(wl(&[n, n]), wl(&[n]), |c| op(c / n, c % n)).unwrap()
}

#[derive(Clone, Copy)]
pub enum Ob {
    G,
    K,
    B,
}

impl Ob {
    pub fn name(self) -> &'static str {
        match self {
            Ob::G => "G",
            Ob::K => "K",
            Ob::B => "B",
        }
    }
    pub fn size(self) -> usize {
        match self {
            Ob::G => 3,
            Ob::B => 2,
            Ob::K => 4,
        }
    }
    pub fn group(self) -> bool {
        !matches!(self, Ob::B)
    }
    pub fn mult(self) -> Morphism {
        match self {
            Ob::G => table_morphism(3, |a, b| (a + b) % 3),
            _ => table_morphism(4, |a, b| a ^ b),
        }
    }
    pub fn inv(self) -> Morphism {
        let n = self.size();
        match self {
            Ob::G => Morphism::deterministic(wl(&[n]), wl(&[n]), |a| (3 - a) % 3).unwrap(),
            _ => Morphism::identity(&wl(&[n])),
        }
    }
}

pub fn named(o: Ob) -> Obj {
    Obj::Named(o.name().into())
}

pub fn node(k: NodeKind) -> Node {
    Node::new(k)
}

/// One layer acting on `dom`, with its expected semantics and codomain.
pub fn layer(r: &mut ChaCha8Rng, dom: &[Ob]) -> (Node, Morphism, Vec<Ob>) {
    let mut parts = Vec::new();
    let mut cod = Vec::new();
    let mut i = 0;
    if dom.is_empty() {
        let o = *[Ob::G, Ob::K].choose(r).unwrap();
        let (n, m) = if r.gen_bool(0.5) {
            (NodeKind::Unit(named(o)), Morphism::point(&wl(&[o.size()]), 0).unwrap())
        } else {
            (NodeKind::Unif(named(o)), Morphism::uniform(&wl(&[o.size()])))
        };
        return (node(n), m, vec![o]);
    }
    while i < dom.len() {
        let o = dom[i];
        let pair = i + 1 < dom.len() && r.gen_bool(0.3);
        if pair {
            let p = dom[i + 1];
            if o.group() && o.name() == p.name() && r.gen_bool(0.6) {
                parts.push((node(NodeKind::Mult(named(o))), o.mult()));
                cod.push(o);
            } else {
                let m = Morphism::deterministic(wl(&[o.size(), p.size()]), wl(&[p.size(), o.size()]), |c| {
                    let (a, b) = (c / p.size(), c % p.size());
                    b * o.size() + a
                })
                .unwrap();
                parts.push((node(NodeKind::Swap(named(o), named(p))), m));
                cod.extend([p, o]);
            }
            i += 2;
            continue;
        }
        let x = wl(&[o.size()]);
        let choice = r.gen_range(0..6);
        let (n, m, out): (NodeKind, Morphism, Vec<Ob>) = match choice {
            0 if dom.len() < 4 => (NodeKind::Copy(named(o)), copy_oracle(o.size()), vec![o, o]),
            1 if dom.len() > 1 => (NodeKind::Del(named(o)), Morphism::delete(&x), vec![]),
            2 if o.group() => (NodeKind::Inv(named(o)), o.inv(), vec![o]),
            3 if matches!(o, Ob::B) => (
                NodeKind::Ref("flip".into()),
                Morphism::deterministic(x.clone(), x.clone(), |a| 1 - a).unwrap(),
                vec![o],
            ),
            4 => (NodeKind::Id(Obj::Int(o.size())), Morphism::identity(&x), vec![o]),
            _ => (NodeKind::Id(named(o)), Morphism::identity(&x), vec![o]),
        };
        parts.push((node(n), m));
        cod.extend(out);
        i += 1;
    }
    let m = tensor_all(parts.iter().map(|p| &p.1));
    let n = if parts.len() == 1 {
        parts.pop().unwrap().0
    } else {
        node(NodeKind::Par(parts.into_iter().map(|p| p.0).collect()))
    };
    (n, m, cod)
}

pub fn copy_oracle(n: usize) -> Morphism {
    Morphism::deterministic(wl(&[n]), wl(&[n, n]), |a| a * n + a).unwrap()
}

pub fn random_term(r: &mut ChaCha8Rng) -> (Vec<Node>, Vec<Morphism>, WireList) {
    let k = r.gen_range(1..=3);
    let dom: Vec<Ob> = (0..k).map(|_| *[Ob::G, Ob::K, Ob::B].choose(r).unwrap()).collect();
    let dom_wl = wl(&dom.iter().map(|o| o.size()).collect::<Vec<_>>());
    let mut cur = dom;
    let (mut nodes, mut ms) = (Vec::new(), Vec::new());
    for _ in 0..r.gen_range(1..=5) {
        let (n, m, cod) = layer(r, &cur);
        nodes.push(n);
        ms.push(m);
        cur = cod;
    }
    (nodes, ms, dom_wl)
}

pub fn seq(nodes: Vec<Node>) -> Node {
    if nodes.len() == 1 {
        nodes.into_iter().next().unwrap()
    } else {
        node(NodeKind::Seq(nodes))
    }
}

pub fn run(n: &Node, env: &Environment) -> Morphism {
    let p = parse(&n.to_string()).unwrap_or_else(|e| panic!("{n}: {e}"));
    eval(&typecheck(&p, env).unwrap_or_else(|e| panic!("{n}: {e}")), env).unwrap()
}
