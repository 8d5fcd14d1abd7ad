//! Finite groups as Hopf algebras with integrals, and the module structure
//! used by Diffie-Hellman.
//!
//! A group with its copy/delete maps and the uniform distribution satisfies
//! six equations, from `Monoid` to `FreshKey` in [`Law`]; the action
//! `Z_n ⊗ G → G` of exponents satisfies four more. [`check_hopf`] and [`check_action`]
//! evaluate both sides of each and report the largest entrywise difference.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finstoch::{
    compose, max_abs_diff, tensor, FinSet, FinStochError, Flavor, Morphism, Structural, Tolerance, WireList,
};

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("group order must be at least 1")]
    Empty,
    #[error("Cayley table row {row} has {found} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("Cayley table entry {value} at ({row}, {col}) is out of range")]
    OutOfRange { row: usize, col: usize, value: usize },
    #[error("Cayley table is not a Latin square (row or column {0} repeats an element)")]
    NotLatin(usize),
    #[error("no two-sided unit element")]
    NoUnit,
    #[error("element {0} has no two-sided inverse")]
    NoInverse(usize),
    #[error("product is not associative at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("element {0} does not generate the group")]
    NotGenerator(usize),
    #[error("exponent set has {found} elements; it must equal the group order {order}")]
    ModulusMismatch { order: usize, found: usize },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("unknown group spec `{0}` (expected cyclic:N, klein4, sym:3 or a JSON file)")]
    BadSpec(String),
    #[error("reading group file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing group file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    FinStoch(#[from] FinStochError),
}

/// A finite group given by its Cayley table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    carrier: FinSet,
    /// `cayley[x * n + y]` is the index of `x·y`.
    cayley: Vec<usize>,
    unit: usize,
    inverse: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TableFile {
    Bare(Vec<Vec<usize>>),
    Full {
        table: Vec<Vec<usize>>,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
}

impl FiniteGroup {
    /// Validates the table (Latin square, unit, inverses, associativity).
    pub fn from_table(table: Vec<Vec<usize>>, labels: Option<Vec<String>>) -> Result<Self, GroupError> {
        let g = Self::build(table, labels)?;
        let n = g.order();
        for k in 0..n {
            let mut row = vec![false; n];
            let mut col = vec![false; n];
            for j in 0..n {
                if std::mem::replace(&mut row[g.mul(k, j)], true) || std::mem::replace(&mut col[g.mul(j, k)], true) {
                    return Err(GroupError::NotLatin(k));
                }
            }
        }
        let unit = (0..n)
            .find(|&e| (0..n).all(|x| g.mul(e, x) == x && g.mul(x, e) == x))
            .ok_or(GroupError::NoUnit)?;
        let mut inverse = vec![0; n];
        for (x, inv) in inverse.iter_mut().enumerate() {
            *inv = (0..n)
                .find(|&y| g.mul(x, y) == unit && g.mul(y, x) == unit)
                .ok_or(GroupError::NoInverse(x))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c)) {
                        return Err(GroupError::NotAssociative(a, b, c));
                    }
                }
            }
        }
        Ok(FiniteGroup { unit, inverse, ..g })
    }

    /// Accepts any square table with in-range entries. Unit and inverses are
    /// filled in on a best-effort basis so that generators can still be
    /// built for negative tests.
    pub fn from_table_unchecked(table: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let g = Self::build(table, None)?;
        let n = g.order();
        let unit = (0..n)
            .find(|&e| (0..n).all(|x| g.mul(e, x) == x && g.mul(x, e) == x))
            .or_else(|| (0..n).find(|&e| (0..n).all(|x| g.mul(e, x) == x)))
            .unwrap_or(0);
        let inverse = (0..n)
            .map(|x| (0..n).find(|&y| g.mul(x, y) == unit).unwrap_or(x))
            .collect();
        Ok(FiniteGroup { unit, inverse, ..g })
    }

    fn build(table: Vec<Vec<usize>>, labels: Option<Vec<String>>) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::Empty);
        }
        let mut cayley = Vec::with_capacity(n * n);
        for (row, r) in table.iter().enumerate() {
            if r.len() != n {
                return Err(GroupError::Ragged {
                    row,
                    expected: n,
                    found: r.len(),
                });
            }
            for (col, &value) in r.iter().enumerate() {
                if value >= n {
                    return Err(GroupError::OutOfRange { row, col, value });
                }
                cayley.push(value);
            }
        }
        let carrier = match labels {
            Some(l) => FinSet::new(n)?.with_labels(l)?,
            None => FinSet::new(n)?,
        };
        Ok(FiniteGroup {
            carrier,
            cayley,
            unit: 0,
            inverse: (0..n).collect(),
        })
    }

    /// `Z_n` under addition; element `k` is the residue `k`.
    pub fn cyclic(n: usize) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::Empty);
        }
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(table, None)
    }

    /// `Z_2 × Z_2`, elements encoded as two bits.
    pub fn klein4() -> Self {
        let table = (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
        Self::from_table(table, None).expect("Klein four-group is a group")
    }

    /// The symmetric group on three letters, elements in lexicographic order
    /// of their one-line notation; product is composition `(x·y)(i) = x(y(i))`.
    pub fn sym3() -> Self {
        let perms: Vec<[usize; 3]> = vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).expect("closed");
        let table = perms
            .iter()
            .map(|x| perms.iter().map(|y| index([x[y[0]], x[y[1]], x[y[2]]])).collect())
            .collect();
        let labels = perms.iter().map(|p| format!("{}{}{}", p[0], p[1], p[2])).collect();
        Self::from_table(table, Some(labels)).expect("S3 is a group")
    }

    /// `Z_p^*` under multiplication; element `k` is the residue `k + 1`.
    pub fn multiplicative(p: u64) -> Result<Self, GroupError> {
        if p < 2 || (2..p).take_while(|d| d * d <= p).any(|d| p % d == 0) {
            return Err(GroupError::NotPrime(p));
        }
        let n = (p - 1) as usize;
        let table = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| (((a as u64 + 1) * (b as u64 + 1)) % p - 1) as usize)
                    .collect()
            })
            .collect();
        let labels = (1..p).map(|v| v.to_string()).collect();
        Self::from_table(table, Some(labels))
    }

    /// Parses `cyclic:N`, `klein4`, `sym:3`, or reads a JSON Cayley table
    /// (either a bare `n×n` array or `{"table": ..., "labels": ...}`).
    pub fn from_spec(spec: &str) -> Result<Self, GroupError> {
        if let Some(n) = spec.strip_prefix("cyclic:") {
            let n: usize = n.trim().parse().map_err(|_| GroupError::BadSpec(spec.into()))?;
            return Self::cyclic(n);
        }
        match spec {
            "klein4" => return Ok(Self::klein4()),
            "sym:3" => return Ok(Self::sym3()),
            _ => {}
        }
        if spec.ends_with(".json") || Path::new(spec).is_file() {
            let text = std::fs::read_to_string(spec)?;
            return Self::from_json(&text);
        }
        Err(GroupError::BadSpec(spec.into()))
    }

    pub fn from_json(text: &str) -> Result<Self, GroupError> {
        match serde_json::from_str::<TableFile>(text)? {
            TableFile::Bare(table) => Self::from_table(table, None),
            TableFile::Full { table, labels } => Self::from_table(table, labels),
        }
    }

    /// Reads a JSON Cayley table without checking the group laws.
    pub fn from_json_unchecked(text: &str) -> Result<Self, GroupError> {
        match serde_json::from_str::<TableFile>(text)? {
            TableFile::Bare(table) | TableFile::Full { table, .. } => Self::from_table_unchecked(table),
        }
    }

    pub fn order(&self) -> usize {
        self.carrier.size()
    }

    pub fn carrier(&self) -> &FinSet {
        &self.carrier
    }

    pub fn wires(&self) -> WireList {
        WireList::single(self.carrier.clone())
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.cayley[x * self.order() + y]
    }

    pub fn unit(&self) -> usize {
        self.unit
    }

    pub fn inv(&self, x: usize) -> usize {
        self.inverse[x]
    }

    /// `h^a` by repeated multiplication.
    pub fn pow(&self, h: usize, a: usize) -> usize {
        (0..a).fold(self.unit, |acc, _| self.mul(acc, h))
    }

    pub fn label(&self, x: usize) -> String {
        self.carrier.label(x)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.carrier
            .index_of(label)
            .or_else(|| label.parse::<usize>().ok().filter(|&k| k < self.order()))
    }

    /// Whether the powers of `g` cover the group.
    pub fn generates(&self, g: usize) -> bool {
        let n = self.order();
        let mut seen = vec![false; n];
        let mut h = self.unit;
        for _ in 0..n {
            seen[h] = true;
            h = self.mul(h, g);
        }
        seen.into_iter().all(|s| s)
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }
}

/// The Hopf-algebra generators of a group.
#[derive(Clone, Debug)]
pub struct GroupGens {
    pub mult: Morphism,
    pub unit: Morphism,
    pub inv: Morphism,
    pub copy: Morphism,
    pub delete: Morphism,
    pub integral: Morphism,
}

pub fn group_generators(g: &FiniteGroup) -> GroupGens {
    let x = g.wires();
    let xx = x.concat(&x);
    let n = g.order();
    GroupGens {
        mult: Morphism::deterministic(xx, x.clone(), |c| g.mul(c / n, c % n)).expect("in range"),
        unit: Morphism::point(&x, g.unit()).expect("in range"),
        inv: Morphism::deterministic(x.clone(), x.clone(), |c| g.inv(c)).expect("in range"),
        copy: Morphism::copy(&x),
        delete: Morphism::delete(&x),
        integral: Morphism::uniform(&x),
    }
}

/// Exponent action of `Z_n` on a cyclic group, with the ring structure of
/// `Z_n` and the distinguished generator.
#[derive(Clone, Debug)]
pub struct ActionGens {
    pub modulus: FinSet,
    /// `act(a, h) = h^a`.
    pub act: Morphism,
    /// Uniform exponent.
    pub exp_rand: Morphism,
    pub gen_point: Morphism,
    /// Multiplication of exponents mod `n`.
    pub ring_mult: Morphism,
    /// The exponent `1` (or `0` when `n = 1`).
    pub ring_unit: Morphism,
}

pub fn action_generators(n_obj: &FinSet, g: &FiniteGroup, g_index: usize) -> Result<ActionGens, GroupError> {
    let n = n_obj.size();
    let order = g.order();
    if n != order {
        return Err(GroupError::ModulusMismatch { order, found: n });
    }
    if g_index >= order || !g.generates(g_index) {
        return Err(GroupError::NotGenerator(g_index));
    }
    let zn = WireList::single(n_obj.clone());
    let x = g.wires();
    let act = Morphism::deterministic(zn.concat(&x), x.clone(), |c| g.pow(c % order, c / order))?;
    let ring_mult = Morphism::deterministic(zn.concat(&zn), zn.clone(), |c| (c / n) * (c % n) % n)?;
    Ok(ActionGens {
        modulus: n_obj.clone(),
        act,
        exp_rand: Morphism::uniform(&zn),
        gen_point: Morphism::point(&x, g_index)?,
        ring_mult,
        ring_unit: Morphism::point(&zn, 1 % n)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Law {
    Monoid,
    Comonoid,
    Bialgebra,
    Antipode,
    Absorption,
    FreshKey,
    Module,
    Deterministic,
    RingCommutes,
    Cocommutative,
}

impl Law {
    pub fn description(self) -> &'static str {
        match self {
            Law::Monoid => "multiplication is associative and unital",
            Law::Comonoid => "copy is coassociative and counital",
            Law::Bialgebra => "copy is a monoid homomorphism",
            Law::Antipode => "inverse is an antipode",
            Law::Absorption => "uniform noise absorbs multiplication",
            Law::FreshKey => "deleting a fresh key does nothing",
            Law::Module => "exponent action is a module",
            Law::Deterministic => "action and generator are deterministic",
            Law::RingCommutes => "exponent multiplication commutes",
            Law::Cocommutative => "copy is cocommutative",
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Residual per equation at a tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub residuals: Vec<(Law, f64)>,
    pub tol: f64,
}

impl AxiomReport {
    pub fn residual(&self, law: Law) -> Option<f64> {
        self.residuals.iter().find(|(l, _)| *l == law).map(|(_, r)| *r)
    }

    pub fn passes(&self, law: Law) -> bool {
        self.residual(law).is_some_and(|r| r <= self.tol)
    }

    pub fn all_pass(&self) -> bool {
        self.residuals.iter().all(|(_, r)| *r <= self.tol)
    }

    pub fn failing(&self) -> Vec<Law> {
        self.residuals
            .iter()
            .filter(|(_, r)| *r > self.tol)
            .map(|(l, _)| *l)
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }
}

fn diff(a: &Morphism, b: &Morphism) -> f64 {
    max_abs_diff(a, b).unwrap_or(f64::INFINITY)
}

fn c(g: &Morphism, f: &Morphism) -> Morphism {
    // only called on shapes fixed by construction
    compose(g, f).expect("equation sides are well-typed")
}

pub fn check_hopf(gens: &GroupGens, tol: Tolerance) -> AxiomReport {
    let x = gens.copy.dom().clone();
    let id = Morphism::identity(&x);
    let GroupGens {
        mult,
        unit,
        inv,
        copy,
        delete,
        integral,
    } = gens;

    let assoc = diff(&c(mult, &tensor(mult, &id)), &c(mult, &tensor(&id, mult)));
    let left_unit = diff(&c(mult, &tensor(unit, &id)), &id);
    let right_unit = diff(&c(mult, &tensor(&id, unit)), &id);

    let coassoc = diff(&c(&tensor(copy, &id), copy), &c(&tensor(&id, copy), copy));
    let left_counit = diff(&c(&tensor(delete, &id), copy), &id);
    let right_counit = diff(&c(&tensor(&id, delete), copy), &id);

    let swap = Morphism::structural(&Structural::Swap, &x.concat(&x)).expect("two wires");
    let middle = tensor(&tensor(&id, &swap), &id);
    let bialg = diff(
        &c(copy, mult),
        &c(&tensor(mult, mult), &c(&middle, &tensor(copy, copy))),
    );

    let unit_del = c(unit, delete);
    let antipode_r = diff(&c(mult, &c(&tensor(&id, inv), copy)), &unit_del);
    let antipode_l = diff(&c(mult, &c(&tensor(inv, &id), copy)), &unit_del);

    let int_del = c(integral, delete);
    let absorb_l = diff(&c(mult, &tensor(integral, &id)), &int_del);
    let absorb_r = diff(&c(mult, &tensor(&id, integral)), &int_del);

    let normal = diff(&c(delete, integral), &Morphism::identity(&WireList::unit()));

    AxiomReport {
        residuals: vec![
            (Law::Monoid, assoc.max(left_unit).max(right_unit)),
            (Law::Comonoid, coassoc.max(left_counit).max(right_counit)),
            (Law::Bialgebra, bialg),
            (Law::Antipode, antipode_r.max(antipode_l)),
            (Law::Absorption, absorb_l.max(absorb_r)),
            (Law::FreshKey, normal),
        ],
        tol: tol.eps,
    }
}

pub fn check_action(gens: &GroupGens, act: &ActionGens, tol: Tolerance) -> AxiomReport {
    let x = gens.copy.dom().clone();
    let zn = WireList::single(act.modulus.clone());
    let id_g = Morphism::identity(&x);
    let id_z = Morphism::identity(&zn);

    // act(a·b, h) = act(a, act(b, h)) and act(1, h) = h
    let module_mul = diff(
        &c(&act.act, &tensor(&act.ring_mult, &id_g)),
        &c(&act.act, &tensor(&id_z, &act.act)),
    );
    let module_unit = diff(&c(&act.act, &tensor(&act.ring_unit, &id_g)), &id_g);

    // copying the output of a deterministic map equals running it twice
    let zg = zn.concat(&x);
    let copy_zg = Morphism::copy(&zg);
    let det_act = diff(&c(&gens.copy, &act.act), &c(&tensor(&act.act, &act.act), &copy_zg));
    let det_gen = diff(&c(&gens.copy, &act.gen_point), &tensor(&act.gen_point, &act.gen_point));

    let swap_z = Morphism::structural(&Structural::Swap, &zn.concat(&zn)).expect("two wires");
    let comm = diff(&c(&act.ring_mult, &swap_z), &act.ring_mult);

    let swap_g = Morphism::structural(&Structural::Swap, &x.concat(&x)).expect("two wires");
    let cocomm = diff(&c(&swap_g, &gens.copy), &gens.copy);

    AxiomReport {
        residuals: vec![
            (Law::Module, module_mul.max(module_unit)),
            (Law::Deterministic, det_act.max(det_gen)),
            (Law::RingCommutes, comm),
            (Law::Cocommutative, cocomm),
        ],
        tol: tol.eps,
    }
}

/// A copy of `m` mixed with uniform noise on its codomain.
pub fn noisy(m: &Morphism, weight: f64) -> Morphism {
    let rows = m.rows() as f64;
    let v = m.matrix().iter().map(|&e| (1.0 - weight) * e + weight / rows).collect();
    Morphism::new(m.dom().clone(), m.cod().clone(), v, Flavor::Stochastic).expect("mixture stays stochastic")
}
