//! Impossibility checks for two- and three-party functionalities.
//!
//! A two-party functionality `r` that can be realised from nothing must be
//! splittable: two copies of `r` joined in the middle by a causal machine
//! `g` (reading Bob's outputs of the first copy and Alice's outputs of the
//! second, writing their inputs) reproduce `r` itself. The distance from
//! splittability is a linear program once `g` is written in sequence form.
//!
//! For three parties the check is the simulator system obtained by letting
//! each party in turn cheat inside a ring of four honest machines: the
//! three environment views must agree, which broadcast cannot achieve.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::causal::{group_steps, CausalShape, Event};
use crate::finstoch::{tv_distance, unflatten, FinStochError, Flavor, Morphism, WireList};
use crate::lpsolve::{min_tv_fit, AffineKernel, DistanceLp, LpError, LpStatus, SimulatorShape};
use crate::network::{Network, Var};
use crate::resource::{Dir, PartiteResource, Port, ResourceError};

#[derive(Debug, Error)]
pub enum NogoError {
    #[error("splittability needs two parties, `{0}` has {1}")]
    NotBipartite(String, usize),
    #[error("the tripartite check needs three parties, `{0}` has {1}")]
    NotTripartite(String, usize),
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error(transparent)]
    FinStoch(#[from] FinStochError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

pub type Result<T, E = NogoError> = std::result::Result<T, E>;

/// A named multi-party resource. The parties play the roles Alice, Bob
/// (and Charlie) in the order they are listed.
#[derive(Clone, Debug, PartialEq)]
pub struct Functionality {
    pub name: String,
    pub resource: PartiteResource,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    BitCommitment,
    ObliviousTransfer,
    Broadcast,
    PerfectChannel,
    ProductState,
    LocalBits,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 6] = [
        InstanceKind::BitCommitment,
        InstanceKind::ObliviousTransfer,
        InstanceKind::Broadcast,
        InstanceKind::PerfectChannel,
        InstanceKind::ProductState,
        InstanceKind::LocalBits,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::BitCommitment => "bit_commitment",
            InstanceKind::ObliviousTransfer => "oblivious_transfer",
            InstanceKind::Broadcast => "broadcast",
            InstanceKind::PerfectChannel => "perfect_channel",
            InstanceKind::ProductState => "product_state",
            InstanceKind::LocalBits => "local_bits",
        }
    }
}

impl FromStr for InstanceKind {
    type Err = NogoError;

    fn from_str(s: &str) -> Result<Self> {
        InstanceKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| NogoError::UnknownInstance(s.to_string()))
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn names(ns: &[&str]) -> Vec<String> {
    ns.iter().map(|s| s.to_string()).collect()
}

fn wl(sizes: &[usize]) -> WireList {
    WireList::from_sizes(sizes).expect("nonzero sizes")
}

/// The bit value `⊥` of a commitment's reveal output.
pub const BOTTOM: usize = 2;

pub fn build_instance(kind: InstanceKind) -> Functionality {
    let two = names(&["Alice", "Bob"]);
    let three = names(&["Alice", "Bob", "Charlie"]);
    let (parties, ports, kernel) = match kind {
        InstanceKind::BitCommitment => {
            let ports = vec![
                Port::new("Alice", Dir::In, 1, 2).labelled("b"),
                Port::new("Bob", Dir::Out, 1, 1).labelled("receipt"),
                Port::new("Alice", Dir::In, 2, 2).labelled("open"),
                Port::new("Bob", Dir::Out, 2, 3).labelled("m"),
            ];
            // inputs (b, open), outputs (receipt, m)
            let k = Morphism::deterministic(wl(&[2, 2]), wl(&[1, 3]), |c| if c % 2 == 1 { c / 2 } else { BOTTOM });
            (two, ports, k)
        }
        InstanceKind::ObliviousTransfer => {
            let ports = vec![
                Port::new("Alice", Dir::In, 1, 2).labelled("x0"),
                Port::new("Alice", Dir::In, 1, 2).labelled("x1"),
                Port::new("Bob", Dir::In, 1, 2).labelled("c"),
                Port::new("Bob", Dir::Out, 1, 2).labelled("x_c"),
            ];
            let k = Morphism::deterministic(wl(&[2, 2, 2]), wl(&[2]), |col| {
                let d = unflatten(&[2, 2, 2], col);
                d[d[2]]
            });
            (two, ports, k)
        }
        InstanceKind::Broadcast => {
            let ports = vec![
                Port::new("Bob", Dir::In, 1, 2).labelled("b"),
                Port::new("Alice", Dir::Out, 1, 2),
                Port::new("Charlie", Dir::Out, 1, 2),
            ];
            (three, ports, Ok(Morphism::copy(&wl(&[2]))))
        }
        InstanceKind::PerfectChannel => {
            let ports = vec![Port::new("Alice", Dir::In, 1, 2), Port::new("Bob", Dir::Out, 1, 2)];
            (two, ports, Ok(Morphism::identity(&wl(&[2]))))
        }
        InstanceKind::ProductState => {
            let ports = vec![Port::new("Alice", Dir::Out, 1, 2), Port::new("Bob", Dir::Out, 1, 2)];
            (two, ports, Ok(Morphism::uniform(&wl(&[2, 2]))))
        }
        InstanceKind::LocalBits => {
            let ports = vec![
                Port::new("Alice", Dir::Out, 1, 2),
                Port::new("Bob", Dir::Out, 1, 2),
                Port::new("Charlie", Dir::Out, 1, 2),
            ];
            (three, ports, Ok(Morphism::uniform(&wl(&[2, 2, 2]))))
        }
    };
    let kernel = kernel.expect("instance kernels are well formed");
    Functionality {
        name: kind.name().to_string(),
        resource: PartiteResource::new(parties, ports, kernel).expect("instances are causal"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// One LP over the sequence form of a causal `g`.
    #[serde(rename = "lp-exact")]
    LpExact,
    /// Alternating LPs over the stages of `g` with bounded memory.
    #[serde(rename = "alternating-lp")]
    AlternatingLp,
    /// One LP over unconstrained `g`; an ablation, not a valid check.
    #[serde(rename = "lp-acausal")]
    Acausal,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::LpExact => "lp-exact",
            Method::AlternatingLp => "alternating-lp",
            Method::Acausal => "lp-acausal",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [Method::LpExact, Method::AlternatingLp, Method::Acausal]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchCfg {
    pub method: Method,
    pub restarts: usize,
    pub seed: u64,
    /// Memory size between stages for the alternating search.
    pub memory: usize,
    /// Alternation sweeps per restart.
    pub sweeps: usize,
}

impl Default for SearchCfg {
    fn default() -> Self {
        SearchCfg {
            method: Method::LpExact,
            restarts: 8,
            seed: 0,
            memory: 4,
            sweeps: 40,
        }
    }
}

/// Per round, which side of the middle machine moves first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RelayOrder {
    /// Query the first copy on Bob's side, then answer Alice's side.
    BobFirst,
    AliceFirst,
}

/// A port of the doubled network: `(copy, port index in r)`.
pub type SplitPort = (usize, usize);

/// The middle machine of a split, as a causal strategy.
#[derive(Clone, Debug)]
pub struct CausalEffect {
    pub orders: Vec<RelayOrder>,
    pub steps: Vec<(Vec<SplitPort>, Vec<SplitPort>)>,
    pub kernel: Morphism,
    /// Stage maps with their memory, when found by alternation.
    pub stages: Option<Vec<Morphism>>,
}

#[derive(Clone, Debug)]
pub enum Witness {
    Effect(CausalEffect),
    /// `s_A, s_B, s_C`; with `tie_middle` only columns where both middle
    /// inputs agree are compared.
    Simulators {
        sims: Vec<Morphism>,
        tie_middle: bool,
    },
}

#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub instance: String,
    pub method: Method,
    pub min_residual: f64,
    pub witness: Option<Witness>,
    pub restarts: usize,
    pub seed: u64,
    /// For the tripartite system: whether residual 0 is attainable.
    pub exact_status: Option<LpStatus>,
}

impl ResidualReport {
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "instance": self.instance,
            "method": self.method,
            "min_residual": self.min_residual,
            "witness_present": self.witness.is_some(),
            "restarts": self.restarts,
            "seed": self.seed,
        });
        if let Some(s) = self.exact_status {
            v["level0"] = serde_json::to_value(s).expect("status serialises");
        }
        v
    }
}

fn check_parties(r: &Functionality, n: usize) -> Result<()> {
    let k = r.resource.parties().len();
    if k == n {
        Ok(())
    } else if n == 2 {
        Err(NogoError::NotBipartite(r.name.clone(), k))
    } else {
        Err(NogoError::NotTripartite(r.name.clone(), k))
    }
}

/// Two copies of `r`; the outer ports are Alice's of copy 0 and Bob's of
/// copy 1, the rest face the middle machine.
struct SplitNet {
    net: Network,
    vars: [Vec<Var>; 2],
    outer_in: Vec<Var>,
    outer_out: Vec<Var>,
}

impl SplitNet {
    fn new(r: &PartiteResource) -> Self {
        let mut net = Network::new();
        let alice = &r.parties()[0];
        let vars: [Vec<Var>; 2] = [0, 1].map(|_| r.ports().iter().map(|p| net.var(p.size)).collect::<Vec<_>>());
        for c in &vars {
            let ins: Vec<Var> = r.port_ids(Dir::In).iter().map(|&i| c[i]).collect();
            let outs: Vec<Var> = r.port_ids(Dir::Out).iter().map(|&i| c[i]).collect();
            net.add_morphism(r.kernel(), &ins, &outs);
        }
        let outer = |dir| -> Vec<Var> {
            r.port_ids(dir)
                .into_iter()
                .map(|i| {
                    if &r.ports()[i].party == alice {
                        vars[0][i]
                    } else {
                        vars[1][i]
                    }
                })
                .collect()
        };
        let outer_in = outer(Dir::In);
        let outer_out = outer(Dir::Out);
        SplitNet {
            net,
            vars,
            outer_in,
            outer_out,
        }
    }

    fn var(&self, p: SplitPort) -> Var {
        self.vars[p.0][p.1]
    }

    fn vars(&self, ps: &[SplitPort]) -> Vec<Var> {
        ps.iter().map(|&p| self.var(p)).collect()
    }

    fn keep(&self) -> Vec<Var> {
        let mut k = self.outer_out.clone();
        k.extend(&self.outer_in);
        k
    }
}

fn split_steps(r: &PartiteResource, orders: &[RelayOrder]) -> Vec<(Vec<SplitPort>, Vec<SplitPort>)> {
    let (alice, bob) = (&r.parties()[0], &r.parties()[1]);
    let mut ev = Vec::new();
    for (t, order) in orders.iter().enumerate() {
        let round = t as u32 + 1;
        let at = |copy: usize, party: &str, dir| -> Vec<SplitPort> {
            r.ports_at(party, dir, round).into_iter().map(|i| (copy, i)).collect()
        };
        let bob_side = [Event::Emit(at(0, bob, Dir::In)), Event::Obs(at(0, bob, Dir::Out))];
        let alice_side = [Event::Emit(at(1, alice, Dir::In)), Event::Obs(at(1, alice, Dir::Out))];
        match order {
            RelayOrder::BobFirst => ev.extend(bob_side.into_iter().chain(alice_side)),
            RelayOrder::AliceFirst => ev.extend(alice_side.into_iter().chain(bob_side)),
        }
    }
    ev.retain(|e| match e {
        Event::Obs(v) | Event::Emit(v) => !v.is_empty(),
    });
    group_steps(&ev)
}

fn wires_of(r: &PartiteResource, ps: &[SplitPort]) -> WireList {
    r.wires_for(&ps.iter().map(|p| p.1).collect::<Vec<_>>())
}

fn shape_of(r: &PartiteResource, steps: &[(Vec<SplitPort>, Vec<SplitPort>)]) -> CausalShape {
    CausalShape::new(steps.iter().map(|(o, e)| (wires_of(r, o), wires_of(r, e))).collect())
}

fn flat<T: Clone>(steps: &[(Vec<T>, Vec<T>)]) -> (Vec<T>, Vec<T>) {
    let obs = steps.iter().flat_map(|s| s.0.clone()).collect();
    let emit = steps.iter().flat_map(|s| s.1.clone()).collect();
    (obs, emit)
}

fn all_orders(rounds: usize) -> Vec<Vec<RelayOrder>> {
    (0..1usize << rounds)
        .map(|mask| {
            (0..rounds)
                .map(|t| {
                    if mask >> (rounds - 1 - t) & 1 == 0 {
                        RelayOrder::BobFirst
                    } else {
                        RelayOrder::AliceFirst
                    }
                })
                .collect()
        })
        .collect()
}

/// The two-copy network closed by `effect`, as a kernel on `r`'s ports.
pub fn split_composite(r: &Functionality, effect: &CausalEffect) -> Result<Morphism> {
    check_parties(r, 2)?;
    let res = &r.resource;
    let mut sn = SplitNet::new(res);
    let (obs, emit) = flat(&effect.steps);
    let (o, e) = (sn.vars(&obs), sn.vars(&emit));
    sn.net.add_morphism(&effect.kernel, &o, &e);
    Ok(sn.net.contract_morphism(
        &sn.outer_in,
        &sn.outer_out,
        res.wires(Dir::In),
        res.wires(Dir::Out),
        Flavor::Nonneg,
    )?)
}

/// The affine map from the middle machine's entries to the composite.
fn split_map(r: &PartiteResource, steps: &[(Vec<SplitPort>, Vec<SplitPort>)]) -> Result<AffineKernel> {
    let sn = SplitNet::new(r);
    let (obs, emit) = flat(steps);
    let mut sym = sn.vars(&emit);
    sym.extend(sn.vars(&obs));
    let dense = sn.net.contract_linear(&sym, &sn.keep());
    let shape = shape_of(r, steps);
    let n = shape.dom().total_size() * shape.cod().total_size();
    Ok(AffineKernel::from_dense_linear(
        r.wires(Dir::In),
        r.wires(Dir::Out),
        n,
        &dense,
    )?)
}

/// Smallest channel distance between `r` and two copies of `r` joined by
/// a causal middle machine.
pub fn splittability_residual(r: &Functionality, cfg: &SearchCfg) -> Result<ResidualReport> {
    check_parties(r, 2)?;
    let res = &r.resource;
    let rounds = res.rounds() as usize;
    let mut best: Option<(f64, CausalEffect)> = None;
    let mut consider = |val: f64, eff: CausalEffect| {
        if best.as_ref().map_or(true, |b| val < b.0 - 1e-12) {
            best = Some((val, eff));
        }
    };
    match cfg.method {
        Method::Acausal => {
            let (obs, emit) = flat(&split_steps(res, &vec![RelayOrder::BobFirst; rounds]));
            let steps = vec![(obs, emit)];
            let map = split_map(res, &steps)?;
            let shape = shape_of(res, &steps);
            let fit = min_tv_fit(&map, res.kernel(), &SimulatorShape::new(shape.dom(), shape.cod()))?;
            let orders = vec![RelayOrder::BobFirst; rounds];
            consider(
                fit.residual,
                CausalEffect {
                    orders,
                    steps,
                    kernel: fit.simulator,
                    stages: None,
                },
            );
        }
        Method::LpExact => {
            for orders in all_orders(rounds) {
                let steps = split_steps(res, &orders);
                let map = split_map(res, &steps)?;
                let shape = shape_of(res, &steps);
                let mut sim = SimulatorShape::new(shape.dom(), shape.cod());
                sim.extra_eqs = shape.constraints();
                let fit = min_tv_fit(&map, res.kernel(), &sim)?;
                consider(
                    fit.residual,
                    CausalEffect {
                        orders,
                        steps,
                        kernel: fit.simulator,
                        stages: None,
                    },
                );
            }
        }
        Method::AlternatingLp => {
            for orders in all_orders(rounds) {
                let steps = split_steps(res, &orders);
                for i in 0..cfg.restarts.max(1) {
                    let (val, stages) = alternate(res, &steps, cfg, i as u64)?;
                    let kernel = shape_of(res, &steps).from_stages(&stages)?;
                    let eff = CausalEffect {
                        orders: orders.clone(),
                        steps: steps.clone(),
                        kernel,
                        stages: Some(stages),
                    };
                    consider(val, eff);
                }
            }
        }
    }
    let (min_residual, eff) = best.expect("at least one relay order");
    Ok(ResidualReport {
        instance: r.name.clone(),
        method: cfg.method,
        min_residual,
        witness: Some(Witness::Effect(eff)),
        restarts: if cfg.method == Method::AlternatingLp {
            cfg.restarts.max(1)
        } else {
            0
        },
        seed: cfg.seed,
        exact_status: None,
    })
}

fn random_stochastic(rng: &mut ChaCha8Rng, dom: WireList, cod: WireList) -> Morphism {
    let (rows, cols) = (cod.total_size(), dom.total_size());
    let mut m = vec![0.0; rows * cols];
    for c in 0..cols {
        let w: Vec<f64> = (0..rows).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
        let s: f64 = w.iter().sum();
        for r in 0..rows {
            m[r * cols + c] = w[r] / s;
        }
    }
    Morphism::stochastic(dom, cod, m).expect("normalised columns")
}

/// One restart of the staged search: each stage in turn is the best
/// response to the others.
fn alternate(
    r: &PartiteResource,
    steps: &[(Vec<SplitPort>, Vec<SplitPort>)],
    cfg: &SearchCfg,
    restart: u64,
) -> Result<(f64, Vec<Morphism>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart);
    let n = steps.len();
    let mem = |k: usize| {
        if k + 1 < n {
            wl(&[cfg.memory.max(1)])
        } else {
            WireList::unit()
        }
    };
    let stage_wires = |k: usize| {
        let dom = wires_of(r, &steps[k].0).concat(&if k == 0 { WireList::unit() } else { mem(k - 1) });
        let cod = wires_of(r, &steps[k].1).concat(&mem(k));
        (dom, cod)
    };
    let mut stages: Vec<Morphism> = (0..n)
        .map(|k| {
            let (d, c) = stage_wires(k);
            random_stochastic(&mut rng, d, c)
        })
        .collect();
    let mut value = f64::INFINITY;
    for _ in 0..cfg.sweeps.max(1) {
        let before = value;
        for k in 0..n {
            let mut sn = SplitNet::new(r);
            let mem_vars: Vec<Var> = (0..n.saturating_sub(1))
                .map(|_| sn.net.var(cfg.memory.max(1)))
                .collect();
            let io = |sn: &SplitNet, j: usize| {
                let mut d = sn.vars(&steps[j].0);
                if j > 0 {
                    d.push(mem_vars[j - 1]);
                }
                let mut c = sn.vars(&steps[j].1);
                if j + 1 < n {
                    c.push(mem_vars[j]);
                }
                (d, c)
            };
            for (j, g) in stages.iter().enumerate() {
                if j != k {
                    let (d, c) = io(&sn, j);
                    sn.net.add_morphism(g, &d, &c);
                }
            }
            let (d, c) = io(&sn, k);
            let mut sym = c;
            sym.extend(d);
            let dense = sn.net.contract_linear(&sym, &sn.keep());
            let (dom, cod) = stage_wires(k);
            let params = dom.total_size() * cod.total_size();
            let map = AffineKernel::from_dense_linear(r.wires(Dir::In), r.wires(Dir::Out), params, &dense)?;
            let fit = min_tv_fit(&map, r.kernel(), &SimulatorShape::new(dom, cod))?;
            if fit.residual <= value {
                value = fit.residual;
                stages[k] = fit.simulator;
            }
        }
        if before - value < 1e-10 {
            break;
        }
    }
    Ok((value, stages))
}

/// Seats of the four-machine ring: Alice, two Bobs, Charlie.
const SEATS: usize = 4;

/// The seats a cheating party's simulator answers for, and where the
/// honest parties sit.
fn ring_roles(cheater: usize) -> ([usize; 2], [Option<usize>; 3]) {
    match cheater {
        0 => ([0, 1], [None, Some(2), Some(3)]),
        1 => ([1, 2], [Some(0), None, Some(3)]),
        _ => ([2, 3], [Some(0), Some(1), None]),
    }
}

/// Environment ports of the ring: `(seat, port of r)`.
fn ring_view(r: &PartiteResource, dir: Dir) -> Vec<(usize, usize)> {
    let seat = |i: usize| {
        r.parties()
            .iter()
            .position(|p| p == &r.ports()[i].party)
            .expect("known party")
    };
    let home = [0, 1, 3];
    let mut v: Vec<(usize, usize)> = r.port_ids(dir).into_iter().map(|i| (home[seat(i)], i)).collect();
    v.extend(r.port_ids(dir).into_iter().filter(|&i| seat(i) == 1).map(|i| (2, i)));
    v
}

/// Ports touched by a cheating party's simulator: its seats on the ring
/// and its ports of the ideal resource.
#[derive(Clone, Copy, Debug, PartialEq)]
enum RingPort {
    Seat(usize, usize),
    Ideal(usize),
}

struct RingNet {
    net: Network,
    seat_vars: Vec<Vec<Option<Var>>>,
    ideal_vars: Vec<Var>,
    keep: Vec<Var>,
    steps: Vec<(Vec<RingPort>, Vec<RingPort>)>,
}

impl RingNet {
    fn new(r: &PartiteResource, cheater: usize) -> Self {
        let mut net = Network::new();
        let ins = ring_view(r, Dir::In);
        let outs = ring_view(r, Dir::Out);
        let mut seat_vars = vec![vec![None; r.ports().len()]; SEATS];
        for &(s, i) in ins.iter().chain(&outs) {
            seat_vars[s][i] = Some(net.var(r.ports()[i].size));
        }
        let (sim_seats, honest) = ring_roles(cheater);
        let party = |i: usize| {
            r.parties()
                .iter()
                .position(|p| p == &r.ports()[i].party)
                .expect("known party")
        };
        let ideal_vars: Vec<Var> = (0..r.ports().len())
            .map(|i| match honest[party(i)] {
                Some(s) => seat_vars[s][i].expect("honest seat has the port"),
                None => net.var(r.ports()[i].size),
            })
            .collect();
        let pick = |ids: Vec<usize>| ids.iter().map(|&i| ideal_vars[i]).collect::<Vec<_>>();
        net.add_morphism(r.kernel(), &pick(r.port_ids(Dir::In)), &pick(r.port_ids(Dir::Out)));
        let mut keep: Vec<Var> = outs.iter().map(|&(s, i)| seat_vars[s][i].expect("view port")).collect();
        keep.extend(ins.iter().map(|&(s, i)| seat_vars[s][i].expect("view port")));

        let name = &r.parties()[cheater];
        let mut ev = Vec::new();
        for round in 1..=r.rounds() {
            let seats = |dir| -> Vec<RingPort> {
                let list = if dir == Dir::In { &ins } else { &outs };
                list.iter()
                    .filter(|&&(s, i)| sim_seats.contains(&s) && r.ports()[i].round == round)
                    .map(|&(s, i)| RingPort::Seat(s, i))
                    .collect()
            };
            let ideal = |dir| r.ports_at(name, dir, round).into_iter().map(RingPort::Ideal).collect();
            ev.push(Event::Obs(seats(Dir::In)));
            ev.push(Event::Emit(ideal(Dir::In)));
            ev.push(Event::Obs(ideal(Dir::Out)));
            ev.push(Event::Emit(seats(Dir::Out)));
        }
        ev.retain(|e| match e {
            Event::Obs(v) | Event::Emit(v) => !v.is_empty(),
        });
        RingNet {
            net,
            seat_vars,
            ideal_vars,
            keep,
            steps: group_steps(&ev),
        }
    }

    fn vars(&self, ps: &[RingPort]) -> Vec<Var> {
        ps.iter()
            .map(|&p| match p {
                RingPort::Seat(s, i) => self.seat_vars[s][i].expect("view port"),
                RingPort::Ideal(i) => self.ideal_vars[i],
            })
            .collect()
    }

    fn shape(&self, r: &PartiteResource) -> CausalShape {
        let w = |ps: &[RingPort]| {
            r.wires_for(
                &ps.iter()
                    .map(|&p| match p {
                        RingPort::Seat(_, i) | RingPort::Ideal(i) => i,
                    })
                    .collect::<Vec<_>>(),
            )
        };
        CausalShape::new(self.steps.iter().map(|(o, e)| (w(o), w(e))).collect())
    }

    fn obs_emit(&self) -> (Vec<Var>, Vec<Var>) {
        let (o, e) = flat(&self.steps);
        (self.vars(&o), self.vars(&e))
    }
}

fn ring_wires(r: &PartiteResource, dir: Dir) -> WireList {
    r.wires_for(&ring_view(r, dir).iter().map(|p| p.1).collect::<Vec<_>>())
}

/// View columns in which both middle seats receive the same inputs.
fn tied_columns(r: &PartiteResource) -> Vec<usize> {
    let ins = ring_view(r, Dir::In);
    let sizes: Vec<usize> = ins.iter().map(|&(_, i)| r.ports()[i].size).collect();
    let total: usize = sizes.iter().product();
    (0..total)
        .filter(|&c| {
            let d = unflatten(&sizes, c);
            ins.iter().enumerate().all(|(a, &(s, i))| {
                s != 1
                    || ins
                        .iter()
                        .enumerate()
                        .any(|(b, &(s2, j))| s2 == 2 && j == i && d[a] == d[b])
            })
        })
        .collect()
}

/// The environment's view of the ring when party `cheater` runs `sim`.
pub fn ring_view_kernel(r: &Functionality, cheater: usize, sim: &Morphism) -> Result<Morphism> {
    check_parties(r, 3)?;
    let res = &r.resource;
    let mut rn = RingNet::new(res, cheater);
    let (o, e) = rn.obs_emit();
    rn.net.add_morphism(sim, &o, &e);
    let (ins, outs) = (ring_wires(res, Dir::In), ring_wires(res, Dir::Out));
    let n_out = outs.len();
    let keep = rn.keep.clone();
    Ok(rn
        .net
        .contract_morphism(&keep[n_out..], &keep[..n_out], ins, outs, Flavor::Nonneg)?)
}

/// Largest pairwise channel distance between the three ring views.
pub fn ring_disagreement(r: &Functionality, sims: &[Morphism], tie_middle: bool) -> Result<f64> {
    let views = (0..3)
        .map(|x| ring_view_kernel(r, x, &sims[x]))
        .collect::<Result<Vec<_>>>()?;
    let cols: Vec<usize> = if tie_middle {
        tied_columns(&r.resource)
    } else {
        (0..views[0].cols()).collect()
    };
    let mut worst: f64 = 0.0;
    for (a, b) in [(0, 1), (1, 2), (0, 2)] {
        for &c in &cols {
            let d: f64 = (0..views[a].rows())
                .map(|row| (views[a].get(row, c) - views[b].get(row, c)).abs())
                .sum();
            worst = worst.max(d / 2.0);
        }
    }
    Ok(worst)
}

/// Smallest disagreement of the three cheating-party views, over causal
/// simulators, plus whether exact agreement is feasible.
pub fn tripartite_residual(r: &Functionality, tie_middle: bool) -> Result<ResidualReport> {
    check_parties(r, 3)?;
    let res = &r.resource;
    let rings: Vec<RingNet> = (0..3).map(|x| RingNet::new(res, x)).collect();
    let shapes: Vec<CausalShape> = rings.iter().map(|rn| rn.shape(res)).collect();
    let mut lp = DistanceLp::new();
    let blocks: Vec<_> = shapes.iter().map(|s| lp.add_block(s.dom(), s.cod())).collect();
    let total = lp.n_params();
    let (ins, outs) = (ring_wires(res, Dir::In), ring_wires(res, Dir::Out));
    let cols = tied_columns(res);
    let mut maps = Vec::new();
    for ((rn, shape), b) in rings.iter().zip(&shapes).zip(&blocks) {
        for (coeffs, rhs) in shape.constraints() {
            lp.add_eq(coeffs.into_iter().map(|(j, v)| (b.offset + j, v)).collect(), rhs);
        }
        let (o, e) = rn.obs_emit();
        let mut sym = e;
        sym.extend(o);
        let dense = rn.net.contract_linear(&sym, &rn.keep);
        let k = AffineKernel::from_dense_linear(ins.clone(), outs.clone(), b.len(), &dense)?.shifted(b.offset, total);
        maps.push(if tie_middle { k.restrict_cols(&cols) } else { k });
    }
    for (a, b) in [(0, 1), (1, 2), (0, 2)] {
        lp.add_term(maps[a].minus(&maps[b])?);
    }
    let exact = lp.solve_exact();
    let sol = lp.solve();
    let (min_residual, witness) = if sol.status == LpStatus::Optimal {
        let sims: Vec<Morphism> = blocks.iter().map(|b| b.extract(&sol.params)).collect();
        let x: Vec<f64> = sims.iter().flat_map(|s| s.matrix().to_vec()).collect();
        (lp.objective_at(&x), Some(Witness::Simulators { sims, tie_middle }))
    } else {
        (f64::INFINITY, None)
    };
    let name = if tie_middle {
        format!("{}+tied", r.name)
    } else {
        r.name.clone()
    };
    Ok(ResidualReport {
        instance: name,
        method: Method::LpExact,
        min_residual,
        witness,
        restarts: 0,
        seed: 0,
        exact_status: Some(exact),
    })
}

/// Recomputes a report's residual from its witness alone.
pub fn resubstitute(r: &Functionality, w: &Witness) -> Result<f64> {
    match w {
        Witness::Effect(e) => Ok(tv_distance(&split_composite(r, e)?, r.resource.kernel())?),
        Witness::Simulators { sims, tie_middle } => ring_disagreement(r, sims, *tie_middle),
    }
}
