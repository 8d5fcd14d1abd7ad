//! Simulation-based security against initial attacks.
//!
//! In the initial attack the dishonest parties stop running their part of
//! the protocol and hand their source ports to the environment. The
//! protocol is ε-secure against them when some simulator, attached to
//! their ports of the target, makes the target look like that attacked
//! resource up to channel total variation ε. The simulator is a causal
//! strategy that answers the environment round by round and may query the
//! target once per target round; the best one is found by linear
//! programming.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::causal::{group_steps, CausalShape, Event};
use crate::finstoch::{tv_distance, FinStochError, Flavor, Morphism, Tolerance, WireList};
use crate::lpsolve::{min_tv_fit, AffineKernel, LpError, LpStatus, SimulatorShape};
use crate::network::{Network, Var};
use crate::resource::{apply_protocol, Dir, PortRef, Protocol, ResourceError};

/// Above this ε a protocol is reported as insecure rather than ε-secure.
pub const DEFAULT_THRESHOLD: f64 = 0.01;

#[derive(Debug, Error)]
pub enum SecurityError {
    #[error("an attack needs at least one dishonest party")]
    NoDishonest,
    #[error("unknown party `{0}`")]
    UnknownParty(String),
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error(transparent)]
    FinStoch(#[from] FinStochError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// How several dishonest parties cooperate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Collusion {
    /// One adversary controls all of them.
    Joint,
    /// Each acts alone; simulators are searched in product form.
    Independent,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackSpec {
    pub dishonest: Vec<String>,
    pub collusion: Collusion,
}

impl AttackSpec {
    pub fn joint(parties: &[&str]) -> Self {
        AttackSpec {
            dishonest: parties.iter().map(|s| s.to_string()).collect(),
            collusion: Collusion::Joint,
        }
    }

    pub fn independent(parties: &[&str]) -> Self {
        AttackSpec {
            collusion: Collusion::Independent,
            ..AttackSpec::joint(parties)
        }
    }

    fn check(&self, p: &Protocol) -> Result<(), SecurityError> {
        if self.dishonest.is_empty() {
            return Err(SecurityError::NoDishonest);
        }
        for d in &self.dishonest {
            if !p.parties().contains(d) {
                return Err(SecurityError::UnknownParty(d.clone()));
            }
        }
        Ok(())
    }

    fn is_dishonest(&self, party: &str) -> bool {
        self.dishonest.iter().any(|d| d == party)
    }
}

/// A kernel from `inputs` to `outputs`: the honest parties' target ports
/// followed by the dishonest parties' source ports.
#[derive(Clone, Debug)]
pub struct View {
    pub kernel: Morphism,
    pub inputs: Vec<PortRef>,
    pub outputs: Vec<PortRef>,
}

fn view_ports(p: &Protocol, a: &AttackSpec, dir: Dir) -> Vec<PortRef> {
    let t = p.target();
    let s = p.source();
    let mut v: Vec<PortRef> = t
        .port_ids(dir)
        .into_iter()
        .filter(|&i| !a.is_dishonest(&t.ports()[i].party))
        .map(PortRef::Target)
        .collect();
    v.extend(
        s.port_ids(dir)
            .into_iter()
            .filter(|&i| a.is_dishonest(&s.ports()[i].party))
            .map(PortRef::Source),
    );
    v
}

/// The real resource under attack: honest parties run the protocol, the
/// dishonest parties' source ports are exposed unchanged.
pub fn initial_attack(p: &Protocol, a: &AttackSpec) -> Result<View, SecurityError> {
    a.check(p)?;
    let mut net = Network::new();
    let (s_vars, t_vars) = p.wire_real(&mut net, &|party| !a.is_dishonest(party));
    let var = |r: &PortRef| match *r {
        PortRef::Source(i) => s_vars[i],
        PortRef::Target(i) => t_vars[i],
    };
    let inputs = view_ports(p, a, Dir::In);
    let outputs = view_ports(p, a, Dir::Out);
    let iv: Vec<Var> = inputs.iter().map(var).collect();
    let ov: Vec<Var> = outputs.iter().map(var).collect();
    let kernel = net.contract_morphism(&iv, &ov, p.wires(&inputs), p.wires(&outputs), Flavor::Stochastic)?;
    Ok(View {
        kernel,
        inputs,
        outputs,
    })
}

/// The simulator's event sequence for the given parties, querying target
/// round `r` right after seeing the source inputs of its `q[r]`-th source
/// round.
fn simulator_events(p: &Protocol, parties: &[String], q: &[usize]) -> Vec<Event<PortRef>> {
    let s = p.source();
    let t = p.target();
    let ports = |res: &crate::resource::PartiteResource, dir: Dir, round: u32| -> Vec<usize> {
        (0..res.ports().len())
            .filter(|&i| {
                let pt = &res.ports()[i];
                pt.dir == dir && pt.round == round && parties.contains(&pt.party)
            })
            .collect()
    };
    let src = |dir, k| ports(s, dir, k).into_iter().map(PortRef::Source).collect();
    let tgt = |dir, k| ports(t, dir, k).into_iter().map(PortRef::Target).collect();
    let mut ev = Vec::new();
    for (i, rounds) in p.schedule().iter().enumerate() {
        let r = i as u32 + 1;
        if rounds.is_empty() {
            ev.push(Event::Emit(tgt(Dir::In, r)));
            ev.push(Event::Obs(tgt(Dir::Out, r)));
        }
        for (j, &k) in rounds.iter().enumerate() {
            ev.push(Event::Obs(src(Dir::In, k)));
            if j + 1 == q[i] {
                ev.push(Event::Emit(tgt(Dir::In, r)));
                ev.push(Event::Obs(tgt(Dir::Out, r)));
            }
            ev.push(Event::Emit(src(Dir::Out, k)));
        }
    }
    ev
}

/// One simulator: its strategy layout and kernel.
#[derive(Clone, Debug)]
pub struct Simulator {
    pub parties: Vec<String>,
    pub query_points: Vec<usize>,
    pub steps: Vec<(Vec<PortRef>, Vec<PortRef>)>,
    pub kernel: Morphism,
}

impl Simulator {
    fn obs(&self) -> Vec<PortRef> {
        self.steps.iter().flat_map(|s| s.0.iter().copied()).collect()
    }

    fn emit(&self) -> Vec<PortRef> {
        self.steps.iter().flat_map(|s| s.1.iter().copied()).collect()
    }

    pub fn shape(&self, p: &Protocol) -> CausalShape {
        CausalShape::new(self.steps.iter().map(|(o, e)| (p.wires(o), p.wires(e))).collect())
    }
}

#[derive(Clone, Debug)]
pub struct SimulatorResult {
    pub simulators: Vec<Simulator>,
    pub residual: f64,
    pub attacked_view: Morphism,
    pub simulated_view: Morphism,
    /// False when the search was restricted (product-form simulators).
    pub exact: bool,
    pub status: LpStatus,
}

struct SimNet {
    net: Network,
    s_vars: Vec<Var>,
    t_vars: Vec<Var>,
}

impl SimNet {
    fn new(p: &Protocol) -> Self {
        let mut net = Network::new();
        let s_vars: Vec<Var> = p.source().ports().iter().map(|pt| net.var(pt.size)).collect();
        let t_vars: Vec<Var> = p.target().ports().iter().map(|pt| net.var(pt.size)).collect();
        let t = p.target();
        let ins: Vec<Var> = t.port_ids(Dir::In).iter().map(|&i| t_vars[i]).collect();
        let outs: Vec<Var> = t.port_ids(Dir::Out).iter().map(|&i| t_vars[i]).collect();
        net.add_morphism(t.kernel(), &ins, &outs);
        SimNet { net, s_vars, t_vars }
    }

    fn var(&self, r: &PortRef) -> Var {
        match *r {
            PortRef::Source(i) => self.s_vars[i],
            PortRef::Target(i) => self.t_vars[i],
        }
    }

    fn vars(&self, rs: &[PortRef]) -> Vec<Var> {
        rs.iter().map(|r| self.var(r)).collect()
    }
}

fn query_choices(p: &Protocol) -> Vec<Vec<usize>> {
    let mut all = vec![Vec::new()];
    for rounds in p.schedule() {
        let k = rounds.len().max(1);
        all = all
            .into_iter()
            .flat_map(|prefix| {
                (1..=k).map(move |q| {
                    let mut v = prefix.clone();
                    v.push(q);
                    v
                })
            })
            .collect();
    }
    all
}

fn layout(p: &Protocol, parties: &[String], q: &[usize]) -> Simulator {
    let steps = group_steps(&simulator_events(p, parties, q));
    let mut sim = Simulator {
        parties: parties.to_vec(),
        query_points: q.to_vec(),
        steps,
        kernel: Morphism::identity(&WireList::unit()),
    };
    let shape = sim.shape(p);
    sim.kernel = crate::finstoch::tensor(&Morphism::uniform(&shape.cod()), &Morphism::delete(&shape.dom()));
    sim
}

/// Best simulator for `sim_slot` with the other simulators fixed.
fn fit_one(
    p: &Protocol,
    view: &View,
    fixed: &[&Simulator],
    slot: &Simulator,
) -> Result<(Simulator, f64, LpStatus, Morphism), SecurityError> {
    let mut sn = SimNet::new(p);
    for s in fixed {
        let o = sn.vars(&s.obs());
        let e = sn.vars(&s.emit());
        sn.net.add_morphism(&s.kernel, &o, &e);
    }
    let obs = slot.obs();
    let emit = slot.emit();
    let mut sym = sn.vars(&emit);
    sym.extend(sn.vars(&obs));
    let mut keep = sn.vars(&view.outputs);
    keep.extend(sn.vars(&view.inputs));
    let dense = sn.net.contract_linear(&sym, &keep);
    let shape = slot.shape(p);
    let n = shape.dom().total_size() * shape.cod().total_size();
    let map = AffineKernel::from_dense_linear(view.kernel.dom().clone(), view.kernel.cod().clone(), n, &dense)?;
    let mut sim_shape = SimulatorShape::new(shape.dom(), shape.cod());
    sim_shape.extra_eqs = shape.constraints();
    let fit = min_tv_fit(&map, &view.kernel, &sim_shape)?;
    let simulated = map.eval_morphism(fit.simulator.matrix());
    let sim = Simulator {
        kernel: fit.simulator,
        ..slot.clone()
    };
    Ok((sim, fit.residual, fit.status, simulated))
}

/// Searches for the simulator minimising the distance between the target
/// under simulation and the attacked view.
pub fn synthesize_simulator(p: &Protocol, a: &AttackSpec, view: &View) -> Result<SimulatorResult, SecurityError> {
    a.check(p)?;
    let choices = query_choices(p);
    let groups: Vec<Vec<String>> = match a.collusion {
        Collusion::Joint => vec![a.dishonest.clone()],
        Collusion::Independent => a.dishonest.iter().map(|d| vec![d.clone()]).collect(),
    };
    let mut sims: Vec<Simulator> = groups.iter().map(|g| layout(p, g, &choices[0])).collect();
    let mut best: Option<(f64, LpStatus, Morphism)> = None;
    let sweeps = if groups.len() == 1 { 1 } else { 2 };
    for _ in 0..sweeps {
        for g in 0..groups.len() {
            let fixed: Vec<&Simulator> = sims
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != g)
                .map(|(_, s)| s)
                .collect();
            let mut round_best: Option<(Simulator, f64, LpStatus, Morphism)> = None;
            for q in &choices {
                let slot = layout(p, &groups[g], q);
                let got = fit_one(p, view, &fixed, &slot)?;
                if round_best.as_ref().map_or(true, |b| got.1 < b.1 - 1e-12) {
                    round_best = Some(got);
                }
            }
            let (sim, res, status, simulated) = round_best.expect("at least one query layout");
            sims[g] = sim;
            best = Some((res, status, simulated));
        }
    }
    let (residual, status, simulated_view) = best.expect("at least one group");
    Ok(SimulatorResult {
        simulators: sims,
        residual,
        attacked_view: view.kernel.clone(),
        simulated_view,
        exact: groups.len() == 1,
        status,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "epsilon", rename_all = "kebab-case")]
pub enum Verdict {
    Perfect,
    Epsilon(f64),
    InsecureAboveThreshold(f64),
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Perfect => write!(f, "perfect"),
            Verdict::Epsilon(e) => write!(f, "epsilon({e:.6e})"),
            Verdict::InsecureAboveThreshold(e) => write!(f, "insecure (epsilon {e:.6})"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AttackOutcome {
    pub dishonest: Vec<String>,
    pub collusion: Collusion,
    pub epsilon: f64,
    pub simulator_found: bool,
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SecurityReport {
    pub command: String,
    pub instance: String,
    pub correctness_residual: f64,
    pub attacks: Vec<AttackOutcome>,
    pub verdict: Verdict,
    pub seed: u64,
    #[serde(skip)]
    pub runtime_ms: u64,
    #[serde(skip)]
    pub results: Vec<SimulatorResult>,
}

impl SecurityReport {
    /// Largest ε over all attacks.
    pub fn epsilon(&self) -> f64 {
        self.attacks.iter().map(|a| a.epsilon).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serialisable")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub tol: Tolerance,
    pub threshold: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tol: Tolerance::default(),
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

/// Distance between what the protocol builds and its target.
pub fn correctness_residual(p: &Protocol) -> Result<f64, SecurityError> {
    let built = apply_protocol(p)?;
    Ok(tv_distance(built.kernel(), p.target().kernel())?)
}

pub fn verify_transformation(
    p: &Protocol,
    attacks: &[AttackSpec],
    tol: Tolerance,
) -> Result<SecurityReport, SecurityError> {
    verify_with(
        p,
        attacks,
        &VerifyOptions {
            tol,
            ..VerifyOptions::default()
        },
    )
}

pub fn verify_with(
    p: &Protocol,
    attacks: &[AttackSpec],
    opts: &VerifyOptions,
) -> Result<SecurityReport, SecurityError> {
    let start = Instant::now();
    let correctness = correctness_residual(p)?;
    let mut outcomes = Vec::new();
    let mut results = Vec::new();
    for a in attacks {
        let view = initial_attack(p, a)?;
        let r = synthesize_simulator(p, a, &view)?;
        outcomes.push(AttackOutcome {
            dishonest: a.dishonest.clone(),
            collusion: a.collusion,
            epsilon: r.residual,
            simulator_found: r.residual <= opts.tol.eps,
            exact: r.exact,
        });
        results.push(r);
    }
    let worst = outcomes.iter().map(|o| o.epsilon).fold(correctness, f64::max);
    let verdict = if worst <= opts.tol.eps {
        Verdict::Perfect
    } else if worst <= opts.threshold {
        Verdict::Epsilon(worst)
    } else {
        Verdict::InsecureAboveThreshold(worst)
    };
    Ok(SecurityReport {
        command: "verify".into(),
        instance: String::new(),
        correctness_residual: correctness,
        attacks: outcomes,
        verdict,
        seed: 0,
        runtime_ms: start.elapsed().as_millis() as u64,
        results,
    })
}
