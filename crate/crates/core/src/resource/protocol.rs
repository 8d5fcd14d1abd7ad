use serde::{Deserialize, Serialize};

use super::{Dir, PartiteResource, Port, ResourceError};
use crate::finstoch::{tensor, Flavor, Morphism, WireList};
use crate::network::{Network, Var};

/// A port of a protocol's source or target resource.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PortRef {
    Source(usize),
    Target(usize),
}

/// What one stage of a party's local strategy reads and writes.
///
/// A stage has type `obs ⊗ mem_in → emit ⊗ mem_out`. `last` marks the
/// stage that answers the target round, so its emission is the target
/// output; every other stage feeds a source input.
#[derive(Clone, Debug, PartialEq)]
pub struct StageInterface {
    pub target_round: u32,
    pub obs: Vec<PortRef>,
    pub emit: Vec<PortRef>,
    pub last: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartyStrategy {
    pub stages: Vec<Morphism>,
}

impl PartyStrategy {
    pub fn new(stages: Vec<Morphism>) -> Self {
        PartyStrategy { stages }
    }
}

/// A protocol turning `source` into `target`.
///
/// Target round `r` is simulated by the source rounds `schedule[r-1]`,
/// which together list every source round once, in order. Each party runs
/// a chain of stages: read the target input, feed source round `s_1`,
/// read its output, feed `s_2`, and so on, finally writing the target
/// output. Memory threads through the whole chain.
#[derive(Clone, Debug)]
pub struct Protocol {
    source: PartiteResource,
    target: PartiteResource,
    schedule: Vec<Vec<u32>>,
    strategies: Vec<PartyStrategy>,
    free_rounds: Vec<u32>,
}

fn perr(msg: String) -> ResourceError {
    ResourceError::Protocol(msg)
}

impl Protocol {
    /// `strategies` follows the order of `target.parties()`.
    pub fn new(
        source: PartiteResource,
        target: PartiteResource,
        schedule: Vec<Vec<u32>>,
        strategies: Vec<PartyStrategy>,
    ) -> Result<Self, ResourceError> {
        let parties = target.parties();
        for p in source.parties() {
            if !parties.contains(p) {
                return Err(ResourceError::Party(format!(
                    "source party `{p}` is not a target party"
                )));
            }
        }
        if strategies.len() != parties.len() {
            return Err(perr(format!(
                "{} parties but {} strategies",
                parties.len(),
                strategies.len()
            )));
        }
        let flat: Vec<u32> = schedule.iter().flatten().copied().collect();
        if flat.iter().enumerate().any(|(i, &s)| s as usize != i + 1) {
            return Err(perr(format!(
                "schedule {schedule:?} must list source rounds 1, 2, … in order"
            )));
        }
        if (flat.len() as u32) < source.rounds() {
            return Err(perr(format!(
                "schedule covers {} source rounds, resource has {}",
                flat.len(),
                source.rounds()
            )));
        }
        if (schedule.len() as u32) < target.rounds() {
            return Err(perr(format!(
                "schedule covers {} target rounds, target has {}",
                schedule.len(),
                target.rounds()
            )));
        }
        let p = Protocol {
            source,
            target,
            schedule,
            strategies,
            free_rounds: Vec::new(),
        };
        for (i, party) in p.target.parties().iter().enumerate() {
            p.check_strategy(party, &p.strategies[i])?;
        }
        Ok(p)
    }

    /// Every party forwards its ports unchanged.
    pub fn identity(r: &PartiteResource) -> Protocol {
        let rounds = r.rounds();
        let schedule = (1..=rounds).map(|k| vec![k]).collect();
        let strategies = r
            .parties()
            .iter()
            .map(|party| {
                let mut stages = Vec::new();
                for k in 1..=rounds {
                    stages.push(Morphism::identity(&r.wires_for(&r.ports_at(party, Dir::In, k))));
                    stages.push(Morphism::identity(&r.wires_for(&r.ports_at(party, Dir::Out, k))));
                }
                PartyStrategy::new(stages)
            })
            .collect();
        Protocol::new(r.clone(), r.clone(), schedule, strategies).expect("identity protocol is well-typed")
    }

    pub fn source(&self) -> &PartiteResource {
        &self.source
    }

    pub fn target(&self) -> &PartiteResource {
        &self.target
    }

    pub fn parties(&self) -> &[String] {
        self.target.parties()
    }

    pub fn schedule(&self) -> &[Vec<u32>] {
        &self.schedule
    }

    pub fn strategies(&self) -> &[PartyStrategy] {
        &self.strategies
    }

    pub fn strategy(&self, party: &str) -> Option<&PartyStrategy> {
        let i = self.parties().iter().position(|p| p == party)?;
        Some(&self.strategies[i])
    }

    /// Source rounds provided by free resources.
    pub fn free_rounds(&self) -> &[u32] {
        &self.free_rounds
    }

    /// Source ports that are not part of a free resource.
    pub fn nominal_source_ports(&self) -> Vec<usize> {
        (0..self.source.ports().len())
            .filter(|&i| !self.free_rounds.contains(&self.source.ports()[i].round))
            .collect()
    }

    pub fn port(&self, r: PortRef) -> &Port {
        match r {
            PortRef::Source(i) => &self.source.ports()[i],
            PortRef::Target(i) => &self.target.ports()[i],
        }
    }

    pub fn wires(&self, refs: &[PortRef]) -> WireList {
        refs.iter().map(|&r| self.port(r).set()).collect()
    }

    /// The stage sequence `party` must implement.
    pub fn stage_interfaces(&self, party: &str) -> Vec<StageInterface> {
        stage_interfaces(&self.source, &self.target, &self.schedule, party)
    }

    fn check_strategy(&self, party: &str, s: &PartyStrategy) -> Result<(), ResourceError> {
        let ifaces = self.stage_interfaces(party);
        if s.stages.len() != ifaces.len() {
            return Err(perr(format!(
                "party `{party}` needs {} stages, got {}",
                ifaces.len(),
                s.stages.len()
            )));
        }
        let mut mem = WireList::unit();
        for (k, (g, iface)) in s.stages.iter().zip(&ifaces).enumerate() {
            let dom = self.wires(&iface.obs).concat(&mem);
            g.dom()
                .check_matches(&dom, "stage input")
                .map_err(|e| perr(format!("party `{party}` stage {k}: {e}")))?;
            let emit = self.wires(&iface.emit);
            let cod = g.cod();
            if cod.len() < emit.len() {
                return Err(perr(format!("party `{party}` stage {k} emits too few wires")));
            }
            cod.slice(0..emit.len())
                .check_matches(&emit, "stage output")
                .map_err(|e| perr(format!("party `{party}` stage {k}: {e}")))?;
            mem = cod.slice(emit.len()..cod.len());
            if g.flavor() != Flavor::Stochastic {
                return Err(perr(format!("party `{party}` stage {k} is not stochastic")));
            }
        }
        if !mem.is_empty() {
            return Err(perr(format!("party `{party}` ends with leftover memory {mem}")));
        }
        Ok(())
    }

    /// Wires the source kernel and the stages of every party for which
    /// `runs` holds into `net`. Returns one variable per source port and
    /// one per target port.
    pub(crate) fn wire_real(&self, net: &mut Network, runs: &dyn Fn(&str) -> bool) -> (Vec<Var>, Vec<Var>) {
        let s_vars: Vec<Var> = self.source.ports().iter().map(|p| net.var(p.size)).collect();
        let t_vars: Vec<Var> = self.target.ports().iter().map(|p| net.var(p.size)).collect();
        let ins: Vec<Var> = self.source.port_ids(Dir::In).iter().map(|&i| s_vars[i]).collect();
        let outs: Vec<Var> = self.source.port_ids(Dir::Out).iter().map(|&i| s_vars[i]).collect();
        net.add_morphism(self.source.kernel(), &ins, &outs);
        let var_of = |r: &PortRef| match *r {
            PortRef::Source(i) => s_vars[i],
            PortRef::Target(i) => t_vars[i],
        };
        for (party, strat) in self.parties().iter().zip(&self.strategies) {
            if !runs(party) {
                continue;
            }
            let mut mem: Vec<Var> = Vec::new();
            for (g, iface) in strat.stages.iter().zip(self.stage_interfaces(party)) {
                let mut dom: Vec<Var> = iface.obs.iter().map(var_of).collect();
                dom.extend(&mem);
                let mut cod: Vec<Var> = iface.emit.iter().map(var_of).collect();
                mem = net.vars_for(&g.cod().slice(cod.len()..g.cod().len()));
                cod.extend(&mem);
                net.add_morphism(g, &dom, &cod);
            }
        }
        (s_vars, t_vars)
    }

    /// Same protocol, with the source rounds in `rounds` marked as coming
    /// from a free resource.
    pub fn declare_free(&self, rounds: &[u32]) -> Result<Protocol, ResourceError> {
        let n = self.schedule.iter().map(Vec::len).sum::<usize>() as u32;
        if let Some(r) = rounds.iter().find(|&&r| r == 0 || r > n) {
            return Err(perr(format!("no source round {r}")));
        }
        let mut p = self.clone();
        for &r in rounds {
            if !p.free_rounds.contains(&r) {
                p.free_rounds.push(r);
            }
        }
        p.free_rounds.sort_unstable();
        Ok(p)
    }

    /// The protocol over `source ⊗ free` that ignores `free`: its rounds run
    /// after everything else, parties feed it constant inputs and discard
    /// its outputs.
    pub fn with_free(&self, free: &PartiteResource) -> Result<Protocol, ResourceError> {
        for p in free.parties() {
            if !self.parties().contains(p) {
                return Err(ResourceError::Party(format!(
                    "free resource party `{p}` is not in the protocol"
                )));
            }
        }
        if free.ports().is_empty() {
            return Ok(self.clone());
        }
        if self.schedule.is_empty() {
            return Err(perr(
                "a protocol without target rounds cannot absorb a free resource".into(),
            ));
        }
        let shift = self.schedule.iter().map(Vec::len).sum::<usize>() as u32;
        let source = self.source.combine(free, shift).with_parties(self.parties().to_vec())?;
        let added: Vec<u32> = (shift + 1..=shift + free.rounds()).collect();
        let mut schedule = self.schedule.clone();
        schedule.last_mut().expect("nonempty").extend(&added);
        let mut strategies = Vec::new();
        for (party, strat) in self.parties().iter().zip(&self.strategies) {
            let mut stages = strat.stages.clone();
            let last = stages.pop().expect("at least one stage per round");
            let out = last.cod().clone();
            let mut prev = last;
            for &f in &added {
                // emit constant inputs for round f, carry the target output
                let feed = free.wires_for(&free.ports_at(party, Dir::In, f - shift));
                let stage = tensor(&Morphism::point(&feed, 0)?, &prev);
                stages.push(stage);
                let seen = free.wires_for(&free.ports_at(party, Dir::Out, f - shift));
                prev = tensor(&Morphism::delete(&seen), &Morphism::identity(&out));
            }
            stages.push(prev);
            strategies.push(PartyStrategy::new(stages));
        }
        let mut p = Protocol::new(source, self.target.clone(), schedule, strategies)?;
        p.free_rounds = self.free_rounds.clone();
        p.free_rounds.extend(&added);
        Ok(p)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ProtocolJson::from(self)).expect("serialisable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Protocol, ResourceError> {
        let j: ProtocolJson = serde_json::from_value(v.clone())?;
        let strategies = j
            .strategies
            .into_iter()
            .map(|s| {
                let stages = s
                    .into_iter()
                    .map(|st| {
                        Ok(Morphism::new(
                            WireList::from_sizes(&st.dom)?,
                            WireList::from_sizes(&st.cod)?,
                            st.matrix,
                            Flavor::Stochastic,
                        )?)
                    })
                    .collect::<Result<Vec<_>, ResourceError>>()?;
                Ok(PartyStrategy::new(stages))
            })
            .collect::<Result<Vec<_>, ResourceError>>()?;
        let mut p = Protocol::new(j.source, j.target, j.schedule, strategies)?;
        p = p.declare_free(&j.free_rounds)?;
        Ok(p)
    }
}

#[derive(Serialize, Deserialize)]
struct StageJson {
    dom: Vec<usize>,
    cod: Vec<usize>,
    matrix: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ProtocolJson {
    source: PartiteResource,
    target: PartiteResource,
    schedule: Vec<Vec<u32>>,
    strategies: Vec<Vec<StageJson>>,
    #[serde(default)]
    free_rounds: Vec<u32>,
}

impl From<&Protocol> for ProtocolJson {
    fn from(p: &Protocol) -> Self {
        ProtocolJson {
            source: p.source.clone(),
            target: p.target.clone(),
            schedule: p.schedule.clone(),
            strategies: p
                .strategies
                .iter()
                .map(|s| {
                    s.stages
                        .iter()
                        .map(|g| StageJson {
                            dom: g.dom().sizes(),
                            cod: g.cod().sizes(),
                            matrix: g.matrix().to_vec(),
                        })
                        .collect()
                })
                .collect(),
            free_rounds: p.free_rounds.clone(),
        }
    }
}

pub(crate) fn stage_interfaces(
    source: &PartiteResource,
    target: &PartiteResource,
    schedule: &[Vec<u32>],
    party: &str,
) -> Vec<StageInterface> {
    let s = |dir, k| -> Vec<PortRef> {
        source
            .ports_at(party, dir, k)
            .into_iter()
            .map(PortRef::Source)
            .collect()
    };
    let t = |dir, k| -> Vec<PortRef> {
        target
            .ports_at(party, dir, k)
            .into_iter()
            .map(PortRef::Target)
            .collect()
    };
    let mut out = Vec::new();
    for (i, rounds) in schedule.iter().enumerate() {
        let r = i as u32 + 1;
        let mut obs = t(Dir::In, r);
        for &k in rounds {
            out.push(StageInterface {
                target_round: r,
                obs,
                emit: s(Dir::In, k),
                last: false,
            });
            obs = s(Dir::Out, k);
        }
        out.push(StageInterface {
            target_round: r,
            obs,
            emit: t(Dir::Out, r),
            last: true,
        });
    }
    out
}

/// Runs every party's strategy against the source and returns the
/// resulting resource on the target's ports.
pub fn apply_protocol(p: &Protocol) -> Result<PartiteResource, ResourceError> {
    let mut net = Network::new();
    let (_, t_vars) = p.wire_real(&mut net, &|_| true);
    let t = p.target();
    let ins: Vec<Var> = t.port_ids(Dir::In).iter().map(|&i| t_vars[i]).collect();
    let outs: Vec<Var> = t.port_ids(Dir::Out).iter().map(|&i| t_vars[i]).collect();
    let k = net.contract_morphism(&ins, &outs, t.wires(Dir::In), t.wires(Dir::Out), Flavor::Stochastic)?;
    t.with_kernel(k)
}

/// `p2 ∘ p1`: run `p1` to build `p2`'s source, then `p2` on top. Memory of
/// each composite stage is `p2`'s memory followed by `p1`'s.
pub fn compose_protocols(p1: &Protocol, p2: &Protocol) -> Result<Protocol, ResourceError> {
    if p1.parties() != p2.parties() {
        return Err(ResourceError::Party(format!(
            "parties {:?} and {:?} differ",
            p1.parties(),
            p2.parties()
        )));
    }
    let (mid_a, mid_b) = (p1.target().ports(), p2.source().ports());
    let same = mid_a.len() == mid_b.len()
        && mid_a
            .iter()
            .zip(mid_b)
            .all(|(a, b)| a.party == b.party && a.dir == b.dir && a.round == b.round && a.size == b.size);
    if !same {
        return Err(perr(
            "first protocol's target ports differ from second protocol's source ports".into(),
        ));
    }
    let schedule: Vec<Vec<u32>> = p2
        .schedule
        .iter()
        .map(|ms| {
            ms.iter()
                .flat_map(|&m| p1.schedule[m as usize - 1].iter().copied())
                .collect()
        })
        .collect();
    let source = p1.source.clone();
    let target = p2.target.clone();
    let mut strategies = Vec::new();
    for (i, party) in p2.parties().iter().enumerate() {
        let (st1, st2) = (&p1.strategies[i].stages, &p2.strategies[i].stages);
        let (if1, if2) = (p1.stage_interfaces(party), p2.stage_interfaces(party));
        let goal = stage_interfaces(&source, &target, &schedule, party);
        let (mut i1, mut i2) = (0usize, 0usize);
        let (mut mem1, mut mem2) = (WireList::unit(), WireList::unit());
        let mut at_p2 = true;
        let mut stages = Vec::new();
        for g in &goal {
            let obs = g.obs.iter().map(|&r| match r {
                PortRef::Source(k) => source.ports()[k].set(),
                PortRef::Target(k) => target.ports()[k].set(),
            });
            let obs: WireList = obs.collect();
            let mut net = Network::new();
            let mut sig = net.vars_for(&obs);
            let mut m2 = net.vars_for(&mem2);
            let mut m1 = net.vars_for(&mem1);
            let mut dom_vars = sig.clone();
            dom_vars.extend(&m2);
            dom_vars.extend(&m1);
            let dom = obs.concat(&mem2).concat(&mem1);
            loop {
                if at_p2 {
                    let (f, fi) = (&st2[i2], &if2[i2]);
                    i2 += 1;
                    let mut input = sig.clone();
                    input.extend(&m2);
                    let out = net.apply(f, &input);
                    let n = fi.emit.len();
                    sig = out[..n].to_vec();
                    m2 = out[n..].to_vec();
                    mem2 = f.cod().slice(n..f.cod().len());
                    if fi.last {
                        break;
                    }
                    at_p2 = false;
                } else {
                    let (f, fi) = (&st1[i1], &if1[i1]);
                    i1 += 1;
                    let mut input = sig.clone();
                    input.extend(&m1);
                    let out = net.apply(f, &input);
                    let n = fi.emit.len();
                    sig = out[..n].to_vec();
                    m1 = out[n..].to_vec();
                    mem1 = f.cod().slice(n..f.cod().len());
                    if fi.last {
                        at_p2 = true;
                    } else {
                        break;
                    }
                }
            }
            let emit: WireList = g
                .emit
                .iter()
                .map(|&r| match r {
                    PortRef::Source(k) => source.ports()[k].set(),
                    PortRef::Target(k) => target.ports()[k].set(),
                })
                .collect();
            let mut cod_vars = sig;
            cod_vars.extend(&m2);
            cod_vars.extend(&m1);
            let cod = emit.concat(&mem2).concat(&mem1);
            stages.push(net.contract_morphism(&dom_vars, &cod_vars, dom, cod, Flavor::Stochastic)?);
        }
        strategies.push(PartyStrategy::new(stages));
    }
    let mut p = Protocol::new(source, target, schedule, strategies)?;
    p.free_rounds = p1.free_rounds.clone();
    Ok(p)
}

/// Runs two protocols with the same parties and schedule side by side.
pub fn tensor_protocols(p1: &Protocol, p2: &Protocol) -> Result<Protocol, ResourceError> {
    if p1.parties() != p2.parties() {
        return Err(ResourceError::Party(
            "tensored protocols must share their parties".into(),
        ));
    }
    if p1.schedule != p2.schedule {
        return Err(perr("tensored protocols must share their schedule".into()));
    }
    let source = p1.source.tensor(&p2.source);
    let target = p1.target.tensor(&p2.target);
    let mut strategies = Vec::new();
    for (i, party) in p1.parties().iter().enumerate() {
        let (if1, if2) = (p1.stage_interfaces(party), p2.stage_interfaces(party));
        let mut stages = Vec::new();
        let (mut mem1, mut mem2) = (WireList::unit(), WireList::unit());
        for k in 0..if1.len() {
            let (g1, g2) = (&p1.strategies[i].stages[k], &p2.strategies[i].stages[k]);
            let (o1, o2) = (p1.wires(&if1[k].obs), p2.wires(&if2[k].obs));
            let mut net = Network::new();
            let (v_o1, v_o2) = (net.vars_for(&o1), net.vars_for(&o2));
            let (v_m1, v_m2) = (net.vars_for(&mem1), net.vars_for(&mem2));
            let out1 = net.apply(g1, &[v_o1.clone(), v_m1.clone()].concat());
            let out2 = net.apply(g2, &[v_o2.clone(), v_m2.clone()].concat());
            let (n1, n2) = (if1[k].emit.len(), if2[k].emit.len());
            let dom_vars = [v_o1, v_o2, v_m1, v_m2].concat();
            let cod_vars = [&out1[..n1], &out2[..n2], &out1[n1..], &out2[n2..]].concat();
            let dom = o1.concat(&o2).concat(&mem1).concat(&mem2);
            let e1 = g1.cod().slice(0..n1);
            let e2 = g2.cod().slice(0..n2);
            mem1 = g1.cod().slice(n1..g1.cod().len());
            mem2 = g2.cod().slice(n2..g2.cod().len());
            let cod = e1.concat(&e2).concat(&mem1).concat(&mem2);
            stages.push(net.contract_morphism(&dom_vars, &cod_vars, dom, cod, Flavor::Stochastic)?);
        }
        strategies.push(PartyStrategy::new(stages));
    }
    Protocol::new(source, target, p1.schedule.clone(), strategies)
}
