use std::fmt;

use serde::{Deserialize, Serialize};

use super::ResourceError;
use crate::finstoch::{tensor, unflatten, FinSet, Flavor, Morphism, WireList, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dir {
    In,
    Out,
}

/// One wire of a shared resource, owned by a party and stamped with the
/// round in which it is used.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Port {
    pub party: String,
    pub dir: Dir,
    pub round: u32,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Port {
    pub fn new(party: &str, dir: Dir, round: u32, size: usize) -> Self {
        Port {
            party: party.into(),
            dir,
            round,
            size,
            label: None,
        }
    }

    pub fn labelled(mut self, label: &str) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn set(&self) -> FinSet {
        FinSet::new(self.size).expect("port sizes are validated")
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = match self.dir {
            Dir::In => "in",
            Dir::Out => "out",
        };
        write!(f, "{}.{}@{}[{}]", self.party, d, self.round, self.size)?;
        if let Some(l) = &self.label {
            write!(f, " {l}")?;
        }
        Ok(())
    }
}

/// A box shared by several parties: a kernel from all input ports (in port
/// order) to all output ports (in port order).
#[derive(Clone, Debug, PartialEq)]
pub struct PartiteResource {
    parties: Vec<String>,
    ports: Vec<Port>,
    kernel: Morphism,
}

#[derive(Serialize, Deserialize)]
struct ResourceJson {
    parties: Vec<String>,
    ports: Vec<Port>,
    kernel: Vec<f64>,
}

impl Serialize for PartiteResource {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ResourceJson {
            parties: self.parties.clone(),
            ports: self.ports.clone(),
            kernel: self.kernel.matrix().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PartiteResource {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = ResourceJson::deserialize(d)?;
        PartiteResource::from_flat(j.parties, j.ports, j.kernel).map_err(serde::de::Error::custom)
    }
}

impl PartiteResource {
    /// Validates ownership, round stamps, kernel shape and causality.
    pub fn new(parties: Vec<String>, ports: Vec<Port>, kernel: Morphism) -> Result<Self, ResourceError> {
        for (i, p) in parties.iter().enumerate() {
            if parties[..i].contains(p) {
                return Err(ResourceError::Party(format!("party `{p}` listed twice")));
            }
        }
        for p in &ports {
            if !parties.contains(&p.party) {
                return Err(ResourceError::Party(format!("port {p} names an unknown party")));
            }
            if p.round == 0 {
                return Err(ResourceError::Port(format!("port {p} has round 0; rounds start at 1")));
            }
            if p.size == 0 {
                return Err(ResourceError::Port(format!("port {p} is empty")));
            }
        }
        let r = PartiteResource { parties, ports, kernel };
        let dom = r.wires(Dir::In);
        let cod = r.wires(Dir::Out);
        r.kernel.dom().check_matches(&dom, "resource inputs")?;
        r.kernel.cod().check_matches(&cod, "resource outputs")?;
        r.kernel.check_stochastic(DEFAULT_TOL)?;
        if let Some((round, gap)) = r.causality_violation(DEFAULT_TOL) {
            return Err(ResourceError::Acausal { round, gap });
        }
        Ok(r)
    }

    pub fn from_flat(parties: Vec<String>, ports: Vec<Port>, matrix: Vec<f64>) -> Result<Self, ResourceError> {
        let dom = wires_of(&ports, Dir::In);
        let cod = wires_of(&ports, Dir::Out);
        let kernel = Morphism::new(dom, cod, matrix, Flavor::Stochastic)?;
        PartiteResource::new(parties, ports, kernel)
    }

    /// The resource with no parties and no ports.
    pub fn unit() -> Self {
        PartiteResource {
            parties: Vec::new(),
            ports: Vec::new(),
            kernel: Morphism::identity(&WireList::unit()),
        }
    }

    pub fn parties(&self) -> &[String] {
        &self.parties
    }

    pub fn ports(&self) -> &[Port] {
        &self.ports
    }

    pub fn kernel(&self) -> &Morphism {
        &self.kernel
    }

    pub fn rounds(&self) -> u32 {
        self.ports.iter().map(|p| p.round).max().unwrap_or(0)
    }

    /// Indices into `ports()` of the given direction, in port order.
    pub fn port_ids(&self, dir: Dir) -> Vec<usize> {
        (0..self.ports.len()).filter(|&i| self.ports[i].dir == dir).collect()
    }

    /// Indices of `party`'s ports with this direction and round.
    pub fn ports_at(&self, party: &str, dir: Dir, round: u32) -> Vec<usize> {
        (0..self.ports.len())
            .filter(|&i| {
                let p = &self.ports[i];
                p.party == party && p.dir == dir && p.round == round
            })
            .collect()
    }

    /// Position of port `i` among the ports of its direction.
    pub fn slot_of(&self, i: usize) -> usize {
        let dir = self.ports[i].dir;
        self.ports[..i].iter().filter(|p| p.dir == dir).count()
    }

    pub fn wires(&self, dir: Dir) -> WireList {
        wires_of(&self.ports, dir)
    }

    pub fn wires_for(&self, ids: &[usize]) -> WireList {
        ids.iter().map(|&i| self.ports[i].set()).collect()
    }

    /// Same kernel, new port ownership (party names and labels only).
    pub fn with_kernel(&self, kernel: Morphism) -> Result<Self, ResourceError> {
        PartiteResource::new(self.parties.clone(), self.ports.clone(), kernel)
    }

    /// Returns the first round `t` at which outputs up to `t` depend on an
    /// input from a later round, with the size of the dependence.
    pub fn causality_violation(&self, tol: f64) -> Option<(u32, f64)> {
        let ins = self.port_ids(Dir::In);
        let outs = self.port_ids(Dir::Out);
        let in_sizes: Vec<usize> = ins.iter().map(|&i| self.ports[i].size).collect();
        let out_sizes: Vec<usize> = outs.iter().map(|&i| self.ports[i].size).collect();
        let cols = self.kernel.cols();
        let rows = self.kernel.rows();
        for t in 1..self.rounds() {
            let late_in: Vec<bool> = ins.iter().map(|&i| self.ports[i].round > t).collect();
            if !late_in.iter().any(|&b| b) {
                continue;
            }
            let early_out: Vec<bool> = outs.iter().map(|&i| self.ports[i].round <= t).collect();
            // marginal on early outputs, keyed by (early output tuple, input column)
            let early_sizes: Vec<usize> = out_sizes
                .iter()
                .zip(&early_out)
                .filter(|(_, &e)| e)
                .map(|(&s, _)| s)
                .collect();
            let n_early: usize = early_sizes.iter().product();
            let mut marg = vec![0.0; n_early * cols];
            for r in 0..rows {
                let d = unflatten(&out_sizes, r);
                let e: Vec<usize> = d.iter().zip(&early_out).filter(|(_, &k)| k).map(|(&x, _)| x).collect();
                let er = crate::finstoch::flat_index(&early_sizes, &e);
                for c in 0..cols {
                    marg[er * cols + c] += self.kernel.get(r, c);
                }
            }
            // compare every column with the one whose late inputs are zero
            let mut gap: f64 = 0.0;
            for c in 0..cols {
                let mut d = unflatten(&in_sizes, c);
                for (x, &late) in d.iter_mut().zip(&late_in) {
                    if late {
                        *x = 0;
                    }
                }
                let base = crate::finstoch::flat_index(&in_sizes, &d);
                for er in 0..n_early {
                    gap = gap.max((marg[er * cols + c] - marg[er * cols + base]).abs());
                }
            }
            if gap > tol {
                return Some((t, gap));
            }
        }
        None
    }

    /// Side-by-side resources sharing the same rounds. Parties are merged by
    /// name.
    pub fn tensor(&self, other: &PartiteResource) -> PartiteResource {
        self.combine(other, 0)
    }

    /// `other` runs after `self`: its rounds are shifted past `self`'s last.
    pub fn seq_tensor(&self, other: &PartiteResource) -> PartiteResource {
        self.combine(other, self.rounds())
    }

    /// Side-by-side with `other`'s rounds shifted by `shift`.
    pub fn combine(&self, other: &PartiteResource, shift: u32) -> PartiteResource {
        let mut parties = self.parties.clone();
        for p in &other.parties {
            if !parties.contains(p) {
                parties.push(p.clone());
            }
        }
        let mut ports = self.ports.clone();
        ports.extend(other.ports.iter().map(|p| Port {
            round: p.round + shift,
            ..p.clone()
        }));
        // kernel of the tensor has inputs [self ins, other ins], outputs
        // [self outs, other outs]; port order interleaves directions, which
        // the wire lists already respect since each direction is listed in
        // port order
        let kernel = tensor(&self.kernel, &other.kernel);
        PartiteResource { parties, ports, kernel }
    }

    /// Reorders the party list (ports and kernel unchanged).
    pub fn with_parties(&self, parties: Vec<String>) -> Result<Self, ResourceError> {
        PartiteResource::new(parties, self.ports.clone(), self.kernel.clone())
    }

    /// Indices of all ports owned by `party`.
    pub fn ports_of(&self, party: &str) -> Vec<usize> {
        (0..self.ports.len())
            .filter(|&i| self.ports[i].party == party)
            .collect()
    }
}

fn wires_of(ports: &[Port], dir: Dir) -> WireList {
    ports
        .iter()
        .filter(|p| p.dir == dir)
        .map(|p| FinSet::new(p.size.max(1)).expect("nonzero"))
        .collect()
}
