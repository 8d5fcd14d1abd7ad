use super::ResourceError;
use crate::finstoch::{compose, max_abs_diff, tensor, tensor_all, Morphism, Tolerance, WireList};
use crate::network::Network;

/// A circuit with `m` ordered holes.
///
/// Hole `k` (in visiting order) is slot `sigma[k]`. The pieces have types
/// `g_0: C → A_σ(1) ⊗ Y_1`, `g_k: B_σ(k) ⊗ Y_k → A_σ(k+1) ⊗ Y_{k+1}` and
/// `g_m: B_σ(m) ⊗ Y_m → D`; a comb without holes is a single morphism
/// `C → D`.
#[derive(Clone, Debug)]
pub struct Comb {
    slots: Vec<(WireList, WireList)>,
    sigma: Vec<usize>,
    pieces: Vec<Morphism>,
    memory: Vec<WireList>,
    outer: (WireList, WireList),
}

fn mismatch(what: String, e: crate::finstoch::FinStochError) -> ResourceError {
    ResourceError::Comb(format!("{what}: {e}"))
}

impl Comb {
    pub fn new(
        slots: Vec<(WireList, WireList)>,
        sigma: Vec<usize>,
        pieces: Vec<Morphism>,
        outer: (WireList, WireList),
    ) -> Result<Self, ResourceError> {
        let m = slots.len();
        let mut seen = vec![false; m];
        if sigma.len() != m || sigma.iter().any(|&s| s >= m || std::mem::replace(&mut seen[s], true)) {
            return Err(ResourceError::Comb(format!(
                "{sigma:?} is not a permutation of {m} slots"
            )));
        }
        if pieces.len() != m + 1 {
            return Err(ResourceError::Comb(format!(
                "{m} slots need {} pieces, got {}",
                m + 1,
                pieces.len()
            )));
        }
        let (c, d) = &outer;
        pieces[0]
            .dom()
            .check_matches(c, "comb input")
            .map_err(|e| mismatch("piece 0 domain".into(), e))?;
        pieces[m]
            .cod()
            .check_matches(d, "comb output")
            .map_err(|e| mismatch(format!("piece {m} codomain"), e))?;
        let mut memory = Vec::with_capacity(m);
        for k in 0..m {
            // g_k emits A_σ(k+1) ⊗ Y_{k+1}
            let a = &slots[sigma[k]].0;
            let cod = pieces[k].cod();
            if cod.len() < a.len() {
                return Err(ResourceError::Comb(format!(
                    "piece {k} has too few outputs for slot {}",
                    sigma[k]
                )));
            }
            cod.slice(0..a.len())
                .check_matches(a, "slot input")
                .map_err(|e| mismatch(format!("piece {k} feeding slot {}", sigma[k]), e))?;
            let y = cod.slice(a.len()..cod.len());
            let b = &slots[sigma[k]].1;
            let next = pieces[k + 1].dom();
            next.check_matches(&b.concat(&y), "slot output and memory")
                .map_err(|e| mismatch(format!("piece {} after slot {}", k + 1, sigma[k]), e))?;
            memory.push(y);
        }
        Ok(Comb {
            slots,
            sigma,
            pieces,
            memory,
            outer,
        })
    }

    /// A comb whose holes are visited in slot order.
    pub fn sequential(
        slots: Vec<(WireList, WireList)>,
        pieces: Vec<Morphism>,
        outer: (WireList, WireList),
    ) -> Result<Self, ResourceError> {
        let sigma = (0..slots.len()).collect();
        Comb::new(slots, sigma, pieces, outer)
    }

    /// The one-hole comb that forwards `A` into the hole and `B` out of it.
    pub fn identity(a: &WireList, b: &WireList) -> Comb {
        Comb::sequential(
            vec![(a.clone(), b.clone())],
            vec![Morphism::identity(a), Morphism::identity(b)],
            (a.clone(), b.clone()),
        )
        .expect("identity comb is well-typed")
    }

    pub fn holes(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[(WireList, WireList)] {
        &self.slots
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn pieces(&self) -> &[Morphism] {
        &self.pieces
    }

    pub fn memory(&self) -> &[WireList] {
        &self.memory
    }

    pub fn outer(&self) -> &(WireList, WireList) {
        &self.outer
    }

    /// `(A_σ(k), B_σ(k))` for hole `k` in visiting order.
    pub fn hole(&self, k: usize) -> &(WireList, WireList) {
        &self.slots[self.sigma[k]]
    }

    /// Memory wires `Z_k` of a filler for hole `k`, read off its domain.
    fn filler_memory(&self, k: usize, f: &Morphism) -> Result<WireList, ResourceError> {
        let (a, b) = self.hole(k);
        let dom = f.dom();
        if dom.len() < a.len() {
            return Err(ResourceError::Comb(format!("filler {k} has too few inputs")));
        }
        let z = dom.slice(0..dom.len() - a.len());
        dom.slice(z.len()..dom.len())
            .check_matches(a, "filler input")
            .map_err(|e| mismatch(format!("filler for slot {}", self.sigma[k]), e))?;
        f.cod()
            .check_matches(&z.concat(b), "filler output")
            .map_err(|e| mismatch(format!("filler for slot {}", self.sigma[k]), e))?;
        Ok(z)
    }

    /// Plugs filler `k` (of type `Z_k ⊗ A_σ(k) → Z_k ⊗ B_σ(k)`) into hole `k`.
    ///
    /// The `Z_k` wires pass through to the outside, so the result has type
    /// `Z_1 ⊗ … ⊗ Z_m ⊗ C → Z_1 ⊗ … ⊗ Z_m ⊗ D`; with trivial `Z_k` this is
    /// the plain composite `C → D`.
    pub fn plug(&self, fillers: &[Morphism]) -> Result<Morphism, ResourceError> {
        let m = self.holes();
        if fillers.len() != m {
            return Err(ResourceError::Comb(format!("{m} holes but {} fillers", fillers.len())));
        }
        let zs: Vec<WireList> = (0..m)
            .map(|k| self.filler_memory(k, &fillers[k]))
            .collect::<Result<_, _>>()?;
        let z_lens: Vec<usize> = zs.iter().map(WireList::len).collect();
        let z_all = zs.iter().fold(WireList::unit(), |a, z| a.concat(z));
        let zn = z_all.len();
        // cod layout while running: [Z_1 .. Z_m, A, Y]
        let mut cur = tensor(&Morphism::identity(&z_all), &self.pieces[0]);
        for k in 0..m {
            let z_start: usize = z_lens[..k].iter().sum();
            let z_len = z_lens[k];
            let tail = cur.cod().len() - zn;
            // move Z_k next to A: [Z_<k, Z_>k, Z_k, A, Y]
            let mut perm: Vec<usize> = (0..z_start).collect();
            perm.extend(z_start + z_len..zn);
            perm.extend(z_start..z_start + z_len);
            perm.extend(zn..zn + tail);
            cur = cur.permute_cod(&perm)?;
            let at = zn - z_len;
            cur = cur.then_at(&fillers[k], at)?;
            // and back: [Z_1 .. Z_m, B, Y]
            let mut back: Vec<usize> = (0..z_start).collect();
            back.extend(at..at + z_len);
            back.extend(z_start..at);
            back.extend(zn..cur.cod().len());
            cur = cur.permute_cod(&back)?;
            cur = cur.then_at(&self.pieces[k + 1], zn)?;
        }
        Ok(cur)
    }

    /// The kernel `C ⊗ B_σ(1) ⊗ … ⊗ B_σ(m) → A_σ(1) ⊗ … ⊗ A_σ(m) ⊗ D`
    /// obtained by plugging every hole with a filler that records its input
    /// and emits an externally supplied value.
    pub fn process_tensor(&self) -> Result<Morphism, ResourceError> {
        let m = self.holes();
        let (c, d) = &self.outer;
        let mut fillers = Vec::with_capacity(m);
        for k in 0..m {
            let (a, b) = self.hole(k);
            // (a0, b0, a) -> (a, b0, b0)
            let ab = a.concat(b);
            let input = ab.concat(a);
            let (na, nb) = (a.total_size(), b.total_size());
            let f = Morphism::deterministic(input, ab.concat(b), |col| {
                let a_in = col % na;
                let b0 = (col / na) % nb;
                (a_in * nb + b0) * nb + b0
            })?;
            fillers.push(f);
        }
        let plugged = self.plug(&fillers)?;
        // inputs: [C, B_1 .. B_m] -> [A_1(0), B_1, .., A_m(0), B_m, C]
        let mut prep_parts = vec![Morphism::identity(c)];
        for k in 0..m {
            let (a, b) = self.hole(k);
            prep_parts.push(tensor(&Morphism::point(a, 0)?, &Morphism::identity(b)));
        }
        let prep = tensor_all(prep_parts.iter());
        let c_len = c.len();
        let total = prep.cod().len();
        let mut perm: Vec<usize> = (c_len..total).collect();
        perm.extend(0..c_len);
        let prep = prep.permute_cod(&perm)?;
        let mut pt = compose(&plugged, &prep)?;
        // outputs: [A_1, B_1, .., A_m, B_m, D] -> [A_1 .. A_m, D]
        let mut post_parts = Vec::new();
        for k in 0..m {
            let (a, b) = self.hole(k);
            post_parts.push(tensor(&Morphism::identity(a), &Morphism::delete(b)));
        }
        post_parts.push(Morphism::identity(d));
        pt = compose(&tensor_all(post_parts.iter()), &pt)?;
        Ok(pt)
    }

    /// Equality of the actions on all fillers, decided on process tensors.
    pub fn equal(&self, other: &Comb, tol: Tolerance) -> Result<bool, ResourceError> {
        self.check_same_interface(other)?;
        let d = max_abs_diff(&self.process_tensor()?, &other.process_tensor()?)?;
        Ok(d <= tol.eps)
    }

    fn check_same_interface(&self, other: &Comb) -> Result<(), ResourceError> {
        let same = self.sigma == other.sigma
            && self.slots.len() == other.slots.len()
            && self
                .slots
                .iter()
                .zip(&other.slots)
                .all(|((a, b), (c, d))| a.same_shape(c) && b.same_shape(d))
            && self.outer.0.same_shape(&other.outer.0)
            && self.outer.1.same_shape(&other.outer.1);
        if same {
            Ok(())
        } else {
            Err(ResourceError::Comb("combs have different interfaces".into()))
        }
    }

    /// Replaces hole `k` of `self` by the comb `inners[k]`, whose outer
    /// interface must be that hole. Memory of the result is the inner comb's
    /// memory followed by the outer memory.
    pub fn nest(&self, inners: &[Comb]) -> Result<Comb, ResourceError> {
        let m = self.holes();
        if inners.len() != m {
            return Err(ResourceError::Comb(format!(
                "{m} holes but {} inner combs",
                inners.len()
            )));
        }
        let mut slots = Vec::new();
        let mut sigma = Vec::new();
        for (k, inner) in inners.iter().enumerate() {
            let (a, b) = self.hole(k);
            if !inner.outer.0.same_shape(a) || !inner.outer.1.same_shape(b) {
                return Err(ResourceError::Comb(format!(
                    "inner comb {k} has interface {} -> {}, hole is {} -> {}",
                    inner.outer.0, inner.outer.1, a, b
                )));
            }
            let off = slots.len();
            slots.extend(inner.slots.iter().cloned());
            sigma.extend(inner.sigma.iter().map(|s| s + off));
        }
        let mut pieces = Vec::new();
        let mut cur = self.pieces[0].clone();
        for (k, inner) in inners.iter().enumerate() {
            // cur: ... -> A_σ(k) ⊗ Y
            let y = self.memory[k].clone();
            cur = cur.then_at(&inner.pieces[0], 0)?;
            for j in 1..inner.pieces.len() {
                pieces.push(cur);
                cur = tensor(&inner.pieces[j], &Morphism::identity(&y));
            }
            cur = compose(&self.pieces[k + 1], &cur)?;
        }
        pieces.push(cur);
        Comb::new(slots, sigma, pieces, self.outer.clone())
    }
}

/// Sums the process tensor of `comb` against the fillers' kernels. This is
/// the linear action that makes the process tensor a complete description.
pub fn contract_with_fillers(comb: &Comb, pt: &Morphism, fillers: &[Morphism]) -> Result<Morphism, ResourceError> {
    let m = comb.holes();
    let mut net = Network::new();
    let (c, d) = comb.outer();
    let c_vars = net.vars_for(c);
    let mut z_in = Vec::new();
    let mut z_out = Vec::new();
    let mut a_vars = Vec::new();
    let mut b_vars = Vec::new();
    let mut z_dom = WireList::unit();
    for k in 0..m {
        let z = comb.filler_memory(k, &fillers[k])?;
        let (a, b) = comb.hole(k);
        z_in.push(net.vars_for(&z));
        z_out.push(net.vars_for(&z));
        a_vars.push(net.vars_for(a));
        b_vars.push(net.vars_for(b));
        z_dom = z_dom.concat(&z);
    }
    let d_vars = net.vars_for(d);
    let pt_dom: Vec<usize> = c_vars.iter().chain(b_vars.iter().flatten()).copied().collect();
    let pt_cod: Vec<usize> = a_vars.iter().flatten().chain(&d_vars).copied().collect();
    net.add_morphism(pt, &pt_dom, &pt_cod);
    for k in 0..m {
        let dom: Vec<usize> = z_in[k].iter().chain(&a_vars[k]).copied().collect();
        let cod: Vec<usize> = z_out[k].iter().chain(&b_vars[k]).copied().collect();
        net.add_morphism(&fillers[k], &dom, &cod);
    }
    let in_vars: Vec<usize> = z_in.iter().flatten().chain(&c_vars).copied().collect();
    let out_vars: Vec<usize> = z_out.iter().flatten().chain(&d_vars).copied().collect();
    Ok(net.contract_morphism(&in_vars, &out_vars, z_dom.concat(c), z_dom.concat(d), pt.flavor())?)
}
