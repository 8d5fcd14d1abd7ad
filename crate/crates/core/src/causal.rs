//! Strategies that alternate between observing and emitting.
//!
//! A strategy with steps `(O_1, E_1), …, (O_n, E_n)` is stored as one
//! kernel `O_1 ⊗ … ⊗ O_n → E_1 ⊗ … ⊗ E_n`. It is causal when the marginal
//! on `E_1 … E_t` ignores `O_{t+1} … O_n` for every `t`; these are linear
//! equalities, so the set of causal strategies is a polytope and fits in a
//! linear program next to the stochasticity rows.

use crate::finstoch::{flat_index, unflatten, Morphism, Result, WireList};
use crate::network::Network;

/// One move of a strategy: what it reads or what it writes.
#[derive(Clone, Debug, PartialEq)]
pub enum Event<T> {
    Obs(Vec<T>),
    Emit(Vec<T>),
}

/// Groups a move sequence into alternating (observe, emit) steps.
pub fn group_steps<T: Clone>(events: &[Event<T>]) -> Vec<(Vec<T>, Vec<T>)> {
    let mut steps: Vec<(Vec<T>, Vec<T>)> = Vec::new();
    let mut emitting = true;
    for e in events {
        match e {
            Event::Obs(v) => {
                if emitting {
                    steps.push((Vec::new(), Vec::new()));
                    emitting = false;
                }
                steps.last_mut().expect("pushed").0.extend(v.iter().cloned());
            }
            Event::Emit(v) => {
                if steps.is_empty() {
                    steps.push((Vec::new(), Vec::new()));
                }
                emitting = true;
                steps.last_mut().expect("nonempty").1.extend(v.iter().cloned());
            }
        }
    }
    steps
}

#[derive(Clone, Debug, PartialEq)]
pub struct CausalShape {
    steps: Vec<(WireList, WireList)>,
}

impl CausalShape {
    pub fn new(steps: Vec<(WireList, WireList)>) -> Self {
        CausalShape { steps }
    }

    pub fn steps(&self) -> &[(WireList, WireList)] {
        &self.steps
    }

    /// All observations, in step order.
    pub fn dom(&self) -> WireList {
        self.steps.iter().fold(WireList::unit(), |a, (o, _)| a.concat(o))
    }

    /// All emissions, in step order.
    pub fn cod(&self) -> WireList {
        self.steps.iter().fold(WireList::unit(), |a, (_, e)| a.concat(e))
    }

    fn sizes(&self) -> (Vec<usize>, Vec<usize>) {
        let o = self.steps.iter().map(|(o, _)| o.total_size()).collect();
        let e = self.steps.iter().map(|(_, e)| e.total_size()).collect();
        (o, e)
    }

    /// Equalities `Σ coeff·x = rhs` over the row-major entries of the
    /// kernel that together with stochasticity characterise causality.
    pub fn constraints(&self) -> Vec<(Vec<(usize, f64)>, f64)> {
        let (os, es) = self.sizes();
        let n = self.steps.len();
        let cols: usize = os.iter().product();
        let mut rows_out = Vec::new();
        for t in 1..n {
            let o_late: usize = os[t..].iter().product();
            if o_late == 1 {
                continue;
            }
            let o_early: usize = os[..t].iter().product();
            let e_early: usize = es[..t].iter().product();
            let e_late: usize = es[t..].iter().product();
            for ee in 0..e_early {
                for oe in 0..o_early {
                    let base = oe * o_late;
                    for ol in 1..o_late {
                        let mut coeffs = Vec::with_capacity(2 * e_late);
                        for el in 0..e_late {
                            let row = ee * e_late + el;
                            coeffs.push((row * cols + base + ol, 1.0));
                            coeffs.push((row * cols + base, -1.0));
                        }
                        rows_out.push((coeffs, 0.0));
                    }
                }
            }
        }
        rows_out
    }

    /// Largest violation of the causality equalities by `m`.
    pub fn violation(&self, m: &Morphism) -> f64 {
        self.constraints()
            .iter()
            .map(|(c, rhs)| (c.iter().map(|&(j, v)| v * m.matrix()[j]).sum::<f64>() - rhs).abs())
            .fold(0.0, f64::max)
    }

    /// Flattens stages `g_t: O_t ⊗ M_{t-1} → E_t ⊗ M_t` (with trivial first
    /// and last memory) into the kernel of this shape.
    pub fn from_stages(&self, stages: &[Morphism]) -> Result<Morphism> {
        let mut net = Network::new();
        let dom = self.dom();
        let cod = self.cod();
        let obs_vars = net.vars_for(&dom);
        let mut emit_vars = Vec::new();
        let mut mem = Vec::new();
        let mut at = 0;
        for ((o, e), g) in self.steps.iter().zip(stages) {
            let mut input = obs_vars[at..at + o.len()].to_vec();
            at += o.len();
            input.extend(&mem);
            g.dom().slice(0..o.len()).check_matches(o, "stage observation")?;
            let out = net.apply(g, &input);
            emit_vars.extend_from_slice(&out[..e.len()]);
            mem = out[e.len()..].to_vec();
        }
        net.contract_morphism(&obs_vars, &emit_vars, dom, cod, crate::finstoch::Flavor::Stochastic)
    }

    /// Index of the kernel entry for the given per-step observation and
    /// emission values.
    pub fn entry(&self, obs: &[usize], emit: &[usize]) -> usize {
        let (os, es) = self.sizes();
        let cols: usize = os.iter().product();
        flat_index(&es, emit) * cols + flat_index(&os, obs)
    }

    /// Per-step values of a flat observation index.
    pub fn split_obs(&self, col: usize) -> Vec<usize> {
        unflatten(&self.sizes().0, col)
    }
}
