//! Tensor networks over finite variables.
//!
//! Morphisms wired along shared variables are contracted by greedy variable
//! elimination. A morphism with codomain variables `o` and domain variables
//! `i` becomes the factor over `o ++ i`, which is exactly its row-major
//! matrix. This is how attacked views, process-tensor contractions and
//! the no-go expressions are evaluated without building padded matrices.

use crate::finstoch::{Flavor, Morphism, Result, WireList};

pub type Var = usize;

/// A nonnegative table over an ordered list of variables (big-endian).
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub vars: Vec<Var>,
    pub table: Vec<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct Network {
    sizes: Vec<usize>,
    factors: Vec<Factor>,
}

impl Network {
    pub fn new() -> Self {
        Network::default()
    }

    pub fn var(&mut self, size: usize) -> Var {
        self.sizes.push(size);
        self.sizes.len() - 1
    }

    /// One fresh variable per wire.
    pub fn vars_for(&mut self, wires: &WireList) -> Vec<Var> {
        wires.sizes().into_iter().map(|n| self.var(n)).collect()
    }

    pub fn size(&self, v: Var) -> usize {
        self.sizes[v]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn add(&mut self, factor: Factor) {
        debug_assert_eq!(
            factor.table.len(),
            factor.vars.iter().map(|&v| self.sizes[v]).product::<usize>()
        );
        self.factors.push(factor);
    }

    /// Adds `m` reading its inputs from `dom` and writing its outputs to `cod`.
    pub fn add_morphism(&mut self, m: &Morphism, dom: &[Var], cod: &[Var]) {
        debug_assert_eq!(m.dom().sizes(), dom.iter().map(|&v| self.sizes[v]).collect::<Vec<_>>());
        debug_assert_eq!(m.cod().sizes(), cod.iter().map(|&v| self.sizes[v]).collect::<Vec<_>>());
        let mut vars = cod.to_vec();
        vars.extend_from_slice(dom);
        self.add(Factor {
            vars,
            table: m.matrix().to_vec(),
        });
    }

    /// Adds `m` on fresh output variables, which are returned.
    pub fn apply(&mut self, m: &Morphism, dom: &[Var]) -> Vec<Var> {
        let cod = self.vars_for(m.cod());
        self.add_morphism(m, dom, &cod);
        cod
    }

    /// A fresh variable constrained to equal `v`.
    pub fn alias(&mut self, v: Var) -> Var {
        let n = self.sizes[v];
        let u = self.var(n);
        let mut table = vec![0.0; n * n];
        for k in 0..n {
            table[k * n + k] = 1.0;
        }
        self.add(Factor {
            vars: vec![u, v],
            table,
        });
        u
    }

    /// Sums the product of all factors over every variable not in `keep`.
    /// A variable may appear in `keep` more than once.
    pub fn contract(&self, keep: &[Var]) -> Factor {
        if (1..keep.len()).any(|i| keep[..i].contains(&keep[i])) {
            let mut net = self.clone();
            let mut uniq = Vec::with_capacity(keep.len());
            for &v in keep {
                uniq.push(if uniq.contains(&v) { net.alias(v) } else { v });
            }
            return net.contract(&uniq);
        }
        let mut live: Vec<Factor> = self.factors.clone();
        let mut pending: Vec<Var> = Vec::new();
        for f in &live {
            for &v in &f.vars {
                if !keep.contains(&v) && !pending.contains(&v) {
                    pending.push(v);
                }
            }
        }
        while !pending.is_empty() {
            // pick the variable whose elimination creates the smallest factor
            let mut best: Option<(usize, usize, Vec<Var>)> = None;
            for (k, &v) in pending.iter().enumerate() {
                let mut scope: Vec<Var> = Vec::new();
                for f in live.iter().filter(|f| f.vars.contains(&v)) {
                    for &u in &f.vars {
                        if u != v && !scope.contains(&u) {
                            scope.push(u);
                        }
                    }
                }
                let cost: usize = scope
                    .iter()
                    .map(|&u| self.sizes[u])
                    .fold(1usize, |a, b| a.saturating_mul(b));
                if best.as_ref().map_or(true, |b| cost < b.0) {
                    best = Some((cost, k, scope));
                }
            }
            let (_, k, scope) = best.expect("pending is nonempty");
            let v = pending.swap_remove(k);
            let (touching, rest): (Vec<Factor>, Vec<Factor>) = live.into_iter().partition(|f| f.vars.contains(&v));
            live = rest;
            let refs: Vec<&Factor> = touching.iter().collect();
            live.push(einsum(&refs, &scope, &self.sizes));
        }
        let refs: Vec<&Factor> = live.iter().collect();
        einsum(&refs, keep, &self.sizes)
    }

    /// Contracts to a morphism whose codomain is `cod_vars` and domain is
    /// `dom_vars`.
    pub fn contract_morphism(
        &self,
        dom_vars: &[Var],
        cod_vars: &[Var],
        dom: WireList,
        cod: WireList,
        flavor: Flavor,
    ) -> Result<Morphism> {
        let mut keep = cod_vars.to_vec();
        keep.extend_from_slice(dom_vars);
        let f = self.contract(&keep);
        Morphism::new(dom, cod, f.table, flavor)
    }

    /// The network with one factor over `sym_vars` left symbolic. Returns
    /// the coefficient matrix `C` (rows = flat `keep` index, columns = flat
    /// `sym_vars` index) such that the contraction with symbolic table `B`
    /// equals `C · vec(B)`.
    pub fn contract_linear(&self, sym_vars: &[Var], keep: &[Var]) -> Vec<f64> {
        let mut net = self.clone();
        let n: usize = sym_vars.iter().map(|&v| self.sizes[v]).product();
        let e = net.var(n);
        let mut vars = sym_vars.to_vec();
        vars.push(e);
        let mut table = vec![0.0; n * n];
        for k in 0..n {
            table[k * n + k] = 1.0;
        }
        net.add(Factor { vars, table });
        let mut out = keep.to_vec();
        out.push(e);
        net.contract(&out).table
    }
}

/// `Σ_{vars not in out} Π factors`, laid out over `out`.
pub fn einsum(factors: &[&Factor], out: &[Var], sizes: &[usize]) -> Factor {
    let mut order: Vec<Var> = out.to_vec();
    for f in factors {
        for &v in &f.vars {
            if !order.contains(&v) {
                order.push(v);
            }
        }
    }
    let dims: Vec<usize> = order.iter().map(|&v| sizes[v]).collect();
    // strides[f][p]: step in factor f's table when order[p] increments
    let strides: Vec<Vec<usize>> = factors
        .iter()
        .map(|f| {
            let mut s = vec![0usize; order.len()];
            let mut step = 1;
            for &v in f.vars.iter().rev() {
                let p = order.iter().position(|&u| u == v).expect("var in order");
                s[p] += step;
                step *= sizes[v];
            }
            s
        })
        .collect();
    let out_len: usize = dims[..out.len()].iter().product();
    let inner_len: usize = dims[out.len()..].iter().product();
    let mut result = vec![0.0; out_len];
    let nf = factors.len();
    let mut digits = vec![0usize; order.len()];
    let mut idx = vec![0usize; nf];
    let total = out_len * inner_len;
    for flat in 0..total {
        let mut prod = 1.0;
        for (f, &i) in factors.iter().zip(&idx) {
            prod *= f.table[i];
            if prod == 0.0 {
                break;
            }
        }
        if prod != 0.0 {
            result[flat / inner_len] += prod;
        }
        // odometer increment, last position fastest
        let mut p = order.len();
        while p > 0 {
            p -= 1;
            digits[p] += 1;
            for (i, s) in idx.iter_mut().zip(&strides) {
                *i += s[p];
            }
            if digits[p] < dims[p] {
                break;
            }
            for (i, s) in idx.iter_mut().zip(&strides) {
                *i -= s[p] * dims[p];
            }
            digits[p] = 0;
        }
    }
    Factor {
        vars: out.to_vec(),
        table: result,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finstoch::{compose, max_abs_diff, tensor, Structural};

    fn wl(s: &[usize]) -> WireList {
        WireList::from_sizes(s).unwrap()
    }

    fn kernel(dom: &[usize], cod: &[usize], seed: u64) -> Morphism {
        let rows: usize = cod.iter().product();
        let cols: usize = dom.iter().product();
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut v = vec![0.0; rows * cols];
        for e in v.iter_mut() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            *e = ((x >> 33) % 1000) as f64 + 1.0;
        }
        for c in 0..cols {
            let s: f64 = (0..rows).map(|r| v[r * cols + c]).sum();
            for r in 0..rows {
                v[r * cols + c] /= s;
            }
        }
        Morphism::stochastic(wl(dom), wl(cod), v).unwrap()
    }

    #[test]
    fn chain_matches_compose() {
        let f = kernel(&[2], &[3, 2], 1);
        let g = kernel(&[3, 2], &[4], 2);
        let mut net = Network::new();
        let a = net.vars_for(f.dom());
        let b = net.apply(&f, &a);
        let c = net.apply(&g, &b);
        let m = net
            .contract_morphism(&a, &c, wl(&[2]), wl(&[4]), Flavor::Stochastic)
            .unwrap();
        assert!(max_abs_diff(&m, &compose(&g, &f).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn parallel_and_swapped_outputs() {
        let f = kernel(&[2], &[3], 3);
        let g = kernel(&[3], &[2], 4);
        let mut net = Network::new();
        let a = net.vars_for(&wl(&[2, 3]));
        let x = net.apply(&f, &a[..1]);
        let y = net.apply(&g, &a[1..]);
        let m = net
            .contract_morphism(&a, &[y[0], x[0]], wl(&[2, 3]), wl(&[2, 3]), Flavor::Stochastic)
            .unwrap();
        let swap = Morphism::structural(&Structural::Swap, &wl(&[3, 2])).unwrap();
        let expect = compose(&swap, &tensor(&f, &g)).unwrap();
        assert!(max_abs_diff(&m, &expect).unwrap() < 1e-14);
    }

    #[test]
    fn linear_coefficients_reproduce_contraction() {
        let f = kernel(&[2], &[3], 5);
        let b = kernel(&[3], &[2], 6);
        let g = kernel(&[2, 2], &[2], 7);
        let mut net = Network::new();
        let a = net.vars_for(&wl(&[2]));
        let copy = Morphism::copy(&wl(&[2]));
        let cc = net.apply(&copy, &a);
        let x = net.apply(&f, &cc[..1]);
        let yv = net.var(2);
        let z = net.apply(&g, &[yv, cc[1]]);
        let keep: Vec<Var> = z.iter().chain(&a).copied().collect();
        let coeff = net.contract_linear(&[yv, x[0]], &keep);
        net.add_morphism(&b, &x, &[yv]);
        let direct = net.contract(&keep).table;
        let bv = b.matrix();
        for (r, d) in direct.iter().enumerate() {
            let lin: f64 = (0..bv.len()).map(|k| coeff[r * bv.len() + k] * bv[k]).sum();
            assert!((lin - d).abs() < 1e-14);
        }
    }
}
