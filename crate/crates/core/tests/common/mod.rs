#![allow(dead_code)]

pub mod combs;
pub mod groups;
pub mod lp;
pub mod protocols;
pub mod terms;

use catsec::{Flavor, Morphism, WireList};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn wl(sizes: &[usize]) -> WireList {
    WireList::from_sizes(sizes).unwrap()
}

/// Random wire list with `1..=max_wires` wires of size `1..=max_size`.
pub fn wires(r: &mut ChaCha8Rng, max_wires: usize, max_size: usize) -> WireList {
    let k = r.gen_range(1..=max_wires);
    wl(&(0..k).map(|_| r.gen_range(1..=max_size)).collect::<Vec<_>>())
}

pub fn stochastic(r: &mut ChaCha8Rng, dom: &WireList, cod: &WireList) -> Morphism {
    let (rows, cols) = (cod.total_size(), dom.total_size());
    let mut m = vec![0.0; rows * cols];
    for c in 0..cols {
        let w: Vec<f64> = (0..rows).map(|_| r.gen::<f64>() + 1e-3).collect();
        let s: f64 = w.iter().sum();
        for row in 0..rows {
            m[row * cols + c] = w[row] / s;
        }
    }
    Morphism::new(dom.clone(), cod.clone(), m, Flavor::Stochastic).unwrap()
}

pub fn deterministic(r: &mut ChaCha8Rng, dom: &WireList, cod: &WireList) -> Morphism {
    let n = cod.total_size();
    let table: Vec<usize> = (0..dom.total_size()).map(|_| r.gen_range(0..n)).collect();
    Morphism::deterministic(dom.clone(), cod.clone(), |c| table[c]).unwrap()
}

/// Naive `g · f`.
pub fn matmul(g: &Morphism, f: &Morphism) -> Vec<f64> {
    let (n, k, m) = (g.rows(), g.cols(), f.cols());
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        for j in 0..m {
            for l in 0..k {
                out[i * m + j] += g.get(i, l) * f.get(l, j);
            }
        }
    }
    out
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
