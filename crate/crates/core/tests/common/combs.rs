use catsec::resource::Comb;
use catsec::{Morphism, WireList};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::*;

pub fn maybe_wire(r: &mut ChaCha8Rng, max: usize) -> WireList {
    if r.gen_bool(0.4) {
        WireList::unit()
    } else {
        wl(&[r.gen_range(1..=max)])
    }
}

pub fn random_comb(r: &mut ChaCha8Rng, m: usize) -> Comb {
    let slots: Vec<(WireList, WireList)> = (0..m).map(|_| (wires(r, 1, 3), wires(r, 1, 3))).collect();
    let mut sigma: Vec<usize> = (0..m).collect();
    sigma.shuffle(r);
    let (c, d) = (wires(r, 1, 3), wires(r, 1, 3));
    let mut pieces = Vec::new();
    let mut dom = c.clone();
    for &s in &sigma {
        let y = maybe_wire(r, 2);
        pieces.push(stochastic(r, &dom, &slots[s].0.concat(&y)));
        dom = slots[s].1.concat(&y);
    }
    pieces.push(stochastic(r, &dom, &d));
    Comb::new(slots, sigma, pieces, (c, d)).unwrap()
}

pub fn fillers(r: &mut ChaCha8Rng, comb: &Comb, with_memory: bool) -> Vec<Morphism> {
    (0..comb.holes())
        .map(|k| {
            let (a, b) = comb.hole(k);
            let z = if with_memory {
                maybe_wire(r, 2)
            } else {
                WireList::unit()
            };
            stochastic(r, &z.concat(a), &z.concat(b))
        })
        .collect()
}

pub fn kron_identity(f: &[f64], (n, m): (usize, usize), k: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * k * m * k];
    for i in 0..n {
        for j in 0..m {
            for t in 0..k {
                out[(i * k + t) * (m * k) + j * k + t] = f[i * m + j];
            }
        }
    }
    out
}

pub fn mm(a: &[f64], b: &[f64], n: usize, k: usize, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        for l in 0..k {
            let x = a[i * k + l];
            for j in 0..m {
                out[i * m + j] += x * b[l * m + j];
            }
        }
    }
    out
}

/// Straight-line evaluation: `g_m ∘ (f_m ⊗ id) ∘ … ∘ (f_1 ⊗ id) ∘ g_0`.
pub fn flat(comb: &Comb, fs: &[Morphism]) -> Vec<f64> {
    let p = comb.pieces();
    let cols = p[0].cols();
    let mut cur = p[0].matrix().to_vec();
    let mut rows = p[0].rows();
    for (k, f) in fs.iter().enumerate() {
        let y = comb.memory()[k].total_size();
        let lifted = kron_identity(f.matrix(), (f.rows(), f.cols()), y);
        cur = mm(&lifted, &cur, f.rows() * y, rows, cols);
        rows = f.rows() * y;
        cur = mm(p[k + 1].matrix(), &cur, p[k + 1].rows(), rows, cols);
        rows = p[k + 1].rows();
    }
    cur
}
