use catsec::grouphopf::FiniteGroup;

pub fn corpus() -> Vec<(String, FiniteGroup)> {
    let mut gs: Vec<(String, FiniteGroup)> = (1..=16)
        .map(|n| (format!("cyclic:{n}"), FiniteGroup::cyclic(n).unwrap()))
        .collect();
    gs.push(("klein4".into(), FiniteGroup::klein4()));
    gs.push(("sym:3".into(), FiniteGroup::sym3()));
    for p in [3, 5, 7, 11, 13, 17] {
        gs.push((format!("Z_{p}^*"), FiniteGroup::multiplicative(p).unwrap()));
    }
    gs
}

/// `x ↦ x^k` by repeated multiplication.
pub fn power(g: &FiniteGroup, x: usize, k: usize) -> usize {
    (0..k).fold(g.unit(), |acc, _| g.mul(acc, x))
}

/// Enumerates `(g^a, g^b, g^ab)` against `(g^a, g^b, g^c)`.
pub fn ddh_oracle(g: &FiniteGroup, gen: usize) -> f64 {
    let n = g.order();
    let mut diff = std::collections::HashMap::<(usize, usize, usize), f64>::new();
    for a in 0..n {
        for b in 0..n {
            let (x, y) = (power(g, gen, a), power(g, gen, b));
            *diff.entry((x, y, power(g, gen, a * b))).or_default() += 1.0 / (n * n) as f64;
            for c in 0..n {
                *diff.entry((x, y, power(g, gen, c))).or_default() -= 1.0 / (n * n * n) as f64;
            }
        }
    }
    0.5 * diff.values().map(|v| v.abs()).sum::<f64>()
}

/// Distance of `g^ab` from a uniform key.
pub fn key_bias(g: &FiniteGroup, gen: usize) -> f64 {
    let n = g.order();
    let mut p = vec![-1.0 / n as f64; n];
    for a in 0..n {
        for b in 0..n {
            p[power(g, gen, a * b)] += 1.0 / (n * n) as f64;
        }
    }
    0.5 * p.iter().map(|v| v.abs()).sum::<f64>()
}

pub fn generators(g: &FiniteGroup) -> Vec<usize> {
    (0..g.order()).filter(|&x| g.generates(x)).collect()
}
