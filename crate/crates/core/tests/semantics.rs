mod common;

use catsec::finstoch::max_abs_diff;
use catsec::{compose, tensor, tv_distance, Morphism, Structural, WireList};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn cfg() -> ProptestConfig {
    ProptestConfig::with_cases(500)
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn compose_is_the_matrix_product(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b, c) = (wires(&mut r, 2, 3), wires(&mut r, 2, 3), wires(&mut r, 2, 3));
        let f = stochastic(&mut r, &a, &b);
        let g = stochastic(&mut r, &b, &c);
        let gf = compose(&g, &f).unwrap();
        prop_assert!(max_diff(gf.matrix(), &matmul(&g, &f)) <= 1e-12);
        prop_assert!(gf.is_stochastic(1e-9));
    }

    #[test]
    fn tensor_is_kronecker(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b, c, d) = (wires(&mut r, 1, 3), wires(&mut r, 1, 3), wires(&mut r, 1, 3), wires(&mut r, 1, 3));
        let m = stochastic(&mut r, &a, &b);
        let n = stochastic(&mut r, &c, &d);
        let t = tensor(&m, &n);
        prop_assert!(t.is_stochastic(1e-9));
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                for k in 0..n.rows() {
                    for l in 0..n.cols() {
                        let want = m.get(i, j) * n.get(k, l);
                        prop_assert!((t.get(i * n.rows() + k, j * n.cols() + l) - want).abs() <= 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn associativity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ws: Vec<WireList> = (0..4).map(|_| wires(&mut r, 2, 3)).collect();
        let f = stochastic(&mut r, &ws[0], &ws[1]);
        let g = stochastic(&mut r, &ws[1], &ws[2]);
        let h = stochastic(&mut r, &ws[2], &ws[3]);
        let left = compose(&h, &compose(&g, &f).unwrap()).unwrap();
        let right = compose(&compose(&h, &g).unwrap(), &f).unwrap();
        prop_assert!(max_abs_diff(&left, &right).unwrap() <= 1e-12);
    }

    #[test]
    fn interchange(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ws: Vec<WireList> = (0..6).map(|_| wires(&mut r, 1, 3)).collect();
        let f1 = stochastic(&mut r, &ws[0], &ws[1]);
        let g1 = stochastic(&mut r, &ws[1], &ws[2]);
        let f2 = stochastic(&mut r, &ws[3], &ws[4]);
        let g2 = stochastic(&mut r, &ws[4], &ws[5]);
        let left = tensor(&compose(&g1, &f1).unwrap(), &compose(&g2, &f2).unwrap());
        let right = compose(&tensor(&g1, &g2), &tensor(&f1, &f2)).unwrap();
        prop_assert!(max_abs_diff(&left, &right).unwrap() <= 1e-12);
    }

    #[test]
    fn swap_is_natural(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b, c, d) = (wires(&mut r, 1, 3), wires(&mut r, 1, 3), wires(&mut r, 1, 3), wires(&mut r, 1, 3));
        let f = stochastic(&mut r, &a, &b);
        let g = stochastic(&mut r, &c, &d);
        let sw_in = Morphism::structural(&Structural::Swap, &a.concat(&c)).unwrap();
        let sw_out = Morphism::structural(&Structural::Swap, &b.concat(&d)).unwrap();
        let left = compose(&sw_out, &tensor(&f, &g)).unwrap();
        let right = compose(&tensor(&g, &f), &sw_in).unwrap();
        prop_assert!(max_abs_diff(&left, &right).unwrap() <= 1e-12);
    }

    #[test]
    fn tv_is_a_pseudometric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = (wires(&mut r, 2, 3), wires(&mut r, 2, 3));
        let (x, y, z) = (stochastic(&mut r, &a, &b), stochastic(&mut r, &a, &b), stochastic(&mut r, &a, &b));
        let d = |p: &Morphism, q: &Morphism| tv_distance(p, q).unwrap();
        prop_assert_eq!(d(&x, &x), 0.0);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() <= 1e-12);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
        prop_assert!(d(&x, &y) <= 1.0 + 1e-12);
    }

    #[test]
    fn post_processing_contracts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b, c) = (wires(&mut r, 2, 3), wires(&mut r, 2, 3), wires(&mut r, 2, 3));
        let (x, y) = (stochastic(&mut r, &a, &b), stochastic(&mut r, &a, &b));
        let post = if r.gen_bool(0.5) { stochastic(&mut r, &b, &c) } else { deterministic(&mut r, &b, &c) };
        let before = tv_distance(&x, &y).unwrap();
        let after = tv_distance(&compose(&post, &x).unwrap(), &compose(&post, &y).unwrap()).unwrap();
        prop_assert!(after <= before + 1e-12);
    }
}

#[test]
fn structural_examples() {
    let copy = Morphism::copy(&wl(&[2]));
    assert_eq!(copy.matrix(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let swap = Morphism::structural(&Structural::Swap, &wl(&[2, 3])).unwrap();
    for x in 0..2 {
        for y in 0..3 {
            assert_eq!(swap.get(y * 2 + x, x * 3 + y), 1.0);
        }
    }
    let counit = compose(
        &tensor(&Morphism::identity(&wl(&[2])), &Morphism::delete(&wl(&[2]))),
        &copy,
    )
    .unwrap();
    assert_eq!(counit, Morphism::identity(&wl(&[2])));
    let u2 = Morphism::uniform(&wl(&[2]));
    let p0 = Morphism::point(&wl(&[2]), 0).unwrap();
    let p1 = Morphism::point(&wl(&[2]), 1).unwrap();
    assert_eq!(tv_distance(&p0, &p1).unwrap(), 1.0);
    assert_eq!(tv_distance(&u2, &p0).unwrap(), 0.5);
    let pts = tensor(&p1, &Morphism::point(&wl(&[3]), 2).unwrap());
    assert_eq!(pts, Morphism::point(&wl(&[2, 3]), 5).unwrap());
}

#[test]
fn shape_errors_name_the_wire() {
    let f = Morphism::identity(&wl(&[2, 3]));
    let g = Morphism::identity(&wl(&[2, 4]));
    let e = compose(&g, &f).unwrap_err().to_string();
    assert!(e.contains('1'), "{e}");
}
