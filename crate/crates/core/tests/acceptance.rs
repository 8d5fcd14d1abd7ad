//! Acceptance run: one PASS/FAIL line per criterion, with its runtime.
//!
//! Criteria listed in `KNOWN_RED` are reported but do not fail the run;
//! every other failure exits non-zero.

mod common;

use std::time::{Duration, Instant};

use catsec::diagram::{evaluate, parse, pretty_print, Environment};
use catsec::grouphopf::{check_hopf, group_generators, FiniteGroup, Law};
use catsec::lpsolve::{solve, LpProblem, LpStatus};
use catsec::nogo::{build_instance, splittability_residual, tripartite_residual, InstanceKind, Method, SearchCfg};
use catsec::protocols::*;
use catsec::resource::{compose_protocols, contract_with_fillers, Protocol};
use catsec::security::{correctness_residual, initial_attack, synthesize_simulator, AttackSpec};
use catsec::{compose, tensor, tv_distance, Morphism, Structural, Tolerance, WireList};
use common::combs::{fillers, random_comb};
use common::groups::{corpus, ddh_oracle};
use common::lp::{rank, vertices};
use common::protocols::{attacks, epsilon, perturbed_step};
use common::terms::{data, random_term, run, seq};
use common::*;
use rand::Rng;

/// Failing on purpose; see the project notes.
const KNOWN_RED: [u32; 2] = [3, 6];

/// DDH advantage of `Z_p` with generator 1, as exact fractions.
const DDH_FROZEN: [(usize, f64); 5] = [
    (2, 1.0 / 2.0),
    (3, 2.0 / 3.0),
    (5, 4.0 / 5.0),
    (7, 6.0 / 7.0),
    (11, 10.0 / 11.0),
];
const BIT_COMMITMENT_RESIDUAL: f64 = 0.5;
const OBLIVIOUS_TRANSFER_RESIDUAL: f64 = 0.25;
const BROADCAST_RESIDUAL: f64 = 0.5;

#[derive(Default)]
struct Checks {
    failed: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failed.push(what.into());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

fn criterion(id: u32, name: &str, limit: Option<Duration>, body: impl FnOnce(&mut Checks)) -> bool {
    let mut c = Checks::default();
    let t = Instant::now();
    body(&mut c);
    let dt = t.elapsed();
    if let Some(l) = limit {
        c.check(dt < l, format!("runtime {dt:.2?} over {l:?}"));
    }
    let pass = c.failed.is_empty();
    let status = if pass { "PASS" } else { "FAIL" };
    let mut detail = c.notes.join("; ");
    if !pass {
        detail = format!("{} | failed: {}", detail, c.failed.join("; "));
    }
    println!("criterion {id} {status} [{dt:.2?}] {name}: {detail}");
    pass
}

fn hopf(c: &mut Checks) {
    let mut groups: Vec<(String, FiniteGroup)> = (1..=8)
        .map(|n| (format!("Z_{n}"), FiniteGroup::cyclic(n).unwrap()))
        .collect();
    groups.push(("klein4".into(), FiniteGroup::klein4()));
    groups.push(("S_3".into(), FiniteGroup::sym3()));
    let tol = Tolerance::new(1e-9);
    let mut worst: f64 = 0.0;
    for (name, g) in &groups {
        let r = check_hopf(&group_generators(g), tol);
        c.check(r.all_pass(), format!("{name} fails {:?}", r.failing()));
        if g.order().is_power_of_two() {
            c.check(
                r.max_residual() == 0.0,
                format!("{name} residual {} not exactly 0", r.max_residual()),
            );
        }
        worst = worst.max(r.max_residual());
    }
    c.note(format!("{} groups pass, worst residual {worst:.1e}", groups.len()));

    // non-associative Latin square
    let table: Vec<Vec<usize>> = (0..3).map(|x| (0..3).map(|y| (6 - x - y) % 3).collect()).collect();
    let magma = FiniteGroup::from_table_unchecked(table).unwrap();
    let r = check_hopf(&group_generators(&magma), tol);
    c.check(!r.passes(Law::Monoid), "non-associative table passes the monoid law");
    // unit generator moved off the identity
    let mut g = group_generators(&FiniteGroup::cyclic(3).unwrap());
    g.unit = Morphism::point(&wl(&[3]), 1).unwrap();
    let r = check_hopf(&g, tol);
    c.check(
        !r.passes(Law::Monoid) && !r.passes(Law::Antipode),
        format!("wrong unit fails {:?}", r.failing()),
    );
    // point mass instead of the uniform state
    let mut g = group_generators(&FiniteGroup::cyclic(4).unwrap());
    g.integral = Morphism::point(&wl(&[4]), 0).unwrap();
    let r = check_hopf(&g, tol);
    c.check(
        r.failing() == vec![Law::Absorption],
        format!("point integral fails {:?}", r.failing()),
    );
    c.note("non-group tables fail as predicted");
}

fn otp(c: &mut Checks) {
    let gs = corpus();
    for (name, g) in &gs {
        let p = build_otp(g).unwrap().protocol;
        let corr = correctness_residual(&p).unwrap();
        c.check(corr <= 1e-9, format!("{name} correctness {corr}"));
        let a = AttackSpec::joint(&[EVE]);
        let view = initial_attack(&p, &a).unwrap();
        let res = synthesize_simulator(&p, &a, &view).unwrap();
        c.check(res.residual <= 1e-9, format!("{name} epsilon {}", res.residual));
        let sim = &res.simulators[0].kernel;
        let uniform = 1.0 / sim.rows() as f64;
        let off = sim.matrix().iter().map(|v| (v - uniform).abs()).fold(0.0, f64::max);
        c.check(
            sim.rows() == g.order() && off <= 1e-9,
            format!("{name} simulator is not uniform ({off})"),
        );
    }
    c.note(format!(
        "{} groups, Eve's simulator emits a uniform ciphertext",
        gs.len()
    ));
}

fn dhke(c: &mut Checks) {
    let mut corr_seen = Vec::new();
    for (p, frozen) in DDH_FROZEN {
        let g = FiniteGroup::cyclic(p).unwrap();
        let dh = build_dhke(&g, 1).unwrap().protocol;
        let corr = correctness_residual(&dh).unwrap();
        c.check(corr == 0.0, format!("Z_{p} correctness {corr:.6} = (p-1)/p^2, not 0"));
        corr_seen.push(format!("{corr:.4}"));
        let adv = ddh_tv_advantage(&g, 1).unwrap();
        let oracle = ddh_oracle(&g, 1);
        c.check(
            (adv - oracle).abs() <= 1e-12,
            format!("Z_{p} advantage {adv} vs oracle {oracle}"),
        );
        c.check(
            (oracle - frozen).abs() <= 1e-12,
            format!("Z_{p} oracle {oracle} vs frozen {frozen}"),
        );
        let eps = epsilon(&dh, &AttackSpec::joint(&[EVE]));
        c.check(
            (eps - adv).abs() <= 1e-9,
            format!("Z_{p} epsilon {eps} vs advantage {adv}"),
        );
    }
    c.note(format!(
        "Eve's epsilon = DDH advantage = (p-1)/p for p in 2,3,5,7,11; key bias {}",
        corr_seen.join(", ")
    ));
}

fn composition(c: &mut Checks) {
    let mut r = rng(4);
    let mut worst_gap = f64::NEG_INFINITY;
    for i in 0..200 {
        let e = r.gen_range(1..=3);
        let src = common::protocols::channel(&mut r, e);
        let (e1, e2) = (r.gen_range(0.0..0.2), r.gen_range(0.0..0.2));
        let p1 = perturbed_step(&mut r, &src, e1);
        let p2 = perturbed_step(&mut r, p1.target(), e2);
        let comp = compose_protocols(&p1, &p2).unwrap();
        let (c1, c2, cc) = (
            correctness_residual(&p1).unwrap(),
            correctness_residual(&p2).unwrap(),
            correctness_residual(&comp).unwrap(),
        );
        c.check(
            cc <= c1 + c2 + 1e-9,
            format!("pair {i}: correctness {cc} > {c1} + {c2}"),
        );
        for a in attacks() {
            let (s1, s2, sc) = (epsilon(&p1, &a), epsilon(&p2, &a), epsilon(&comp, &a));
            c.check(
                sc <= s1 + s2 + 1e-9,
                format!("pair {i} {:?}: {sc} > {s1} + {s2}", a.dishonest),
            );
            worst_gap = worst_gap.max(sc - s1 - s2);
        }
    }
    c.note(format!(
        "200 pairs x 5 attacks, max(eps - eps1 - eps2) = {worst_gap:.2e}"
    ));
    for n in [2, 3] {
        let otp = build_otp(&FiniteGroup::cyclic(n).unwrap()).unwrap().protocol;
        let outer = compose_protocols(&otp, &Protocol::identity(otp.target())).unwrap();
        let inner = compose_protocols(&Protocol::identity(otp.source()), &otp).unwrap();
        for p in [&outer, &inner] {
            let corr = correctness_residual(p).unwrap();
            c.check(corr <= 1e-9, format!("perfect composite correctness {corr}"));
            for d in [vec![EVE], vec![ALICE], vec![BOB]] {
                let e = epsilon(p, &AttackSpec::joint(&d));
                c.check(e <= 1e-9, format!("perfect composite epsilon {e} for {d:?}"));
            }
        }
    }
    c.note("perfect composed with perfect stays perfect");
}

fn combs(c: &mut Checks) {
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let m = r.gen_range(0..=3);
        let comb = random_comb(&mut r, m);
        let fs = fillers(&mut r, &comb, i % 2 == 1);
        let pt = comb.process_tensor().unwrap();
        let d = max_diff(
            comb.plug(&fs).unwrap().matrix(),
            contract_with_fillers(&comb, &pt, &fs).unwrap().matrix(),
        );
        worst = worst.max(d);
    }
    c.check(worst <= 1e-9, format!("max deviation {worst}"));
    c.note(format!("200 combs, max deviation {worst:.1e}"));
}

fn bipartite(c: &mut Checks) {
    let exact = SearchCfg::default();
    for k in [InstanceKind::PerfectChannel, InstanceKind::ProductState] {
        let r = splittability_residual(&build_instance(k), &exact).unwrap().min_residual;
        c.check(r <= 1e-8, format!("{k} residual {r}"));
    }
    let mut seen = Vec::new();
    for (k, frozen) in [
        (InstanceKind::BitCommitment, BIT_COMMITMENT_RESIDUAL),
        (InstanceKind::ObliviousTransfer, OBLIVIOUS_TRANSFER_RESIDUAL),
    ] {
        let r = splittability_residual(&build_instance(k), &exact).unwrap().min_residual;
        c.check(
            (r - frozen).abs() <= 1e-9,
            format!("{k} residual {r} moved from {frozen}"),
        );
        c.check(r >= 0.45, format!("{k} residual {r:.4} < 0.45"));
        seen.push(format!("{k} {r:.4}"));
    }
    let loose = SearchCfg {
        method: Method::Acausal,
        ..SearchCfg::default()
    };
    let r = splittability_residual(&build_instance(InstanceKind::BitCommitment), &loose)
        .unwrap()
        .min_residual;
    c.check(r <= 1e-8, format!("acausal bit_commitment residual {r}"));
    c.note(format!(
        "controls split; {}; acausal bit_commitment {r:.1e}",
        seen.join(", ")
    ));
}

fn tripartite(c: &mut Checks) {
    let rep = tripartite_residual(&build_instance(InstanceKind::Broadcast), false).unwrap();
    c.check(
        rep.exact_status == Some(LpStatus::Infeasible),
        format!("level 0 is {:?}", rep.exact_status),
    );
    c.check(rep.min_residual >= 0.45, format!("residual {}", rep.min_residual));
    c.check(
        (rep.min_residual - BROADCAST_RESIDUAL).abs() <= 1e-9,
        format!("residual {} moved", rep.min_residual),
    );
    let local = tripartite_residual(&build_instance(InstanceKind::LocalBits), false).unwrap();
    c.check(
        local.exact_status == Some(LpStatus::Optimal) && local.min_residual <= 1e-8,
        "local bits not feasible",
    );
    c.note(format!(
        "broadcast level 0 infeasible, residual {:.4}; local bits feasible",
        rep.min_residual
    ));
}

fn semantics(c: &mut Checks) {
    let mut r = rng(8);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let ws: Vec<WireList> = (0..4).map(|_| wires(&mut r, 2, 3)).collect();
        let (f, g, h) = (
            stochastic(&mut r, &ws[0], &ws[1]),
            stochastic(&mut r, &ws[1], &ws[2]),
            stochastic(&mut r, &ws[2], &ws[3]),
        );
        let assoc = max_diff(
            compose(&h, &compose(&g, &f).unwrap()).unwrap().matrix(),
            compose(&compose(&h, &g).unwrap(), &f).unwrap().matrix(),
        );
        let vs: Vec<WireList> = (0..6).map(|_| wires(&mut r, 1, 3)).collect();
        let (f1, g1) = (stochastic(&mut r, &vs[0], &vs[1]), stochastic(&mut r, &vs[1], &vs[2]));
        let (f2, g2) = (stochastic(&mut r, &vs[3], &vs[4]), stochastic(&mut r, &vs[4], &vs[5]));
        let inter = max_diff(
            tensor(&compose(&g1, &f1).unwrap(), &compose(&g2, &f2).unwrap()).matrix(),
            compose(&tensor(&g1, &g2), &tensor(&f1, &f2)).unwrap().matrix(),
        );
        let sw_in = Morphism::structural(&Structural::Swap, &vs[0].concat(&vs[3])).unwrap();
        let sw_out = Morphism::structural(&Structural::Swap, &vs[1].concat(&vs[4])).unwrap();
        let natural = max_diff(
            compose(&sw_out, &tensor(&f1, &f2)).unwrap().matrix(),
            compose(&tensor(&f2, &f1), &sw_in).unwrap().matrix(),
        );
        let (x, y) = (stochastic(&mut r, &ws[0], &ws[1]), stochastic(&mut r, &ws[0], &ws[1]));
        let post = stochastic(&mut r, &ws[1], &ws[2]);
        let before = tv_distance(&x, &y).unwrap();
        let after = tv_distance(&compose(&post, &x).unwrap(), &compose(&post, &y).unwrap()).unwrap();
        worst = worst.max(assoc).max(inter).max(natural).max(after - before);
    }
    c.check(worst <= 1e-12, format!("law deviation {worst}"));

    let mut lp_worst: f64 = 0.0;
    let mut programs = 0;
    while programs < 300 {
        let n = r.gen_range(2..=6);
        let m = r.gen_range(1..=3.min(n - 1));
        let mut a = vec![vec![1.0; n]];
        let mut b = vec![r.gen_range(0.5..3.0)];
        for _ in 1..m {
            a.push((0..n).map(|_| r.gen_range(-2i32..=2) as f64).collect());
            b.push(r.gen_range(-2i32..=2) as f64);
        }
        if rank(&a) < m {
            continue;
        }
        programs += 1;
        let cost: Vec<f64> = (0..n).map(|_| r.gen_range(-3.0..3.0)).collect();
        let sol = solve(&LpProblem::from_dense(cost.clone(), &a.concat(), b.clone()).unwrap());
        let vs = vertices(&a, &b, n);
        if vs.is_empty() {
            c.check(
                sol.status == LpStatus::Infeasible,
                "feasibility disagrees with enumeration",
            );
            continue;
        }
        let best = vs
            .iter()
            .map(|x| x.iter().zip(&cost).map(|(x, c)| x * c).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        c.check(sol.status == LpStatus::Optimal, "optimal program reported otherwise");
        lp_worst = lp_worst.max((sol.objective_value - best).abs());
    }
    c.check(lp_worst <= 1e-8, format!("LP deviation {lp_worst}"));
    c.note(format!(
        "500 instances, law deviation {worst:.1e}; 300 LPs vs vertex enumeration, deviation {lp_worst:.1e}"
    ));
}

fn dsl(c: &mut Checks) {
    let env = common::terms::env();
    let corpus = include_str!("data/terms.txt");
    let mut n = 0;
    for line in corpus
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        let p = parse(line).unwrap();
        let printed = pretty_print(&p);
        let same = parse(&printed)
            .map(|q| q.without_spans() == p.without_spans())
            .unwrap_or(false);
        c.check(same, format!("round trip changes `{line}`"));
        n += 1;
    }
    c.check(n >= 50, format!("corpus has {n} terms"));
    let mut r = rng(9);
    for _ in 0..300 {
        let (nodes, ms, dom) = random_term(&mut r);
        let want = ms
            .iter()
            .fold(Morphism::identity(&dom), |acc, m| compose(m, &acc).unwrap());
        let term = seq(nodes);
        c.check(
            max_diff(run(&term, &env).matrix(), want.matrix()) <= 1e-12,
            format!("`{term}` evaluates wrongly"),
        );
    }
    let g = FiniteGroup::cyclic(4).unwrap();
    let z4 = Environment::load(data("z4.json")).unwrap();
    let diagram = evaluate(&std::fs::read_to_string(data("otp.csd")).unwrap(), &z4).unwrap();
    let built = catsec::resource::apply_protocol(&build_otp(&g).unwrap().protocol).unwrap();
    let d = max_diff(diagram.matrix(), built.kernel().matrix());
    c.check(d <= 1e-12, format!("pad diagram differs by {d}"));
    c.note(format!(
        "{n}-term corpus round-trips, 300 random terms, pad diagram deviation {d:.1e}"
    ));
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        (1, criterion(1, "group laws", Some(s(1)), hopf)),
        (2, criterion(2, "one-time pad", Some(s(5)), otp)),
        (3, criterion(3, "Diffie-Hellman", Some(s(10)), dhke)),
        (4, criterion(4, "composition", Some(s(60)), composition)),
        (5, criterion(5, "combs", Some(s(30)), combs)),
        (6, criterion(6, "bipartite no-go", Some(s(60)), bipartite)),
        (7, criterion(7, "tripartite no-go", Some(s(30)), tripartite)),
        (8, criterion(8, "semantics", Some(s(60)), semantics)),
        (9, criterion(9, "diagram language", None, dsl)),
    ];
    let unexpected: Vec<u32> = results
        .iter()
        .filter(|(id, ok)| !ok && !KNOWN_RED.contains(id))
        .map(|r| r.0)
        .collect();
    let fixed: Vec<u32> = results
        .iter()
        .filter(|(id, ok)| *ok && KNOWN_RED.contains(id))
        .map(|r| r.0)
        .collect();
    if !fixed.is_empty() {
        println!("criteria {fixed:?} pass but are listed as known red");
    }
    if unexpected.is_empty() {
        println!(
            "acceptance: {} of 9 pass, known red {KNOWN_RED:?}",
            results.iter().filter(|r| r.1).count()
        );
    } else {
        println!("acceptance: unexpected failures in {unexpected:?}");
        std::process::exit(1);
    }
}
