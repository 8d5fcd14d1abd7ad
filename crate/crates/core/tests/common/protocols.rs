use catsec::resource::{apply_protocol, Dir, PartiteResource, PartyStrategy, Port, Protocol};
use catsec::security::{initial_attack, synthesize_simulator, AttackSpec};
use catsec::{Morphism, WireList};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::*;

pub const PARTIES: [&str; 3] = ["A", "B", "E"];

pub fn names() -> Vec<String> {
    PARTIES.iter().map(|s| s.to_string()).collect()
}

/// One round: A writes a bit, B reads a bit, E reads one of `e` symbols.
pub fn channel(r: &mut ChaCha8Rng, e: usize) -> PartiteResource {
    let ports = vec![
        Port::new("A", Dir::In, 1, 2),
        Port::new("B", Dir::Out, 1, 2),
        Port::new("E", Dir::Out, 1, e),
    ];
    PartiteResource::new(names(), ports, stochastic(r, &wl(&[2]), &wl(&[2, e]))).unwrap()
}

pub fn unit() -> Morphism {
    Morphism::identity(&WireList::unit())
}

/// Random local post-processing from `src` to fresh target ports, and the
/// target it reaches after mixing in noise of weight `eps`.
pub fn perturbed_step(r: &mut ChaCha8Rng, src: &PartiteResource, eps: f64) -> Protocol {
    let e_src = src.ports()[2].size;
    let e_tgt = r.gen_range(1..=3);
    let tgt_ports = vec![
        Port::new("A", Dir::In, 1, 2),
        Port::new("B", Dir::Out, 1, 2),
        Port::new("E", Dir::Out, 1, e_tgt),
    ];
    let placeholder = PartiteResource::new(names(), tgt_ports, stochastic(r, &wl(&[2]), &wl(&[2, e_tgt]))).unwrap();
    let a = PartyStrategy::new(vec![stochastic(r, &wl(&[2]), &wl(&[2])), unit()]);
    let b = PartyStrategy::new(vec![unit(), stochastic(r, &wl(&[2]), &wl(&[2]))]);
    let e = PartyStrategy::new(vec![unit(), stochastic(r, &wl(&[e_src]), &wl(&[e_tgt]))]);
    let strategies = vec![a, b, e];
    let draft = Protocol::new(src.clone(), placeholder.clone(), vec![vec![1]], strategies.clone()).unwrap();
    let built = apply_protocol(&draft).unwrap();
    let noisy = built.kernel().mix(placeholder.kernel(), eps).unwrap();
    Protocol::new(
        src.clone(),
        built.with_kernel(noisy).unwrap(),
        vec![vec![1]],
        strategies,
    )
    .unwrap()
}

pub fn fresh_step(r: &mut ChaCha8Rng, e: usize, eps: f64) -> Protocol {
    let src = channel(r, e);
    perturbed_step(r, &src, eps)
}

pub fn attacks() -> Vec<AttackSpec> {
    [vec!["E"], vec!["A"], vec!["B"], vec!["A", "E"], vec!["B", "E"]]
        .iter()
        .map(|d| AttackSpec::joint(d))
        .collect()
}

pub fn epsilon(p: &Protocol, a: &AttackSpec) -> f64 {
    let view = initial_attack(p, a).unwrap();
    synthesize_simulator(p, a, &view).unwrap().residual
}
