//! Key exchange followed by the one-time pad. The composite inherits the
//! sum of the two errors.

use catsec::grouphopf::FiniteGroup;
use catsec::protocols::{broadcast, build_dhke, build_otp, ALICE, BOB, EVE};
use catsec::resource::{compose_protocols, PartyStrategy, Protocol};
use catsec::security::{correctness_residual, initial_attack, synthesize_simulator, AttackSpec};
use catsec::{Morphism, WireList};

fn epsilon(p: &Protocol) -> Result<f64, Box<dyn std::error::Error>> {
    let eve = AttackSpec::joint(&[EVE]);
    let view = initial_attack(p, &eve)?;
    Ok(synthesize_simulator(p, &eve, &view)?.residual)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = FiniteGroup::cyclic(5)?;
    let n = g.order();
    let dh = build_dhke(&g, 1)?.protocol;

    // pass Alice's second-round broadcast straight through
    let bcast = broadcast(dh.parties(), ALICE, &[BOB, EVE], n)?;
    let x = WireList::from_sizes(&[n])?;
    let (id, unit) = (Morphism::identity(&x), Morphism::identity(&WireList::unit()));
    let tails = [
        vec![id.clone(), unit.clone()],
        vec![unit.clone(), id.clone()],
        vec![unit, id],
    ];
    let strategies = dh
        .strategies()
        .iter()
        .zip(tails)
        .map(|(s, t)| PartyStrategy::new([s.stages.clone(), t].concat()))
        .collect();
    let first = Protocol::new(
        dh.source().seq_tensor(&bcast),
        dh.target().seq_tensor(&bcast),
        vec![vec![1], vec![2]],
        strategies,
    )?;

    let otp = build_otp(&g)?.protocol;
    let both = compose_protocols(&first, &otp)?;
    for (name, p) in [("key exchange", &first), ("one-time pad", &otp), ("composite", &both)] {
        println!(
            "{name:>13}: correctness {:.6}, Eve {:.6}",
            correctness_residual(p)?,
            epsilon(p)?
        );
    }
    Ok(())
}
