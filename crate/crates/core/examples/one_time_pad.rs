//! The one-time pad over several groups: correct, secure against Eve, and
//! what goes wrong when the key is dropped.

use catsec::grouphopf::FiniteGroup;
use catsec::protocols::{build_broken_otp, build_otp, ALICE, BOB, EVE};
use catsec::security::{verify_transformation, AttackSpec};
use catsec::Tolerance;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let attacks = [
        AttackSpec::joint(&[EVE]),
        AttackSpec::joint(&[ALICE, EVE]),
        AttackSpec::joint(&[BOB, EVE]),
    ];
    for g in [
        FiniteGroup::cyclic(2)?,
        FiniteGroup::cyclic(8)?,
        FiniteGroup::klein4(),
        FiniteGroup::sym3(),
    ] {
        let otp = build_otp(&g)?;
        let report = verify_transformation(&otp.protocol, &attacks, Tolerance::default())?;
        println!(
            "|G| = {}: correctness {:.1e}, verdict {}",
            g.order(),
            report.correctness_residual,
            report.verdict
        );
    }

    let g = FiniteGroup::cyclic(4)?;
    let broken = build_broken_otp(&g)?;
    let report = verify_transformation(&broken, &attacks[..1], Tolerance::default())?;
    println!("pad without a key over Z_4: {}", report.verdict);
    Ok(())
}
