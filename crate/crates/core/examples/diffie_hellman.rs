//! Diffie-Hellman over small cyclic groups. The residual against Eve is the
//! exact DDH advantage; the shared key is not quite uniform.

use catsec::grouphopf::FiniteGroup;
use catsec::protocols::{build_dhke, ddh_tv_advantage, EVE};
use catsec::security::{correctness_residual, initial_attack, synthesize_simulator, AttackSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>4} {:>10} {:>10} {:>12}", "p", "DDH", "Eve eps", "key bias");
    for p in [2, 3, 5, 7, 11] {
        let g = FiniteGroup::cyclic(p)?;
        let dh = build_dhke(&g, 1)?;
        let eve = AttackSpec::joint(&[EVE]);
        let view = initial_attack(&dh.protocol, &eve)?;
        let sim = synthesize_simulator(&dh.protocol, &eve, &view)?;
        let bias = correctness_residual(&dh.protocol)?;
        println!(
            "{p:>4} {:>10.6} {:>10.6} {bias:>12.6}",
            ddh_tv_advantage(&g, 1)?,
            sim.residual
        );
    }

    let zs = FiniteGroup::multiplicative(11)?;
    let two = zs.index_of("2").ok_or("2 is not in Z_11^*")?;
    println!(
        "Z_11^* with generator 2: DDH advantage {:.6}",
        ddh_tv_advantage(&zs, two)?
    );
    Ok(())
}
