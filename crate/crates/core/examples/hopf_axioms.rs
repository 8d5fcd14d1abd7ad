//! Checks the group laws and the exponent action on a few small groups,
//! then shows a magma that is not a group failing them.

use catsec::grouphopf::{action_generators, check_action, check_hopf, group_generators, FiniteGroup};
use catsec::{FinSet, Tolerance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerance::default();
    let groups = [
        ("Z_6", FiniteGroup::cyclic(6)?),
        ("Klein four", FiniteGroup::klein4()),
        ("S_3", FiniteGroup::sym3()),
        ("Z_7^*", FiniteGroup::multiplicative(7)?),
    ];
    for (name, g) in &groups {
        let report = check_hopf(&group_generators(g), tol);
        println!(
            "{name:>10}: order {:2}, all laws hold: {}, worst residual {:.1e}",
            g.order(),
            report.all_pass(),
            report.max_residual()
        );
    }

    let z5 = FiniteGroup::cyclic(5)?;
    let gens = group_generators(&z5);
    let act = action_generators(&FinSet::new(5)?, &z5, 1)?;
    let report = check_action(&gens, &act, tol);
    for (law, r) in &report.residuals {
        println!("  Z_5 action  {:<40} {r:.1e}", law.description());
    }

    // x·y = x - y mod 3 is not associative
    let table: Vec<Vec<usize>> = (0..3).map(|x| (0..3).map(|y| (x + 3 - y) % 3).collect()).collect();
    let magma = FiniteGroup::from_table_unchecked(table)?;
    let report = check_hopf(&group_generators(&magma), tol);
    println!("subtraction mod 3 fails: {:?}", report.failing());
    Ok(())
}
