//! Three parties on a ring: broadcast cannot be simulated from pairwise
//! channels, while independent local bits can.

use catsec::nogo::{build_instance, tripartite_residual, InstanceKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for kind in [InstanceKind::Broadcast, InstanceKind::LocalBits] {
        let r = build_instance(kind);
        for tied in [false, true] {
            let rep = tripartite_residual(&r, tied)?;
            println!(
                "{:>10} tied={tied:<5}: min disagreement {:.6}, exact agreement {:?}",
                kind.name(),
                rep.min_residual,
                rep.exact_status
            );
        }
    }
    Ok(())
}
