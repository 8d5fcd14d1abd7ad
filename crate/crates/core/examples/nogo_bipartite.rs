//! How far two-party functionalities are from splitting across a
//! middle machine. Commitment and oblivious transfer stay away from zero;
//! a plain channel splits exactly.

use catsec::nogo::{build_instance, resubstitute, splittability_residual, InstanceKind, Method, SearchCfg};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kinds = [
        InstanceKind::BitCommitment,
        InstanceKind::ObliviousTransfer,
        InstanceKind::PerfectChannel,
        InstanceKind::ProductState,
    ];
    for kind in kinds {
        let r = build_instance(kind);
        for method in [Method::LpExact, Method::Acausal] {
            let cfg = SearchCfg {
                method,
                ..SearchCfg::default()
            };
            let rep = splittability_residual(&r, &cfg)?;
            let check = match &rep.witness {
                Some(w) => format!("{:.6}", resubstitute(&r, w)?),
                None => "-".into(),
            };
            println!(
                "{:>20} {:>11}: {:.6} (witness gives {check})",
                kind.name(),
                method.name(),
                rep.min_residual
            );
        }
    }
    Ok(())
}
