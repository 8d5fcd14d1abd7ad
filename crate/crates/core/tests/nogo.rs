mod common;

use std::process::Command;

use catsec::lpsolve::LpStatus;
use catsec::nogo::*;
use catsec::resource::{Dir, PartiteResource, Port};
use catsec::Morphism;
use common::*;

fn cfg(method: Method) -> SearchCfg {
    SearchCfg {
        method,
        ..SearchCfg::default()
    }
}

#[test]
fn instance_kernels_by_example() {
    let bc = build_instance(InstanceKind::BitCommitment);
    // inputs (b, open), outputs (receipt, m)
    for (b, open, m) in [(0, 0, BOTTOM), (1, 0, BOTTOM), (0, 1, 0), (1, 1, 1)] {
        assert_eq!(bc.resource.kernel().entry(&[0, m], &[b, open]), 1.0);
    }
    let ot = build_instance(InstanceKind::ObliviousTransfer);
    for x0 in 0..2 {
        for x1 in 0..2 {
            for c in 0..2 {
                let want = if c == 0 { x0 } else { x1 };
                assert_eq!(ot.resource.kernel().entry(&[want], &[x0, x1, c]), 1.0);
            }
        }
    }
    let bc3 = build_instance(InstanceKind::Broadcast);
    assert_eq!(bc3.resource.parties().len(), 3);
    assert_eq!(bc3.resource.kernel().entry(&[1, 1], &[1]), 1.0);
    for k in InstanceKind::ALL {
        assert_eq!(k.name().parse::<InstanceKind>().unwrap(), k);
    }
}

fn shared_coin() -> Functionality {
    let ports = vec![Port::new("Alice", Dir::Out, 1, 2), Port::new("Bob", Dir::Out, 1, 2)];
    let k = Morphism::stochastic(wl(&[]), wl(&[2, 2]), vec![0.5, 0.0, 0.0, 0.5]).unwrap();
    Functionality {
        name: "shared_coin".into(),
        resource: PartiteResource::new(vec!["Alice".into(), "Bob".into()], ports, k).unwrap(),
    }
}

#[test]
fn shared_randomness_cannot_be_split() {
    // the outer bits come from independent copies: distance to a perfect
    // coin is 1/2 whatever the middle does
    let f = shared_coin();
    for m in [Method::LpExact, Method::Acausal, Method::AlternatingLp] {
        let rep = splittability_residual(&f, &cfg(m)).unwrap();
        assert!((rep.min_residual - 0.5).abs() <= 1e-9, "{m:?}: {}", rep.min_residual);
    }
}

#[test]
fn witnesses_reproduce_their_residual() {
    for k in [
        InstanceKind::BitCommitment,
        InstanceKind::ObliviousTransfer,
        InstanceKind::PerfectChannel,
        InstanceKind::ProductState,
    ] {
        let f = build_instance(k);
        for m in [Method::LpExact, Method::Acausal, Method::AlternatingLp] {
            let rep = splittability_residual(&f, &cfg(m)).unwrap();
            let w = rep.witness.as_ref().expect("witness");
            let again = resubstitute(&f, w).unwrap();
            assert!(
                (again - rep.min_residual).abs() <= 1e-9,
                "{k} {m:?}: {again} vs {}",
                rep.min_residual
            );
            if let Witness::Effect(e) = w {
                assert!(e.kernel.matrix().iter().all(|&v| v >= -1e-12));
            }
        }
    }
    for tied in [false, true] {
        let f = build_instance(InstanceKind::Broadcast);
        let rep = tripartite_residual(&f, tied).unwrap();
        let again = resubstitute(&f, rep.witness.as_ref().unwrap()).unwrap();
        assert!((again - rep.min_residual).abs() <= 1e-9);
    }
}

#[test]
fn search_methods_are_ordered() {
    for k in [InstanceKind::BitCommitment, InstanceKind::ObliviousTransfer] {
        let f = build_instance(k);
        let exact = splittability_residual(&f, &cfg(Method::LpExact)).unwrap().min_residual;
        let loose = splittability_residual(&f, &cfg(Method::Acausal)).unwrap().min_residual;
        let alt = splittability_residual(&f, &cfg(Method::AlternatingLp))
            .unwrap()
            .min_residual;
        assert!(
            loose <= exact + 1e-9 && exact <= alt + 1e-9,
            "{k}: {loose} {exact} {alt}"
        );
    }
}

#[test]
fn more_restarts_never_hurt() {
    let f = build_instance(InstanceKind::ObliviousTransfer);
    let mut last = f64::INFINITY;
    for restarts in [1, 2, 4, 8] {
        let c = SearchCfg {
            method: Method::AlternatingLp,
            restarts,
            seed: 3,
            ..SearchCfg::default()
        };
        let r = splittability_residual(&f, &c).unwrap().min_residual;
        assert!(r <= last + 1e-12, "{restarts}: {r} > {last}");
        last = r;
    }
    let c = SearchCfg {
        method: Method::AlternatingLp,
        restarts: 2,
        seed: 9,
        ..SearchCfg::default()
    };
    let a = splittability_residual(&f, &c).unwrap().min_residual;
    let b = splittability_residual(&f, &c).unwrap().min_residual;
    assert_eq!(a, b);
}

#[test]
fn ring_checks() {
    let b = build_instance(InstanceKind::Broadcast);
    let rep = tripartite_residual(&b, false).unwrap();
    assert!((rep.min_residual - 0.5).abs() <= 1e-9);
    assert_eq!(rep.exact_status, Some(LpStatus::Infeasible));
    let tied = tripartite_residual(&b, true).unwrap();
    assert!(tied.min_residual <= 1e-9);
    assert_eq!(tied.exact_status, Some(LpStatus::Optimal));
    let local = tripartite_residual(&build_instance(InstanceKind::LocalBits), false).unwrap();
    assert!(local.min_residual <= 1e-9);
    assert!(matches!(
        tripartite_residual(&build_instance(InstanceKind::BitCommitment), false),
        Err(NogoError::NotTripartite(..))
    ));
}

fn catsec(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_catsec")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

#[test]
fn command_line() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("bc.json");
    let (code, text) = catsec(&[
        "nogo",
        "split",
        "--instance",
        "bit_commitment",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{text}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!((v["min_residual"].as_f64().unwrap() - 0.5).abs() <= 1e-9);
    assert_eq!(
        catsec(&[
            "nogo",
            "split",
            "--instance",
            "bit_commitment",
            "--method",
            "lp-acausal"
        ])
        .0,
        1
    );
    assert_eq!(catsec(&["nogo", "split", "--instance", "perfect_channel"]).0, 0);
    assert_eq!(catsec(&["nogo", "tripartite", "--instance", "broadcast"]).0, 0);
    assert_eq!(
        catsec(&["nogo", "tripartite", "--instance", "broadcast", "--tied"]).0,
        0
    );
    assert_eq!(catsec(&["nogo", "split", "--instance", "no_such_thing"]).0, 2);
    assert_eq!(catsec(&["verify", "otp", "--group", "cyclic:4"]).0, 0);
    assert_eq!(catsec(&["check-hopf", "--group", "klein4"]).0, 0);
    assert_eq!(catsec(&["frobnicate"]).0, 2);
}
