//! Evaluates string-diagram programs against an environment.
//!
//! `cargo run --example diagram_eval [program.csd] [env.json]`

use std::path::PathBuf;

use catsec::diagram::{evaluate, parse, pretty_print, Environment};
use catsec::grouphopf::FiniteGroup;
use catsec::Morphism;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("examples/data")
        .join(name)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let prog = args.next().map(PathBuf::from).unwrap_or_else(|| data("otp.csd"));
    let env = match args.next() {
        Some(path) => Environment::load(path)?,
        None => {
            let mut env = Environment::new();
            env.add_group("G", FiniteGroup::cyclic(3)?)?;
            env
        }
    };
    let src = std::fs::read_to_string(&prog)?;
    println!("{}", pretty_print(&parse(&src)?));
    let m = evaluate(&src, &env)?;
    println!("{} -> {}", m.dom().total_size(), m.cod().total_size());
    println!("identity: {}", m == Morphism::identity(m.dom()));

    let z4 = Environment::load(data("z4.json"))?;
    let noisy = evaluate("noise ; copy[Bit]", &z4)?;
    for c in 0..noisy.cols() {
        println!("  column {c}: {:?}", noisy.column(c));
    }
    Ok(())
}
