//! Command-line front end.
//!
//! Exit codes: `0` when the verdict is the one the instance is expected to
//! have, `1` when it is not, `2` for usage and input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::diagram::{evaluate, Environment};
use crate::finstoch::Tolerance;
use crate::grouphopf::{check_hopf, group_generators, FiniteGroup};
use crate::nogo::{build_instance, splittability_residual, tripartite_residual, InstanceKind, Method, SearchCfg};
use crate::protocols::{build_dhke, build_otp, ddh_tv_advantage, EVE};
use crate::security::{verify_with, AttackSpec, Verdict, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "catsec",
    version,
    about = "Finite-probability checks for composable security"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Numerical tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Write the full report as JSON to this file.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check the Hopf-algebra laws of a group (or of any Cayley table in a
    /// JSON file).
    CheckHopf {
        #[arg(long)]
        group: String,
        #[command(flatten)]
        common: Common,
    },
    /// Verify a protocol: correctness and security against initial attacks.
    Verify {
        #[arg(value_enum)]
        protocol: ProtocolKind,
        #[command(flatten)]
        group: GroupArgs,
        /// Dishonest parties of one attack, comma separated; repeatable.
        /// Defaults to Eve alone.
        #[arg(long = "attack", value_name = "PARTIES")]
        attacks: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Exact decisional Diffie-Hellman advantage in `Z_p^*`.
    Ddh {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        generator: String,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a diagram file against an environment.
    Eval {
        #[arg(long, value_name = "ENV.json")]
        env: PathBuf,
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Impossibility checks.
    Nogo {
        #[arg(value_enum)]
        check: NogoKind,
        #[arg(long)]
        instance: String,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// lp-exact, alternating-lp or lp-acausal (split only).
        #[arg(long, default_value = "lp-exact")]
        method: String,
        /// Compare only inputs where both middle copies agree (tripartite).
        #[arg(long)]
        tied: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct GroupArgs {
    /// `cyclic:N`, `klein4`, `sym:3` or a JSON Cayley table.
    #[arg(long, conflicts_with = "prime")]
    group: Option<String>,
    /// Use `Z_p^*`.
    #[arg(long)]
    prime: Option<u64>,
    /// Generator label (or index) for Diffie-Hellman.
    #[arg(long)]
    generator: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ProtocolKind {
    Otp,
    Dhke,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum NogoKind {
    Split,
    Tripartite,
}

struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

type Outcome = Result<(i32, Value), Usage>;

/// Runs one command line and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (common, res) = match &cli.cmd {
        Cmd::CheckHopf { group, common } => (common, hopf(group, common, out)),
        Cmd::Verify {
            protocol,
            group,
            attacks,
            seed,
            common,
        } => (common, verify(*protocol, group, attacks, *seed, common, out)),
        Cmd::Ddh {
            prime,
            generator,
            common,
        } => (common, ddh(*prime, generator, out)),
        Cmd::Eval { env, file, common } => (common, eval(env, file, out)),
        Cmd::Nogo {
            check,
            instance,
            restarts,
            seed,
            method,
            tied,
            common,
        } => (
            common,
            nogo(*check, instance, *restarts, *seed, method, *tied, common, out),
        ),
    };
    match res {
        Ok((code, report)) => {
            if let Some(path) = &common.json {
                let text = serde_json::to_string_pretty(&report).expect("reports serialise");
                if let Err(e) = std::fs::write(path, text + "\n") {
                    eprintln!("error: writing {}: {e}", path.display());
                    return EXIT_USAGE;
                }
            }
            code
        }
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

fn tolerance(c: &Common) -> Result<Tolerance, Usage> {
    if c.tol.is_finite() && c.tol >= 0.0 {
        Ok(Tolerance::new(c.tol))
    } else {
        Err(Usage(format!(
            "--tol must be a finite non-negative number, got {}",
            c.tol
        )))
    }
}

fn verdict_code(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn hopf(spec: &str, common: &Common, out: &mut dyn Write) -> Outcome {
    let tol = tolerance(common)?;
    let g = if Path::new(spec).is_file() {
        FiniteGroup::from_json_unchecked(&std::fs::read_to_string(spec)?)?
    } else {
        FiniteGroup::from_spec(spec)?
    };
    let report = check_hopf(&group_generators(&g), tol);
    writeln!(out, "group {spec} (order {})", g.order())?;
    for (law, r) in &report.residuals {
        let mark = if *r <= tol.eps { "ok  " } else { "FAIL" };
        writeln!(out, "  {mark} {:<14} {r:.3e}  {}", law.to_string(), law.description())?;
    }
    let pass = report.all_pass();
    writeln!(out, "{}", if pass { "all laws hold" } else { "some laws fail" })?;
    let residuals: serde_json::Map<String, Value> = report
        .residuals
        .iter()
        .map(|(l, r)| (l.to_string(), json!(r)))
        .collect();
    let j = json!({
        "command": "check-hopf",
        "group": spec,
        "order": g.order(),
        "tol": tol.eps,
        "residuals": residuals,
        "pass": pass,
    });
    Ok((verdict_code(pass), j))
}

fn pick_group(args: &GroupArgs) -> Result<(FiniteGroup, String), Usage> {
    match (&args.group, args.prime) {
        (Some(s), None) => Ok((FiniteGroup::from_spec(s)?, s.clone())),
        (None, Some(p)) => Ok((FiniteGroup::multiplicative(p)?, format!("Z_{p}^*"))),
        _ => Err(Usage("give exactly one of --group or --prime".into())),
    }
}

fn pick_generator(g: &FiniteGroup, label: Option<&str>) -> Result<usize, Usage> {
    match label {
        Some(l) => g
            .index_of(l)
            .ok_or_else(|| Usage(format!("`{l}` is not an element of the group"))),
        None => (0..g.order())
            .find(|&x| g.generates(x))
            .ok_or_else(|| Usage("the group is not cyclic".into())),
    }
}

fn verify(
    kind: ProtocolKind,
    args: &GroupArgs,
    attacks: &[String],
    seed: u64,
    common: &Common,
    out: &mut dyn Write,
) -> Outcome {
    let tol = tolerance(common)?;
    let (g, name) = pick_group(args)?;
    let attacks: Vec<AttackSpec> = if attacks.is_empty() {
        vec![AttackSpec::joint(&[EVE])]
    } else {
        attacks
            .iter()
            .map(|a| AttackSpec::joint(&a.split(',').map(str::trim).collect::<Vec<_>>()))
            .collect()
    };
    let opts = VerifyOptions {
        tol,
        ..VerifyOptions::default()
    };
    let (protocol, attacks, instance, ddh) = match kind {
        ProtocolKind::Otp => (build_otp(&g)?.protocol, attacks, format!("otp/{name}"), None),
        ProtocolKind::Dhke => {
            let k = pick_generator(&g, args.generator.as_deref())?;
            let adv = ddh_tv_advantage(&g, k)?;
            let inst = format!("dhke/{name}/g={}", g.label(k));
            (build_dhke(&g, k)?.protocol, attacks, inst, Some(adv))
        }
    };
    let start = Instant::now();
    let mut report = verify_with(&protocol, &attacks, &opts)?;
    report.instance = instance;
    report.seed = seed;
    writeln!(out, "{}", report.instance)?;
    writeln!(out, "  correctness residual {:.6e}", report.correctness_residual)?;
    for a in &report.attacks {
        writeln!(
            out,
            "  attack {:<12} epsilon {:.6e}  simulator {}",
            a.dishonest.join("+"),
            a.epsilon,
            if a.simulator_found { "found" } else { "not found" }
        )?;
    }
    writeln!(out, "  verdict {}", report.verdict)?;
    let mut j = report.to_json();
    let ok = match ddh {
        None => report.verdict == Verdict::Perfect,
        Some(adv) => {
            writeln!(out, "  ddh advantage {adv:.6e}")?;
            j["ddh_advantage"] = json!(adv);
            let eve = report.attacks.iter().find(|a| a.dishonest == [EVE]).map(|a| a.epsilon);
            eve.map_or(true, |e| (e - adv).abs() <= tol.eps)
        }
    };
    writeln!(out, "  runtime {} ms", start.elapsed().as_millis())?;
    Ok((verdict_code(ok), j))
}

fn ddh(prime: u64, generator: &str, out: &mut dyn Write) -> Outcome {
    let g = FiniteGroup::multiplicative(prime)?;
    let k = pick_generator(&g, Some(generator))?;
    let adv = ddh_tv_advantage(&g, k)?;
    writeln!(
        out,
        "ddh advantage in Z_{prime}^* with generator {generator}: {adv:.12}"
    )?;
    let j = json!({
        "command": "ddh",
        "prime": prime,
        "generator": g.label(k),
        "advantage": adv,
    });
    Ok((EXIT_OK, j))
}

fn eval(env_path: &Path, file: &Path, out: &mut dyn Write) -> Outcome {
    let env = Environment::load(env_path)?;
    let src = std::fs::read_to_string(file).map_err(|e| Usage(format!("reading {}: {e}", file.display())))?;
    let m = evaluate(&src, &env)?;
    writeln!(out, "{} -> {}", m.dom(), m.cod())?;
    for r in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|c| format!("{:.6}", m.get(r, c))).collect();
        writeln!(out, "  {}", row.join(" "))?;
    }
    let j = json!({
        "command": "eval",
        "file": file.display().to_string(),
        "dom": m.dom().sizes(),
        "cod": m.cod().sizes(),
        "matrix": m.matrix(),
    });
    Ok((EXIT_OK, j))
}

#[allow(clippy::too_many_arguments)]
fn nogo(
    check: NogoKind,
    instance: &str,
    restarts: usize,
    seed: u64,
    method: &str,
    tied: bool,
    common: &Common,
    out: &mut dyn Write,
) -> Outcome {
    let tol = tolerance(common)?;
    let kind: InstanceKind = instance.parse()?;
    let method: Method = method.parse()?;
    let r = build_instance(kind);
    let start = Instant::now();
    let report = match check {
        NogoKind::Split => splittability_residual(
            &r,
            &SearchCfg {
                method,
                restarts,
                seed,
                ..SearchCfg::default()
            },
        )?,
        NogoKind::Tripartite => tripartite_residual(&r, tied)?,
    };
    let feasible = report.min_residual <= tol.eps;
    let expected = matches!(
        kind,
        InstanceKind::PerfectChannel | InstanceKind::ProductState | InstanceKind::LocalBits
    ) || tied;
    writeln!(
        out,
        "{} {} ({})",
        instance,
        if feasible { "splits" } else { "does not split" },
        report.method.name()
    )?;
    writeln!(out, "  min residual {:.12}", report.min_residual)?;
    if let Some(s) = report.exact_status {
        writeln!(out, "  exact agreement: {s:?}")?;
    }
    writeln!(out, "  runtime {} ms", start.elapsed().as_millis())?;
    Ok((verdict_code(feasible == expected), report.to_json()))
}
