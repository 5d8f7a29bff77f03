//! Batch front end: JSON in, deterministic JSON report out.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::approximation::{bprime_chain, default_c, dist_bounds, flatten};
use crate::check::{all_passed, Check};
use crate::error::Error;
use crate::exactnum::Rational;
use crate::functions::RepresentableFunction;
use crate::lurlab::{day_norm_sq, default_tol, lur_probe, SparseVector};
use crate::oscillation::{full_closedness, in_c0, level_set, oscillate, DEFAULT_SAMPLES};
use crate::quotients::{build_quotient, is_metrizable, transfer};
use crate::spaces::FiberedSpaceModel;

#[derive(Parser, Debug)]
#[command(name = "fiberwise", about = "Exact fiberwise oscillation toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every continuity constraint of a function.
    Validate { input: PathBuf },
    /// Fiberwise oscillation profile of a function.
    Oscillate { input: PathBuf },
    /// Base points where the oscillation is at least --epsilon.
    LevelSet {
        input: PathBuf,
        #[arg(long, value_parser = parse_rational)]
        epsilon: Rational,
    },
    /// Whether the oscillation profile lies in c0, with the chain K_m.
    C0Check { input: PathBuf },
    /// Full-closedness verdict for a space.
    FullyClosed {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The quotient keeping the fibers over --keep.
    Quotient {
        input: PathBuf,
        #[arg(long, value_parser = parse_keep, default_value = "")]
        keep: KeepSet,
    },
    /// Transfer a function onto the quotient keeping --keep.
    Transfer {
        input: PathBuf,
        #[arg(long, value_parser = parse_keep, default_value = "")]
        keep: KeepSet,
    },
    /// Metrizability of a space, or of its quotient when --keep is given.
    Metrizable {
        input: PathBuf,
        #[arg(long, value_parser = parse_keep)]
        keep: Option<KeepSet>,
    },
    /// Flatten every oscillation point outside --keep.
    Approximate {
        input: PathBuf,
        #[arg(long, value_parser = parse_keep, default_value = "")]
        keep: KeepSet,
        #[arg(long, value_parser = parse_rational)]
        c: Option<Rational>,
    },
    /// Lower and upper bounds on the distance to functions oscillating only on --keep.
    Distance {
        input: PathBuf,
        #[arg(long, value_parser = parse_keep, default_value = "")]
        keep: KeepSet,
    },
    /// The chain K_m with distance bounds at every level.
    BprimeChain { input: PathBuf },
    /// Squared Day norm of a sparse vector.
    DayNorm { input: PathBuf },
    /// LUR probe of a vector against a sequence.
    LurProbe { input: PathBuf },
}

#[derive(Clone, Debug)]
struct KeepSet(BTreeSet<Rational>);

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.trim().parse::<Rational>().map_err(|e| e.to_string())
}

fn parse_keep(s: &str) -> Result<KeepSet, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(parse_rational)
        .collect::<Result<BTreeSet<_>, _>>()
        .map(KeepSet)
}

/// What the process should print and return.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Serialize)]
struct Report {
    command: String,
    arguments: Vec<String>,
    input_digest: String,
    result: Value,
    invariants: Vec<Check>,
}

#[derive(Deserialize)]
struct ProbeInput {
    x: SparseVector,
    sequence: Vec<SparseVector>,
    #[serde(default)]
    tol: Option<Rational>,
}

fn input_error(msg: impl std::fmt::Display) -> Outcome {
    Outcome { code: 2, stdout: String::new(), stderr: format!("error: {msg}\n") }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

/// Serialize a result whose `checks` field is reported separately.
fn split_checks<T: Serialize>(v: &T) -> (Value, Vec<Check>) {
    let mut value = to_value(v);
    let checks = value
        .as_object_mut()
        .and_then(|o| o.remove("checks"))
        .map(|c| serde_json::from_value(c).expect("checks deserialize"))
        .unwrap_or_default();
    (value, checks)
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, Error> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Run one command; `args` excludes the program name.
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(std::iter::once("fiberwise".to_string()).chain(args.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome { code: 0, stdout: text, stderr: String::new() }
                }
                _ => Outcome { code: 2, stdout: String::new(), stderr: text },
            };
        }
    };
    let started = Instant::now();
    let (name, input) = command_input(&cli.command);
    let text = match std::fs::read_to_string(input) {
        Ok(t) => t,
        Err(e) => return input_error(format!("cannot read {}: {e}", input.display())),
    };
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    let (result, invariants) = match dispatch(&cli.command, &text) {
        Ok(r) => r,
        Err(Error::Invariant(msg)) => (json!({ "error": msg }), vec![Check::new(msg, false)]),
        Err(e) => return input_error(e),
    };
    let code = if all_passed(&invariants) { 0 } else { 1 };
    let report = Report { command: name.to_string(), arguments: args, input_digest: digest, result, invariants };
    let mut stdout = serde_json::to_string_pretty(&report).expect("report serializes");
    stdout.push('\n');
    let stderr = format!("{name}: {:.3} ms\n", started.elapsed().as_secs_f64() * 1e3);
    Outcome { code, stdout, stderr }
}

fn command_input(cmd: &Command) -> (&'static str, &PathBuf) {
    match cmd {
        Command::Validate { input } => ("validate", input),
        Command::Oscillate { input } => ("oscillate", input),
        Command::LevelSet { input, .. } => ("level-set", input),
        Command::C0Check { input } => ("c0-check", input),
        Command::FullyClosed { input, .. } => ("fully-closed", input),
        Command::Quotient { input, .. } => ("quotient", input),
        Command::Transfer { input, .. } => ("transfer", input),
        Command::Metrizable { input, .. } => ("metrizable", input),
        Command::Approximate { input, .. } => ("approximate", input),
        Command::Distance { input, .. } => ("distance", input),
        Command::BprimeChain { input } => ("bprime-chain", input),
        Command::DayNorm { input } => ("day-norm", input),
        Command::LurProbe { input } => ("lur-probe", input),
    }
}

fn round_trips<T>(v: &T) -> bool
where
    T: Serialize + for<'de> Deserialize<'de> + PartialEq,
{
    serde_json::to_string(v)
        .ok()
        .and_then(|s| serde_json::from_str::<T>(&s).ok())
        .is_some_and(|back| back == *v)
}

fn dispatch(cmd: &Command, text: &str) -> Result<(Value, Vec<Check>), Error> {
    match cmd {
        Command::Validate { .. } => {
            let h: RepresentableFunction = parse(text)?;
            let violations = h.validate();
            let result = json!({ "valid": violations.is_empty(), "violations": violations });
            Ok((result, vec![Check::new("continuity", violations.is_empty())]))
        }
        Command::Oscillate { .. } => {
            let h: RepresentableFunction = parse(text)?;
            Ok((to_value(&oscillate(&h)?), vec![]))
        }
        Command::LevelSet { epsilon, .. } => {
            let h: RepresentableFunction = parse(text)?;
            Ok((json!({ "epsilon": epsilon, "level_set": level_set(&h, epsilon)? }), vec![]))
        }
        Command::C0Check { .. } => {
            let h: RepresentableFunction = parse(text)?;
            let cert = in_c0(&h)?;
            Ok((json!({ "in_c0": cert.holds(), "certificate": cert }), vec![]))
        }
        Command::FullyClosed { seed, .. } => {
            let m: FiberedSpaceModel = parse(text)?;
            let verdict = full_closedness(&m, *seed, DEFAULT_SAMPLES)?;
            let checks = verdict.verify().into_iter().map(|(n, ok)| Check::new(n, ok)).collect();
            Ok((json!({ "fully_closed": verdict.is_fully_closed(), "verdict": verdict }), checks))
        }
        Command::Quotient { keep, .. } => {
            let m: FiberedSpaceModel = parse(text)?;
            let q = build_quotient(&m, &keep.0)?;
            let checks = vec![Check::new("space_round_trip", round_trips(q.model()))];
            Ok((json!({ "keep": q.keep(), "space": q.model(), "metrizable": is_metrizable(q.model()) }), checks))
        }
        Command::Transfer { keep, .. } => {
            let h: RepresentableFunction = parse(text)?;
            let t = transfer(&h, &keep.0)?;
            let checks = vec![
                Check::new("sup_norm_preserved", t.function.sup_norm() == h.sup_norm()),
                Check::new("function_round_trip", round_trips(&t.function)),
            ];
            Ok((json!({ "function": t.function, "sup_norm": h.sup_norm() }), checks))
        }
        Command::Metrizable { keep, .. } => {
            let m: FiberedSpaceModel = parse(text)?;
            let target = match keep {
                Some(k) => build_quotient(&m, &k.0)?.model().clone(),
                None => m,
            };
            Ok((json!({ "metrizable": is_metrizable(&target) }), vec![]))
        }
        Command::Approximate { keep, c, .. } => {
            let h: RepresentableFunction = parse(text)?;
            let c = c.clone().unwrap_or_else(default_c);
            Ok(split_checks(&flatten(&h, &keep.0, &c)?))
        }
        Command::Distance { keep, .. } => {
            let h: RepresentableFunction = parse(text)?;
            Ok(split_checks(&dist_bounds(&h, &keep.0)?))
        }
        Command::BprimeChain { .. } => {
            let h: RepresentableFunction = parse(text)?;
            Ok(split_checks(&bprime_chain(&h)?))
        }
        Command::DayNorm { .. } => {
            let v: SparseVector = parse(text)?;
            Ok((json!({ "norm_sq": day_norm_sq(&v) }), vec![]))
        }
        Command::LurProbe { .. } => {
            let p: ProbeInput = parse(text)?;
            let tol = p.tol.unwrap_or_else(default_tol);
            let r = lur_probe(&p.x, &p.sequence, &tol);
            let checks = vec![Check::new("lur_consistent", r.consistent)];
            Ok((to_value(&r), checks))
        }
    }
}
