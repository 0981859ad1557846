//! Batch command-line surface over the semiautomata library: property
//! checks, gadget generation, certificate verification and format
//! conversion, with machine-readable JSON reports.
//!
//! Exit codes: 0 all checks ran, 1 input or contract error, 2 resource guard
//! hit, 3 certification disagreement.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use semiautomata::analysis::{self, ExhaustiveLimit};
use semiautomata::digraph::{verify_promises, ConstrainedInstance, Digraph};
use semiautomata::error::Error;
use semiautomata::gadgets::{
    binarize, completeness_gadget, intro_dfa_completeness_gadget, intro_sync_gadget,
    layered_reduction, sync_gadget, unambiguity_gadget, verify_gadget, GadgetInstance,
    GadgetMetadata,
};
use semiautomata::matrices::{self, MatrixSet};
use semiautomata::nfa::Nfa;
use semiautomata::oracles;

#[derive(Parser)]
#[command(
    name = "semiautomata",
    version,
    about = "Reachability properties of semi-automata and certified gadget instances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run property checks on an automaton JSON file and print a report.
    Analyze {
        path: PathBuf,
        /// Comma-separated checks: complete, sync, unambiguous,
        /// strongly-connected, dfa, total-dfa, period, 2ib, image-bound=<k>.
        #[arg(long, value_delimiter = ',', required = true)]
        checks: Vec<String>,
        /// Run exhaustive searches regardless of the state-count guard.
        #[arg(long)]
        force: bool,
        /// State-count guard for exhaustive searches.
        #[arg(long)]
        max_states: Option<usize>,
    },
    /// Build a gadget instance and write it next to a metadata sidecar.
    Generate {
        /// One of: layered, intro-complete, intro-sync, sync, complete,
        /// unambiguous.
        family: String,
        /// Digraph JSON to reduce from (alternative to --seed/--size).
        #[arg(long)]
        source: Option<PathBuf>,
        /// Source vertex (defaults to 0 with --source).
        #[arg(long)]
        s: Option<usize>,
        /// Target vertex (defaults to the last vertex with --source).
        #[arg(long)]
        t: Option<usize>,
        /// Seed for the built-in acyclic digraph generator.
        #[arg(long)]
        seed: Option<u64>,
        /// Vertex count for the built-in generator.
        #[arg(long)]
        size: Option<usize>,
        /// Output prefix: writes <out>.json and <out>.meta.json.
        #[arg(long)]
        out: PathBuf,
        /// json, or dot to additionally write <out>.dot.
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Re-certify a generated instance against its metadata sidecar.
    Verify {
        automaton: PathBuf,
        metadata: PathBuf,
        /// State-count guard for the oracle battery.
        #[arg(long, default_value_t = oracles::DEFAULT_MAX_STATES)]
        max_states: usize,
    },
    /// Convert between formats: matrix-to-nfa, nfa-to-matrix, binarize, dot.
    Convert {
        mode: String,
        input: PathBuf,
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err {
                Error::Input(_) | Error::Contract(_) => 1,
                Error::Resource(_) => 2,
                Error::Certification(_) => 3,
            })
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Analyze {
            path,
            checks,
            force,
            max_states,
        } => analyze(&path, &checks, force, max_states),
        Command::Generate {
            family,
            source,
            s,
            t,
            seed,
            size,
            out,
            format,
        } => generate(&family, source.as_deref(), s, t, seed, size, &out, &format),
        Command::Verify {
            automaton,
            metadata,
            max_states,
        } => verify(&automaton, &metadata, max_states),
        Command::Convert {
            mode,
            input,
            output,
        } => convert(&mode, &input, &output),
    }
}

fn read_file(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

fn analyze(
    path: &Path,
    checks: &[String],
    force: bool,
    max_states: Option<usize>,
) -> Result<ExitCode, Error> {
    let nfa = Nfa::from_json(&read_file(path)?)?;
    let mut report = serde_json::Map::new();

    for check in checks {
        let value = match check.as_str() {
            "complete" => {
                let limit = ExhaustiveLimit {
                    max_states: max_states.unwrap_or(ExhaustiveLimit::default().max_states),
                    force,
                };
                let verdict = analysis::is_complete_with(&nfa, &limit)?;
                json!({
                    "verdict": verdict.complete,
                    "witness": verdict.mortal_word.map(|w| w.to_string()),
                    "route": verdict.route.name(),
                })
            }
            "sync" => {
                let verdict = analysis::is_synchronising(&nfa)?;
                json!({
                    "verdict": verdict.synchronising,
                    "witness": verdict.reset_word.map(|w| w.to_string()),
                })
            }
            "unambiguous" => match analysis::find_diamond(&nfa) {
                Some(d) => json!({
                    "verdict": false,
                    "witness": { "p": d.start, "q": d.end, "word": d.word.to_string() },
                }),
                None => json!({ "verdict": true, "witness": null }),
            },
            "strongly-connected" => json!({ "verdict": analysis::is_strongly_connected(&nfa) }),
            "dfa" => json!({ "verdict": nfa.is_dfa() }),
            "total-dfa" => json!({ "verdict": nfa.is_total_dfa() }),
            "period" => json!({ "value": analysis::period(&nfa) }),
            other => {
                let k = if other == "2ib" {
                    2
                } else if let Some(raw) = other.strip_prefix("image-bound=") {
                    raw.parse::<usize>().map_err(|_| {
                        Error::input(format!("cannot parse image bound in {other:?}"))
                    })?
                } else {
                    return Err(Error::input(format!("unknown check {other:?}")));
                };
                let bound = analysis::image_bound_check(&nfa, k)?;
                json!({
                    "verdict": bound.bounded,
                    "witness": bound.violation.map(|(state, word)| json!({
                        "state": state,
                        "word": word.to_string(),
                    })),
                })
            }
        };
        report.insert(check.clone(), value);
    }

    let output = json!({
        "path": path.display().to_string(),
        "states": nfa.n_states(),
        "letters": nfa.n_letters(),
        "checks": report,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&output).expect("report serializes")
    );
    Ok(ExitCode::SUCCESS)
}

/// Seeded acyclic digraph: vertices in topological order, one or two forward
/// edges out of every non-final vertex, endpoints drawn uniformly.
fn random_instance(seed: u64, size: usize) -> Result<(Digraph, usize, usize), Error> {
    if size < 2 {
        return Err(Error::input("random instances need at least two vertices"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Digraph::new(size)?;
    for u in 0..size - 1 {
        let out = rng.gen_range(1..=2);
        for _ in 0..out {
            let v = rng.gen_range(u + 1..size);
            g.add_edge(u, v)?;
        }
    }
    let s = rng.gen_range(0..size);
    let mut t = rng.gen_range(0..size);
    if t == s {
        t = (t + 1) % size;
    }
    Ok((g, s, t))
}

#[derive(Serialize, Deserialize)]
struct LayeredMetadata {
    family: String,
    s: usize,
    t: usize,
    n: usize,
    shortcut_exists: bool,
    source: Digraph,
}

#[allow(clippy::too_many_arguments)]
fn generate(
    family: &str,
    source: Option<&Path>,
    s: Option<usize>,
    t: Option<usize>,
    seed: Option<u64>,
    size: Option<usize>,
    out: &Path,
    format: &str,
) -> Result<ExitCode, Error> {
    if !matches!(format, "json" | "dot") {
        return Err(Error::input(format!("unknown format {format:?}")));
    }
    let (graph, s, t) = match (source, seed, size) {
        (Some(path), None, None) => {
            let graph = Digraph::from_json(&read_file(path)?)?;
            let t_default = graph.n_vertices() - 1;
            (graph, s.unwrap_or(0), t.unwrap_or(t_default))
        }
        (None, Some(seed), Some(size)) => {
            let (graph, rs, rt) = random_instance(seed, size)?;
            (graph, s.unwrap_or(rs), t.unwrap_or(rt))
        }
        _ => {
            return Err(Error::input(
                "pass either --source PATH or both --seed N and --size N",
            ))
        }
    };

    let json_path = out.with_extension("json");
    let meta_path = out.with_extension("meta.json");

    if family == "layered" {
        let inst = layered_reduction(&graph, s, t)?;
        let meta = LayeredMetadata {
            family: "layered".to_string(),
            s: inst.s,
            t: inst.t,
            n: inst.n,
            shortcut_exists: inst.shortcut_exists()?,
            source: graph,
        };
        write_file(&json_path, &inst.graph.to_json())?;
        let mut meta_text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
        meta_text.push('\n');
        write_file(&meta_path, &meta_text)?;
        if format == "dot" {
            write_file(&out.with_extension("dot"), &inst.graph.to_dot())?;
        }
        return Ok(ExitCode::SUCCESS);
    }

    let gadget = match family {
        "intro-complete" => intro_dfa_completeness_gadget(&graph, s, t)?,
        "intro-sync" => intro_sync_gadget(&graph, s, t)?,
        "sync" | "complete" | "unambiguous" => {
            let inst = layered_reduction(&graph, s, t)?;
            match family {
                "sync" => sync_gadget(&inst)?,
                "complete" => completeness_gadget(&inst)?,
                _ => unambiguity_gadget(&inst)?,
            }
        }
        other => return Err(Error::input(format!("unknown gadget family {other:?}"))),
    };
    write_file(&json_path, &gadget.automaton.to_json())?;
    write_file(&meta_path, &gadget.metadata_json())?;
    if format == "dot" {
        write_file(
            &out.with_extension("dot"),
            &gadget.automaton.to_dot(Some(&gadget.state_names)),
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(automaton: &Path, metadata: &Path, max_states: usize) -> Result<ExitCode, Error> {
    let meta_text = read_file(metadata)?;
    let family: serde_json::Value = serde_json::from_str(&meta_text)
        .map_err(|e| Error::input(format!("metadata JSON: {e}")))?;
    let family_name = family
        .get("family")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::input("metadata lacks a family field"))?;

    let mut claims: Vec<(String, bool, String)> = Vec::new();
    if family_name == "layered" {
        let meta: LayeredMetadata = serde_json::from_str(&meta_text)
            .map_err(|e| Error::input(format!("metadata JSON: {e}")))?;
        let graph = Digraph::from_json(&read_file(automaton)?)?;
        let inst = ConstrainedInstance::new(graph, meta.s, meta.t, meta.n)?;
        let report = verify_promises(&inst);
        claims.push((
            "promises-hold".to_string(),
            report.all_hold(),
            format!("{:?}", report.failures()),
        ));
        if report.acyclic {
            let shortcut = inst.shortcut_exists()?;
            claims.push((
                "shortcut-flag-matches".to_string(),
                shortcut == meta.shortcut_exists,
                format!(
                    "recomputed {shortcut}, metadata says {}",
                    meta.shortcut_exists
                ),
            ));
        }
    } else {
        let nfa = Nfa::from_json(&read_file(automaton)?)?;
        let meta = GadgetMetadata::from_json(&meta_text)?;
        let instance = GadgetInstance::from_parts(nfa, meta)?;
        let report = verify_gadget(&instance, max_states)?;
        claims.extend(
            report
                .claims
                .into_iter()
                .map(|c| (c.name.to_string(), c.passed, c.detail)),
        );
    }

    let all_passed = claims.iter().all(|(_, passed, _)| *passed);
    let output = json!({
        "passed": all_passed,
        "claims": claims
            .iter()
            .map(|(name, passed, detail)| json!({
                "name": name,
                "passed": passed,
                "detail": detail,
            }))
            .collect::<Vec<_>>(),
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&output).expect("report serializes")
    );
    if all_passed {
        Ok(ExitCode::SUCCESS)
    } else {
        let violated: Vec<&str> = claims
            .iter()
            .filter(|(_, passed, _)| !passed)
            .map(|(name, _, _)| name.as_str())
            .collect();
        eprintln!("error: certification failed: {}", violated.join(", "));
        Ok(ExitCode::from(3))
    }
}

fn convert(mode: &str, input: &Path, output: &Path) -> Result<ExitCode, Error> {
    let text = read_file(input)?;
    let converted = match mode {
        "matrix-to-nfa" => matrices::to_nfa(&MatrixSet::from_json(&text)?).to_json(),
        "nfa-to-matrix" => matrices::from_nfa(&Nfa::from_json(&text)?).to_json(),
        "binarize" => binarize(&Nfa::from_json(&text)?)?.to_json(),
        "dot" => Nfa::from_json(&text)?.to_dot(None),
        other => return Err(Error::input(format!("unknown conversion mode {other:?}"))),
    };
    write_file(output, &converted)?;
    Ok(ExitCode::SUCCESS)
}
