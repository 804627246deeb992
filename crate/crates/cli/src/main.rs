//! `condpref` command-line front end.
//!
//! Every command writes one JSON document to stdout (or to `--out`) and a
//! one-line summary to stderr. Exit status is 0 on success, 1 when a
//! checked property fails and 2 on usage, input or domain errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use condpref::harness::checks::{archimedean_samples, independence_samples};
use condpref::harness::io;
use condpref::harness::laws::exhaustive_all;
use condpref::harness::suites::random_lottery_pairs;
use condpref::harness::{generate, run_suite, Fault, InstanceSpec, OracleKind, Suite, SuiteConfig};
use condpref::par::Execution;
use condpref::preference::{induced_graph, tri_partition, verify_axioms};
use condpref::rational;
use condpref::representation::{
    debreu_utility, rader_utility, verify_representation, FiniteCondTopology, WeightScheme,
};
use condpref::vnm::{
    affine_equivalence, anchors, check_archimedean, check_independence, default_tolerance, index_as_probes,
    utility_index, validate_index, AffineFit, ArchimedeanOutcome,
};
use condpref::{gaps, Error};

#[derive(Parser)]
#[command(name = "condpref", version, about = "Conditional preferences over finite event algebras")]
struct Cli {
    /// Write the JSON result to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// A value count `n` or an inclusive range `a..b`.
#[derive(Debug, Clone, Copy)]
struct ValueRange(usize, usize);

impl FromStr for ValueRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad count `{t}`: {e}"));
        match s.split_once("..").or_else(|| s.split_once('-')) {
            Some((a, b)) => Ok(ValueRange(parse(a)?, parse(b.trim_start_matches('='))?)),
            None => {
                let n = parse(s)?;
                Ok(ValueRange(n, n))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Debreu,
    Rader,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OracleArg {
    Planted,
    Lexicographic,
    RankDependent,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxiomArg {
    Independence,
    Archimedean,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random instance.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        atoms: usize,
        /// Values per atom: `n` or `a..b`.
        #[arg(long, default_value = "2..4")]
        values: ValueRange,
        #[arg(long, default_value_t = 0.3)]
        tie_probability: f64,
        /// Lottery outcomes for a planted utility index (0 for none).
        #[arg(long, default_value_t = 0)]
        outcomes: usize,
        #[arg(long, value_enum)]
        oracle: Option<OracleArg>,
        /// Emit the two-atom walk/museum instance instead.
        #[arg(long)]
        walk_museum: bool,
    },
    /// Verify the preference axioms of an instance's relation graph.
    CheckAxioms { file: PathBuf },
    /// Events of indifference and strict preference between two acts.
    Partition {
        file: PathBuf,
        /// A value name (constant act) or `atom=value,...`.
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Build and verify a numerical representation.
    Represent {
        file: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Debreu)]
        method: Method,
        #[arg(long)]
        topology: Option<PathBuf>,
    },
    /// Normalize the gaps of a conditional interval set.
    GapNormalize { file: PathBuf },
    /// Expected-utility extraction and axiom checks on lotteries.
    Vnm {
        #[command(subcommand)]
        command: VnmCommand,
    },
    /// Run a seeded property suite (or `all`).
    Suite {
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        atoms: Option<usize>,
        /// Largest values (components, outcomes) per atom.
        #[arg(long)]
        values: Option<usize>,
        #[arg(long)]
        bits: Option<u32>,
        #[arg(long)]
        tie_probability: Option<f64>,
        /// Corrupt trial 0 with a fault (`default` picks the suite's own).
        #[arg(long)]
        inject: Option<String>,
        #[arg(long)]
        sequential: bool,
    },
    /// Exhaustively check the Boolean laws of conditional subsets.
    Laws {
        #[arg(long, default_value_t = 3)]
        atoms: usize,
        #[arg(long, default_value_t = 3)]
        values: usize,
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Subcommand)]
enum VnmCommand {
    /// Recover the utility index behind an instance's oracle.
    Extract {
        instance: PathBuf,
        #[arg(long, default_value_t = condpref::vnm::DEFAULT_BITS)]
        bits: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random lottery pairs used to validate the recovered index.
        #[arg(long, default_value_t = 100)]
        pairs: usize,
    },
    /// Sample an axiom of the instance's oracle.
    Check {
        instance: PathBuf,
        #[arg(long, value_enum)]
        axiom: AxiomArg,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = condpref::vnm::DEFAULT_BITS)]
        bits: u32,
    },
}

/// A finished command: its JSON, whether the checked property held, and a
/// human summary.
struct Outcome {
    json: Value,
    ok: bool,
    summary: String,
}

impl Outcome {
    fn ok(json: Value, summary: impl Into<String>) -> Self {
        Self {
            json,
            ok: true,
            summary: summary.into(),
        }
    }
}

fn read(path: &Path) -> condpref::Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Malformed(format!("cannot read {}: {e}", path.display())))
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn run(command: Command) -> condpref::Result<Outcome> {
    match command {
        Command::Generate {
            seed,
            atoms,
            values,
            tie_probability,
            outcomes,
            oracle,
            walk_museum,
        } => {
            let mut inst = if walk_museum {
                condpref::harness::generate::walk_museum()
            } else {
                generate(&InstanceSpec {
                    seed,
                    atoms,
                    min_values: values.0,
                    max_values: values.1,
                    tie_probability,
                    lottery_outcomes: outcomes,
                })?
            };
            if let Some(k) = oracle {
                inst.oracle = match k {
                    OracleArg::Planted => OracleKind::Planted,
                    OracleArg::Lexicographic => OracleKind::Lexicographic,
                    OracleArg::RankDependent => OracleKind::RankDependent,
                };
            }
            Ok(Outcome::ok(
                io::instance_to_json(&inst),
                format!("generated instance with {} atoms", inst.algebra.atoms()),
            ))
        }
        Command::CheckAxioms { file } => {
            let inst = io::parse_instance(&read(&file)?)?;
            let ground = inst.require_ground()?;
            let graph = match (&inst.relation, &inst.preference) {
                (Some(g), _) => g.clone(),
                (None, Some(p)) => induced_graph(p),
                (None, None) => return Err(Error::Malformed("instance has neither relation nor ranking".into())),
            };
            let report = verify_axioms(&graph, ground)?;
            let mut json = io::axiom_report_json(ground, &report);
            json["assertions"] = json!(graph.pairs.len());
            Ok(Outcome {
                ok: report.passed(),
                summary: format!(
                    "{} assertions, {} violations",
                    graph.pairs.len(),
                    report.violations.len()
                ),
                json,
            })
        }
        Command::Partition { file, x, y } => {
            let inst = io::parse_instance(&read(&file)?)?;
            let pref = inst.require_preference()?;
            let g = pref.ground();
            let (ax, ay) = (io::parse_act_spec(g, &x)?, io::parse_act_spec(g, &y)?);
            let t = tri_partition(pref, &ax, &ay)?;
            let alg = g.algebra();
            Ok(Outcome::ok(
                io::partition_json(alg, &t),
                format!(
                    "equiv {} / {x} strictly better on {} / {y} strictly better on {}",
                    alg.event_labels(t.equiv).join(","),
                    alg.event_labels(t.strict_first).join(","),
                    alg.event_labels(t.strict_second).join(","),
                ),
            ))
        }
        Command::Represent {
            file,
            weights,
            method,
            topology,
        } => {
            let inst = io::parse_instance(&read(&file)?)?;
            let pref = inst.require_preference()?;
            let g = pref.ground();
            let u = match method {
                Method::Debreu => {
                    if topology.is_some() {
                        return Err(Error::Config("--topology only applies to --method rader".into()));
                    }
                    let w = match &weights {
                        Some(p) => io::parse_weights(g, &read(p)?)?,
                        None => WeightScheme::dyadic(g),
                    };
                    debreu_utility(pref, &w)?
                }
                Method::Rader => {
                    if weights.is_some() {
                        return Err(Error::Config(
                            "rader weights belong to the base sets; put them in the topology file".into(),
                        ));
                    }
                    let (topo, w) = match &topology {
                        Some(p) => io::parse_topology(g, &read(p)?)?,
                        None => (FiniteCondTopology::lower_contours(pref), None),
                    };
                    let w = w.unwrap_or_else(|| topo.dyadic_weights());
                    rader_utility(pref, &topo, &w)?
                }
            };
            let report = verify_representation(&u, pref);
            Ok(Outcome {
                ok: report.passed(),
                summary: format!(
                    "{} utility {}",
                    match method {
                        Method::Debreu => "debreu",
                        Method::Rader => "rader",
                    },
                    if report.passed() { "verified" } else { "FAILED verification" }
                ),
                json: json!({
                    "method": match method { Method::Debreu => "debreu", Method::Rader => "rader" },
                    "utility": io::utility_json(&u),
                    "verification": report,
                }),
            })
        }
        Command::GapNormalize { file } => {
            let s = io::parse_interval_set(&read(&file)?)?;
            let (g, image) = gaps::gap_normalize(&s);
            let alg = s.algebra();
            let before = gaps::find_gaps(&s);
            let after = gaps::find_gaps(&image);
            let normal = gaps::has_normal_gaps(&image);
            Ok(Outcome {
                ok: normal,
                summary: format!("{} gaps before, {} after normalization", before.len(), after.len()),
                json: json!({
                    "source": io::interval_set_json(&s),
                    "gaps": io::gaps_json(alg, &before),
                    "map": io::piecewise_json(alg, &g),
                    "image": io::interval_set_json(&image),
                    "image_gaps": io::gaps_json(alg, &after),
                }),
            })
        }
        Command::Vnm { command } => run_vnm(command),
        Command::Suite {
            name,
            seed,
            trials,
            atoms,
            values,
            bits,
            tie_probability,
            inject,
            sequential,
        } => {
            let suites: Vec<Suite> = if name == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![name.parse()?]
            };
            let mut reports = Vec::new();
            for suite in suites {
                let d = SuiteConfig::defaults(suite);
                let fault = match inject.as_deref() {
                    None => None,
                    Some("default") => Some(Fault::default_for(suite)),
                    Some(f) => Some(f.parse()?),
                };
                let cfg = SuiteConfig {
                    seed,
                    trials: trials.unwrap_or(d.trials),
                    max_atoms: atoms.unwrap_or(d.max_atoms),
                    max_values: values.unwrap_or(d.max_values),
                    tie_probability: tie_probability.unwrap_or(d.tie_probability),
                    bits: bits.unwrap_or(d.bits),
                    fault,
                    execution: execution(sequential),
                };
                reports.push(run_suite(suite, &cfg)?);
            }
            let failures: usize = reports.iter().map(|r| r.failures.len()).sum();
            let summary = reports
                .iter()
                .map(|r| {
                    format!(
                        "{}: {} trials, {} failures, {:.0} ms",
                        r.suite,
                        r.trials,
                        r.failures.len(),
                        r.wall_time_ms
                    )
                })
                .collect::<Vec<_>>()
                .join("; ");
            let json = if reports.len() == 1 {
                serde_json::to_value(&reports[0]).expect("report encodes")
            } else {
                serde_json::to_value(&reports).expect("reports encode")
            };
            Ok(Outcome {
                json,
                ok: failures == 0,
                summary,
            })
        }
        Command::Laws {
            atoms,
            values,
            sequential,
        } => {
            let reports = exhaustive_all(atoms, values, execution(sequential))?;
            let bad = reports.iter().filter(|r| r.violation.is_some()).count();
            let triples: u64 = reports.iter().map(|r| r.triples).sum();
            Ok(Outcome {
                ok: bad == 0,
                summary: format!("{} grounds, {triples} triples, {bad} with violations", reports.len()),
                json: json!(reports),
            })
        }
    }
}

fn run_vnm(command: VnmCommand) -> condpref::Result<Outcome> {
    match command {
        VnmCommand::Extract {
            instance,
            bits,
            seed,
            pairs,
        } => {
            let inst = io::parse_instance(&read(&instance)?)?;
            let oracle = inst.oracle()?;
            let outcomes = inst.require_outcomes()?;
            let alg = &inst.algebra;
            let (best, worst) = anchors(oracle.as_ref(), alg, outcomes)?;
            let rec = utility_index(oracle.as_ref(), alg, outcomes, bits)?;
            let pairs = random_lottery_pairs(alg, outcomes, pairs, seed);
            let validation = validate_index(oracle.as_ref(), &rec, &pairs, bits)?;
            let mut ok = validation.mismatches == 0;
            let fit = match (&inst.planted_index, inst.oracle) {
                (Some(p), OracleKind::Planted) => {
                    let f = affine_equivalence(
                        &index_as_probes(p, alg),
                        &index_as_probes(&rec, alg),
                        &default_tolerance(bits),
                    )?;
                    ok &= f.is_equivalent();
                    match f {
                        AffineFit::Equivalent { a, b, max_deviation } => json!({
                            "equivalent": true,
                            "scale": io::cond_rational_json(alg, &a),
                            "shift": io::cond_rational_json(alg, &b),
                            "max_deviation": rational::format(&max_deviation),
                        }),
                        AffineFit::Mismatch { atom, probe, deviation } => json!({
                            "equivalent": false,
                            "atom": alg.label(atom),
                            "outcome": outcomes[probe],
                            "deviation": rational::format(&deviation),
                        }),
                    }
                }
                _ => Value::Null,
            };
            let label = |v: &[usize]| -> Value {
                (0..alg.atoms())
                    .map(|a| (alg.label(a).to_string(), json!(outcomes[v[a]])))
                    .collect::<serde_json::Map<_, _>>()
                    .into()
            };
            Ok(Outcome {
                ok,
                summary: format!(
                    "recovered index over {} outcomes; {} validation mismatches",
                    outcomes.len(),
                    validation.mismatches
                ),
                json: json!({
                    "bits": bits,
                    "index": io::index_json(alg, &rec),
                    "best": label(&best),
                    "worst": label(&worst),
                    "validation": validation,
                    "planted_fit": fit,
                }),
            })
        }
        VnmCommand::Check {
            instance,
            axiom,
            samples,
            seed,
            bits,
        } => {
            let inst = io::parse_instance(&read(&instance)?)?;
            let oracle = inst.oracle()?;
            let outcomes = inst.require_outcomes()?;
            let alg = &inst.algebra;
            match axiom {
                AxiomArg::Independence => {
                    let s = independence_samples(alg, outcomes, samples, seed);
                    let r = check_independence(oracle.as_ref(), &s)?;
                    let violations: Vec<Value> = r
                        .violations
                        .iter()
                        .map(|v| {
                            let (x, y, z, a) = &s[v.sample];
                            json!({
                                "sample": v.sample,
                                "event": io::event_json(alg, v.event),
                                "x": io::lottery_json(x),
                                "y": io::lottery_json(y),
                                "z": io::lottery_json(z),
                                "alpha": rational::format(a),
                            })
                        })
                        .collect();
                    Ok(Outcome {
                        ok: r.passed(),
                        summary: format!("independence: {} samples, {} violations", r.checked, r.violations.len()),
                        json: json!({ "axiom": "independence", "checked": r.checked, "violations": violations }),
                    })
                }
                AxiomArg::Archimedean => {
                    let s = archimedean_samples(oracle.as_ref(), alg, outcomes, samples, seed)?;
                    let r = check_archimedean(oracle.as_ref(), &s, bits)?;
                    let items: Vec<Value> = r
                        .outcomes
                        .iter()
                        .enumerate()
                        .map(|(i, o)| match o {
                            ArchimedeanOutcome::Witness { alpha, beta } => json!({
                                "sample": i,
                                "witness": true,
                                "alpha": io::cond_rational_json(alg, alpha),
                                "beta": io::cond_rational_json(alg, beta),
                            }),
                            ArchimedeanOutcome::NotFound { event, bits } => json!({
                                "sample": i,
                                "witness": false,
                                "event": io::event_json(alg, *event),
                                "resolution_bits": bits,
                                "y": io::lottery_json(&s[i].1),
                            }),
                        })
                        .collect();
                    let missing = items.iter().filter(|v| v["witness"] == json!(false)).count();
                    Ok(Outcome {
                        ok: r.passed(),
                        summary: format!(
                            "archimedean: {} samples, no witness at resolution 2^-{bits} for {missing}",
                            items.len()
                        ),
                        json: json!({ "axiom": "archimedean", "bits": bits, "samples": items }),
                    })
                }
            }
        }
    }
}

fn emit(out: Option<&Path>, json: &Value) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(json).expect("JSON value encodes");
    match out {
        Some(p) => fs::write(p, text + "\n"),
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r,
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    match run(cli.command) {
        Ok(o) => {
            if let Err(e) = emit(out.as_deref(), &o.json) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(2);
            }
            eprintln!("{}", o.summary);
            if o.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let _ = emit(None, &json!({ "error": { "kind": e.kind(), "message": e.to_string() } }));
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
