//! Acceptance run: ten desk-scale criteria, each timed against its budget.
//!
//! Prints one `PASS`/`FAIL` line per criterion and exits nonzero if any
//! criterion fails or overruns.

use std::cell::RefCell;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use condpref::condcore::{q_leq, CondElement};
use condpref::harness::checks::{lottery_mixtures, midpoint_chains};
use condpref::harness::laws::exhaustive_all;
use condpref::harness::{generate, run_suite, Fault, InstanceSpec, Suite, SuiteConfig, SuiteReport};
use condpref::par::Execution;
use condpref::preference::holds;
use condpref::rational::{parse, Rational};
use condpref::representation::{debreu_utility, WeightScheme};
use serde_json::{json, Value};

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { ok: false, detail: detail.into() }
}

type Criterion<'a> = (&'static str, Duration, Box<dyn FnMut() -> Outcome + 'a>);

fn suite_outcome(r: &SuiteReport) -> Outcome {
    match r.failures.first() {
        None => pass(format!("{} trials, {} checks", r.trials, r.cases_run)),
        Some(f) => fail(format!("trial {} seed {}: {} ({})", f.trial, f.seed, f.kind, f.detail)),
    }
}

fn run_default(suite: Suite) -> SuiteReport {
    run_suite(suite, &SuiteConfig::defaults(suite)).expect("default configuration is valid")
}

fn cli(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_condpref"))
        .args(args)
        .output()
        .expect("binary runs");
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), json)
}

fn walk_museum() -> Outcome {
    let dir = std::env::temp_dir().join(format!("condpref-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file: PathBuf = dir.join("walk_museum.json");
    let path = file.to_str().unwrap();
    let (code, _) = cli(&["generate", "--walk-museum", "--out", path]);
    if code != 0 {
        return fail(format!("generate exited {code}"));
    }

    let (code, part) = cli(&["partition", path, "--x", "walk", "--y", "museum"]);
    let expected = json!({"equiv": [], "strict_first": ["sunny"], "strict_second": ["not_sunny"]});
    if code != 0 || part != expected {
        return fail(format!("partition exited {code} with {part}"));
    }

    let (code, axioms) = cli(&["check-axioms", path]);
    if code != 0 || axioms["passed"] != json!(true) {
        return fail(format!("check-axioms exited {code}"));
    }

    let (code, rep) = cli(&["represent", path]);
    if code != 0 {
        return fail(format!("represent exited {code}"));
    }
    let u = |value: &str, atom: &str| -> Rational {
        rep["utility"][value][atom].as_str().and_then(|s| parse(s).ok()).expect("utility entry")
    };
    let _ = std::fs::remove_dir_all(&dir);
    if u("walk", "sunny") > u("museum", "sunny") && u("walk", "not_sunny") < u("museum", "not_sunny") {
        pass("partition (∅, {sunny}, {not_sunny}); axioms hold; utility ordered per atom")
    } else {
        fail(format!("utility {}", rep["utility"]))
    }
}

/// Direct sweep over generated instances: every pair of per-atom values,
/// compared as events, and the strict gap against the smallest weight.
fn iff_sweep() -> Result<usize, String> {
    let mut checked = 0;
    for seed in 0..200u64 {
        let spec = InstanceSpec {
            seed,
            atoms: 1 + (seed % 4) as usize,
            min_values: 2,
            max_values: 8,
            tie_probability: 0.3,
            lottery_outcomes: 0,
        };
        let inst = generate(&spec).map_err(|e| e.to_string())?;
        let p = inst.preference.unwrap();
        let g = p.ground().clone();
        let w = WeightScheme::dyadic(&g);
        let u = debreu_utility(&p, &w).map_err(|e| e.to_string())?;
        let top = (0..g.atoms()).map(|a| g.size(a)).max().unwrap();
        for i in 0..top {
            for j in 0..top {
                let x = CondElement::from_fn(g.algebra(), |a| i % g.size(a));
                let y = CondElement::from_fn(g.algebra(), |a| j % g.size(a));
                let (ux, uy) = (u.eval(&x), u.eval(&y));
                let xy = holds(&p, &x, &y).map_err(|e| e.to_string())?;
                if xy != q_leq(&uy, &ux) {
                    return Err(format!("seed {seed}: iff fails for values {i}, {j}"));
                }
                let strict = xy - holds(&p, &y, &x).map_err(|e| e.to_string())?;
                for a in strict.atoms() {
                    if ux.at(a).unwrap() - uy.at(a).unwrap() < *w.min_at(a) {
                        return Err(format!("seed {seed}: strict gap below the weight at atom {a}"));
                    }
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

fn fault_injection() -> Outcome {
    let mut notes = Vec::new();
    for suite in Suite::ALL {
        for fault in Fault::ALL.into_iter().filter(|f| f.applies_to(suite)) {
            let cfg = SuiteConfig { fault: Some(fault), ..SuiteConfig::defaults(suite) };
            let r = match run_suite(suite, &cfg) {
                Ok(r) => r,
                Err(e) => return fail(format!("{suite} with {}: {e}", fault.name())),
            };
            let [f] = r.failures.as_slice() else {
                return fail(format!("{suite} with {}: {} failures", fault.name(), r.failures.len()));
            };
            if f.trial != 0 || f.witness_atoms != 1 || f.witness_values > 2 {
                return fail(format!(
                    "{suite} with {}: trial {} witness {}x{}",
                    fault.name(),
                    f.trial,
                    f.witness_atoms,
                    f.witness_values
                ));
            }
            notes.push(format!("{suite}/{}→{}x{}", fault.name(), f.witness_atoms, f.witness_values));
        }
    }
    pass(notes.join(" "))
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let rep_report = RefCell::new(None);
    let criteria: Vec<Criterion> = vec![
        ("walk/museum reproduction", secs(1), Box::new(walk_museum)),
        (
            "representation iff property",
            secs(10),
            Box::new(|| {
                let r = run_default(Suite::Representation);
                let out = suite_outcome(&r);
                *rep_report.borrow_mut() = Some(r);
                if !out.ok {
                    return out;
                }
                match iff_sweep() {
                    Ok(n) => pass(format!("{}; direct sweep {n} value pairs", out.detail)),
                    Err(e) => fail(e),
                }
            }),
        ),
        (
            "strict-gap bound",
            secs(10),
            Box::new(|| match rep_report.borrow_mut().take() {
                Some(r) if r.failures.iter().all(|f| f.kind != "strict-gap") => {
                    pass(format!("checked within the {} representation trials", r.trials))
                }
                Some(r) => fail(format!("{} strict-gap failures", r.failures.iter().filter(|f| f.kind == "strict-gap").count())),
                None => fail("representation run missing"),
            }),
        ),
        ("normalized gap shapes", secs(10), Box::new(|| suite_outcome(&run_default(Suite::GapShapes)))),
        (
            "midpoint embedding",
            secs(2),
            Box::new(|| {
                let r = midpoint_chains(0, 100, 12, Execution::default());
                if r.passed() {
                    pass(format!("{} chains", r.cases))
                } else {
                    fail(r.failures.join("; "))
                }
            }),
        ),
        ("upper-semicontinuous upgrade", secs(5), Box::new(|| suite_outcome(&run_default(Suite::UscUpgrade)))),
        ("utility index recovery", secs(60), Box::new(|| suite_outcome(&run_default(Suite::VnmRecovery)))),
        (
            "mixture properties",
            secs(5),
            Box::new(|| {
                let r = lottery_mixtures(0, 100, 30, Execution::default());
                if r.passed() {
                    pass(format!("{} triples", r.cases))
                } else {
                    fail(r.failures.join("; "))
                }
            }),
        ),
        (
            "exhaustive Boolean laws",
            secs(5),
            Box::new(|| match exhaustive_all(3, 3, Execution::default()) {
                Ok(rs) => match rs.iter().find(|r| r.violation.is_some()) {
                    None => pass(format!(
                        "{} grounds, {} triples",
                        rs.len(),
                        rs.iter().map(|r| r.triples).sum::<u64>()
                    )),
                    Some(r) => fail(format!("{:?}: {:?}", r.sizes, r.violation)),
                },
                Err(e) => fail(e.to_string()),
            }),
        ),
        ("fault injection", secs(5), Box::new(fault_injection)),
    ];

    let mut all_ok = true;
    for (i, (name, budget, mut check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let took = start.elapsed();
        let ok = out.ok && took <= budget;
        all_ok &= ok;
        println!(
            "{} {:>2} {name}: {} [{:.2}s / {}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
