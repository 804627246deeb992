//! Seeded property suites with fault injection and witness shrinking.
//!
//! Each trial draws a case from its own seed (see [`trial_seed`]), checks
//! the suite's properties and, on failure, shrinks the case greedily: first
//! by dropping atoms, then by dropping values (or components, outcomes),
//! keeping a step only if the smaller case fails with the same kind.
//!
//! An injected fault corrupts trial 0 only.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::generate::{force_nontrivial, random_groups, random_index, rng, trial_seed, Instance, OracleKind, Rng64};
use super::io;
use super::laws::{first_violation, LibraryOps, SubsetOps};
use crate::condcore::{q_leq, Act, CondElement, ConditionalSubset, Ground};
use crate::error::{Error, Result};
use crate::events::Algebra;
use crate::gaps::{
    canonicalize, find_gaps, gap_normalize, has_normal_gaps, image_of, usc_upgrade, usc_upgrade_with_support,
    ConditionalIntervalSet, ExtRational, RationalInterval,
};
use crate::par::{self, Execution};
use crate::preference::{holds, induced_graph, verify_axioms, ConditionalPreference};
use crate::rational::{self, dyadic, int, rat, Rational};
use crate::representation::{debreu_utility, min_strict_margin, verify_representation, UtilityTable, WeightScheme};
use crate::vnm::{
    affine_equivalence, index_as_probes, utility_index, validate_index, ConditionalLottery, PlantedEu,
    UtilityIndex,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    BooleanLaws,
    Axioms,
    Representation,
    GapShapes,
    VnmRecovery,
    UscUpgrade,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::BooleanLaws,
        Suite::Axioms,
        Suite::Representation,
        Suite::GapShapes,
        Suite::VnmRecovery,
        Suite::UscUpgrade,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::BooleanLaws => "boolean-laws",
            Suite::Axioms => "axioms",
            Suite::Representation => "representation",
            Suite::GapShapes => "gap-shapes",
            Suite::VnmRecovery => "vnm-recovery",
            Suite::UscUpgrade => "usc-upgrade",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Two differently ranked values (or outcomes) trade utilities.
    SwappedPair,
    /// One weight turns negative.
    FlippedWeightSign,
    /// One side of an open image gap loses its endpoint.
    WrongGapFlag,
    /// Complements toggle one member bit.
    FlippedMemberBit,
    /// One reflexive assertion is missing from the relation graph.
    DroppedAssertion,
}

impl Fault {
    pub const ALL: [Fault; 5] = [
        Fault::SwappedPair,
        Fault::FlippedWeightSign,
        Fault::WrongGapFlag,
        Fault::FlippedMemberBit,
        Fault::DroppedAssertion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fault::SwappedPair => "swapped-pair",
            Fault::FlippedWeightSign => "flipped-weight-sign",
            Fault::WrongGapFlag => "wrong-gap-flag",
            Fault::FlippedMemberBit => "flipped-member-bit",
            Fault::DroppedAssertion => "dropped-assertion",
        }
    }

    pub fn default_for(suite: Suite) -> Fault {
        match suite {
            Suite::BooleanLaws => Fault::FlippedMemberBit,
            Suite::Axioms => Fault::DroppedAssertion,
            Suite::Representation | Suite::UscUpgrade | Suite::VnmRecovery => Fault::SwappedPair,
            Suite::GapShapes => Fault::WrongGapFlag,
        }
    }

    pub fn applies_to(self, suite: Suite) -> bool {
        match self {
            Fault::SwappedPair => matches!(suite, Suite::Representation | Suite::UscUpgrade | Suite::VnmRecovery),
            Fault::FlippedWeightSign => matches!(suite, Suite::Representation | Suite::UscUpgrade),
            Fault::WrongGapFlag => suite == Suite::GapShapes,
            Fault::FlippedMemberBit => suite == Suite::BooleanLaws,
            Fault::DroppedAssertion => suite == Suite::Axioms,
        }
    }
}

impl FromStr for Fault {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Fault::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown fault `{s}`")))
    }
}

/// Run parameters. `max_values` bounds values per atom, components per
/// atom (gap-shapes) or outcomes (vnm-recovery).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub max_atoms: usize,
    pub max_values: usize,
    pub tie_probability: f64,
    pub bits: u32,
    pub fault: Option<Fault>,
    #[serde(skip)]
    pub execution: Execution,
}

impl SuiteConfig {
    pub fn defaults(suite: Suite) -> Self {
        let (trials, max_atoms, max_values) = match suite {
            Suite::BooleanLaws => (100, 3, 3),
            Suite::Axioms => (100, 3, 3),
            Suite::Representation => (200, 4, 8),
            Suite::GapShapes => (200, 4, 6),
            Suite::VnmRecovery => (50, 3, 4),
            Suite::UscUpgrade => (100, 4, 8),
        };
        Self {
            seed: 0,
            trials,
            max_atoms,
            max_values,
            tie_probability: 0.3,
            bits: crate::vnm::DEFAULT_BITS,
            fault: None,
            execution: Execution::default(),
        }
    }

    fn validate(&self, suite: Suite) -> Result<()> {
        if !(1..=crate::events::DEFAULT_ATOM_LIMIT).contains(&self.max_atoms) {
            return Err(Error::Config(format!("atoms must lie in [1, 16], got {}", self.max_atoms)));
        }
        if self.max_values == 0 || self.max_values > crate::condcore::MAX_VALUES_PER_ATOM {
            return Err(Error::Config(format!("values must lie in [1, 64], got {}", self.max_values)));
        }
        if !(0.0..=1.0).contains(&self.tie_probability) {
            return Err(Error::Config("tie probability must lie in [0,1]".into()));
        }
        if self.bits == 0 || self.bits > 200 {
            return Err(Error::Config("bits must lie in [1, 200]".into()));
        }
        let min_values = match suite {
            Suite::Representation | Suite::UscUpgrade | Suite::VnmRecovery => 2,
            _ => 1,
        };
        if self.max_values < min_values {
            return Err(Error::Config(format!("suite {suite} needs at least {min_values} values")));
        }
        if suite == Suite::BooleanLaws && self.max_values > 8 {
            return Err(Error::Config("boolean-laws samples grounds of at most 8 values".into()));
        }
        if let Some(f) = self.fault {
            if !f.applies_to(suite) {
                return Err(Error::Config(format!("fault {} does not apply to suite {suite}", f.name())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub trial: usize,
    pub seed: u64,
    pub kind: String,
    pub detail: String,
    pub witness_atoms: usize,
    pub witness_values: usize,
    pub shrink_steps: usize,
    pub witness: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub trials: usize,
    pub cases_run: usize,
    pub failures: Vec<Failure>,
    pub wall_time_ms: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// The report without its wall time, for reproducibility comparisons.
    pub fn content(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report encodes");
        v.as_object_mut().unwrap().remove("wall_time_ms");
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fail {
    pub kind: &'static str,
    pub detail: String,
}

fn fail<T>(kind: &'static str, detail: impl Into<String>) -> std::result::Result<T, Fail> {
    Err(Fail {
        kind,
        detail: detail.into(),
    })
}

fn from_error(e: Error) -> Fail {
    let kind = match e {
        Error::Config(_) => "config-error",
        Error::Precondition(_) => "precondition",
        Error::Degenerate(_) => "degenerate",
        Error::Ordering { .. } => "ordering",
        _ => "error",
    };
    Fail {
        kind,
        detail: e.to_string(),
    }
}

/// A generated case that can be checked, shrunk and printed.
pub trait Case: Clone + Send + Sync {
    /// Number of property checks performed, or the first failure.
    fn check(&self) -> std::result::Result<usize, Fail>;
    /// Smaller cases: atom removals first, then value removals.
    fn shrink(&self) -> Vec<Self>;
    fn witness(&self) -> Value;
    /// Atoms and the largest per-atom value count.
    fn size(&self) -> (usize, usize);
}

const MAX_SHRINK_STEPS: usize = 10_000;

/// Greedy shrinking that keeps the failure kind.
pub fn shrink<C: Case>(case: C, kind: &str) -> (C, Fail, usize) {
    let mut cur = case;
    let mut last = cur.check().expect_err("shrinking starts from a failing case");
    let mut steps = 0;
    'outer: while steps < MAX_SHRINK_STEPS {
        for cand in cur.shrink() {
            if let Err(f) = cand.check() {
                if f.kind == kind {
                    cur = cand;
                    last = f;
                    steps += 1;
                    continue 'outer;
                }
            }
        }
        break;
    }
    (cur, last, steps)
}

enum TrialOutcome {
    Passed(usize),
    Failed(Failure),
}

fn run_case<C: Case>(trial: usize, seed: u64, case: C) -> TrialOutcome {
    match case.check() {
        Ok(n) => TrialOutcome::Passed(n),
        Err(f) => {
            let (small, last, steps) = shrink(case, f.kind);
            let (atoms, values) = small.size();
            TrialOutcome::Failed(Failure {
                trial,
                seed,
                kind: last.kind.to_string(),
                detail: last.detail,
                witness_atoms: atoms,
                witness_values: values,
                shrink_steps: steps,
                witness: small.witness(),
            })
        }
    }
}

fn run_trial(suite: Suite, cfg: &SuiteConfig, trial: usize) -> TrialOutcome {
    let seed = trial_seed(cfg.seed, trial);
    let fault = if trial == 0 { cfg.fault } else { None };
    let mut r = rng(seed);
    match suite {
        Suite::BooleanLaws => run_case(trial, seed, BoolCase::draw(&mut r, seed, cfg, fault)),
        Suite::Axioms | Suite::Representation | Suite::UscUpgrade => {
            run_case(trial, seed, RankedCase::draw(&mut r, seed, suite, cfg, fault))
        }
        Suite::GapShapes => run_case(trial, seed, IntervalCase::draw(&mut r, seed, cfg, fault)),
        Suite::VnmRecovery => run_case(trial, seed, VnmCase::draw(&mut r, seed, cfg, fault)),
    }
}

/// Runs `cfg.trials` trials of a suite. Trials may run concurrently;
/// failures are reported in trial order.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate(suite)?;
    let start = Instant::now();
    let outcomes = par::map_range(cfg.execution, cfg.trials, |t| run_trial(suite, cfg, t));
    let mut report = SuiteReport {
        suite,
        seed: cfg.seed,
        trials: cfg.trials,
        cases_run: 0,
        failures: Vec::new(),
        wall_time_ms: 0.0,
    };
    for o in outcomes {
        match o {
            TrialOutcome::Passed(n) => report.cases_run += n,
            TrialOutcome::Failed(f) => {
                report.cases_run += 1;
                report.failures.push(f);
            }
        }
    }
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Re-runs one trial, reproducing its failure and minimized witness.
pub fn replay_trial(suite: Suite, cfg: &SuiteConfig, trial: usize) -> Result<Option<Failure>> {
    cfg.validate(suite)?;
    Ok(match run_trial(suite, cfg, trial) {
        TrialOutcome::Passed(_) => None,
        TrialOutcome::Failed(f) => Some(f),
    })
}

/// Draws `count` items from `0..n` without replacement.
fn pick(r: &mut Rng64, n: usize, count: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(r);
    all.truncate(count);
    all
}

fn atom_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{i}")).collect()
}

/// Drops entry `k` of a per-atom vector of atom records.
fn without<T: Clone>(items: &[T], k: usize) -> Vec<T> {
    let mut v = items.to_vec();
    v.remove(k);
    v
}

#[derive(Debug, Clone)]
struct BoolCase {
    seed: u64,
    labels: Vec<String>,
    sizes: Vec<usize>,
    flip: Vec<bool>,
}

impl BoolCase {
    fn draw(r: &mut Rng64, seed: u64, cfg: &SuiteConfig, fault: Option<Fault>) -> Self {
        let m = r.gen_range(1..=cfg.max_atoms);
        let sizes: Vec<usize> = (0..m).map(|_| r.gen_range(1..=cfg.max_values)).collect();
        let mut flip = vec![false; m];
        if fault == Some(Fault::FlippedMemberBit) {
            flip[r.gen_range(0..m)] = true;
        }
        Self {
            seed,
            labels: atom_labels(m),
            sizes,
            flip,
        }
    }
}

struct FlippedOps<'a> {
    lib: LibraryOps<'a>,
    flip: &'a [bool],
}

impl SubsetOps for FlippedOps<'_> {
    fn union(&self, a: &ConditionalSubset, b: &ConditionalSubset) -> ConditionalSubset {
        self.lib.union(a, b)
    }

    fn intersection(&self, a: &ConditionalSubset, b: &ConditionalSubset) -> ConditionalSubset {
        self.lib.intersection(a, b)
    }

    fn complement(&self, a: &ConditionalSubset) -> ConditionalSubset {
        let c = self.lib.complement(a);
        let masks = c
            .masks()
            .iter()
            .zip(self.flip)
            .map(|(&m, &f)| if f { m ^ 1 } else { m })
            .collect();
        ConditionalSubset::from_masks(self.lib.ground.algebra(), masks).expect("same algebra")
    }

    fn bottom(&self) -> ConditionalSubset {
        self.lib.bottom()
    }

    fn top(&self) -> ConditionalSubset {
        self.lib.top()
    }
}

const BOOL_TRIPLES: usize = 64;

impl Case for BoolCase {
    fn check(&self) -> std::result::Result<usize, Fail> {
        let alg = Algebra::new(&self.labels).map_err(from_error)?;
        let ground = Ground::new(
            alg.clone(),
            self.sizes.iter().map(|&s| (0..s).map(|v| format!("v{v}")).collect()).collect(),
        )
        .map_err(from_error)?;
        let ops = FlippedOps {
            lib: LibraryOps { ground: &ground },
            flip: &self.flip,
        };
        let mut r = rng(self.seed);
        let draw = |r: &mut Rng64| {
            let masks = self
                .sizes
                .iter()
                .map(|&s| if r.gen_bool(0.2) { 0 } else { r.gen_range(0..1u64 << s) })
                .collect();
            ConditionalSubset::from_masks(&alg, masks).expect("masks within ground")
        };
        let specials = [ops.bottom(), ops.top()];
        for t in 0..BOOL_TRIPLES {
            let mut abc = [draw(&mut r), draw(&mut r), draw(&mut r)];
            if t < 2 {
                abc[0] = specials[t].clone();
            }
            if let Some(law) = first_violation(&ops, &abc[0], &abc[1], &abc[2]) {
                let masks: Vec<_> = abc.iter().map(|s| s.masks().to_vec()).collect();
                return fail("boolean-law", format!("{law} fails on masks {masks:?}"));
            }
        }
        Ok(BOOL_TRIPLES)
    }

    fn shrink(&self) -> Vec<Self> {
        let mut out = Vec::new();
        if self.sizes.len() > 1 {
            for k in 0..self.sizes.len() {
                out.push(Self {
                    seed: self.seed,
                    labels: without(&self.labels, k),
                    sizes: without(&self.sizes, k),
                    flip: without(&self.flip, k),
                });
            }
        }
        for k in 0..self.sizes.len() {
            if self.sizes[k] > 1 {
                let mut c = self.clone();
                c.sizes[k] -= 1;
                out.push(c);
            }
        }
        out
    }

    fn witness(&self) -> Value {
        json!({
            "seed": self.seed,
            "atoms": self.labels,
            "sizes": self.sizes,
            "flipped": self.labels.iter().zip(&self.flip).filter(|p| *p.1).map(|p| p.0).collect::<Vec<_>>(),
        })
    }

    fn size(&self) -> (usize, usize) {
        (self.sizes.len(), self.sizes.iter().copied().max().unwrap_or(0))
    }
}

#[derive(Debug, Clone)]
struct RankedValue {
    label: String,
    rank: usize,
    weight: Rational,
    swap: bool,
    negate: bool,
}

#[derive(Debug, Clone)]
struct RankedAtom {
    label: String,
    values: Vec<RankedValue>,
    drop: bool,
}

#[derive(Debug, Clone)]
struct RankedCase {
    suite: Suite,
    seed: u64,
    atoms: Vec<RankedAtom>,
}

impl RankedCase {
    fn draw(r: &mut Rng64, seed: u64, suite: Suite, cfg: &SuiteConfig, fault: Option<Fault>) -> Self {
        let m = r.gen_range(1..=cfg.max_atoms);
        let lo = if suite == Suite::Axioms { 1 } else { 2.min(cfg.max_values) };
        let sizes: Vec<usize> = (0..m).map(|_| r.gen_range(lo..=cfg.max_values)).collect();
        let mut groups: Vec<Vec<Vec<usize>>> = sizes
            .iter()
            .map(|&n| random_groups(r, n, cfg.tie_probability))
            .collect();
        force_nontrivial(&mut groups);
        let mut atoms: Vec<RankedAtom> = groups
            .iter()
            .enumerate()
            .map(|(a, gs)| {
                let n = sizes[a];
                let mut values: Vec<RankedValue> = (0..n)
                    .map(|v| RankedValue {
                        label: format!("v{v}"),
                        rank: 0,
                        weight: rat(1, r.gen_range(1..=16)),
                        swap: false,
                        negate: false,
                    })
                    .collect();
                for (k, g) in gs.iter().enumerate() {
                    for &v in g {
                        values[v].rank = k;
                    }
                }
                RankedAtom {
                    label: format!("w{a}"),
                    values,
                    drop: false,
                }
            })
            .collect();
        match fault {
            Some(Fault::SwappedPair) => {
                let strict: Vec<usize> = (0..m).filter(|&a| groups[a].len() >= 2).collect();
                if let Some(&a) = strict.choose(r) {
                    let g = &groups[a];
                    let k = r.gen_range(0..g.len() - 1);
                    let v = *g[k].choose(r).unwrap();
                    let w = *g[k + 1].choose(r).unwrap();
                    atoms[a].values[v].swap = true;
                    atoms[a].values[w].swap = true;
                }
            }
            Some(Fault::FlippedWeightSign) => {
                let a = r.gen_range(0..m);
                let v = r.gen_range(0..sizes[a]);
                atoms[a].values[v].negate = true;
            }
            Some(Fault::DroppedAssertion) => {
                atoms[r.gen_range(0..m)].drop = true;
            }
            _ => {}
        }
        Self { suite, seed, atoms }
    }

    fn build(&self) -> Result<(ConditionalPreference, WeightScheme)> {
        let labels: Vec<&str> = self.atoms.iter().map(|a| a.label.as_str()).collect();
        let alg = Algebra::new(&labels)?;
        let ground = Ground::new(
            alg,
            self.atoms
                .iter()
                .map(|a| a.values.iter().map(|v| v.label.clone()).collect())
                .collect(),
        )?;
        let groups = self
            .atoms
            .iter()
            .map(|a| {
                let mut ranks: Vec<usize> = a.values.iter().map(|v| v.rank).collect();
                ranks.sort_unstable();
                ranks.dedup();
                ranks
                    .iter()
                    .map(|&k| (0..a.values.len()).filter(|&v| a.values[v].rank == k).collect())
                    .collect()
            })
            .collect();
        let weights = self
            .atoms
            .iter()
            .map(|a| {
                a.values
                    .iter()
                    .map(|v| if v.negate { -v.weight.clone() } else { v.weight.clone() })
                    .collect()
            })
            .collect();
        let pref = ConditionalPreference::new_allow_trivial(ground.clone(), groups)?;
        Ok((pref, WeightScheme::new(&ground, weights)?))
    }

    /// `U` with the marked pairs swapped.
    fn utility(&self, pref: &ConditionalPreference, w: &WeightScheme) -> std::result::Result<UtilityTable, Fail> {
        let mut u = debreu_utility(pref, w).map_err(from_error)?;
        for (a, at) in self.atoms.iter().enumerate() {
            let marked: Vec<usize> = (0..at.values.len()).filter(|&v| at.values[v].swap).collect();
            if let [v, w] = marked[..] {
                let (uv, uw) = (u.at(a, v).clone(), u.at(a, w).clone());
                u.set(a, v, uw);
                u.set(a, w, uv);
            }
        }
        Ok(u)
    }

    fn check_representation(&self, pref: &ConditionalPreference, w: &WeightScheme) -> std::result::Result<usize, Fail> {
        let u = self.utility(pref, w)?;
        let g = pref.ground();
        let mut checks = 0;
        for a in 0..g.atoms() {
            let n = g.size(a);
            for v in 0..n {
                for x in 0..n {
                    let (ax, ay) = (single(g, a, v), single(g, a, x));
                    let lhs = holds(pref, &ax, &ay).map_err(from_error)?;
                    let rhs = q_leq(&u.eval(&ay), &u.eval(&ax));
                    if lhs != rhs {
                        return fail(
                            "iff",
                            format!(
                                "at {}: holds({v},{x}) on {:?} but the utility order gives {:?}",
                                g.algebra().label(a),
                                g.algebra().event_labels(lhs),
                                g.algebra().event_labels(rhs)
                            ),
                        );
                    }
                    checks += 1;
                }
            }
        }
        for a in 0..g.atoms() {
            let n = g.size(a);
            for v in 0..n {
                for x in 0..n {
                    if pref.strictly_prefers(a, v, x) && u.at(a, v) - u.at(a, x) < *w.min_at(a) {
                        return fail("strict-gap", format!("U({v}) - U({x}) below the minimum weight at atom {a}"));
                    }
                }
            }
        }
        Ok(checks)
    }

    fn check_upgrade(&self, pref: &ConditionalPreference, w: &WeightScheme) -> std::result::Result<usize, Fail> {
        let u = self.utility(pref, w)?;
        let up = usc_upgrade(&u, pref).map_err(from_error)?;
        if !verify_representation(&up, pref).passed() {
            return fail("representation", "upgraded utility does not represent the preference");
        }
        let img = image_of(&up).map_err(from_error)?;
        if !has_normal_gaps(&img) {
            return fail("gap-shape", "upgraded image has a closed or half-open gap");
        }
        // Again on a support that thickens each utility value to an interval.
        let support = thickened_support(&u, self.seed).map_err(from_error)?;
        let up2 = usc_upgrade_with_support(&u, pref, &support).map_err(from_error)?;
        if !verify_representation(&up2, pref).passed() {
            return fail("representation", "support-based upgrade does not represent the preference");
        }
        let (_, normalized) = gap_normalize(&support);
        if !has_normal_gaps(&normalized) {
            return fail("gap-shape", "normalized support has a closed or half-open gap");
        }
        for a in 0..pref.atoms() {
            if let (Some(m0), Some(m1)) = (min_strict_margin(&u, pref, a), min_strict_margin(&up2, pref, a)) {
                if !m0.is_positive() || !m1.is_positive() {
                    return fail("representation", format!("nonpositive strict margin at atom {a}"));
                }
            }
        }
        Ok(2)
    }

    fn check_axioms(&self, pref: &ConditionalPreference) -> std::result::Result<usize, Fail> {
        let mut graph = induced_graph(pref);
        for (a, at) in self.atoms.iter().enumerate() {
            if at.drop {
                let alg = pref.ground().algebra();
                let target = alg.atom(a);
                if let Some(k) = graph
                    .pairs
                    .iter()
                    .position(|p| p.event == target && p.x.at(a) == Some(&0) && p.y.at(a) == Some(&0))
                {
                    graph.pairs.remove(k);
                }
            }
        }
        let report = verify_axioms(&graph, pref.ground()).map_err(from_error)?;
        if let Some(v) = report.violations.first() {
            return fail("axiom", format!("{:?}: {}", v.axiom, v.detail));
        }
        if report.induced.as_ref() != Some(pref) {
            return fail("round-trip", "induced preference differs from the source ranking");
        }
        Ok(graph.pairs.len())
    }
}

/// The act with value `v` at `atom` and the first value elsewhere.
fn single(g: &Ground, atom: usize, v: usize) -> Act {
    CondElement::from_fn(g.algebra(), |a| if a == atom { v } else { 0 })
}

/// Each utility value `q` widened to an interval starting or ending at `q`,
/// with random flags on the far end. Widths stay below a third of the
/// smallest distinct gap, so intervals never touch.
fn thickened_support(u: &UtilityTable, seed: u64) -> Result<ConditionalIntervalSet> {
    let g = u.ground();
    let mut r = rng(seed ^ 0x5eed);
    let raw = (0..g.atoms())
        .map(|a| {
            let mut vals: Vec<Rational> = u.atom_values(a).to_vec();
            vals.sort();
            vals.dedup();
            let width = vals
                .windows(2)
                .map(|w| &w[1] - &w[0])
                .min()
                .unwrap_or_else(|| int(1))
                / int(3);
            vals.iter()
                .map(|q| {
                    let far_closed = r.gen_bool(0.5);
                    if r.gen_bool(0.5) {
                        RationalInterval::new(q.clone().into(), (q + &width).into(), true, far_closed)
                    } else {
                        RationalInterval::new((q - &width).into(), q.clone().into(), far_closed, true)
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    canonicalize(g.algebra(), raw)
}

impl Case for RankedCase {
    fn check(&self) -> std::result::Result<usize, Fail> {
        let (pref, w) = self.build().map_err(from_error)?;
        match self.suite {
            Suite::Representation => self.check_representation(&pref, &w),
            Suite::UscUpgrade => self.check_upgrade(&pref, &w),
            _ => self.check_axioms(&pref),
        }
    }

    fn shrink(&self) -> Vec<Self> {
        let mut out = Vec::new();
        if self.atoms.len() > 1 {
            for k in 0..self.atoms.len() {
                out.push(Self {
                    atoms: without(&self.atoms, k),
                    ..self.clone()
                });
            }
        }
        for a in 0..self.atoms.len() {
            if self.atoms[a].values.len() > 1 {
                for v in 0..self.atoms[a].values.len() {
                    let mut c = self.clone();
                    c.atoms[a].values.remove(v);
                    out.push(c);
                }
            }
        }
        out
    }

    fn witness(&self) -> Value {
        let mut v = match self.build() {
            Ok((pref, _)) => io::instance_to_json(&Instance {
                algebra: pref.ground().algebra().clone(),
                ground: Some(pref.ground().clone()),
                preference: Some(pref),
                relation: None,
                outcomes: None,
                planted_index: None,
                oracle: OracleKind::Planted,
            }),
            Err(e) => json!({ "error": e.to_string() }),
        };
        let mut weights = serde_json::Map::new();
        let mut marks = Vec::new();
        for at in &self.atoms {
            let row: serde_json::Map<String, Value> = at
                .values
                .iter()
                .map(|x| {
                    let w = if x.negate { -x.weight.clone() } else { x.weight.clone() };
                    (x.label.clone(), json!(rational::format(&w)))
                })
                .collect();
            weights.insert(at.label.clone(), Value::Object(row));
            for x in &at.values {
                if x.swap {
                    marks.push(json!({"atom": at.label, "value": x.label, "fault": "swapped-pair"}));
                }
                if x.negate {
                    marks.push(json!({"atom": at.label, "value": x.label, "fault": "flipped-weight-sign"}));
                }
            }
            if at.drop {
                marks.push(json!({"atom": at.label, "fault": "dropped-assertion"}));
            }
        }
        v["weights"] = Value::Object(weights);
        v["faults"] = json!(marks);
        v["seed"] = json!(self.seed);
        v
    }

    fn size(&self) -> (usize, usize) {
        (
            self.atoms.len(),
            self.atoms.iter().map(|a| a.values.len()).max().unwrap_or(0),
        )
    }
}

#[derive(Debug, Clone)]
struct IntervalAtom {
    label: String,
    components: Vec<RationalInterval>,
    fault: bool,
}

#[derive(Debug, Clone)]
struct IntervalCase {
    seed: u64,
    atoms: Vec<IntervalAtom>,
}

/// Up to `max` disjoint components with random flags; some touch their
/// neighbour, some are points, and the outer ones may be unbounded.
pub fn random_components(r: &mut Rng64, max: usize) -> Vec<RationalInterval> {
    let k = r.gen_range(1..=max);
    let den: i64 = r.gen_range(1..=4);
    let mut cuts: Vec<i64> = pick(r, 4 * k + 2, 2 * k).into_iter().map(|c| c as i64).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(k);
    let mut prev_hi: Option<i64> = None;
    for i in 0..k {
        let mut lo = cuts[2 * i];
        let hi = cuts[2 * i + 1];
        if let Some(p) = prev_hi {
            if r.gen_bool(0.15) {
                lo = p;
            }
        }
        let point = r.gen_bool(0.2);
        let (lo, hi) = if point { (hi, hi) } else { (lo, hi) };
        let lo_e: ExtRational = if i == 0 && !point && r.gen_bool(0.1) {
            ExtRational::NegInf
        } else {
            rat(lo, den).into()
        };
        let hi_e: ExtRational = if i == k - 1 && !point && r.gen_bool(0.1) {
            ExtRational::PosInf
        } else {
            rat(hi, den).into()
        };
        let (lc, hc) = if point {
            (true, true)
        } else {
            (lo_e.is_finite() && r.gen_bool(0.5), hi_e.is_finite() && r.gen_bool(0.5))
        };
        out.push(RationalInterval::new(lo_e, hi_e, lc, hc).expect("ordered endpoints"));
        prev_hi = Some(hi);
    }
    out
}

impl IntervalCase {
    fn draw(r: &mut Rng64, seed: u64, cfg: &SuiteConfig, fault: Option<Fault>) -> Self {
        let m = r.gen_range(1..=cfg.max_atoms);
        let mut atoms: Vec<IntervalAtom> = (0..m)
            .map(|a| IntervalAtom {
                label: format!("w{a}"),
                components: if r.gen_bool(0.1) {
                    Vec::new()
                } else {
                    random_components(r, cfg.max_values)
                },
                fault: false,
            })
            .collect();
        if fault == Some(Fault::WrongGapFlag) {
            let a = r.gen_range(0..m);
            atoms[a].fault = true;
            // An open image gap needs two closed sides with a gap between.
            let top = atoms[a]
                .components
                .iter()
                .filter_map(|c| c.hi().finite().cloned())
                .max()
                .unwrap_or_else(|| int(0));
            if atoms[a].components.last().is_some_and(|c| !c.hi().is_finite()) {
                atoms[a].components.clear();
            }
            let base = top + int(1);
            atoms[a].components.push(RationalInterval::closed(base.clone(), &base + int(1)).unwrap());
            atoms[a].components.push(RationalInterval::closed(&base + int(2), &base + int(3)).unwrap());
        }
        Self { seed, atoms }
    }

    fn set(&self) -> Result<ConditionalIntervalSet> {
        let labels: Vec<&str> = self.atoms.iter().map(|a| a.label.as_str()).collect();
        canonicalize(
            &Algebra::new(&labels)?,
            self.atoms.iter().map(|a| a.components.clone()).collect(),
        )
    }
}

/// Finite sample points of a component: closed ends plus interior points.
fn samples_in(c: &RationalInterval, r: &mut Rng64) -> Vec<Rational> {
    let mut out = Vec::new();
    match (c.lo(), c.hi()) {
        (ExtRational::Finite(lo), ExtRational::Finite(hi)) => {
            if c.is_point() {
                return vec![lo.clone()];
            }
            if c.lo_closed() {
                out.push(lo.clone());
            }
            if c.hi_closed() {
                out.push(hi.clone());
            }
            for _ in 0..3 {
                let t = rat(r.gen_range(1..64), 64);
                out.push(lo + (hi - lo) * t);
            }
        }
        (lo, hi) => {
            let anchor = lo.finite().or(hi.finite()).cloned().unwrap_or_else(|| int(0));
            for _ in 0..3 {
                let d = rat(r.gen_range(1..64), 8);
                out.push(match (lo.is_finite(), hi.is_finite()) {
                    (true, false) => &anchor + d,
                    (false, true) => &anchor - d,
                    _ => if r.gen_bool(0.5) { &anchor + d } else { &anchor - d },
                });
            }
            if let (ExtRational::Finite(q), true) = (lo, c.lo_closed()) {
                out.push(q.clone());
            }
            if let (ExtRational::Finite(q), true) = (hi, c.hi_closed()) {
                out.push(q.clone());
            }
        }
    }
    out
}

const GAP_PAIRS: usize = 1000;

impl Case for IntervalCase {
    fn check(&self) -> std::result::Result<usize, Fail> {
        let s = self.set().map_err(from_error)?;
        let alg = s.algebra().clone();
        let (mut g, _) = gap_normalize(&s);
        for (a, at) in self.atoms.iter().enumerate() {
            if at.fault {
                corrupt_gap_flag(&mut g, a);
            }
        }
        let image = g.image(&alg);
        for gap in find_gaps(&image) {
            for a in gap.living.atoms() {
                if let Some(shape) = gap.shape_at(a) {
                    if !shape.is_normal() {
                        return fail(
                            "gap-shape",
                            format!("gap {} at {} is {shape:?}", gap.index, alg.label(a)),
                        );
                    }
                }
            }
        }
        let mut r = rng(self.seed);
        let points: Vec<Vec<Rational>> = (0..alg.atoms())
            .map(|a| {
                let mut p: Vec<Rational> = s.components(a).iter().flat_map(|c| samples_in(c, &mut r)).collect();
                p.sort();
                p.dedup();
                p
            })
            .collect();
        let usable: Vec<usize> = (0..alg.atoms()).filter(|&a| points[a].len() >= 2).collect();
        if usable.is_empty() {
            return Ok(1);
        }
        for _ in 0..GAP_PAIRS {
            let a = *usable.choose(&mut r).unwrap();
            let ij = pick(&mut r, points[a].len(), 2);
            let (s_, t_) = (&points[a][ij[0].min(ij[1])], &points[a][ij[0].max(ij[1])]);
            match (g.apply(a, s_), g.apply(a, t_)) {
                (Some(gs), Some(gt)) if gs < gt => {}
                (Some(_), Some(_)) => {
                    return fail("monotonicity", format!("g not increasing on {} < {} at {}", rational::format(s_), rational::format(t_), alg.label(a)))
                }
                _ => return fail("uncovered", format!("g undefined near {} at {}", rational::format(s_), alg.label(a))),
            }
        }
        Ok(GAP_PAIRS)
    }

    fn shrink(&self) -> Vec<Self> {
        let mut out = Vec::new();
        if self.atoms.len() > 1 {
            for k in 0..self.atoms.len() {
                out.push(Self {
                    seed: self.seed,
                    atoms: without(&self.atoms, k),
                });
            }
        }
        for a in 0..self.atoms.len() {
            for k in 0..self.atoms[a].components.len() {
                let mut c = self.clone();
                c.atoms[a].components.remove(k);
                out.push(c);
            }
        }
        out
    }

    fn witness(&self) -> Value {
        let mut v = match self.set() {
            Ok(s) => io::interval_set_json(&s),
            Err(e) => json!({ "error": e.to_string() }),
        };
        v["faulty_atoms"] = json!(self.atoms.iter().filter(|a| a.fault).map(|a| &a.label).collect::<Vec<_>>());
        v["seed"] = json!(self.seed);
        v
    }

    fn size(&self) -> (usize, usize) {
        (
            self.atoms.len(),
            self.atoms.iter().map(|a| a.components.len()).max().unwrap_or(0),
        )
    }
}

/// Makes the first open image gap at `atom` half-open by dropping the
/// attained endpoint of a neighbouring source piece.
fn corrupt_gap_flag(g: &mut crate::gaps::PiecewiseMap, atom: usize) {
    let pieces = g.pieces_mut(atom);
    for i in 1..pieces.len() {
        let (l, rgt) = (&pieces[i - 1].source, &pieces[i].source);
        if !(l.hi_closed() && rgt.lo_closed()) {
            continue;
        }
        if !l.is_point() {
            let s = RationalInterval::new(l.lo().clone(), l.hi().clone(), l.lo_closed(), false).unwrap();
            pieces[i - 1].source = s;
            return;
        }
        if !rgt.is_point() {
            let s = RationalInterval::new(rgt.lo().clone(), rgt.hi().clone(), false, rgt.hi_closed()).unwrap();
            pieces[i].source = s;
            return;
        }
    }
}

#[derive(Debug, Clone)]
struct VnmAtom {
    label: String,
    row: Vec<Rational>,
    swap: Vec<bool>,
}

#[derive(Debug, Clone)]
struct VnmCase {
    seed: u64,
    bits: u32,
    outcomes: Vec<String>,
    atoms: Vec<VnmAtom>,
}

const VALIDATION_PAIRS: usize = 100;

/// A random lottery with masses `k/12` per atom.
pub fn random_lottery(r: &mut Rng64, algebra: &Algebra, outcomes: &Arc<[String]>) -> ConditionalLottery {
    let n = outcomes.len();
    let pmf = (0..algebra.atoms())
        .map(|_| {
            let mut counts = vec![0i64; n];
            for _ in 0..12 {
                counts[r.gen_range(0..n)] += 1;
            }
            counts.into_iter().map(|c| rat(c, 12)).collect()
        })
        .collect();
    ConditionalLottery::new(algebra, outcomes.clone(), pmf).expect("masses sum to one")
}

/// `count` seeded pairs of random lotteries.
pub fn random_lottery_pairs(
    algebra: &Algebra,
    outcomes: &Arc<[String]>,
    count: usize,
    seed: u64,
) -> Vec<(ConditionalLottery, ConditionalLottery)> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| (random_lottery(&mut r, algebra, outcomes), random_lottery(&mut r, algebra, outcomes)))
        .collect()
}

impl VnmCase {
    fn draw(r: &mut Rng64, seed: u64, cfg: &SuiteConfig, fault: Option<Fault>) -> Self {
        let m = r.gen_range(1..=cfg.max_atoms);
        let n = r.gen_range(2..=cfg.max_values);
        let rows = random_index(r, m, n);
        let mut atoms: Vec<VnmAtom> = rows
            .into_iter()
            .enumerate()
            .map(|(a, row)| VnmAtom {
                label: format!("w{a}"),
                row,
                swap: vec![false; n],
            })
            .collect();
        if fault == Some(Fault::SwappedPair) {
            let a = r.gen_range(0..m);
            let row = &atoms[a].row;
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&(i, j)| row[i] != row[j])
                .collect();
            let &(i, j) = pairs.choose(r).expect("rows are nondegenerate");
            atoms[a].swap[i] = true;
            atoms[a].swap[j] = true;
        }
        Self {
            seed,
            bits: cfg.bits,
            outcomes: (0..n).map(|i| format!("o{i}")).collect(),
            atoms,
        }
    }

    fn indices(&self) -> Result<(Algebra, Arc<[String]>, UtilityIndex, UtilityIndex)> {
        let labels: Vec<&str> = self.atoms.iter().map(|a| a.label.as_str()).collect();
        let alg = Algebra::new(&labels)?;
        let os: Arc<[String]> = self.outcomes.clone().into();
        let planted = UtilityIndex::new(os.clone(), self.atoms.iter().map(|a| a.row.clone()).collect())?;
        let served = UtilityIndex::new(
            os.clone(),
            self.atoms
                .iter()
                .map(|a| {
                    let mut row = a.row.clone();
                    let marked: Vec<usize> = (0..row.len()).filter(|&o| a.swap[o]).collect();
                    if let [i, j] = marked[..] {
                        row.swap(i, j);
                    }
                    row
                })
                .collect(),
        )?;
        Ok((alg, os, planted, served))
    }
}

impl Case for VnmCase {
    fn check(&self) -> std::result::Result<usize, Fail> {
        let (alg, os, planted, served) = self.indices().map_err(from_error)?;
        let oracle = PlantedEu { index: served };
        let rec = utility_index(&oracle, &alg, &os, self.bits).map_err(from_error)?;
        let tol = dyadic(28);
        let fit = affine_equivalence(&index_as_probes(&planted, &alg), &index_as_probes(&rec, &alg), &tol)
            .map_err(from_error)?;
        if let crate::vnm::AffineFit::Mismatch { atom, probe, deviation } = fit {
            return fail(
                "recovery",
                format!(
                    "outcome {} at {} deviates by {} from the planted index",
                    self.outcomes[probe],
                    alg.label(atom),
                    rational::format(&deviation)
                ),
            );
        }
        let pairs = random_lottery_pairs(&alg, &os, VALIDATION_PAIRS, self.seed);
        let v = validate_index(&oracle, &rec, &pairs, self.bits).map_err(from_error)?;
        if v.mismatches > 0 {
            return fail("validation", format!("{} sign mismatches on {} pairs", v.mismatches, v.pairs));
        }
        Ok(1 + VALIDATION_PAIRS)
    }

    fn shrink(&self) -> Vec<Self> {
        let mut out = Vec::new();
        if self.atoms.len() > 1 {
            for k in 0..self.atoms.len() {
                out.push(Self {
                    atoms: without(&self.atoms, k),
                    ..self.clone()
                });
            }
        }
        if self.outcomes.len() > 2 {
            for o in 0..self.outcomes.len() {
                let mut c = self.clone();
                c.outcomes.remove(o);
                for a in &mut c.atoms {
                    a.row.remove(o);
                    a.swap.remove(o);
                }
                out.push(c);
            }
        }
        out
    }

    fn witness(&self) -> Value {
        let mut v = match self.indices() {
            Ok((alg, os, planted, _)) => io::instance_to_json(&Instance {
                algebra: alg,
                ground: None,
                preference: None,
                relation: None,
                outcomes: Some(os),
                planted_index: Some(planted),
                oracle: OracleKind::Planted,
            }),
            Err(e) => json!({ "error": e.to_string() }),
        };
        let swapped: Vec<Value> = self
            .atoms
            .iter()
            .filter(|a| a.swap.iter().any(|&s| s))
            .map(|a| {
                json!({
                    "atom": a.label,
                    "outcomes": self.outcomes.iter().zip(&a.swap).filter(|p| *p.1).map(|p| p.0).collect::<Vec<_>>(),
                })
            })
            .collect();
        v["swapped"] = json!(swapped);
        v["seed"] = json!(self.seed);
        v
    }

    fn size(&self) -> (usize, usize) {
        (self.atoms.len(), self.outcomes.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(suite: Suite, trials: usize) -> SuiteConfig {
        SuiteConfig {
            seed: 3,
            trials,
            execution: Execution::Sequential,
            ..SuiteConfig::defaults(suite)
        }
    }

    #[test]
    fn clean_runs_pass() {
        for suite in Suite::ALL {
            let r = run_suite(suite, &quick(suite, 10)).unwrap();
            assert!(r.passed(), "{suite}: {:?}", r.failures);
            assert!(r.cases_run >= 10);
        }
    }

    #[test]
    fn every_suite_catches_its_fault() {
        for suite in Suite::ALL {
            let cfg = SuiteConfig {
                fault: Some(Fault::default_for(suite)),
                ..quick(suite, 3)
            };
            let r = run_suite(suite, &cfg).unwrap();
            assert_eq!(r.failures.len(), 1, "{suite}: {:?}", r.failures);
            assert_eq!(r.failures[0].trial, 0);
            assert_eq!(r.failures[0].witness_atoms, 1, "{suite}: {:?}", r.failures[0]);
        }
    }

    #[test]
    fn swapped_utility_shrinks_to_two_values() {
        let cfg = SuiteConfig {
            fault: Some(Fault::SwappedPair),
            ..quick(Suite::Representation, 1)
        };
        let f = &run_suite(Suite::Representation, &cfg).unwrap().failures[0];
        assert_eq!((f.kind.as_str(), f.witness_atoms, f.witness_values), ("iff", 1, 2));
    }

    fn shrunk_case_still_fails<C: Case>(case: C) {
        let kind = case.check().unwrap_err().kind;
        let (small, last, _) = shrink(case, kind);
        assert_eq!(last.kind, kind);
        assert_eq!(small.check().unwrap_err(), last);
        for cand in small.shrink() {
            assert!(cand.check().map_err(|f| f.kind) != Err(kind), "shrinking stopped early");
        }
    }

    #[test]
    fn shrinking_is_sound_and_locally_minimal() {
        for seed in 0..5 {
            let mut r = rng(seed);
            for suite in [Suite::Representation, Suite::UscUpgrade, Suite::Axioms] {
                let cfg = quick(suite, 1);
                shrunk_case_still_fails(RankedCase::draw(&mut r, seed, suite, &cfg, Some(Fault::default_for(suite))));
            }
            let cfg = quick(Suite::GapShapes, 1);
            shrunk_case_still_fails(IntervalCase::draw(&mut r, seed, &cfg, Some(Fault::WrongGapFlag)));
            let cfg = quick(Suite::VnmRecovery, 1);
            shrunk_case_still_fails(VnmCase::draw(&mut r, seed, &cfg, Some(Fault::SwappedPair)));
            let cfg = quick(Suite::BooleanLaws, 1);
            shrunk_case_still_fails(BoolCase::draw(&mut r, seed, &cfg, Some(Fault::FlippedMemberBit)));
        }
    }

    #[test]
    fn failures_replay_from_their_seed() {
        let cfg = SuiteConfig {
            fault: Some(Fault::WrongGapFlag),
            ..quick(Suite::GapShapes, 4)
        };
        let report = run_suite(Suite::GapShapes, &cfg).unwrap();
        let again = replay_trial(Suite::GapShapes, &cfg, 0).unwrap().unwrap();
        assert_eq!(report.failures[0], again);
    }

    #[test]
    fn misapplied_fault_is_a_config_error() {
        let cfg = SuiteConfig {
            fault: Some(Fault::WrongGapFlag),
            ..quick(Suite::Axioms, 1)
        };
        assert!(matches!(run_suite(Suite::Axioms, &cfg), Err(Error::Config(_))));
        assert!("nope".parse::<Suite>().is_err());
    }
}
