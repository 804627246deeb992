//! Seeded random instances.
//!
//! All randomness comes from `ChaCha8Rng`, seeded with `seed_from_u64`, so
//! an instance is a pure function of its [`InstanceSpec`] on every platform.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::condcore::Ground;
use crate::error::{Error, Result};
use crate::events::{Algebra, DEFAULT_ATOM_LIMIT};
use crate::preference::{ConditionalPreference, RelationGraph};
use crate::rational::{rat, Rational};
use crate::vnm::{Lexicographic, PlantedEu, PreferenceOracle, RankDependent, UtilityIndex};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of trial `i` of a run seeded with `base`.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    let mut r = ChaCha8Rng::seed_from_u64(base);
    r.set_stream(trial as u64 + 1);
    r.gen()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub seed: u64,
    pub atoms: usize,
    pub min_values: usize,
    pub max_values: usize,
    pub tie_probability: f64,
    /// Number of lottery outcomes; 0 for instances without a planted index.
    pub lottery_outcomes: usize,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            atoms: 2,
            min_values: 2,
            max_values: 4,
            tie_probability: 0.3,
            lottery_outcomes: 0,
        }
    }
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(1..=DEFAULT_ATOM_LIMIT).contains(&self.atoms) {
            return Err(Error::Config(format!(
                "atoms must lie in [1, {DEFAULT_ATOM_LIMIT}], got {}",
                self.atoms
            )));
        }
        if self.min_values == 0 || self.min_values > self.max_values {
            return Err(Error::Config(format!(
                "bad value range {}..={}",
                self.min_values, self.max_values
            )));
        }
        if self.max_values > crate::condcore::MAX_VALUES_PER_ATOM {
            return Err(Error::Config("at most 64 values per atom".into()));
        }
        if !(0.0..=1.0).contains(&self.tie_probability) {
            return Err(Error::Config("tie probability must lie in [0,1]".into()));
        }
        if self.lottery_outcomes == 1 {
            return Err(Error::Config("lotteries need at least two outcomes".into()));
        }
        if self.max_values < 2 {
            return Err(Error::Config(
                "a non-trivial preference needs two values at some atom".into(),
            ));
        }
        Ok(())
    }
}

/// Which comparison the lottery oracle of an instance uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    #[default]
    Planted,
    Lexicographic,
    RankDependent,
}

/// Everything an instance file can carry.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub algebra: Algebra,
    pub ground: Option<Ground>,
    pub preference: Option<ConditionalPreference>,
    pub relation: Option<RelationGraph>,
    pub outcomes: Option<Arc<[String]>>,
    pub planted_index: Option<UtilityIndex>,
    pub oracle: OracleKind,
}

impl Instance {
    pub fn require_ground(&self) -> Result<&Ground> {
        self.ground
            .as_ref()
            .ok_or_else(|| Error::Malformed("instance has no ground sets".into()))
    }

    pub fn require_outcomes(&self) -> Result<&Arc<[String]>> {
        self.outcomes
            .as_ref()
            .ok_or_else(|| Error::Malformed("instance has no lottery outcomes".into()))
    }

    /// The lottery oracle described by the instance. Lexicographic oracles
    /// rank by the listed outcome order; the others need a planted index.
    pub fn oracle(&self) -> Result<Box<dyn PreferenceOracle>> {
        let outcomes = self.require_outcomes()?;
        let index = || {
            self.planted_index
                .clone()
                .ok_or_else(|| Error::Malformed("oracle needs a planted_index".into()))
        };
        Ok(match self.oracle {
            OracleKind::Planted => Box::new(PlantedEu { index: index()? }),
            OracleKind::RankDependent => Box::new(RankDependent { index: index()? }),
            OracleKind::Lexicographic => Box::new(Lexicographic {
                priority: (0..outcomes.len()).collect(),
            }),
        })
    }

    pub fn require_preference(&self) -> Result<&ConditionalPreference> {
        self.preference
            .as_ref()
            .ok_or_else(|| Error::Malformed("instance has no ground sets and ranking".into()))
    }
}

/// Random tie-groups over `n` values: a shuffled order where each value
/// joins the previous group with probability `tie`.
pub fn random_groups(rng: &mut Rng64, n: usize, tie: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for v in order {
        match groups.last_mut() {
            Some(g) if rng.gen_bool(tie) => g.push(v),
            _ => groups.push(vec![v]),
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups
}

/// Splits the last value of some multi-value group into its own group so
/// the preference has a strict pair.
pub fn force_nontrivial(groups: &mut [Vec<Vec<usize>>]) -> bool {
    if groups.iter().any(|g| g.len() >= 2) {
        return true;
    }
    for g in groups.iter_mut() {
        if g[0].len() >= 2 {
            let v = g[0].pop().unwrap();
            g.push(vec![v]);
            return true;
        }
    }
    false
}

/// A random rational in `[0,1]` with denominator at most 12.
pub fn random_unit_rational(rng: &mut Rng64) -> Rational {
    let den: i64 = rng.gen_range(1..=12);
    rat(rng.gen_range(0..=den), den)
}

/// A planted index whose rows each contain a strict pair.
pub fn random_index(rng: &mut Rng64, atoms: usize, outcomes: usize) -> Vec<Vec<Rational>> {
    (0..atoms)
        .map(|_| {
            let mut row: Vec<Rational> = (0..outcomes).map(|_| random_unit_rational(rng)).collect();
            if row.iter().all(|q| q == &row[0]) {
                let i = rng.gen_range(0..outcomes);
                let j = (i + 1 + rng.gen_range(0..outcomes - 1)) % outcomes;
                row[i] = rat(0, 1);
                row[j] = rat(1, 1);
            }
            row
        })
        .collect()
}

pub fn outcome_labels(n: usize) -> Arc<[String]> {
    (0..n).map(|i| format!("o{i}")).collect::<Vec<_>>().into()
}

/// Builds an instance deterministically from its spec.
pub fn generate(spec: &InstanceSpec) -> Result<Instance> {
    spec.validate()?;
    let mut r = rng(spec.seed);
    let labels: Vec<String> = (0..spec.atoms).map(|i| format!("w{i}")).collect();
    let algebra = Algebra::new(&labels)?;
    let sizes: Vec<usize> = (0..spec.atoms)
        .map(|_| r.gen_range(spec.min_values..=spec.max_values))
        .collect();
    let values: Vec<Vec<String>> = sizes
        .iter()
        .map(|&n| (0..n).map(|j| format!("v{j}")).collect())
        .collect();
    let ground = Ground::new(algebra.clone(), values)?;
    let mut groups: Vec<Vec<Vec<usize>>> = sizes
        .iter()
        .map(|&n| random_groups(&mut r, n, spec.tie_probability))
        .collect();
    if !force_nontrivial(&mut groups) {
        return Err(Error::Config(
            "every atom drew a single value; widen the value range".into(),
        ));
    }
    let preference = ConditionalPreference::new(ground.clone(), groups)?;
    let (outcomes, planted_index) = if spec.lottery_outcomes >= 2 {
        let os = outcome_labels(spec.lottery_outcomes);
        let rows = random_index(&mut r, spec.atoms, spec.lottery_outcomes);
        (Some(os.clone()), Some(UtilityIndex::new(os, rows)?))
    } else {
        (None, None)
    };
    Ok(Instance {
        algebra,
        ground: Some(ground),
        preference: Some(preference),
        relation: None,
        outcomes,
        planted_index,
        oracle: OracleKind::Planted,
    })
}

/// The two-atom, two-value instance with walk preferred when sunny and the
/// museum otherwise.
pub fn walk_museum() -> Instance {
    let algebra = Algebra::new(&["sunny", "not_sunny"]).expect("two labels");
    let ground = Ground::uniform(algebra.clone(), &["walk", "museum"]).expect("two values");
    let preference = ConditionalPreference::from_labels(
        ground.clone(),
        &[vec![vec!["walk"], vec!["museum"]], vec![vec!["museum"], vec!["walk"]]],
        false,
    )
    .expect("valid ranking");
    Instance {
        algebra,
        ground: Some(ground),
        preference: Some(preference),
        relation: None,
        outcomes: None,
        planted_index: None,
        oracle: OracleKind::Planted,
    }
}
