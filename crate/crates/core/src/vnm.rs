//! Conditional lotteries and expected-utility extraction.
//!
//! The preference on lotteries is an opaque [`PreferenceOracle`]. From it,
//! [`calibrate_alpha`] finds the mixture weight that makes a lottery
//! indifferent to a mixture of two anchors, by a bisection run on all atoms
//! at once. [`utility_index`] anchors on the best and worst point masses of
//! each atom and calibrates every point mass in between.

use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::condcore::CondRational;
use crate::error::{Error, Result};
use crate::events::{Algebra, Event};
use crate::par::{self, Execution};
use crate::preference::TriPartition;
use crate::rational::{dyadic, format, half, one, zero, Rational};

/// A probability mass function over a shared outcome list, per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalLottery {
    algebra: Algebra,
    outcomes: Arc<[String]>,
    pmf: Vec<Vec<Rational>>,
}

impl ConditionalLottery {
    pub fn new(algebra: &Algebra, outcomes: Arc<[String]>, pmf: Vec<Vec<Rational>>) -> Result<Self> {
        if pmf.len() != algebra.atoms() {
            return Err(Error::Structural(format!(
                "mass functions for {} of {} atoms",
                pmf.len(),
                algebra.atoms()
            )));
        }
        for (a, p) in pmf.iter().enumerate() {
            if p.len() != outcomes.len() {
                return Err(Error::Structural(format!(
                    "atom `{}` has {} masses for {} outcomes",
                    algebra.label(a),
                    p.len(),
                    outcomes.len()
                )));
            }
            if p.iter().any(Signed::is_negative) {
                return Err(Error::Domain(format!("negative mass at atom `{}`", algebra.label(a))));
            }
            if p.iter().fold(zero(), |s, q| s + q) != one() {
                return Err(Error::Domain(format!(
                    "masses at atom `{}` do not sum to 1",
                    algebra.label(a)
                )));
            }
        }
        Ok(Self {
            algebra: algebra.clone(),
            outcomes,
            pmf,
        })
    }

    /// `δ_o` on every atom.
    pub fn point_mass(algebra: &Algebra, outcomes: Arc<[String]>, outcome: usize) -> Self {
        Self::point_masses(algebra, outcomes, &vec![outcome; algebra.atoms()])
    }

    /// `δ_{o(ω)}` at each atom `ω`.
    pub fn point_masses(algebra: &Algebra, outcomes: Arc<[String]>, per_atom: &[usize]) -> Self {
        let pmf = per_atom
            .iter()
            .map(|&o| {
                (0..outcomes.len())
                    .map(|i| if i == o { one() } else { zero() })
                    .collect()
            })
            .collect();
        Self {
            algebra: algebra.clone(),
            outcomes,
            pmf,
        }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn outcomes(&self) -> &Arc<[String]> {
        &self.outcomes
    }

    pub fn pmf(&self, atom: usize) -> &[Rational] {
        &self.pmf[atom]
    }

    pub fn mass(&self, atom: usize, outcome: usize) -> &Rational {
        &self.pmf[atom][outcome]
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch);
        }
        if self.outcomes != other.outcomes {
            return Err(Error::Structural("lotteries over different outcome lists".into()));
        }
        Ok(())
    }
}

/// `α μ + (1−α) ν`, atom by atom.
pub fn mix(alpha: &CondRational, mu: &ConditionalLottery, nu: &ConditionalLottery) -> Result<ConditionalLottery> {
    mu.compatible(nu)?;
    if !alpha.living().is_full() || alpha.atoms() != mu.algebra.atoms() {
        return Err(Error::Domain("mixture weight must live everywhere".into()));
    }
    for a in 0..alpha.atoms() {
        let w = alpha.at(a).unwrap();
        if w.is_negative() || w > &one() {
            return Err(Error::Domain(format!(
                "mixture weight {} at atom `{}` is outside [0,1]",
                format(w),
                mu.algebra.label(a)
            )));
        }
    }
    Ok(mix_unchecked(alpha, mu, nu))
}

fn mix_unchecked(alpha: &CondRational, mu: &ConditionalLottery, nu: &ConditionalLottery) -> ConditionalLottery {
    let pmf = (0..mu.pmf.len())
        .map(|a| {
            let w = alpha.at(a).unwrap();
            let w1 = one() - w;
            mu.pmf[a]
                .iter()
                .zip(&nu.pmf[a])
                .map(|(p, q)| w * p + &w1 * q)
                .collect()
        })
        .collect();
    ConditionalLottery {
        algebra: mu.algebra.clone(),
        outcomes: mu.outcomes.clone(),
        pmf,
    }
}

/// Mixture with the same weight on every atom.
pub fn mix_scalar(alpha: &Rational, mu: &ConditionalLottery, nu: &ConditionalLottery) -> Result<ConditionalLottery> {
    mix(&CondRational::constant(&mu.algebra, alpha.clone()), mu, nu)
}

/// A state-dependent utility `u(ω, o)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityIndex {
    outcomes: Arc<[String]>,
    u: Vec<Vec<Rational>>,
}

impl UtilityIndex {
    pub fn new(outcomes: Arc<[String]>, u: Vec<Vec<Rational>>) -> Result<Self> {
        if u.iter().any(|row| row.len() != outcomes.len()) {
            return Err(Error::Structural("one utility per outcome and atom expected".into()));
        }
        Ok(Self { outcomes, u })
    }

    pub fn outcomes(&self) -> &Arc<[String]> {
        &self.outcomes
    }

    pub fn atoms(&self) -> usize {
        self.u.len()
    }

    pub fn at(&self, atom: usize, outcome: usize) -> &Rational {
        &self.u[atom][outcome]
    }

    pub fn row(&self, atom: usize) -> &[Rational] {
        &self.u[atom]
    }

    /// `u(ω,o)` for one outcome as a conditional rational.
    pub fn outcome_values(&self, algebra: &Algebra, outcome: usize) -> CondRational {
        CondRational::from_fn(algebra, |a| self.u[a][outcome].clone())
    }
}

/// `∫ u(ω,x) μ(ω,dx)` atom by atom.
pub fn expected_utility(u: &UtilityIndex, mu: &ConditionalLottery) -> Result<CondRational> {
    if u.outcomes != mu.outcomes || u.atoms() != mu.algebra.atoms() {
        return Err(Error::Structural("utility index and lottery do not match".into()));
    }
    Ok(CondRational::from_fn(&mu.algebra, |a| {
        u.u[a]
            .iter()
            .zip(&mu.pmf[a])
            .fold(zero(), |s, (x, p)| s + x * p)
    }))
}

/// A preference on lotteries given by comparisons.
pub trait PreferenceOracle: Sync {
    fn compare(&self, x: &ConditionalLottery, y: &ConditionalLottery) -> TriPartition;

    /// Whether concurrent calls are allowed; serial oracles return false.
    fn concurrent(&self) -> bool {
        true
    }
}

fn partition_by_sign(algebra: &Algebra, diff: &CondRational) -> TriPartition {
    TriPartition {
        equiv: algebra.largest_event(|a| diff.at(a).unwrap().is_zero()),
        strict_first: algebra.largest_event(|a| diff.at(a).unwrap().is_positive()),
        strict_second: algebra.largest_event(|a| diff.at(a).unwrap().is_negative()),
    }
}

/// Expected utility under a hidden index.
#[derive(Debug, Clone)]
pub struct PlantedEu {
    pub index: UtilityIndex,
}

impl PreferenceOracle for PlantedEu {
    fn compare(&self, x: &ConditionalLottery, y: &ConditionalLottery) -> TriPartition {
        let ex = expected_utility(&self.index, x).expect("lottery matches the planted index");
        let ey = expected_utility(&self.index, y).expect("lottery matches the planted index");
        partition_by_sign(&x.algebra, &crate::condcore::q_sub(&ex, &ey))
    }
}

/// Ranks by the probability of the first outcome in `priority`, breaking
/// ties with the next one, and so on.
#[derive(Debug, Clone)]
pub struct Lexicographic {
    pub priority: Vec<usize>,
}

impl PreferenceOracle for Lexicographic {
    fn compare(&self, x: &ConditionalLottery, y: &ConditionalLottery) -> TriPartition {
        let alg = &x.algebra;
        let cmp = |a: usize| {
            self.priority
                .iter()
                .map(|&o| x.pmf[a][o].cmp(&y.pmf[a][o]))
                .find(|c| c.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        };
        TriPartition {
            equiv: alg.largest_event(|a| cmp(a).is_eq()),
            strict_first: alg.largest_event(|a| cmp(a).is_gt()),
            strict_second: alg.largest_event(|a| cmp(a).is_lt()),
        }
    }
}

/// Rank-dependent utility with probability distortion `w(p) = p²`:
/// outcomes are sorted from best to worst and each gets the weight
/// `w(P(at least as good)) − w(P(strictly better))`.
#[derive(Debug, Clone)]
pub struct RankDependent {
    pub index: UtilityIndex,
}

impl RankDependent {
    pub fn value(&self, x: &ConditionalLottery, atom: usize) -> Rational {
        let u = &self.index.u[atom];
        let mut order: Vec<usize> = (0..u.len()).collect();
        order.sort_by(|&i, &j| u[j].cmp(&u[i]));
        let mut above = zero();
        let mut total = zero();
        for o in order {
            let upto = &above + &x.pmf[atom][o];
            let weight = &upto * &upto - &above * &above;
            total += &u[o] * weight;
            above = upto;
        }
        total
    }
}

impl PreferenceOracle for RankDependent {
    fn compare(&self, x: &ConditionalLottery, y: &ConditionalLottery) -> TriPartition {
        let diff = CondRational::from_fn(&x.algebra, |a| self.value(x, a) - self.value(y, a));
        partition_by_sign(&x.algebra, &diff)
    }
}

/// Default bisection depth.
pub const DEFAULT_BITS: u32 = 30;

/// `α = sup{β ∈ [0,1] : y ≽ βx + (1−β)z}` per atom, to within `2^-bits`.
///
/// Requires `x ≽ y ≽ z` and `x ≻ z` everywhere. Returns exactly 1 where
/// `x ∼ y` and exactly 0 where `y ∼ z`; elsewhere the lower end of the
/// final bisection bracket, so `α ≤ α* < α + 2^-bits`.
pub fn calibrate_alpha(
    oracle: &dyn PreferenceOracle,
    x: &ConditionalLottery,
    y: &ConditionalLottery,
    z: &ConditionalLottery,
    bits: u32,
) -> Result<CondRational> {
    if bits == 0 {
        return Err(Error::Config("bisection needs at least one bit".into()));
    }
    x.compatible(y)?;
    x.compatible(z)?;
    let alg = &x.algebra;
    let xy = oracle.compare(x, y);
    let yz = oracle.compare(y, z);
    let xz = oracle.compare(x, z);
    if !xy.strict_second.is_empty() {
        return Err(Error::Ordering {
            event: xy.strict_second,
            detail: "the middle lottery beats the top anchor".into(),
        });
    }
    if !yz.strict_second.is_empty() {
        return Err(Error::Ordering {
            event: yz.strict_second,
            detail: "the bottom anchor beats the middle lottery".into(),
        });
    }
    if !xz.strict_first.is_full() {
        return Err(Error::Ordering {
            event: !xz.strict_first,
            detail: "the top anchor is not strictly preferred to the bottom anchor".into(),
        });
    }
    let top = xy.equiv;
    let bottom = yz.equiv;
    let open = !(top | bottom);
    let mut lo: Vec<Rational> = vec![zero(); alg.atoms()];
    let mut hi: Vec<Rational> = vec![one(); alg.atoms()];
    if !open.is_empty() {
        for _ in 0..bits {
            let mid = CondRational::from_fn(alg, |a| half(&(&lo[a] + &hi[a])));
            let m = mix_unchecked(&mid, x, z);
            let t = oracle.compare(y, &m);
            let keep = t.equiv | t.strict_first;
            for a in open.atoms() {
                let mv = mid.at(a).unwrap().clone();
                if keep.contains(a) {
                    lo[a] = mv;
                } else {
                    hi[a] = mv;
                }
            }
        }
    }
    Ok(CondRational::from_fn(alg, |a| {
        if top.contains(a) {
            one()
        } else if bottom.contains(a) {
            zero()
        } else {
            lo[a].clone()
        }
    }))
}

/// A sample violating independence: `x ≻ y` on `event` but the mixtures
/// with `z` fail to keep the strict preference there.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceViolation {
    pub sample: usize,
    pub event: Event,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IndependenceReport {
    pub checked: usize,
    pub violations: Vec<IndependenceViolation>,
}

impl IndependenceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub type IndependenceSample = (ConditionalLottery, ConditionalLottery, ConditionalLottery, Rational);

/// Checks `x ≻ y ⇒ αx + (1−α)z ≻ αy + (1−α)z` on the strict event.
pub fn check_independence(
    oracle: &dyn PreferenceOracle,
    samples: &[IndependenceSample],
) -> Result<IndependenceReport> {
    let mut report = IndependenceReport::default();
    for (i, (x, y, z, alpha)) in samples.iter().enumerate() {
        if !alpha.is_positive() || alpha > &one() {
            return Err(Error::Domain(format!(
                "sample {i}: mixture weight {} is outside ]0,1]",
                format(alpha)
            )));
        }
        let strict = oracle.compare(x, y).strict_first;
        report.checked += 1;
        if strict.is_empty() {
            continue;
        }
        let mixed = oracle.compare(&mix_scalar(alpha, x, z)?, &mix_scalar(alpha, y, z)?);
        let bad = strict - mixed.strict_first;
        if !bad.is_empty() {
            report.violations.push(IndependenceViolation { sample: i, event: bad });
        }
    }
    Ok(report)
}

/// Outcome of the Archimedean search for one sample.
#[derive(Debug, Clone, PartialEq)]
pub enum ArchimedeanOutcome {
    /// `αx + (1−α)z ≻ y ≻ βx + (1−β)z` everywhere.
    Witness { alpha: CondRational, beta: CondRational },
    /// No dyadic witness down to `2^-bits` on `event`. This is a failure at
    /// that resolution, not a proof that no witness exists.
    NotFound { event: Event, bits: u32 },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArchimedeanReport {
    pub outcomes: Vec<ArchimedeanOutcome>,
}

impl ArchimedeanReport {
    pub fn passed(&self) -> bool {
        self.outcomes
            .iter()
            .all(|o| matches!(o, ArchimedeanOutcome::Witness { .. }))
    }
}

/// Searches `α = 1 − 2^-k` and `β = 2^-k` for `k = 1..=bits`, taking the
/// first `k` that works at each atom.
pub fn check_archimedean(
    oracle: &dyn PreferenceOracle,
    samples: &[(ConditionalLottery, ConditionalLottery, ConditionalLottery)],
    bits: u32,
) -> Result<ArchimedeanReport> {
    let mut report = ArchimedeanReport::default();
    for (x, y, z) in samples {
        let alg = x.algebra.clone();
        let xy = oracle.compare(x, y);
        let yz = oracle.compare(y, z);
        if !xy.strict_first.is_full() {
            return Err(Error::Ordering {
                event: !xy.strict_first,
                detail: "sample needs x ≻ y everywhere".into(),
            });
        }
        if !yz.strict_first.is_full() {
            return Err(Error::Ordering {
                event: !yz.strict_first,
                detail: "sample needs y ≻ z everywhere".into(),
            });
        }
        let mut alpha: Vec<Option<Rational>> = vec![None; alg.atoms()];
        let mut beta: Vec<Option<Rational>> = vec![None; alg.atoms()];
        for k in 1..=bits {
            let a_k = one() - dyadic(k);
            let b_k = dyadic(k);
            if alpha.iter().any(Option::is_none) {
                let hit = oracle.compare(&mix_scalar(&a_k, x, z)?, y).strict_first;
                for a in hit.atoms() {
                    alpha[a].get_or_insert_with(|| a_k.clone());
                }
            }
            if beta.iter().any(Option::is_none) {
                let hit = oracle.compare(y, &mix_scalar(&b_k, x, z)?).strict_first;
                for a in hit.atoms() {
                    beta[a].get_or_insert_with(|| b_k.clone());
                }
            }
            if alpha.iter().chain(&beta).all(Option::is_some) {
                break;
            }
        }
        let missing = alg.largest_event(|a| alpha[a].is_none() || beta[a].is_none());
        report.outcomes.push(if missing.is_empty() {
            ArchimedeanOutcome::Witness {
                alpha: CondRational::from_fn(&alg, |a| alpha[a].clone().unwrap()),
                beta: CondRational::from_fn(&alg, |a| beta[a].clone().unwrap()),
            }
        } else {
            ArchimedeanOutcome::NotFound { event: missing, bits }
        });
    }
    Ok(report)
}

/// `U(z) = calibrate_alpha(best, z, worst)` for each probe.
pub fn affine_utility(
    oracle: &dyn PreferenceOracle,
    best: &ConditionalLottery,
    worst: &ConditionalLottery,
    probes: &[ConditionalLottery],
    bits: u32,
) -> Result<Vec<CondRational>> {
    let bw = oracle.compare(best, worst);
    if !bw.strict_first.is_full() {
        return Err(Error::Ordering {
            event: !bw.strict_first,
            detail: "best anchor is not strictly preferred to the worst anchor".into(),
        });
    }
    for (i, z) in probes.iter().enumerate() {
        let above = oracle.compare(z, best).strict_first;
        let below = oracle.compare(worst, z).strict_first;
        let outside = above | below;
        if !outside.is_empty() {
            return Err(Error::Domain(format!(
                "probe {i} leaves the range between the anchors on {outside}"
            )));
        }
    }
    let exec = if oracle.concurrent() {
        Execution::default()
    } else {
        Execution::Sequential
    };
    par::map(exec, probes, |z| calibrate_alpha(oracle, best, z, worst, bits))
        .into_iter()
        .collect()
}

/// Best and worst outcome per atom by a round-robin tournament of point
/// masses: each outcome scores the number of outcomes it weakly beats.
pub fn anchors(oracle: &dyn PreferenceOracle, algebra: &Algebra, outcomes: &Arc<[String]>) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = outcomes.len();
    if n == 0 {
        return Err(Error::Degenerate("no outcomes".into()));
    }
    let deltas: Vec<ConditionalLottery> = (0..n)
        .map(|o| ConditionalLottery::point_mass(algebra, outcomes.clone(), o))
        .collect();
    let mut score = vec![vec![0usize; n]; algebra.atoms()];
    for i in 0..n {
        for j in i + 1..n {
            let t = oracle.compare(&deltas[i], &deltas[j]);
            for a in (t.equiv | t.strict_first).atoms() {
                score[a][i] += 1;
            }
            for a in (t.equiv | t.strict_second).atoms() {
                score[a][j] += 1;
            }
        }
    }
    let best: Vec<usize> = score
        .iter()
        .map(|s| (0..n).max_by_key(|&o| (s[o], std::cmp::Reverse(o))).unwrap())
        .collect();
    let worst: Vec<usize> = score
        .iter()
        .map(|s| (0..n).min_by_key(|&o| (s[o], o)).unwrap())
        .collect();
    Ok((best, worst))
}

/// Recovers `u(ω,o)` normalized to 1 at each atom's best outcome and 0 at
/// its worst.
pub fn utility_index(
    oracle: &dyn PreferenceOracle,
    algebra: &Algebra,
    outcomes: &Arc<[String]>,
    bits: u32,
) -> Result<UtilityIndex> {
    let (best, worst) = anchors(oracle, algebra, outcomes)?;
    let b = ConditionalLottery::point_masses(algebra, outcomes.clone(), &best);
    let w = ConditionalLottery::point_masses(algebra, outcomes.clone(), &worst);
    let flat = !oracle.compare(&b, &w).strict_first;
    if !flat.is_empty() {
        return Err(Error::Degenerate(format!(
            "no strictly ranked pair of outcomes on {flat}"
        )));
    }
    let probes: Vec<ConditionalLottery> = (0..outcomes.len())
        .map(|o| ConditionalLottery::point_mass(algebra, outcomes.clone(), o))
        .collect();
    let values = affine_utility(oracle, &b, &w, &probes, bits)?;
    let u = (0..algebra.atoms())
        .map(|a| values.iter().map(|v| v.at(a).unwrap().clone()).collect())
        .collect();
    UtilityIndex::new(outcomes.clone(), u)
}

/// Agreement of a recovered index with the oracle on lottery pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pairs: usize,
    /// Atom comparisons whose expected-utility gap fell in the dead zone.
    pub ambiguous: usize,
    pub mismatches: usize,
}

/// Compares the sign of `EU(μ) − EU(ν)` with the oracle's verdict. Gaps no
/// larger than `2^(1−bits)` are treated as ties, since each recovered value
/// may be off by up to `2^-bits`.
pub fn validate_index(
    oracle: &dyn PreferenceOracle,
    index: &UtilityIndex,
    pairs: &[(ConditionalLottery, ConditionalLottery)],
    bits: u32,
) -> Result<ValidationReport> {
    let dead = dyadic(bits.saturating_sub(1));
    let mut report = ValidationReport::default();
    for (mu, nu) in pairs {
        let d = crate::condcore::q_sub(&expected_utility(index, mu)?, &expected_utility(index, nu)?);
        let t = oracle.compare(mu, nu);
        report.pairs += 1;
        for a in 0..mu.algebra.atoms() {
            let gap = d.at(a).unwrap();
            if gap.abs() <= dead {
                report.ambiguous += 1;
                continue;
            }
            let agrees = if gap.is_positive() {
                t.strict_first.contains(a)
            } else {
                t.strict_second.contains(a)
            };
            if !agrees {
                report.mismatches += 1;
            }
        }
    }
    Ok(report)
}

/// Result of fitting `U2 = a·U1 + b` per atom.
#[derive(Debug, Clone, PartialEq)]
pub enum AffineFit {
    Equivalent {
        a: CondRational,
        b: CondRational,
        max_deviation: Rational,
    },
    Mismatch {
        atom: usize,
        probe: usize,
        deviation: Rational,
    },
}

impl AffineFit {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, AffineFit::Equivalent { .. })
    }
}

/// Default fitting tolerance `4·2^-bits`.
pub fn default_tolerance(bits: u32) -> Rational {
    dyadic(bits) * Rational::from_integer(4.into())
}

/// Fits `a > 0` and `b` per atom from the probes with the smallest and
/// largest `U1`, then checks the remaining probes within `tolerance`.
pub fn affine_equivalence(u1: &[CondRational], u2: &[CondRational], tolerance: &Rational) -> Result<AffineFit> {
    if u1.len() != u2.len() || u1.len() < 2 {
        return Err(Error::Underdetermined(
            "affine fitting needs at least two probes on both sides".into(),
        ));
    }
    let m = u1[0].atoms();
    let mut a_vals = Vec::with_capacity(m);
    let mut b_vals = Vec::with_capacity(m);
    let mut worst = zero();
    for atom in 0..m {
        let v1: Vec<&Rational> = u1.iter().map(|u| u.at(atom).expect("probe lives everywhere")).collect();
        let v2: Vec<&Rational> = u2.iter().map(|u| u.at(atom).expect("probe lives everywhere")).collect();
        let lo = (0..v1.len()).min_by(|&i, &j| v1[i].cmp(v1[j])).unwrap();
        let hi = (0..v1.len()).max_by(|&i, &j| v1[i].cmp(v1[j])).unwrap();
        if v1[lo] == v1[hi] {
            return Err(Error::Underdetermined(format!(
                "all first-side values are equal at atom {atom}"
            )));
        }
        let a = (v2[hi] - v2[lo]) / (v1[hi] - v1[lo]);
        let b = v2[lo] - &a * v1[lo];
        if !a.is_positive() {
            return Ok(AffineFit::Mismatch {
                atom,
                probe: hi,
                deviation: (v2[hi] - v2[lo]).abs(),
            });
        }
        for p in 0..v1.len() {
            let dev = (&a * v1[p] + &b - v2[p]).abs();
            if &dev > tolerance {
                return Ok(AffineFit::Mismatch {
                    atom,
                    probe: p,
                    deviation: dev,
                });
            }
            if dev > worst {
                worst = dev;
            }
        }
        a_vals.push(a);
        b_vals.push(b);
    }
    let full = u1[0].living();
    Ok(AffineFit::Equivalent {
        a: CondRational::over(full, a_vals.into_iter().map(Some).collect())?,
        b: CondRational::over(full, b_vals.into_iter().map(Some).collect())?,
        max_deviation: worst,
    })
}

/// Per-atom values of an index, as one conditional rational per outcome.
pub fn index_as_probes(index: &UtilityIndex, algebra: &Algebra) -> Vec<CondRational> {
    (0..index.outcomes.len())
        .map(|o| index.outcome_values(algebra, o))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn outcomes(n: usize) -> Arc<[String]> {
        (0..n).map(|i| format!("o{i}")).collect::<Vec<_>>().into()
    }

    fn planted(rows: Vec<Vec<Rational>>) -> PlantedEu {
        let n = rows[0].len();
        PlantedEu {
            index: UtilityIndex::new(outcomes(n), rows).unwrap(),
        }
    }

    #[test]
    fn mix_cases() {
        let alg = Algebra::anonymous(2).unwrap();
        let os = outcomes(2);
        let da = ConditionalLottery::point_mass(&alg, os.clone(), 0);
        let db = ConditionalLottery::point_mass(&alg, os.clone(), 1);
        assert_eq!(mix_scalar(&one(), &da, &db).unwrap(), da);
        let m = mix_scalar(&rat(1, 2), &da, &db).unwrap();
        assert_eq!(m.pmf(1), &[rat(1, 2), rat(1, 2)]);
        let alpha = CondRational::everywhere(&alg, vec![one(), zero()]).unwrap();
        let c = mix(&alpha, &da, &db).unwrap();
        assert_eq!(c, ConditionalLottery::point_masses(&alg, os, &[0, 1]));
        assert!(mix_scalar(&int(2), &da, &db).is_err());
    }

    #[test]
    fn calibration_hits_planted_third() {
        let alg = Algebra::anonymous(1).unwrap();
        let o = planted(vec![vec![one(), rat(1, 3), zero()]]);
        let os = o.index.outcomes().clone();
        let x = ConditionalLottery::point_mass(&alg, os.clone(), 0);
        let y = ConditionalLottery::point_mass(&alg, os.clone(), 1);
        let z = ConditionalLottery::point_mass(&alg, os, 2);
        let a = calibrate_alpha(&o, &x, &y, &z, 30).unwrap();
        let err = (a.at(0).unwrap() - rat(1, 3)).abs();
        assert!(err <= dyadic(30));
        assert_eq!(calibrate_alpha(&o, &x, &x, &z, 30).unwrap().at(0), Some(&one()));
        assert_eq!(calibrate_alpha(&o, &x, &z, &z, 30).unwrap().at(0), Some(&zero()));
        assert!(matches!(
            calibrate_alpha(&o, &z, &y, &x, 30),
            Err(Error::Ordering { .. })
        ));
    }

    #[test]
    fn archimedean_witness_and_lexicographic_failure() {
        let alg = Algebra::anonymous(1).unwrap();
        let o = planted(vec![vec![one(), rat(1, 2), zero()]]);
        let os = o.index.outcomes().clone();
        let d = |k| ConditionalLottery::point_mass(&alg, os.clone(), k);
        let r = check_archimedean(&o, &[(d(0), d(1), d(2))], 30).unwrap();
        match &r.outcomes[0] {
            ArchimedeanOutcome::Witness { alpha, beta } => {
                assert_eq!(alpha.at(0), Some(&rat(3, 4)));
                assert_eq!(beta.at(0), Some(&rat(1, 4)));
            }
            other => panic!("unexpected {other:?}"),
        }
        let lex = Lexicographic { priority: vec![0, 1, 2] };
        let r = check_archimedean(&lex, &[(d(0), d(1), d(2))], 30).unwrap();
        assert!(matches!(r.outcomes[0], ArchimedeanOutcome::NotFound { bits: 30, .. }));
    }

    #[test]
    fn recovery_of_two_outcome_index() {
        let alg = Algebra::anonymous(2).unwrap();
        let o = planted(vec![vec![one(), zero()], vec![zero(), one()]]);
        let u = utility_index(&o, &alg, o.index.outcomes(), 30).unwrap();
        assert_eq!(u, o.index);
    }

    #[test]
    fn affine_fit_cases() {
        let alg = Algebra::anonymous(1).unwrap();
        let u1: Vec<CondRational> = [0, 1, 3]
            .iter()
            .map(|&v| CondRational::constant(&alg, int(v)))
            .collect();
        let tol = default_tolerance(30);
        match affine_equivalence(&u1, &u1, &tol).unwrap() {
            AffineFit::Equivalent { a, b, .. } => {
                assert_eq!(a.at(0), Some(&one()));
                assert_eq!(b.at(0), Some(&zero()));
            }
            m => panic!("{m:?}"),
        }
        let u2: Vec<CondRational> = u1.iter().map(|u| u.map(|_, q| int(2) * q + int(3))).collect();
        match affine_equivalence(&u1, &u2, &tol).unwrap() {
            AffineFit::Equivalent { a, b, .. } => {
                assert_eq!(a.at(0), Some(&int(2)));
                assert_eq!(b.at(0), Some(&int(3)));
            }
            m => panic!("{m:?}"),
        }
        let flat = vec![CondRational::constant(&alg, one()); 2];
        assert!(matches!(
            affine_equivalence(&flat, &flat, &tol),
            Err(Error::Underdetermined(_))
        ));
    }
}
