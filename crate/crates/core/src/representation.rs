//! Conditional numerical representations.
//!
//! Two constructions are provided. [`debreu_utility`] measures the strict
//! lower and upper contour sets with a strictly positive weight scheme.
//! [`rader_utility`] instead counts the base sets of a finite conditional
//! topology that fit inside the strict lower contour set, which requires the
//! preference to be upper semicontinuous for that topology.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::condcore::{check_locality, Act, CondRational, ConditionalSubset, Ground};
use crate::error::{Error, Result};
use crate::events::Event;
use crate::preference::{strictly_preferred_set, strictly_worse_set, ConditionalPreference};
use crate::rational::{dyadic, Rational};

/// Utility of every value at every atom. Acts are evaluated atom-wise, so a
/// table is a conditional function by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityTable {
    ground: Ground,
    values: Vec<Vec<Rational>>,
}

impl UtilityTable {
    pub fn new(ground: Ground, values: Vec<Vec<Rational>>) -> Result<Self> {
        if values.len() != ground.atoms()
            || values.iter().enumerate().any(|(a, v)| v.len() != ground.size(a))
        {
            return Err(Error::Structural(
                "utility table must cover every value of every atom".into(),
            ));
        }
        Ok(Self { ground, values })
    }

    pub fn ground(&self) -> &Ground {
        &self.ground
    }

    pub fn at(&self, atom: usize, value: usize) -> &Rational {
        &self.values[atom][value]
    }

    pub fn atom_values(&self, atom: usize) -> &[Rational] {
        &self.values[atom]
    }

    pub fn set(&mut self, atom: usize, value: usize, u: Rational) {
        self.values[atom][value] = u;
    }

    /// `U(x)` as a conditional rational on the living event of `x`.
    pub fn eval(&self, x: &Act) -> CondRational {
        x.map(|a, &v| self.values[a][v].clone())
    }

    /// `φ ∘ U` with an atom-dependent transform.
    pub fn compose<F: Fn(usize, &Rational) -> Rational>(&self, phi: F) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(a, vs)| vs.iter().map(|u| phi(a, u)).collect())
            .collect();
        Self {
            ground: self.ground.clone(),
            values,
        }
    }
}

/// Strictly positive weight per atom and value.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme {
    weights: Vec<Vec<Rational>>,
}

impl WeightScheme {
    /// Weights as given; positivity is checked by the constructions.
    pub fn new(ground: &Ground, weights: Vec<Vec<Rational>>) -> Result<Self> {
        if weights.len() != ground.atoms()
            || weights.iter().enumerate().any(|(a, w)| w.len() != ground.size(a))
        {
            return Err(Error::Structural("one weight per value and atom expected".into()));
        }
        Ok(Self { weights })
    }

    /// `2^-(k+1)` for the value at position `k` of each atom's ground set.
    pub fn dyadic(ground: &Ground) -> Self {
        Self {
            weights: (0..ground.atoms())
                .map(|a| (0..ground.size(a)).map(|k| dyadic(k as u32 + 1)).collect())
                .collect(),
        }
    }

    pub fn at(&self, atom: usize, value: usize) -> &Rational {
        &self.weights[atom][value]
    }

    pub fn set(&mut self, atom: usize, value: usize, w: Rational) {
        self.weights[atom][value] = w;
    }

    pub fn min_at(&self, atom: usize) -> &Rational {
        self.weights[atom].iter().min().expect("nonempty ground set")
    }

    pub fn validate(&self) -> Result<()> {
        for (a, ws) in self.weights.iter().enumerate() {
            if let Some(v) = ws.iter().position(|w| !w.is_positive()) {
                return Err(Error::Config(format!(
                    "weight of value {v} at atom {a} is not strictly positive"
                )));
            }
        }
        Ok(())
    }
}

/// `(Z⁻(x), Z⁺(x)) = ({z : x ≻ z}, {z : z ≻ x})` with `Z` the whole ambient set.
pub fn contour_sets(
    pref: &ConditionalPreference,
    x: &Act,
) -> Result<(ConditionalSubset, ConditionalSubset)> {
    Ok((strictly_worse_set(pref, x)?, strictly_preferred_set(pref, x)?))
}

/// `U(x) = μ(Z⁻(x)) − μ(Z⁺(x))`, where a subset living on `A` is measured
/// atom-wise on `A` and counts as 0 off `A`.
pub fn debreu_utility(pref: &ConditionalPreference, weights: &WeightScheme) -> Result<UtilityTable> {
    weights.validate()?;
    let ground = pref.ground();
    let values = (0..ground.atoms())
        .map(|a| {
            (0..ground.size(a))
                .map(|v| {
                    let mut u = Rational::zero();
                    for w in 0..ground.size(a) {
                        if pref.strictly_prefers(a, v, w) {
                            u += weights.at(a, w);
                        } else if pref.strictly_prefers(a, w, v) {
                            u -= weights.at(a, w);
                        }
                    }
                    u
                })
                .collect()
        })
        .collect();
    UtilityTable::new(ground.clone(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mismatch {
    /// `v ≽ w` but `U(v) < U(w)`.
    PreferredButLower,
    /// `U(v) ≥ U(w)` but `w ≻ v`.
    HigherButWorse,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub atom: usize,
    pub first: usize,
    pub second: usize,
    pub kind: Mismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RepresentationReport {
    pub counterexample: Option<Counterexample>,
    pub locality_violations: usize,
}

impl RepresentationReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none() && self.locality_violations == 0
    }
}

/// Checks `v ≽_ω w ⇔ U(v)(ω) ≥ U(w)(ω)` for all values and atoms, then
/// samples locality of `x ↦ U(x)` on acts glued along every event.
pub fn verify_representation(u: &UtilityTable, pref: &ConditionalPreference) -> RepresentationReport {
    let mut report = RepresentationReport::default();
    let ground = pref.ground();
    'scan: for a in 0..ground.atoms() {
        for v in 0..ground.size(a) {
            for w in 0..ground.size(a) {
                let weak = pref.weakly_prefers(a, v, w);
                let higher = u.at(a, v) >= u.at(a, w);
                if weak != higher {
                    report.counterexample = Some(Counterexample {
                        atom: a,
                        first: v,
                        second: w,
                        kind: if weak {
                            Mismatch::PreferredButLower
                        } else {
                            Mismatch::HigherButWorse
                        },
                    });
                    break 'scan;
                }
            }
        }
    }
    let alg = ground.algebra();
    let lowest = Act::from_fn(alg, |_| 0);
    let highest = Act::from_fn(alg, |a| ground.size(a) - 1);
    let samples: Vec<(Act, Act, Event)> = if alg.atoms() <= 8 {
        alg.all_events()
            .map(|e| (lowest.clone(), highest.clone(), e))
            .collect()
    } else {
        (0..alg.atoms())
            .map(|a| (lowest.clone(), highest.clone(), alg.atom(a)))
            .collect()
    };
    report.locality_violations = check_locality(|x| u.eval(x), &samples, |p, q| p == q)
        .map(|r| r.violations.len())
        .unwrap_or(usize::MAX);
    report
}

/// Whether `z` is order dense: for every `v ≻ w` at an atom some member `z`
/// of the subset there has `v ≽ z ≽ w`.
pub fn is_order_dense(pref: &ConditionalPreference, z: &ConditionalSubset) -> bool {
    let ground = pref.ground();
    (0..ground.atoms()).all(|a| atom_dense(pref, a, z.mask(a)))
}

fn atom_dense(pref: &ConditionalPreference, atom: usize, mask: u64) -> bool {
    // Only adjacent tie-groups matter: a member between two adjacent groups
    // also lies between any wider pair.
    (0..pref.tiers(atom).saturating_sub(1)).all(|g| {
        pref.groups(atom)[g]
            .iter()
            .chain(&pref.groups(atom)[g + 1])
            .any(|&z| mask & (1 << z) != 0)
    })
}

/// A greedily minimal order dense subset: values are dropped in ground-set
/// order as long as density survives.
pub fn order_dense_subset(pref: &ConditionalPreference) -> ConditionalSubset {
    let ground = pref.ground();
    let masks: Vec<u64> = (0..ground.atoms())
        .map(|a| {
            let mut mask = ground.full_mask(a);
            for v in 0..ground.size(a) {
                let trial = mask & !(1 << v);
                // Keep one value per atom so the subset lives everywhere.
                if trial != 0 && atom_dense(pref, a, trial) {
                    mask = trial;
                }
            }
            mask
        })
        .collect();
    ConditionalSubset::from_masks(ground.algebra(), masks).expect("one mask per atom")
}

/// A finite base `O₁, …, O_k` of conditional subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteCondTopology {
    base: Vec<ConditionalSubset>,
}

impl FiniteCondTopology {
    pub fn new(ground: &Ground, base: Vec<ConditionalSubset>) -> Result<Self> {
        for (n, o) in base.iter().enumerate() {
            if o.living().tag() != ground.algebra().tag() {
                return Err(Error::AlgebraMismatch);
            }
            o.check_within(ground)
                .map_err(|e| Error::Domain(format!("base set {n}: {e}")))?;
        }
        Ok(Self { base })
    }

    /// Every single value at every atom.
    pub fn discrete(ground: &Ground) -> Self {
        let alg = ground.algebra();
        let base = (0..ground.atoms())
            .flat_map(|a| {
                (0..ground.size(a)).map(move |v| {
                    let mut masks = vec![0; alg.atoms()];
                    masks[a] = 1 << v;
                    ConditionalSubset::from_masks(alg, masks).unwrap()
                })
            })
            .collect();
        Self { base }
    }

    /// Only the ambient set.
    pub fn trivial(ground: &Ground) -> Self {
        Self {
            base: vec![ground.ambient()],
        }
    }

    /// The nonempty strict lower contour sets of each tier, one atom at a time.
    pub fn lower_contours(pref: &ConditionalPreference) -> Self {
        let ground = pref.ground();
        let alg = ground.algebra();
        let mut base = Vec::new();
        for a in 0..ground.atoms() {
            for g in 0..pref.tiers(a) {
                let mask = pref.groups(a)[g + 1..]
                    .iter()
                    .flatten()
                    .fold(0u64, |m, &v| m | (1 << v));
                if mask != 0 {
                    let mut masks = vec![0; alg.atoms()];
                    masks[a] = mask;
                    base.push(ConditionalSubset::from_masks(alg, masks).unwrap());
                }
            }
        }
        Self { base }
    }

    pub fn base(&self) -> &[ConditionalSubset] {
        &self.base
    }

    /// Default base weights `2^-(n+1)`.
    pub fn dyadic_weights(&self) -> Vec<Rational> {
        (0..self.base.len()).map(|n| dyadic(n as u32 + 1)).collect()
    }
}

/// Indices `n` with `O_n|{ω} ⊑ Z(x)` at `atom`, for a strict lower set
/// given as a mask.
fn inside(topo: &FiniteCondTopology, atom: usize, lower: u64) -> impl Iterator<Item = usize> + '_ {
    topo.base.iter().enumerate().filter_map(move |(n, o)| {
        let m = o.mask(atom);
        (m != 0 && m & !lower == 0).then_some(n)
    })
}

/// `U(x) = μ({n : O_n|A ⊑ Z(x)})` with `Z(x) = {z : x ≻ z}`.
///
/// Fails with a precondition error unless every `Z(x)` is open, i.e. each
/// of its values lies in some base set contained in it.
pub fn rader_utility(
    pref: &ConditionalPreference,
    topo: &FiniteCondTopology,
    weights: &[Rational],
) -> Result<UtilityTable> {
    if weights.len() != topo.base.len() {
        return Err(Error::Config(format!(
            "{} weights for {} base sets",
            weights.len(),
            topo.base.len()
        )));
    }
    if let Some(n) = weights.iter().position(|w| !w.is_positive()) {
        return Err(Error::Config(format!("base weight {n} is not strictly positive")));
    }
    let ground = pref.ground();
    let alg = ground.algebra();
    let mut values = Vec::with_capacity(ground.atoms());
    for a in 0..ground.atoms() {
        let mut row = Vec::with_capacity(ground.size(a));
        for v in 0..ground.size(a) {
            let lower = (0..ground.size(a))
                .filter(|&w| pref.strictly_prefers(a, v, w))
                .fold(0u64, |m, w| m | (1 << w));
            let covered = inside(topo, a, lower).fold(0u64, |m, n| m | topo.base[n].mask(a));
            if covered != lower {
                let gap = (lower & !covered).trailing_zeros() as usize;
                return Err(Error::Precondition(format!(
                    "preference is not upper semicontinuous: at atom `{}` the values below `{}` \
                     are not open, no base set around `{}` fits inside them",
                    alg.label(a),
                    ground.values(a)[v],
                    ground.values(a)[gap]
                )));
            }
            row.push(
                inside(topo, a, lower)
                    .map(|n| weights[n].clone())
                    .fold(Rational::zero(), |s, w| s + w),
            );
        }
        values.push(row);
    }
    let table = UtilityTable::new(ground.clone(), values)?;
    let report = verify_representation(&table, pref);
    if !report.passed() {
        return Err(Error::Structural(format!(
            "constructed utility fails to represent the preference: {report:?}"
        )));
    }
    Ok(table)
}

/// The smallest difference `U(v) − U(w)` over strict pairs `v ≻ w` at an
/// atom, or `None` without strict pairs.
pub fn min_strict_margin(u: &UtilityTable, pref: &ConditionalPreference, atom: usize) -> Option<Rational> {
    let n = pref.ground().size(atom);
    let mut best: Option<Rational> = None;
    for v in 0..n {
        for w in 0..n {
            if pref.strictly_prefers(atom, v, w) {
                let d = u.at(atom, v) - u.at(atom, w);
                if best.as_ref().is_none_or(|b| &d < b) {
                    best = Some(d);
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::Algebra;
    use crate::rational::{int, rat};

    fn walk_museum() -> ConditionalPreference {
        let alg = Algebra::new(&["sunny", "not_sunny"]).unwrap();
        let ground = Ground::uniform(alg, &["walk", "museum"]).unwrap();
        ConditionalPreference::from_labels(
            ground,
            &[vec![vec!["walk"], vec!["museum"]], vec![vec!["museum"], vec!["walk"]]],
            false,
        )
        .unwrap()
    }

    #[test]
    fn two_value_debreu() {
        let alg = Algebra::anonymous(1).unwrap();
        let g = Ground::uniform(alg, &["a", "b"]).unwrap();
        let p = ConditionalPreference::new(g.clone(), vec![vec![vec![0], vec![1]]]).unwrap();
        let u = debreu_utility(&p, &WeightScheme::dyadic(&g)).unwrap();
        assert_eq!(u.at(0, 0), &rat(1, 4));
        assert_eq!(u.at(0, 1), &rat(-1, 2));
    }

    #[test]
    fn tied_atom_is_zero() {
        let alg = Algebra::anonymous(2).unwrap();
        let g = Ground::uniform(alg, &["a", "b", "c"]).unwrap();
        let p = ConditionalPreference::new(g.clone(), vec![vec![vec![0, 1, 2]], vec![vec![2], vec![0, 1]]])
            .unwrap();
        let u = debreu_utility(&p, &WeightScheme::dyadic(&g)).unwrap();
        assert!(u.atom_values(0).iter().all(Zero::is_zero));
    }

    #[test]
    fn walk_museum_debreu_and_contours() {
        let p = walk_museum();
        let g = p.ground();
        let u = debreu_utility(&p, &WeightScheme::dyadic(g)).unwrap();
        assert!(verify_representation(&u, &p).passed());
        assert!(u.at(0, 0) > u.at(0, 1));
        assert!(u.at(1, 0) < u.at(1, 1));
        let museum = g.constant_act("museum").unwrap();
        let (_, plus) = contour_sets(&p, &museum).unwrap();
        assert_eq!(plus.living(), g.algebra().atom(0));
        assert_eq!(plus.members_at(0), vec![0]);
    }

    #[test]
    fn nonpositive_weight_is_rejected() {
        let p = walk_museum();
        let mut w = WeightScheme::dyadic(p.ground());
        w.set(1, 0, int(-1));
        assert!(matches!(debreu_utility(&p, &w), Err(Error::Config(_))));
    }

    #[test]
    fn constant_utility_fails() {
        let p = walk_museum();
        let u = UtilityTable::new(p.ground().clone(), vec![vec![int(0); 2]; 2]).unwrap();
        let r = verify_representation(&u, &p);
        assert!(r.counterexample.is_some());
    }

    #[test]
    fn rader_topologies() {
        let p = walk_museum();
        let g = p.ground();
        let disc = FiniteCondTopology::discrete(g);
        let u = rader_utility(&p, &disc, &disc.dyadic_weights()).unwrap();
        assert!(verify_representation(&u, &p).passed());
        let triv = FiniteCondTopology::trivial(g);
        assert!(matches!(
            rader_utility(&p, &triv, &triv.dyadic_weights()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn dense_subset_of_two_tiers_needs_one_value() {
        let p = walk_museum();
        let z = order_dense_subset(&p);
        assert!(is_order_dense(&p, &z));
        assert_eq!(z.living(), p.ground().algebra().full());
        assert_eq!(z.members_at(0).len(), 1);
    }
}
