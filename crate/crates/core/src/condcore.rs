//! Conditional elements, conditional subsets and conditional arithmetic.
//!
//! Everything is atom-indexed. A [`CondElement`] carries a value on each
//! atom of its living event and nothing elsewhere; the element living on the
//! empty event is an ordinary value. Conditional subsets of a finite ground
//! structure are stored in product form (one value set per atom), which makes
//! them stable under concatenation without any closure computation.

use std::collections::BTreeMap;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{Algebra, Coarsening, Event};
use crate::rational::Rational;

/// Values of an element on the atoms of its living event.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CondElement<T> {
    living: Event,
    values: Vec<Option<T>>,
}

pub type CondRational = CondElement<Rational>;
pub type CondNatural = CondElement<u64>;
/// An act: a value index per atom into that atom's ground set.
pub type Act = CondElement<usize>;

impl<T: Clone> CondElement<T> {
    pub fn new(algebra: &Algebra, values: Vec<Option<T>>) -> Result<Self> {
        if values.len() != algebra.atoms() {
            return Err(Error::Structural(format!(
                "{} values for {} atoms",
                values.len(),
                algebra.atoms()
            )));
        }
        let living = algebra.largest_event(|a| values[a].is_some());
        Ok(Self { living, values })
    }

    /// Like [`CondElement::new`], with the algebra given by any of its events.
    pub fn over(event: Event, values: Vec<Option<T>>) -> Result<Self> {
        let full = event.whole();
        if values.len() != full.tag().atoms() {
            return Err(Error::Structural(format!(
                "{} values for {} atoms",
                values.len(),
                full.tag().atoms()
            )));
        }
        let living = (0..values.len())
            .filter(|&a| values[a].is_none())
            .fold(full, |e, a| e.without(a));
        Ok(Self { living, values })
    }

    /// An element living on the full event.
    pub fn everywhere(algebra: &Algebra, values: Vec<T>) -> Result<Self> {
        Self::new(algebra, values.into_iter().map(Some).collect())
    }

    pub fn from_fn<F: FnMut(usize) -> T>(algebra: &Algebra, mut f: F) -> Self {
        Self {
            living: algebra.full(),
            values: (0..algebra.atoms()).map(|a| Some(f(a))).collect(),
        }
    }

    pub fn constant(algebra: &Algebra, value: T) -> Self {
        Self::from_fn(algebra, |_| value.clone())
    }

    /// The element living on the empty event.
    pub fn nowhere(algebra: &Algebra) -> Self {
        Self {
            living: algebra.empty(),
            values: vec![None; algebra.atoms()],
        }
    }

    pub fn living(&self) -> Event {
        self.living
    }

    pub fn at(&self, atom: usize) -> Option<&T> {
        self.values.get(atom).and_then(Option::as_ref)
    }

    pub fn values(&self) -> &[Option<T>] {
        &self.values
    }

    pub fn atoms(&self) -> usize {
        self.values.len()
    }

    /// Conditioning `x|A`; `A` must be contained in the living event.
    pub fn restrict(&self, event: Event) -> Result<Self> {
        if !event.same_algebra(&self.living) {
            return Err(Error::AlgebraMismatch);
        }
        if !event.is_subset(&self.living) {
            return Err(Error::Domain(format!(
                "cannot restrict an element living on {} to {event}",
                self.living
            )));
        }
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(a, v)| if event.contains(a) { v.clone() } else { None })
            .collect();
        Ok(Self {
            living: event,
            values,
        })
    }

    pub fn map<U, F: FnMut(usize, &T) -> U>(&self, mut f: F) -> CondElement<U> {
        CondElement {
            living: self.living,
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(a, v)| v.as_ref().map(|v| f(a, v)))
                .collect(),
        }
    }

    /// Atom-wise combination on the meet of both living events.
    pub fn zip_with<U, V, F>(&self, other: &CondElement<U>, mut f: F) -> CondElement<V>
    where
        U: Clone,
        F: FnMut(usize, &T, &U) -> V,
    {
        let living = self.living & other.living;
        CondElement {
            living,
            values: (0..self.values.len())
                .map(|a| match (self.at(a), other.at(a)) {
                    (Some(x), Some(y)) => Some(f(a, x, y)),
                    _ => None,
                })
                .collect(),
        }
    }

    /// Largest event on which `pred` holds (within the living event).
    pub fn event_where<F: Fn(&T) -> bool>(&self, pred: F) -> Event {
        let mut e = self.living;
        for a in self.living.atoms() {
            if !pred(self.values[a].as_ref().expect("living atom has a value")) {
                e = e.without(a);
            }
        }
        e
    }
}

/// Gluing `x₁|A₁ + … + xₖ|Aₖ` along pairwise disjoint events.
pub fn concatenate<T: Clone>(pieces: &[(Event, &CondElement<T>)]) -> Result<CondElement<T>> {
    let (first, _) = pieces
        .first()
        .ok_or_else(|| Error::Structural("nothing to concatenate".into()))?;
    let mut living = *first;
    let mut values: Vec<Option<T>> = vec![None; pieces[0].1.atoms()];
    for (i, (event, x)) in pieces.iter().enumerate() {
        if !event.same_algebra(&x.living) || !event.same_algebra(first) {
            return Err(Error::AlgebraMismatch);
        }
        if !event.is_subset(&x.living) {
            return Err(Error::Structural(format!(
                "piece {i} is conditioned on {event} but lives on {}",
                x.living
            )));
        }
        if i > 0 && !event.is_disjoint(&living) {
            return Err(Error::Structural(format!(
                "piece {i} on {event} overlaps earlier pieces"
            )));
        }
        living = living | *event;
        for a in event.atoms() {
            values[a] = x.values[a].clone();
        }
    }
    Ok(CondElement { living, values })
}

fn require_full<T>(q: &CondElement<T>) -> Result<()> {
    if q.living.is_full() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "conditional number lives on {} instead of everywhere",
            q.living
        )))
    }
}

pub fn q_add(q: &CondRational, r: &CondRational) -> CondRational {
    q.zip_with(r, |_, a, b| a + b)
}

pub fn q_sub(q: &CondRational, r: &CondRational) -> CondRational {
    q.zip_with(r, |_, a, b| a - b)
}

pub fn q_mul(q: &CondRational, r: &CondRational) -> CondRational {
    q.zip_with(r, |_, a, b| a * b)
}

pub fn q_neg(q: &CondRational) -> CondRational {
    q.map(|_, a| -a)
}

pub fn q_abs(q: &CondRational) -> CondRational {
    q.map(|_, a| a.abs())
}

/// Largest event on which `q ≤ r`.
pub fn q_leq(q: &CondRational, r: &CondRational) -> Event {
    let both = q.living & r.living;
    let mut e = both;
    for a in both.atoms() {
        if q.at(a) > r.at(a) {
            e = e.without(a);
        }
    }
    e
}

/// Largest event on which `q < r`.
pub fn q_lt(q: &CondRational, r: &CondRational) -> Event {
    let both = q.living & r.living;
    both - q_leq(r, q)
}

/// Whether two conditional numbers share the same value pattern.
pub fn q_eq(q: &CondRational, r: &CondRational) -> bool {
    q == r
}

/// Evaluates a conditional sequence `(z₁, z₂, …)` at a conditional index:
/// `z_{n|A + m|Aᶜ} = zₙ|A + zₘ|Aᶜ`. Indices are 1-based.
pub fn seq_index<T: Clone>(seq: &[CondElement<T>], n: &CondNatural) -> Result<CondElement<T>> {
    seq_index_from(seq, n, 1)
}

/// [`seq_index`] with an explicit index base (0 or 1).
pub fn seq_index_from<T: Clone>(
    seq: &[CondElement<T>],
    n: &CondNatural,
    base: u64,
) -> Result<CondElement<T>> {
    require_full(n)?;
    let mut levels: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for a in n.living.atoms() {
        levels.entry(*n.at(a).unwrap()).or_default().push(a);
    }
    let full = n.living;
    let mut pieces = Vec::with_capacity(levels.len());
    for (k, atoms) in &levels {
        let pos = k
            .checked_sub(base)
            .filter(|p| (*p as usize) < seq.len())
            .ok_or_else(|| Error::Domain(format!("sequence has no index {k}")))?;
        let event = atoms.iter().fold(full.none(), |e, &a| e.with(a));
        pieces.push((event, &seq[pos as usize]));
    }
    concatenate(&pieces)
}

/// A sampled locality failure: `f(x|A + y|Aᶜ)` and `f(x)|A + f(y)|Aᶜ`
/// disagree at `atom`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalityViolation {
    pub sample: usize,
    pub atom: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalityReport {
    pub checked: usize,
    pub violations: Vec<LocalityViolation>,
}

impl LocalityReport {
    pub fn is_local(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Tests `f(x|A + y|Aᶜ) = f(x)|A + f(y)|Aᶜ` on each sample `(x, y, A)`,
/// with `x, y` living everywhere and `f` mapping into the same algebra.
pub fn check_locality<T, V, F, E>(
    f: F,
    samples: &[(CondElement<T>, CondElement<T>, Event)],
    eq: E,
) -> Result<LocalityReport>
where
    T: Clone,
    V: Clone,
    F: Fn(&CondElement<T>) -> CondElement<V>,
    E: Fn(&V, &V) -> bool,
{
    locality_with(f, samples, Ok, eq)
}

/// Locality of a map from elements over the fine algebra of `nesting` to
/// elements over its coarse algebra. Sample events are coarse events; the
/// gluing happens on their preimages.
pub fn check_locality_nested<T, V, F, E>(
    f: F,
    nesting: &Coarsening,
    samples: &[(CondElement<T>, CondElement<T>, Event)],
    eq: E,
) -> Result<LocalityReport>
where
    T: Clone,
    V: Clone,
    F: Fn(&CondElement<T>) -> CondElement<V>,
    E: Fn(&V, &V) -> bool,
{
    locality_with(f, samples, |a| nesting.lift(a), eq)
}

fn locality_with<T, V, F, L, E>(
    f: F,
    samples: &[(CondElement<T>, CondElement<T>, Event)],
    lift: L,
    eq: E,
) -> Result<LocalityReport>
where
    T: Clone,
    V: Clone,
    F: Fn(&CondElement<T>) -> CondElement<V>,
    L: Fn(Event) -> Result<Event>,
    E: Fn(&V, &V) -> bool,
{
    let mut report = LocalityReport::default();
    for (i, (x, y, a)) in samples.iter().enumerate() {
        let fine = lift(*a)?;
        let glued = concatenate(&[(fine, x), (!fine, y)])?;
        let lhs = f(&glued);
        let (fx, fy) = (f(x), f(y));
        for atom in 0..lhs.atoms() {
            let rhs = if a.contains(atom) {
                fx.at(atom)
            } else {
                fy.at(atom)
            };
            let ok = match (lhs.at(atom), rhs) {
                (Some(l), Some(r)) => eq(l, r),
                (None, None) => true,
                _ => false,
            };
            if !ok {
                report.violations.push(LocalityViolation { sample: i, atom });
            }
        }
        report.checked += 1;
    }
    Ok(report)
}

/// Entropic certainty equivalent of a fine-algebra payoff conditioned on the
/// coarse algebra: on each block `b`,
/// `(1/γ) log( Σ_{ω∈b} p(ω) e^{γ x(ω)} / Σ_{ω∈b} p(ω) )`.
pub fn entropic_certainty_equivalent(
    nesting: &Coarsening,
    probs: &[f64],
    gamma: f64,
    x: &CondElement<f64>,
) -> Result<CondElement<f64>> {
    if probs.len() != nesting.fine().atoms() || probs.iter().any(|p| p.is_nan() || *p <= 0.0) {
        return Err(Error::Config(
            "one strictly positive probability per fine atom expected".into(),
        ));
    }
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(Error::Config("risk aversion must be finite and nonzero".into()));
    }
    require_full(x)?;
    let coarse = nesting.coarse();
    let values = (0..coarse.atoms())
        .map(|b| {
            let block = nesting.block(b);
            // Shift by the block maximum so large payoffs do not overflow.
            let shift = block
                .atoms()
                .map(|w| gamma * x.at(w).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            let (num, den) = block.atoms().fold((0.0, 0.0), |(n, d), w| {
                (n + probs[w] * (gamma * x.at(w).unwrap() - shift).exp(), d + probs[w])
            });
            ((num / den).ln() + shift) / gamma
        })
        .collect();
    CondElement::everywhere(coarse, values)
}

/// Per-atom ground sets of value labels: the ambient structure `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ground {
    algebra: Algebra,
    values: Vec<Vec<String>>,
}

/// Values per atom are stored as bits of a `u64`.
pub const MAX_VALUES_PER_ATOM: usize = 64;

impl Ground {
    pub fn new(algebra: Algebra, values: Vec<Vec<String>>) -> Result<Self> {
        if values.len() != algebra.atoms() {
            return Err(Error::Structural(format!(
                "ground sets given for {} of {} atoms",
                values.len(),
                algebra.atoms()
            )));
        }
        for (a, vs) in values.iter().enumerate() {
            if vs.is_empty() {
                return Err(Error::Structural(format!(
                    "atom `{}` has an empty ground set",
                    algebra.label(a)
                )));
            }
            if vs.len() > MAX_VALUES_PER_ATOM {
                return Err(Error::Config(format!(
                    "atom `{}` has more than {MAX_VALUES_PER_ATOM} values",
                    algebra.label(a)
                )));
            }
            for (i, v) in vs.iter().enumerate() {
                if vs[..i].contains(v) {
                    return Err(Error::Structural(format!(
                        "duplicate value `{v}` at atom `{}`",
                        algebra.label(a)
                    )));
                }
            }
        }
        Ok(Self { algebra, values })
    }

    /// The same labelled values on every atom.
    pub fn uniform<S: AsRef<str>>(algebra: Algebra, values: &[S]) -> Result<Self> {
        let vs: Vec<String> = values.iter().map(|v| v.as_ref().to_owned()).collect();
        let m = algebra.atoms();
        Self::new(algebra, vec![vs; m])
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn atoms(&self) -> usize {
        self.algebra.atoms()
    }

    pub fn values(&self, atom: usize) -> &[String] {
        &self.values[atom]
    }

    pub fn size(&self, atom: usize) -> usize {
        self.values[atom].len()
    }

    pub fn full_mask(&self, atom: usize) -> u64 {
        mask_of(self.size(atom))
    }

    pub fn value_index(&self, atom: usize, label: &str) -> Option<usize> {
        self.values[atom].iter().position(|v| v == label)
    }

    /// The whole ambient structure as a conditional subset.
    pub fn ambient(&self) -> ConditionalSubset {
        ConditionalSubset {
            living: self.algebra.full(),
            members: (0..self.atoms()).map(|a| self.full_mask(a)).collect(),
        }
    }

    /// Act taking the value `label` on every atom.
    pub fn constant_act(&self, label: &str) -> Result<Act> {
        let mut vals = Vec::with_capacity(self.atoms());
        for a in 0..self.atoms() {
            vals.push(self.value_index(a, label).ok_or_else(|| {
                Error::Domain(format!(
                    "value `{label}` is not in the ground set of atom `{}`",
                    self.algebra.label(a)
                ))
            })?);
        }
        Act::everywhere(&self.algebra, vals)
    }

    /// Act from one value label per atom.
    pub fn act<S: AsRef<str>>(&self, labels: &[S]) -> Result<Act> {
        if labels.len() != self.atoms() {
            return Err(Error::Structural("one value per atom expected".into()));
        }
        let mut vals = Vec::with_capacity(labels.len());
        for (a, l) in labels.iter().enumerate() {
            vals.push(self.value_index(a, l.as_ref()).ok_or_else(|| {
                Error::Domain(format!(
                    "value `{}` is not in the ground set of atom `{}`",
                    l.as_ref(),
                    self.algebra.label(a)
                ))
            })?);
        }
        Act::everywhere(&self.algebra, vals)
    }

    /// Checks that every value index of `x` is inside the ground sets.
    pub fn check_act(&self, x: &Act) -> Result<()> {
        if x.living().tag() != self.algebra.tag() {
            return Err(Error::AlgebraMismatch);
        }
        for a in x.living().atoms() {
            let v = *x.at(a).unwrap();
            if v >= self.size(a) {
                return Err(Error::Domain(format!(
                    "value index {v} outside the ground set of atom `{}`",
                    self.algebra.label(a)
                )));
            }
        }
        Ok(())
    }

    /// Labels of an act, keyed by atom label (only living atoms).
    pub fn act_labels(&self, x: &Act) -> BTreeMap<String, String> {
        x.living()
            .atoms()
            .map(|a| {
                (
                    self.algebra.label(a).to_owned(),
                    self.values[a][*x.at(a).unwrap()].clone(),
                )
            })
            .collect()
    }

    /// Every act living everywhere, in mixed-radix order.
    pub fn all_acts(&self) -> Vec<Act> {
        let m = self.atoms();
        let total: usize = (0..m).map(|a| self.size(a)).product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; m];
        for _ in 0..total {
            out.push(Act::everywhere(&self.algebra, idx.clone()).unwrap());
            for a in 0..m {
                idx[a] += 1;
                if idx[a] < self.size(a) {
                    break;
                }
                idx[a] = 0;
            }
        }
        out
    }
}

pub(crate) fn mask_of(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A conditional subset `Y ⊑ X` in product form: a nonempty value set on
/// every atom of its living event.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConditionalSubset {
    living: Event,
    members: Vec<u64>,
}

impl ConditionalSubset {
    /// Builds a subset from per-atom value bitmasks; it lives where the
    /// mask is nonempty.
    pub fn from_masks(algebra: &Algebra, members: Vec<u64>) -> Result<Self> {
        if members.len() != algebra.atoms() {
            return Err(Error::Structural("one mask per atom expected".into()));
        }
        let living = algebra.largest_event(|a| members[a] != 0);
        Ok(Self { living, members })
    }

    pub(crate) fn from_masks_unchecked(full: Event, members: Vec<u64>) -> Self {
        let mut living = full;
        for (a, m) in members.iter().enumerate() {
            if *m == 0 {
                living = living.without(a);
            }
        }
        Self { living, members }
    }

    pub fn nowhere(algebra: &Algebra) -> Self {
        Self {
            living: algebra.empty(),
            members: vec![0; algebra.atoms()],
        }
    }

    pub fn living(&self) -> Event {
        self.living
    }

    /// Value bitmask at an atom (zero off the living event).
    pub fn mask(&self, atom: usize) -> u64 {
        self.members[atom]
    }

    pub fn masks(&self) -> &[u64] {
        &self.members
    }

    pub fn members_at(&self, atom: usize) -> Vec<usize> {
        let m = self.members[atom];
        (0..64).filter(|i| m & (1 << i) != 0).collect()
    }

    /// Check that every mask stays inside `ground`.
    pub fn check_within(&self, ground: &Ground) -> Result<()> {
        for a in 0..ground.atoms() {
            if self.members[a] & !ground.full_mask(a) != 0 {
                return Err(Error::Domain(format!(
                    "subset leaves the ground set at atom `{}`",
                    ground.algebra().label(a)
                )));
            }
        }
        Ok(())
    }

    fn combine<F: Fn(u64, u64) -> u64>(&self, other: &Self, f: F) -> Self {
        let full = self.living.whole();
        assert!(
            full.same_algebra(&other.living),
            "conditional subsets of different algebras"
        );
        let members = self
            .members
            .iter()
            .zip(&other.members)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_masks_unchecked(full, members)
    }

    /// `Y ⊔ Z`: lives on the join, per-atom union on the overlap.
    pub fn union(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a | b)
    }

    /// `Y ⊓ Z`: lives on the largest event where the per-atom intersections
    /// are nonempty.
    pub fn intersection(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a & b)
    }

    /// `Y^⊏` relative to `ambient`: the elements that nowhere fall into `Y`.
    pub fn complement(&self, ambient: &Self) -> Self {
        ambient.combine(self, |x, y| x & !y)
    }

    /// Largest event on which the act `x` belongs to the subset.
    pub fn contains_act(&self, x: &Act) -> Event {
        let mut e = self.living & x.living();
        for a in e.atoms() {
            if self.members[a] & (1 << x.at(a).unwrap()) == 0 {
                e = e.without(a);
            }
        }
        e
    }

    /// Largest event within the living event of `self` on which `self` is
    /// included in `other`.
    pub fn included_in(&self, other: &Self) -> Event {
        let mut e = self.living;
        for a in self.living.atoms() {
            if self.members[a] & !other.members[a] != 0 {
                e = e.without(a);
            }
        }
        e
    }

    /// Restriction `Y|A` for `A` inside the living event.
    pub fn restrict(&self, event: Event) -> Result<Self> {
        if !event.is_subset(&self.living) {
            return Err(Error::Domain(format!(
                "cannot restrict a subset living on {} to {event}",
                self.living
            )));
        }
        let members = self
            .members
            .iter()
            .enumerate()
            .map(|(a, m)| if event.contains(a) { *m } else { 0 })
            .collect();
        Ok(Self {
            living: event,
            members,
        })
    }

    /// Labels per living atom.
    pub fn labels(&self, ground: &Ground) -> BTreeMap<String, Vec<String>> {
        self.living
            .atoms()
            .map(|a| {
                (
                    ground.algebra().label(a).to_owned(),
                    self.members_at(a)
                        .into_iter()
                        .map(|v| ground.values(a)[v].clone())
                        .collect(),
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn walk_museum() -> Ground {
        let alg = Algebra::new(&["sunny", "not_sunny"]).unwrap();
        Ground::uniform(alg, &["walk", "museum"]).unwrap()
    }

    #[test]
    fn restrict_cases() {
        let g = walk_museum();
        let alg = g.algebra().clone();
        let x = g.act(&["walk", "museum"]).unwrap();
        assert_eq!(x.restrict(x.living()).unwrap(), x);
        let none = x.restrict(alg.empty()).unwrap();
        assert!(none.living().is_empty());
        assert_eq!(none, Act::nowhere(&alg));
        let sunny = alg.atom(0);
        let r = x.restrict(sunny).unwrap();
        assert_eq!(r.at(0), Some(&0));
        assert_eq!(r.at(1), None);
        assert!(r.restrict(alg.full()).is_err());
    }

    #[test]
    fn concatenate_cases() {
        let g = walk_museum();
        let alg = g.algebra().clone();
        let x = g.act(&["walk", "museum"]).unwrap();
        assert_eq!(concatenate(&[(alg.full(), &x)]).unwrap(), x);
        let a = alg.atom(1);
        assert_eq!(concatenate(&[(a, &x), (!a, &x)]).unwrap(), x);
        let walk = g.constant_act("walk").unwrap();
        let museum = g.constant_act("museum").unwrap();
        let act = concatenate(&[(alg.atom(0), &walk), (alg.atom(1), &museum)]).unwrap();
        assert_eq!(act, x);
        assert!(matches!(
            concatenate(&[(alg.full(), &walk), (alg.atom(0), &museum)]),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn rational_examples() {
        let alg = Algebra::anonymous(2).unwrap();
        let a = alg.atom(0);
        let q = CondRational::everywhere(&alg, vec![int(3), rat(2, 5)]).unwrap();
        let zero = CondRational::constant(&alg, int(0));
        assert_eq!(q_add(&q, &zero), q);
        assert_eq!(q_abs(&q_neg(&q)), q);
        let x = CondRational::everywhere(&alg, vec![int(1), int(2)]).unwrap();
        let y = CondRational::everywhere(&alg, vec![int(2), int(1)]).unwrap();
        assert_eq!(q_add(&x, &y), CondRational::constant(&alg, int(3)));
        assert_eq!(q_leq(&x, &y), a);
        assert_eq!(q_lt(&x, &y), a);
        assert_eq!(q_leq(&x, &x), alg.full());
        assert_eq!(q_mul(&x, &y), CondRational::constant(&alg, int(2)));
        assert_eq!(q_sub(&x, &x), zero);
    }

    #[test]
    fn seq_index_cases() {
        let alg = Algebra::anonymous(3).unwrap();
        let seq: Vec<CondRational> = (1..=3)
            .map(|k| CondRational::from_fn(&alg, |a| int(10 * k + a as i64)))
            .collect();
        let n = CondNatural::constant(&alg, 2);
        assert_eq!(seq_index(&seq, &n).unwrap(), seq[1]);
        let n = CondNatural::everywhere(&alg, vec![1, 2, 2]).unwrap();
        let a = alg.atom(0);
        let expected = concatenate(&[(a, &seq[0]), (!a, &seq[1])]).unwrap();
        assert_eq!(seq_index(&seq, &n).unwrap(), expected);
        let bad = CondNatural::everywhere(&alg, vec![1, 4, 2]).unwrap();
        assert!(matches!(seq_index(&seq, &bad), Err(Error::Domain(_))));
        let zero = CondNatural::everywhere(&alg, vec![0, 1, 2]).unwrap();
        assert!(seq_index(&seq, &zero).is_err());
        assert_eq!(
            seq_index_from(&seq, &zero, 0).unwrap().at(0),
            seq[0].at(0)
        );
    }

    #[test]
    fn locality_identity_and_swap() {
        let alg = Algebra::anonymous(3).unwrap();
        let x = CondElement::everywhere(&alg, vec![1, 2, 3]).unwrap();
        let y = CondElement::everywhere(&alg, vec![4, 5, 6]).unwrap();
        let samples = vec![(x.clone(), y.clone(), alg.atom(0))];
        let id = check_locality(|e: &CondElement<i32>| e.clone(), &samples, |a, b| a == b).unwrap();
        assert!(id.is_local());
        let swap = |e: &CondElement<i32>| {
            let mut v: Vec<Option<i32>> = e.values().to_vec();
            v.swap(0, 1);
            CondElement::new(&alg, v).unwrap()
        };
        let rep = check_locality(swap, &samples, |a, b| a == b).unwrap();
        assert!(rep.violations.iter().any(|v| v.atom == 0));
        assert!(rep.violations.iter().all(|v| v.atom < 2));
    }

    #[test]
    fn entropic_utility_is_local() {
        let fine = Algebra::anonymous(8).unwrap();
        let coarse = Algebra::anonymous(3).unwrap();
        let nest = Coarsening::new(fine.clone(), coarse.clone(), vec![0, 0, 0, 1, 1, 2, 2, 2]).unwrap();
        let probs = [0.1, 0.2, 0.05, 0.15, 0.1, 0.2, 0.1, 0.1];
        let x = CondElement::everywhere(&fine, vec![1.0, -2.0, 3.5, 0.0, 4.0, -1.0, 2.0, 7.0]).unwrap();
        let y = CondElement::everywhere(&fine, vec![-3.0, 0.5, 1.0, 2.0, -4.0, 6.0, 0.0, 1.0]).unwrap();
        let f = |e: &CondElement<f64>| entropic_certainty_equivalent(&nest, &probs, 0.7, e).unwrap();
        let samples: Vec<_> = coarse
            .all_events()
            .map(|a| (x.clone(), y.clone(), a))
            .collect();
        let rep = check_locality_nested(f, &nest, &samples, |a, b| (a - b).abs() <= 1e-9).unwrap();
        assert_eq!(rep.checked, 8);
        assert!(rep.is_local(), "{rep:?}");
        // A certainty equivalent of a constant is that constant.
        let c = CondElement::constant(&fine, 2.5);
        let ce = f(&c);
        assert!((0..3).all(|b| (ce.at(b).unwrap() - 2.5).abs() < 1e-12));
    }

    #[test]
    fn subset_ops_examples() {
        let alg = Algebra::anonymous(2).unwrap();
        let g = Ground::uniform(alg.clone(), &["a", "b"]).unwrap();
        let x = g.ambient();
        let ya = ConditionalSubset::from_masks(&alg, vec![0b01, 0b01]).unwrap();
        let zb = ConditionalSubset::from_masks(&alg, vec![0b10, 0b10]).unwrap();
        assert_eq!(ya.intersection(&ya), ya);
        assert!(ya.intersection(&zb).living().is_empty());
        assert_eq!(ya.union(&zb), x);
        assert_eq!(ya.complement(&x), zb);
        assert_eq!(ya.complement(&x).complement(&x), ya);
        let only0 = ConditionalSubset::from_masks(&alg, vec![0b11, 0]).unwrap();
        assert_eq!(only0.living(), alg.atom(0));
        assert_eq!(only0.complement(&x).living(), alg.atom(1));
    }
}
