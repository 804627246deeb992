//! Conditional subsets of the conditional reals and their gaps.
//!
//! A [`ConditionalIntervalSet`] holds, per atom, a canonical list of
//! disjoint rational intervals. Gaps are the bounded pieces of the
//! complement between consecutive components; they are aligned across atoms
//! by component index. [`gap_normalize`] translates components so that no
//! gap keeps a closed or half-open shape, and [`midpoint_embedding`] is the
//! enumerative construction used to cross-check it on finite sets.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::condcore::{seq_index, CondNatural, CondRational};
use crate::error::{Error, Result};
use crate::events::{Algebra, Event};
use crate::preference::ConditionalPreference;
use crate::rational::{format, half, one, zero, Rational};
use crate::representation::{verify_representation, UtilityTable};

/// A rational or one of the two infinities.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtRational {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl ExtRational {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtRational::Finite(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRational::Finite(_))
    }

    pub fn shifted(&self, by: &Rational) -> Self {
        match self {
            ExtRational::Finite(q) => ExtRational::Finite(q + by),
            other => other.clone(),
        }
    }
}

impl From<Rational> for ExtRational {
    fn from(q: Rational) -> Self {
        ExtRational::Finite(q)
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::NegInf => f.write_str("-inf"),
            ExtRational::PosInf => f.write_str("+inf"),
            ExtRational::Finite(q) => f.write_str(&format(q)),
        }
    }
}

/// One of `[s,t]`, `[s,t[`, `]s,t]`, `]s,t[` or a point `{s}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalInterval {
    lo: ExtRational,
    hi: ExtRational,
    lo_closed: bool,
    hi_closed: bool,
}

impl RationalInterval {
    pub fn new(lo: ExtRational, hi: ExtRational, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        if lo > hi {
            return Err(Error::Malformed(format!("interval from {lo} to {hi} is reversed")));
        }
        if lo == ExtRational::PosInf || hi == ExtRational::NegInf {
            return Err(Error::Malformed("interval has no finite part".into()));
        }
        if (!lo.is_finite() && lo_closed) || (!hi.is_finite() && hi_closed) {
            return Err(Error::Malformed("infinite endpoints must be open".into()));
        }
        if lo == hi && !(lo_closed && hi_closed) {
            return Err(Error::Malformed(format!("degenerate interval at {lo} must be closed")));
        }
        Ok(Self {
            lo,
            hi,
            lo_closed,
            hi_closed,
        })
    }

    pub fn closed(lo: Rational, hi: Rational) -> Result<Self> {
        Self::new(lo.into(), hi.into(), true, true)
    }

    pub fn open(lo: Rational, hi: Rational) -> Result<Self> {
        Self::new(lo.into(), hi.into(), false, false)
    }

    pub fn point(q: Rational) -> Self {
        Self {
            lo: q.clone().into(),
            hi: q.into(),
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn real_line() -> Self {
        Self {
            lo: ExtRational::NegInf,
            hi: ExtRational::PosInf,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn lo(&self) -> &ExtRational {
        &self.lo
    }

    pub fn hi(&self) -> &ExtRational {
        &self.hi
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, q: &Rational) -> bool {
        let q = ExtRational::Finite(q.clone());
        let above = match self.lo.cmp(&q) {
            Ordering::Less => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Greater => false,
        };
        let below = match q.cmp(&self.hi) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_closed,
            Ordering::Greater => false,
        };
        above && below
    }

    pub fn translated(&self, by: &Rational) -> Self {
        Self {
            lo: self.lo.shifted(by),
            hi: self.hi.shifted(by),
            ..self.clone()
        }
    }

    /// Whether `self ∪ next` is an interval, given `self.lo ≤ next.lo`.
    fn joins(&self, next: &Self) -> bool {
        match next.lo.cmp(&self.hi) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_closed || next.lo_closed,
            Ordering::Greater => false,
        }
    }

    fn absorb(&mut self, next: &Self) {
        if next.lo == self.lo {
            self.lo_closed |= next.lo_closed;
        }
        match next.hi.cmp(&self.hi) {
            Ordering::Greater => {
                self.hi = next.hi.clone();
                self.hi_closed = next.hi_closed;
            }
            Ordering::Equal => self.hi_closed |= next.hi_closed,
            Ordering::Less => {}
        }
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            return write!(f, "{{{}}}", self.lo);
        }
        let l = if self.lo_closed { '[' } else { ']' };
        let r = if self.hi_closed { ']' } else { '[' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// Sorts and merges a list of intervals into disjoint, non-adjacent ones.
pub fn canonical_components(mut raw: Vec<RationalInterval>) -> Vec<RationalInterval> {
    raw.sort_by(|a, b| a.lo.cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
    let mut out: Vec<RationalInterval> = Vec::with_capacity(raw.len());
    for iv in raw {
        match out.last_mut() {
            Some(last) if last.joins(&iv) => last.absorb(&iv),
            _ => out.push(iv),
        }
    }
    out
}

/// A conditional subset `S ⊑ 𝐑`: canonical interval lists per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalIntervalSet {
    algebra: Algebra,
    components: Vec<Vec<RationalInterval>>,
}

/// Canonicalizes raw per-atom interval lists.
pub fn canonicalize(algebra: &Algebra, raw: Vec<Vec<RationalInterval>>) -> Result<ConditionalIntervalSet> {
    if raw.len() != algebra.atoms() {
        return Err(Error::Structural(format!(
            "interval lists for {} of {} atoms",
            raw.len(),
            algebra.atoms()
        )));
    }
    Ok(ConditionalIntervalSet {
        algebra: algebra.clone(),
        components: raw.into_iter().map(canonical_components).collect(),
    })
}

impl ConditionalIntervalSet {
    /// Finite point sets per atom.
    pub fn points(algebra: &Algebra, points: Vec<Vec<Rational>>) -> Result<Self> {
        canonicalize(
            algebra,
            points
                .into_iter()
                .map(|ps| ps.into_iter().map(RationalInterval::point).collect())
                .collect(),
        )
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn living(&self) -> Event {
        self.algebra.largest_event(|a| !self.components[a].is_empty())
    }

    pub fn components(&self, atom: usize) -> &[RationalInterval] {
        &self.components[atom]
    }

    pub fn contains(&self, atom: usize, q: &Rational) -> bool {
        self.components[atom].iter().any(|c| c.contains(q))
    }

    pub fn max_components(&self) -> usize {
        self.components.iter().map(Vec::len).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapShape {
    /// `[s,t]`
    Closed,
    /// `[s,t[`
    LeftClosed,
    /// `]s,t]`
    RightClosed,
    /// `]s,t[`
    Open,
    /// `{s}`
    Singleton,
}

impl GapShape {
    pub fn of(gap: &RationalInterval) -> Self {
        match (gap.is_point(), gap.lo_closed, gap.hi_closed) {
            (true, _, _) => GapShape::Singleton,
            (false, true, true) => GapShape::Closed,
            (false, true, false) => GapShape::LeftClosed,
            (false, false, true) => GapShape::RightClosed,
            (false, false, false) => GapShape::Open,
        }
    }

    /// Shapes permitted after normalization.
    pub fn is_normal(self) -> bool {
        matches!(self, GapShape::Open | GapShape::Singleton)
    }

    pub const ALL: [GapShape; 5] = [
        GapShape::Closed,
        GapShape::LeftClosed,
        GapShape::RightClosed,
        GapShape::Open,
        GapShape::Singleton,
    ];
}

/// The `index`-th gap of each atom, living where that gap exists.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRecord {
    pub index: usize,
    pub living: Event,
    pub intervals: Vec<Option<RationalInterval>>,
}

impl GapRecord {
    /// Largest event on which the gap has the given shape.
    pub fn shape_event(&self, shape: GapShape) -> Event {
        self.living
            .atoms()
            .filter(|&a| GapShape::of(self.intervals[a].as_ref().unwrap()) == shape)
            .fold(self.living.none(), |e, a| e.with(a))
    }

    pub fn shape_at(&self, atom: usize) -> Option<GapShape> {
        self.intervals[atom].as_ref().map(GapShape::of)
    }
}

fn gap_between(left: &RationalInterval, right: &RationalInterval) -> RationalInterval {
    RationalInterval {
        lo: left.hi.clone(),
        hi: right.lo.clone(),
        lo_closed: !left.hi_closed,
        hi_closed: !right.lo_closed,
    }
}

/// Gaps strictly between the infimum and supremum of each atom's set.
pub fn find_gaps(s: &ConditionalIntervalSet) -> Vec<GapRecord> {
    let count = s.max_components().saturating_sub(1);
    (0..count)
        .map(|i| {
            let intervals: Vec<Option<RationalInterval>> = s
                .components
                .iter()
                .map(|cs| (i + 1 < cs.len()).then(|| gap_between(&cs[i], &cs[i + 1])))
                .collect();
            GapRecord {
                index: i,
                living: s.algebra.largest_event(|a| intervals[a].is_some()),
                intervals,
            }
        })
        .collect()
}

/// One affine piece `x ↦ a·x + b` on a source component.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub source: RationalInterval,
    pub scale: Rational,
    pub offset: Rational,
}

impl Piece {
    pub fn apply(&self, q: &Rational) -> Rational {
        &self.scale * q + &self.offset
    }

    pub fn image(&self) -> RationalInterval {
        debug_assert!(self.scale == one());
        self.source.translated(&self.offset)
    }
}

/// Per-atom piecewise affine map covering the components of a set.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseMap {
    pieces: Vec<Vec<Piece>>,
}

impl PiecewiseMap {
    pub fn pieces(&self, atom: usize) -> &[Piece] {
        &self.pieces[atom]
    }

    pub fn pieces_mut(&mut self, atom: usize) -> &mut Vec<Piece> {
        &mut self.pieces[atom]
    }

    /// `g(q)` at an atom, if `q` is in the source set there.
    pub fn apply(&self, atom: usize, q: &Rational) -> Option<Rational> {
        self.pieces[atom]
            .iter()
            .find(|p| p.source.contains(q))
            .map(|p| p.apply(q))
    }

    /// Image of the source set, canonicalized.
    pub fn image(&self, algebra: &Algebra) -> ConditionalIntervalSet {
        ConditionalIntervalSet {
            algebra: algebra.clone(),
            components: self
                .pieces
                .iter()
                .map(|ps| canonical_components(ps.iter().map(Piece::image).collect()))
                .collect(),
        }
    }
}

/// Rigid translation of each component so that every gap of the image is
/// open or a singleton.
///
/// Components are scanned left to right with a running shift. A gap whose
/// two sides both belong to `S` is kept, which leaves it open. Otherwise the
/// next component is pulled left by the gap length: with one side attained
/// the two image components merge, with neither attained a singleton gap
/// remains.
pub fn gap_normalize(s: &ConditionalIntervalSet) -> (PiecewiseMap, ConditionalIntervalSet) {
    let pieces: Vec<Vec<Piece>> = s
        .components
        .iter()
        .map(|cs| {
            let mut shift = zero();
            let mut out = Vec::with_capacity(cs.len());
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    let prev = &cs[i - 1];
                    if !(prev.hi_closed && c.lo_closed) {
                        let len = c.lo.finite().expect("inner endpoint")
                            - prev.hi.finite().expect("inner endpoint");
                        shift -= len;
                    }
                }
                out.push(Piece {
                    source: c.clone(),
                    scale: one(),
                    offset: shift.clone(),
                });
            }
            out
        })
        .collect();
    let g = PiecewiseMap { pieces };
    let image = g.image(&s.algebra);
    (g, image)
}

/// `f` on a finite enumerated chain, built by the midpoint recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct MidpointEmbedding {
    chain: Vec<CondRational>,
    values: Vec<CondRational>,
}

/// `f(u₁) = 1/2` and `f(u_k) = (sup{f(u_l) : l<k, u_l<u_k} + inf{f(u_l) :
/// l<k, u_k<u_l}) / 2`, with `sup ∅ = 0` and `inf ∅ = 1`, evaluated per atom.
pub fn midpoint_embedding(chain: &[CondRational]) -> Result<MidpointEmbedding> {
    let first = chain
        .first()
        .ok_or_else(|| Error::Precondition("empty chain".into()))?;
    let m = first.atoms();
    for (k, u) in chain.iter().enumerate() {
        if !u.living().is_full() || !u.living().same_algebra(&first.living()) {
            return Err(Error::Precondition(format!(
                "chain element {} does not live everywhere",
                k + 1
            )));
        }
    }
    let mut per_atom: Vec<Vec<Rational>> = vec![Vec::with_capacity(chain.len()); m];
    for (a, fs) in per_atom.iter_mut().enumerate() {
        for k in 0..chain.len() {
            let uk = chain[k].at(a).unwrap();
            let mut lo = zero();
            let mut hi = one();
            for l in 0..k {
                let ul = chain[l].at(a).unwrap();
                match ul.cmp(uk) {
                    Ordering::Less => lo = lo.max(fs[l].clone()),
                    Ordering::Greater => hi = hi.min(fs[l].clone()),
                    Ordering::Equal => {
                        return Err(Error::Precondition(format!(
                            "elements {} and {} tie at atom {a}",
                            l + 1,
                            k + 1
                        )))
                    }
                }
            }
            fs.push(half(&(lo + hi)));
        }
    }
    let values = (0..chain.len())
        .map(|k| {
            CondRational::over(first.living(), (0..m).map(|a| Some(per_atom[a][k].clone())).collect())
        })
        .collect::<Result<_>>()?;
    Ok(MidpointEmbedding {
        chain: chain.to_vec(),
        values,
    })
}

impl MidpointEmbedding {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `f(u_k)` with 1-based `k`.
    pub fn value(&self, k: usize) -> &CondRational {
        &self.values[k - 1]
    }

    pub fn values(&self) -> &[CondRational] {
        &self.values
    }

    pub fn chain(&self) -> &[CondRational] {
        &self.chain
    }

    /// `f` at a point of the chain's slice at one atom.
    pub fn eval_at(&self, atom: usize, q: &Rational) -> Option<Rational> {
        self.chain
            .iter()
            .position(|u| u.at(atom) == Some(q))
            .map(|k| self.values[k].at(atom).unwrap().clone())
    }

    /// `f(x)` for a conditional element drawn atom-wise from the chain.
    pub fn eval(&self, x: &CondRational) -> Result<CondRational> {
        let mut out = Vec::with_capacity(x.atoms());
        for a in 0..x.atoms() {
            out.push(match x.at(a) {
                Some(q) => Some(self.eval_at(a, q).ok_or_else(|| {
                    Error::Domain(format!("value {} at atom {a} is not on the chain", format(q)))
                })?),
                None => None,
            });
        }
        CondRational::over(x.living(), out)
    }

    /// `f(u_n)` for a conditional index `n` (1-based).
    pub fn at_index(&self, n: &CondNatural) -> Result<CondRational> {
        seq_index(&self.values, n)
    }

    /// The sup-rule extension `g(s) = sup{f(u) : u ≤ s}` at one atom, with
    /// `sup ∅ = 0`.
    pub fn extend(&self, atom: usize, s: &Rational) -> Rational {
        self.chain
            .iter()
            .zip(&self.values)
            .filter(|(u, _)| u.at(atom).unwrap() <= s)
            .map(|(_, f)| f.at(atom).unwrap().clone())
            .max()
            .unwrap_or_else(zero)
    }
}

/// Composes a representation with the gap normalization of its image so the
/// image only has open or singleton gaps.
pub fn usc_upgrade(u: &UtilityTable, pref: &ConditionalPreference) -> Result<UtilityTable> {
    let ground = pref.ground();
    let points = (0..ground.atoms())
        .map(|a| u.atom_values(a).to_vec())
        .collect();
    let support = ConditionalIntervalSet::points(ground.algebra(), points)?;
    usc_upgrade_with_support(u, pref, &support)
}

/// [`usc_upgrade`] with the normalization computed on a support set that
/// contains the image of `u`, for images sampled from a larger set.
pub fn usc_upgrade_with_support(
    u: &UtilityTable,
    pref: &ConditionalPreference,
    support: &ConditionalIntervalSet,
) -> Result<UtilityTable> {
    let report = verify_representation(u, pref);
    if !report.passed() {
        return Err(Error::Precondition(format!(
            "input is not a numerical representation: {report:?}"
        )));
    }
    let ground = pref.ground();
    for a in 0..ground.atoms() {
        if let Some(q) = u.atom_values(a).iter().find(|q| !support.contains(a, q)) {
            return Err(Error::Precondition(format!(
                "utility value {} at atom {a} lies outside the support",
                format(q)
            )));
        }
    }
    let (g, _) = gap_normalize(support);
    Ok(u.compose(|a, q| g.apply(a, q).expect("support covers the image")))
}

/// Whether every gap of `s` is open or a singleton.
pub fn has_normal_gaps(s: &ConditionalIntervalSet) -> bool {
    find_gaps(s).iter().all(|gap| {
        gap.living
            .atoms()
            .all(|a| gap.shape_at(a).is_none_or(GapShape::is_normal))
    })
}

/// Image points of a table as a conditional interval set.
pub fn image_of(u: &UtilityTable) -> Result<ConditionalIntervalSet> {
    let ground = u.ground();
    ConditionalIntervalSet::points(
        ground.algebra(),
        (0..ground.atoms()).map(|a| u.atom_values(a).to_vec()).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condcore::Ground;
    use crate::rational::{int, rat};
    use crate::representation::{debreu_utility, WeightScheme};

    fn iv(lo: i64, hi: i64, lc: bool, hc: bool) -> RationalInterval {
        RationalInterval::new(int(lo).into(), int(hi).into(), lc, hc).unwrap()
    }

    fn one_atom(cs: Vec<RationalInterval>) -> ConditionalIntervalSet {
        canonicalize(&Algebra::anonymous(1).unwrap(), vec![cs]).unwrap()
    }

    #[test]
    fn canonicalize_cases() {
        let s = one_atom(vec![iv(1, 2, true, true), iv(0, 1, true, true)]);
        assert_eq!(s.components(0), &[iv(0, 2, true, true)]);
        let s = one_atom(vec![iv(0, 1, false, false), RationalInterval::point(int(1)), iv(1, 2, false, false)]);
        assert_eq!(s.components(0), &[iv(0, 2, false, false)]);
        let s = one_atom(vec![iv(0, 1, false, false), iv(1, 2, false, false)]);
        assert_eq!(s.components(0).len(), 2);
        assert!(RationalInterval::new(int(2).into(), int(1).into(), true, true).is_err());
        assert!(RationalInterval::new(int(1).into(), int(1).into(), true, false).is_err());
        assert!(RationalInterval::new(ExtRational::NegInf, int(1).into(), true, false).is_err());
    }

    #[test]
    fn gap_shapes_of_examples() {
        assert!(find_gaps(&one_atom(vec![RationalInterval::real_line()])).is_empty());
        let s = one_atom(vec![iv(0, 1, false, false), RationalInterval::point(int(2))]);
        let gaps = find_gaps(&s);
        assert_eq!(gaps.len(), 1);
        assert_eq!(gaps[0].intervals[0], Some(iv(1, 2, true, false)));
        assert_eq!(gaps[0].shape_at(0), Some(GapShape::LeftClosed));
        let s = one_atom(vec![iv(0, 1, false, false), iv(2, 3, false, false)]);
        assert_eq!(find_gaps(&s)[0].shape_at(0), Some(GapShape::Closed));
    }

    #[test]
    fn gap_records_align_by_index() {
        let alg = Algebra::anonymous(3).unwrap();
        let s = canonicalize(
            &alg,
            vec![
                vec![iv(0, 1, true, true), iv(2, 3, true, true), iv(4, 5, true, true)],
                vec![iv(0, 1, false, false), iv(1, 3, false, false)],
                vec![RationalInterval::real_line()],
            ],
        )
        .unwrap();
        let gaps = find_gaps(&s);
        assert_eq!(gaps.len(), 2);
        assert_eq!(gaps[0].living, alg.event(&[0, 1]).unwrap());
        assert_eq!(gaps[1].living, alg.atom(0));
        assert_eq!(gaps[0].shape_event(GapShape::Open), alg.atom(0));
        assert_eq!(gaps[0].shape_event(GapShape::Singleton), alg.atom(1));
        let cells: Vec<Event> = GapShape::ALL.iter().map(|&sh| gaps[0].shape_event(sh)).collect();
        let mut union = alg.empty();
        for c in &cells {
            assert!(c.is_disjoint(&union));
            union = union | *c;
        }
        assert_eq!(union, gaps[0].living);
    }

    #[test]
    fn normalize_examples() {
        let s = one_atom(vec![RationalInterval::point(int(0)), RationalInterval::point(int(1))]);
        let (g, img) = gap_normalize(&s);
        assert_eq!(g.apply(0, &int(1)), Some(int(1)));
        assert_eq!(find_gaps(&img)[0].shape_at(0), Some(GapShape::Open));

        let s = one_atom(vec![iv(0, 1, false, false), RationalInterval::point(int(2))]);
        let (g, img) = gap_normalize(&s);
        assert_eq!(img.components(0), &[iv(0, 1, false, true)]);
        assert_eq!(g.apply(0, &int(2)), Some(int(1)));
        assert_eq!(g.apply(0, &rat(1, 2)), Some(rat(1, 2)));

        let s = one_atom(vec![iv(0, 1, false, false), iv(2, 3, false, false)]);
        let (_, img) = gap_normalize(&s);
        assert_eq!(img.components(0), &[iv(0, 1, false, false), iv(1, 2, false, false)]);
        let gaps = find_gaps(&img);
        assert_eq!(gaps[0].shape_at(0), Some(GapShape::Singleton));
    }

    fn chain(vals: &[i64]) -> Vec<CondRational> {
        let alg = Algebra::anonymous(1).unwrap();
        vals.iter()
            .map(|&v| CondRational::constant(&alg, int(v)))
            .collect()
    }

    #[test]
    fn midpoint_examples() {
        let f = midpoint_embedding(&chain(&[5])).unwrap();
        assert_eq!(f.value(1).at(0), Some(&rat(1, 2)));
        let f = midpoint_embedding(&chain(&[1, 2, 3])).unwrap();
        let got: Vec<Rational> = (1..=3).map(|k| f.value(k).at(0).unwrap().clone()).collect();
        assert_eq!(got, vec![rat(1, 2), rat(3, 4), rat(7, 8)]);
        let f = midpoint_embedding(&chain(&[2, 1])).unwrap();
        assert_eq!(f.value(2).at(0), Some(&rat(1, 4)));
        assert!(matches!(
            midpoint_embedding(&chain(&[1, 1])),
            Err(Error::Precondition(_))
        ));
        assert_eq!(f.extend(0, &int(0)), zero());
        assert_eq!(f.extend(0, &rat(3, 2)), rat(1, 4));
    }

    #[test]
    fn upgrade_of_finite_image_is_identity() {
        let alg = Algebra::anonymous(2).unwrap();
        let g = Ground::uniform(alg, &["a", "b", "c"]).unwrap();
        let p = ConditionalPreference::new(
            g.clone(),
            vec![vec![vec![0], vec![1], vec![2]], vec![vec![2, 1], vec![0]]],
        )
        .unwrap();
        let u = debreu_utility(&p, &WeightScheme::dyadic(&g)).unwrap();
        let up = usc_upgrade(&u, &p).unwrap();
        assert_eq!(up, u);
        assert!(has_normal_gaps(&image_of(&up).unwrap()));
    }

    #[test]
    fn upgrade_closes_grid_to_point_gap() {
        // The grid k/64 inside ]0,1[ plus the isolated point 2: 64 values,
        // the most one atom holds.
        let alg = Algebra::anonymous(1).unwrap();
        let labels: Vec<String> = (0..64).map(|i| format!("v{i}")).collect();
        let g = Ground::uniform(alg.clone(), &labels).unwrap();
        let ranking: Vec<Vec<usize>> = (0..64).rev().map(|v| vec![v]).collect();
        let p = ConditionalPreference::new(g.clone(), vec![ranking]).unwrap();
        let mut vals: Vec<Rational> = (1..64).map(|k| rat(k, 64)).collect();
        vals.push(int(2));
        let u = UtilityTable::new(g, vec![vals]).unwrap();
        let support = canonicalize(
            &alg,
            vec![vec![iv(0, 1, false, false), RationalInterval::point(int(2))]],
        )
        .unwrap();
        let up = usc_upgrade_with_support(&u, &p, &support).unwrap();
        assert_eq!(up.at(0, 63), &int(1));
        // Consecutive image points are never further apart than one grid step.
        let mut img = up.atom_values(0).to_vec();
        img.sort();
        assert!(img.windows(2).all(|w| &w[1] - &w[0] <= rat(1, 64)));
        let (_, normalized) = gap_normalize(&support);
        assert!(find_gaps(&normalized).is_empty());
        assert!(matches!(
            usc_upgrade_with_support(&u, &p, &one_atom(vec![iv(0, 1, false, false)])),
            Err(Error::Precondition(_))
        ));
    }
}
