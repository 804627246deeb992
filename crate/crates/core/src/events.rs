//! Finite Boolean algebras of events.
//!
//! An [`Algebra`] is the powerset of a fixed, labelled atom set. Events are
//! bitsets tagged with the algebra they were created from, so events of two
//! nested algebras can live side by side without being mixed accidentally.
//! A [`Coarsening`] relates a fine algebra to a coarse one through a
//! surjective block map.

use std::fmt;
use std::ops::{BitAnd, BitOr, Not, Sub};
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Atom limit applied by [`Algebra::new`].
pub const DEFAULT_ATOM_LIMIT: usize = 16;
/// Hard upper bound imposed by the 64-bit event representation.
pub const MAX_ATOMS: usize = 64;

static NEXT_ALGEBRA_ID: AtomicU32 = AtomicU32::new(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AlgebraTag {
    id: u32,
    atoms: u8,
}

impl AlgebraTag {
    pub fn atoms(self) -> usize {
        self.atoms as usize
    }

    fn mask(self) -> u64 {
        if self.atoms as usize == MAX_ATOMS {
            u64::MAX
        } else {
            (1u64 << self.atoms) - 1
        }
    }
}

/// The powerset algebra over `m` labelled atoms.
#[derive(Debug, Clone)]
pub struct Algebra {
    tag: AlgebraTag,
    labels: Arc<[String]>,
}

impl PartialEq for Algebra {
    fn eq(&self, other: &Self) -> bool {
        self.tag == other.tag
    }
}

impl Eq for Algebra {}

impl Algebra {
    pub fn new<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        Self::with_limit(labels, DEFAULT_ATOM_LIMIT)
    }

    pub fn with_limit<S: AsRef<str>>(labels: &[S], limit: usize) -> Result<Self> {
        let limit = limit.min(MAX_ATOMS);
        if labels.is_empty() {
            return Err(Error::Config("an algebra needs at least one atom".into()));
        }
        if labels.len() > limit {
            return Err(Error::Config(format!(
                "{} atoms exceed the limit of {limit}",
                labels.len()
            )));
        }
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_owned()).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Config(format!("duplicate atom label `{l}`")));
            }
        }
        let id = NEXT_ALGEBRA_ID.fetch_add(1, Ordering::Relaxed);
        Ok(Self {
            tag: AlgebraTag {
                id,
                atoms: labels.len() as u8,
            },
            labels: labels.into(),
        })
    }

    /// Algebra with atoms labelled `w0, w1, ...`.
    pub fn anonymous(atoms: usize) -> Result<Self> {
        let labels: Vec<String> = (0..atoms).map(|i| format!("w{i}")).collect();
        Self::with_limit(&labels, MAX_ATOMS)
    }

    pub fn tag(&self) -> AlgebraTag {
        self.tag
    }

    pub fn atoms(&self) -> usize {
        self.tag.atoms()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, atom: usize) -> &str {
        &self.labels[atom]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn empty(&self) -> Event {
        Event {
            bits: 0,
            tag: self.tag,
        }
    }

    pub fn full(&self) -> Event {
        Event {
            bits: self.tag.mask(),
            tag: self.tag,
        }
    }

    pub fn atom(&self, atom: usize) -> Event {
        assert!(atom < self.atoms(), "atom {atom} out of range");
        Event {
            bits: 1 << atom,
            tag: self.tag,
        }
    }

    pub fn event(&self, atoms: &[usize]) -> Result<Event> {
        let mut bits = 0u64;
        for &a in atoms {
            if a >= self.atoms() {
                return Err(Error::Domain(format!("atom index {a} out of range")));
            }
            bits |= 1 << a;
        }
        Ok(Event {
            bits,
            tag: self.tag,
        })
    }

    pub fn from_bits(&self, bits: u64) -> Result<Event> {
        if bits & !self.tag.mask() != 0 {
            return Err(Error::Domain(format!("bits {bits:#x} exceed the atom set")));
        }
        Ok(Event {
            bits,
            tag: self.tag,
        })
    }

    pub fn event_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<Event> {
        let mut bits = 0u64;
        for l in labels {
            let a = self
                .index_of(l.as_ref())
                .ok_or_else(|| Error::Domain(format!("unknown atom `{}`", l.as_ref())))?;
            bits |= 1 << a;
        }
        Ok(Event {
            bits,
            tag: self.tag,
        })
    }

    /// Atom labels of `event` in atom order.
    pub fn event_labels(&self, event: Event) -> Vec<String> {
        debug_assert_eq!(event.tag, self.tag);
        event.atoms().map(|a| self.labels[a].clone()).collect()
    }

    /// Union of all atoms satisfying `pred`.
    pub fn largest_event<F: Fn(usize) -> bool>(&self, pred: F) -> Event {
        let bits = (0..self.atoms())
            .filter(|&a| pred(a))
            .fold(0u64, |acc, a| acc | (1 << a));
        Event {
            bits,
            tag: self.tag,
        }
    }

    /// True iff the events are pairwise disjoint and cover the full event.
    pub fn is_partition(&self, events: &[Event]) -> bool {
        let mut seen = 0u64;
        for e in events {
            if e.tag != self.tag || seen & e.bits != 0 {
                return false;
            }
            seen |= e.bits;
        }
        seen == self.tag.mask()
    }

    /// All `2^m` events, ordered by their bit pattern.
    pub fn all_events(&self) -> impl Iterator<Item = Event> + '_ {
        assert!(self.atoms() < 32, "event enumeration is limited to 31 atoms");
        (0..(1u64 << self.atoms())).map(move |bits| Event {
            bits,
            tag: self.tag,
        })
    }
}

/// A set of atoms of one algebra.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    bits: u64,
    tag: AlgebraTag,
}

impl Event {
    pub fn tag(&self) -> AlgebraTag {
        self.tag
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn same_algebra(&self, other: &Event) -> bool {
        self.tag == other.tag
    }

    pub fn meet(&self, other: &Event) -> Result<Event> {
        self.check(other)?;
        Ok(Event {
            bits: self.bits & other.bits,
            tag: self.tag,
        })
    }

    pub fn join(&self, other: &Event) -> Result<Event> {
        self.check(other)?;
        Ok(Event {
            bits: self.bits | other.bits,
            tag: self.tag,
        })
    }

    pub fn complement(&self) -> Event {
        Event {
            bits: !self.bits & self.tag.mask(),
            tag: self.tag,
        }
    }

    pub fn difference(&self, other: &Event) -> Result<Event> {
        self.check(other)?;
        Ok(Event {
            bits: self.bits & !other.bits,
            tag: self.tag,
        })
    }

    /// `self` with `atom` removed.
    pub fn without(&self, atom: usize) -> Event {
        Event {
            bits: self.bits & !(1u64 << atom),
            tag: self.tag,
        }
    }

    /// `self` with `atom` added.
    pub fn with(&self, atom: usize) -> Event {
        assert!(atom < self.tag.atoms(), "atom {atom} out of range");
        Event {
            bits: self.bits | (1u64 << atom),
            tag: self.tag,
        }
    }

    /// Empty event of the same algebra.
    pub fn none(&self) -> Event {
        Event {
            bits: 0,
            tag: self.tag,
        }
    }

    /// Full event of the same algebra.
    pub fn whole(&self) -> Event {
        Event {
            bits: self.tag.mask(),
            tag: self.tag,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_full(&self) -> bool {
        self.bits == self.tag.mask()
    }

    pub fn contains(&self, atom: usize) -> bool {
        atom < MAX_ATOMS && self.bits & (1 << atom) != 0
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        self.tag == other.tag && self.bits & !other.bits == 0
    }

    pub fn is_disjoint(&self, other: &Event) -> bool {
        self.bits & other.bits == 0
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn atoms(&self) -> impl Iterator<Item = usize> {
        let bits = self.bits;
        (0..MAX_ATOMS).filter(move |&a| bits & (1 << a) != 0)
    }

    /// Nonempty subevents of `self`, including `self`.
    pub fn nonempty_subsets(&self) -> impl Iterator<Item = Event> {
        let full = self.bits;
        let tag = self.tag;
        let mut sub = full;
        let mut done = full == 0;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let out = Event { bits: sub, tag };
            sub = (sub.wrapping_sub(1)) & full;
            if sub == 0 {
                done = true;
            }
            Some(out)
        })
    }

    fn check(&self, other: &Event) -> Result<()> {
        if self.tag == other.tag {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.atoms().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

// The operator forms panic on an algebra mismatch; use the named methods to
// get a `Result` instead.
impl BitAnd for Event {
    type Output = Event;
    fn bitand(self, rhs: Event) -> Event {
        self.meet(&rhs).expect("meet of events from different algebras")
    }
}

impl BitOr for Event {
    type Output = Event;
    fn bitor(self, rhs: Event) -> Event {
        self.join(&rhs).expect("join of events from different algebras")
    }
}

impl Sub for Event {
    type Output = Event;
    fn sub(self, rhs: Event) -> Event {
        self.difference(&rhs)
            .expect("difference of events from different algebras")
    }
}

impl Not for Event {
    type Output = Event;
    fn not(self) -> Event {
        self.complement()
    }
}

/// A nesting `coarse ⊆ fine` given by mapping each fine atom to the coarse
/// atom (block) containing it.
#[derive(Debug, Clone)]
pub struct Coarsening {
    fine: Algebra,
    coarse: Algebra,
    block_of: Vec<usize>,
}

impl Coarsening {
    pub fn new(fine: Algebra, coarse: Algebra, block_of: Vec<usize>) -> Result<Self> {
        if block_of.len() != fine.atoms() {
            return Err(Error::Structural(format!(
                "block map covers {} of {} fine atoms",
                block_of.len(),
                fine.atoms()
            )));
        }
        let mut hit = vec![false; coarse.atoms()];
        for &b in &block_of {
            if b >= coarse.atoms() {
                return Err(Error::Structural(format!("block {b} is not a coarse atom")));
            }
            hit[b] = true;
        }
        if let Some(b) = hit.iter().position(|h| !h) {
            return Err(Error::Structural(format!(
                "coarse atom `{}` has no fine atoms",
                coarse.label(b)
            )));
        }
        Ok(Self {
            fine,
            coarse,
            block_of,
        })
    }

    pub fn fine(&self) -> &Algebra {
        &self.fine
    }

    pub fn coarse(&self) -> &Algebra {
        &self.coarse
    }

    pub fn block_of(&self, fine_atom: usize) -> usize {
        self.block_of[fine_atom]
    }

    /// Fine atoms making up one coarse atom.
    pub fn block(&self, coarse_atom: usize) -> Event {
        self.fine.largest_event(|a| self.block_of[a] == coarse_atom)
    }

    /// Preimage of a coarse event in the fine algebra.
    pub fn lift(&self, coarse: Event) -> Result<Event> {
        if coarse.tag() != self.coarse.tag() {
            return Err(Error::AlgebraMismatch);
        }
        Ok(self.fine.largest_event(|a| coarse.contains(self.block_of[a])))
    }

    /// Whether a fine event is a union of blocks.
    pub fn is_measurable(&self, fine: Event) -> bool {
        fine.tag() == self.fine.tag()
            && (0..self.coarse.atoms()).all(|b| {
                let block = self.block(b);
                let inter = block & fine;
                inter.is_empty() || inter == block
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg(m: usize) -> Algebra {
        Algebra::anonymous(m).unwrap()
    }

    #[test]
    fn identity_and_complement_cases() {
        let a = alg(3);
        let e = a.event(&[0, 2]).unwrap();
        assert_eq!(a.full().meet(&e).unwrap(), e);
        assert_eq!(a.empty().complement(), a.full());
        let j = a.atom(0).join(&a.atom(1)).unwrap();
        assert_eq!(j, a.event(&[0, 1]).unwrap());
    }

    #[test]
    fn mismatched_algebras_are_rejected() {
        let a = alg(2);
        let b = alg(2);
        assert_eq!(a.full().meet(&b.full()), Err(Error::AlgebraMismatch));
        assert!(!a.is_partition(&[b.full()]));
    }

    #[test]
    fn largest_event_cases() {
        let w = Algebra::new(&["sunny", "not_sunny"]).unwrap();
        assert!(w.largest_event(|_| false).is_empty());
        assert!(w.largest_event(|_| true).is_full());
        let sunny = w.largest_event(|a| w.label(a) == "sunny");
        assert_eq!(w.event_labels(sunny), vec!["sunny"]);
    }

    #[test]
    fn partitions() {
        let a = alg(3);
        let e = a.event(&[1]).unwrap();
        assert!(a.is_partition(&[a.full()]));
        assert!(a.is_partition(&[e, !e]));
        assert!(!a.is_partition(&[e, e]));
        assert!(a.is_partition(&[a.empty(), a.full()]));
    }

    #[test]
    fn boolean_laws_exhaustive_small() {
        for m in 1..=4 {
            let a = alg(m);
            let evs: Vec<Event> = a.all_events().collect();
            for &x in &evs {
                assert_eq!(!!x, x);
                for &y in &evs {
                    assert_eq!(!(x & y), !x | !y);
                    assert_eq!(!(x | y), !x & !y);
                    assert_eq!(x & y, y & x);
                    for &z in &evs {
                        assert_eq!(x & (y | z), (x & y) | (x & z));
                        assert_eq!(x | (y & z), (x | y) & (x | z));
                        assert_eq!((x & y) & z, x & (y & z));
                        assert_eq!((x | y) | z, x | (y | z));
                    }
                }
            }
        }
    }

    #[test]
    fn subsets_enumeration() {
        let a = alg(4);
        let e = a.event(&[0, 2, 3]).unwrap();
        let subs: Vec<Event> = e.nonempty_subsets().collect();
        assert_eq!(subs.len(), 7);
        assert!(subs.iter().all(|s| s.is_subset(&e) && !s.is_empty()));
        assert_eq!(a.empty().nonempty_subsets().count(), 0);
    }

    #[test]
    fn atom_limit_is_enforced() {
        let labels: Vec<String> = (0..17).map(|i| i.to_string()).collect();
        assert!(matches!(Algebra::new(&labels), Err(Error::Config(_))));
        assert!(Algebra::with_limit(&labels, 32).is_ok());
    }

    #[test]
    fn coarsening_lifts_blocks() {
        let fine = alg(5);
        let coarse = Algebra::new(&["A", "B"]).unwrap();
        let c = Coarsening::new(fine.clone(), coarse.clone(), vec![0, 0, 1, 1, 1]).unwrap();
        assert_eq!(c.block(1), fine.event(&[2, 3, 4]).unwrap());
        assert_eq!(c.lift(coarse.atom(0)).unwrap(), fine.event(&[0, 1]).unwrap());
        assert!(c.is_measurable(fine.event(&[0, 1]).unwrap()));
        assert!(!c.is_measurable(fine.event(&[0, 2]).unwrap()));
        assert!(Coarsening::new(fine, coarse, vec![0, 0, 0, 0, 0]).is_err());
    }
}
