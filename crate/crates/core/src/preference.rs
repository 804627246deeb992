//! Conditional preference orders.
//!
//! A [`ConditionalPreference`] is stored as one total preorder per atom,
//! given as tie-groups listed best first. The conditional relation on acts
//! is then read off atom by atom. Raw relations ([`RelationGraph`]) are
//! validated against the axioms directly by [`verify_axioms`], which also
//! recovers the per-atom preorders when the axioms hold.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::condcore::{Act, ConditionalSubset, Ground};
use crate::error::{Error, Result};
use crate::events::Event;

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPreference {
    ground: Ground,
    groups: Vec<Vec<Vec<usize>>>,
    rank: Vec<Vec<usize>>,
}

impl ConditionalPreference {
    /// Builds a preference from per-atom tie-groups (best first). Rejects
    /// the trivial preference in which every atom has a single group.
    pub fn new(ground: Ground, groups: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        Self::build(ground, groups, false)
    }

    /// Like [`ConditionalPreference::new`] but accepts the trivial order.
    pub fn new_allow_trivial(ground: Ground, groups: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        Self::build(ground, groups, true)
    }

    pub fn build(ground: Ground, groups: Vec<Vec<Vec<usize>>>, allow_trivial: bool) -> Result<Self> {
        if groups.len() != ground.atoms() {
            return Err(Error::Structural(format!(
                "rankings given for {} of {} atoms",
                groups.len(),
                ground.atoms()
            )));
        }
        let mut rank = Vec::with_capacity(groups.len());
        for (a, gs) in groups.iter().enumerate() {
            let label = ground.algebra().label(a);
            let mut r = vec![usize::MAX; ground.size(a)];
            for (g, group) in gs.iter().enumerate() {
                if group.is_empty() {
                    return Err(Error::Structural(format!("empty tie-group at atom `{label}`")));
                }
                for &v in group {
                    if v >= r.len() {
                        return Err(Error::Domain(format!(
                            "ranked value {v} is outside the ground set of atom `{label}`"
                        )));
                    }
                    if r[v] != usize::MAX {
                        return Err(Error::Structural(format!(
                            "value `{}` ranked twice at atom `{label}`",
                            ground.values(a)[v]
                        )));
                    }
                    r[v] = g;
                }
            }
            if let Some(v) = r.iter().position(|&g| g == usize::MAX) {
                return Err(Error::Structural(format!(
                    "value `{}` is unranked at atom `{label}`",
                    ground.values(a)[v]
                )));
            }
            rank.push(r);
        }
        let pref = Self {
            ground,
            groups,
            rank,
        };
        if !allow_trivial && pref.is_trivial() {
            return Err(Error::Degenerate(
                "every atom ranks all values as equivalent; no strict pair exists".into(),
            ));
        }
        Ok(pref)
    }

    /// Builds a preference from per-atom rankings of value labels.
    pub fn from_labels<S: AsRef<str>>(
        ground: Ground,
        groups: &[Vec<Vec<S>>],
        allow_trivial: bool,
    ) -> Result<Self> {
        if groups.len() != ground.atoms() {
            return Err(Error::Structural("one ranking per atom expected".into()));
        }
        let mut idx = Vec::with_capacity(groups.len());
        for (a, gs) in groups.iter().enumerate() {
            let mut atom_groups = Vec::with_capacity(gs.len());
            for g in gs {
                let mut group = Vec::with_capacity(g.len());
                for l in g {
                    group.push(ground.value_index(a, l.as_ref()).ok_or_else(|| {
                        Error::Domain(format!(
                            "ranked value `{}` is not in the ground set of atom `{}`",
                            l.as_ref(),
                            ground.algebra().label(a)
                        ))
                    })?);
                }
                atom_groups.push(group);
            }
            idx.push(atom_groups);
        }
        Self::build(ground, idx, allow_trivial)
    }

    pub fn ground(&self) -> &Ground {
        &self.ground
    }

    pub fn atoms(&self) -> usize {
        self.ground.atoms()
    }

    /// Tie-groups at an atom, best first.
    pub fn groups(&self, atom: usize) -> &[Vec<usize>] {
        &self.groups[atom]
    }

    /// Group index of a value at an atom; 0 is the top group.
    pub fn rank(&self, atom: usize, value: usize) -> usize {
        self.rank[atom][value]
    }

    pub fn tiers(&self, atom: usize) -> usize {
        self.groups[atom].len()
    }

    /// `v ≽_ω w`.
    pub fn weakly_prefers(&self, atom: usize, v: usize, w: usize) -> bool {
        self.rank[atom][v] <= self.rank[atom][w]
    }

    pub fn strictly_prefers(&self, atom: usize, v: usize, w: usize) -> bool {
        self.rank[atom][v] < self.rank[atom][w]
    }

    pub fn is_trivial(&self) -> bool {
        self.groups.iter().all(|g| g.len() < 2)
    }

    fn check(&self, x: &Act) -> Result<()> {
        self.ground.check_act(x)?;
        if !x.living().is_full() {
            return Err(Error::Domain(format!(
                "act lives on {} instead of everywhere",
                x.living()
            )));
        }
        Ok(())
    }

    fn event_where<F: Fn(usize) -> bool>(&self, pred: F) -> Event {
        self.ground.algebra().largest_event(pred)
    }
}

/// Largest event `A` with `x|A ≽ y|A`.
pub fn holds(pref: &ConditionalPreference, x: &Act, y: &Act) -> Result<Event> {
    pref.check(x)?;
    pref.check(y)?;
    Ok(pref.event_where(|a| pref.weakly_prefers(a, *x.at(a).unwrap(), *y.at(a).unwrap())))
}

/// The maximal events on which `x ∼ y`, `x ≻ y` and `y ≻ x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TriPartition {
    pub equiv: Event,
    pub strict_first: Event,
    pub strict_second: Event,
}

impl TriPartition {
    /// Cells from the two weak events `x ≽ y` and `y ≽ x`. Strictness on an
    /// event means the reverse comparison holds on none of its nonempty
    /// subevents, which is exactly set difference of the maximal events.
    pub fn from_weak(xy: Event, yx: Event) -> Self {
        Self {
            equiv: xy & yx,
            strict_first: xy - yx,
            strict_second: yx - xy,
        }
    }

    pub fn cells(&self) -> [Event; 3] {
        [self.equiv, self.strict_first, self.strict_second]
    }
}

pub fn tri_partition(pref: &ConditionalPreference, x: &Act, y: &Act) -> Result<TriPartition> {
    Ok(TriPartition::from_weak(holds(pref, x, y)?, holds(pref, y, x)?))
}

fn contour<F: Fn(usize, usize) -> bool>(pref: &ConditionalPreference, keep: F) -> ConditionalSubset {
    let masks = (0..pref.atoms())
        .map(|a| {
            (0..pref.ground.size(a))
                .filter(|&v| keep(a, v))
                .fold(0u64, |m, v| m | (1 << v))
        })
        .collect();
    ConditionalSubset::from_masks(pref.ground.algebra(), masks).expect("one mask per atom")
}

/// `{z : z ≻ y}`, living where some value beats `y`.
pub fn strictly_preferred_set(pref: &ConditionalPreference, y: &Act) -> Result<ConditionalSubset> {
    pref.check(y)?;
    Ok(contour(pref, |a, v| pref.strictly_prefers(a, v, *y.at(a).unwrap())))
}

/// `{z : z ≼ x}` strictly, i.e. `{z : x ≻ z}`.
pub fn strictly_worse_set(pref: &ConditionalPreference, x: &Act) -> Result<ConditionalSubset> {
    pref.check(x)?;
    Ok(contour(pref, |a, v| pref.strictly_prefers(a, *x.at(a).unwrap(), v)))
}

/// `𝒰(x) = {z : z ≽ x}`; always lives everywhere.
pub fn upper_contour(pref: &ConditionalPreference, x: &Act) -> Result<ConditionalSubset> {
    pref.check(x)?;
    Ok(contour(pref, |a, v| pref.weakly_prefers(a, v, *x.at(a).unwrap())))
}

/// One assertion `x|A ≽ y|A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assertion {
    pub x: Act,
    pub y: Act,
    pub event: Event,
}

/// A raw, finite conditional relation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationGraph {
    pub pairs: Vec<Assertion>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    Reflexivity,
    Transitivity,
    Consistency,
    Stability,
    LocalCompleteness,
}

/// A violated axiom with a witnessing pair and event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub x: Act,
    pub y: Act,
    pub event: Event,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub violations: Vec<AxiomViolation>,
    /// The preference inducing the graph exactly, when every axiom holds.
    pub induced: Option<ConditionalPreference>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violated(&self, axiom: Axiom) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }
}

type PairKey = (u64, Vec<(usize, usize)>);

fn key(event: Event, x: &Act, y: &Act) -> PairKey {
    (
        event.bits(),
        event
            .atoms()
            .map(|a| (*x.at(a).unwrap(), *y.at(a).unwrap()))
            .collect(),
    )
}

/// Acts equal to the given values on `event` and to value 0 elsewhere.
fn witness_acts(ground: &Ground, event: Event, pairs: &[(usize, usize)]) -> (Act, Act) {
    let m = ground.atoms();
    let mut xs = vec![0; m];
    let mut ys = vec![0; m];
    for (a, &(v, w)) in event.atoms().zip(pairs) {
        xs[a] = v;
        ys[a] = w;
    }
    (
        Act::everywhere(ground.algebra(), xs).unwrap(),
        Act::everywhere(ground.algebra(), ys).unwrap(),
    )
}

/// Checks a raw relation against reflexivity, transitivity, consistency,
/// stability and local completeness.
///
/// Assertions are first normalized to restricted pairs `(x|A, y|A)`. The
/// per-atom relation `R_ω` collects assertions on `{ω}`. Local completeness
/// is read conditionally: on every nonempty condition some nonempty
/// subevent carries a comparison, which forces each `R_ω` to be total.
pub fn verify_axioms(graph: &RelationGraph, ground: &Ground) -> Result<AxiomReport> {
    let alg = ground.algebra();
    let m = ground.atoms();
    let mut asserted: HashSet<PairKey> = HashSet::new();
    let mut by_event: HashMap<u64, usize> = HashMap::new();
    for (i, p) in graph.pairs.iter().enumerate() {
        ground.check_act(&p.x)?;
        ground.check_act(&p.y)?;
        if p.event.tag() != alg.tag() {
            return Err(Error::AlgebraMismatch);
        }
        if !p.x.living().is_full() || !p.y.living().is_full() {
            return Err(Error::Malformed(format!("assertion {i} uses an act not living everywhere")));
        }
        if p.event.is_empty() {
            return Err(Error::Malformed(format!("assertion {i} is conditioned on the empty event")));
        }
        if asserted.insert(key(p.event, &p.x, &p.y)) {
            *by_event.entry(p.event.bits()).or_default() += 1;
        }
    }

    let mut rel: Vec<Vec<Vec<bool>>> = (0..m)
        .map(|a| vec![vec![false; ground.size(a)]; ground.size(a)])
        .collect();
    for (bits, pairs) in &asserted {
        if bits.count_ones() == 1 {
            let a = bits.trailing_zeros() as usize;
            let (v, w) = pairs[0];
            rel[a][v][w] = true;
        }
    }

    let mut violations = Vec::new();

    // Consistency: every nonempty subevent of an assertion is asserted too.
    let mut sorted: Vec<&PairKey> = asserted.iter().collect();
    sorted.sort();
    'outer: for (bits, pairs) in &sorted {
        let event = alg.from_bits(*bits).unwrap();
        for sub in event.nonempty_subsets() {
            let sub_pairs: Vec<(usize, usize)> = event
                .atoms()
                .zip(pairs)
                .filter(|(a, _)| sub.contains(*a))
                .map(|(_, p)| *p)
                .collect();
            if !asserted.contains(&(sub.bits(), sub_pairs.clone())) {
                let (x, y) = witness_acts(ground, sub, &sub_pairs);
                violations.push(AxiomViolation {
                    axiom: Axiom::Consistency,
                    x,
                    y,
                    event: sub,
                    detail: format!("asserted on {event} but not on the subevent {sub}"),
                });
                continue 'outer;
            }
        }
    }

    // Stability: on every nonempty event, all concatenations of per-atom
    // assertions are present. Assertions inside the product are counted and
    // compared with the product size; a missing element is then located.
    for event in alg.all_events().filter(|e| !e.is_empty()) {
        let per_atom: Vec<Vec<(usize, usize)>> = event
            .atoms()
            .map(|a| {
                let n = ground.size(a);
                (0..n)
                    .flat_map(|v| (0..n).map(move |w| (v, w)))
                    .filter(|&(v, w)| rel[a][v][w])
                    .collect()
            })
            .collect();
        let product: u128 = per_atom.iter().map(|r| r.len() as u128).product();
        if product == 0 {
            continue;
        }
        let inside = asserted
            .iter()
            .filter(|(bits, pairs)| {
                *bits == event.bits()
                    && event
                        .atoms()
                        .zip(pairs.iter())
                        .all(|(a, &(v, w))| rel[a][v][w])
            })
            .count() as u128;
        if inside == product {
            continue;
        }
        let mut idx = vec![0usize; per_atom.len()];
        loop {
            let choice: Vec<(usize, usize)> = idx.iter().zip(&per_atom).map(|(&i, r)| r[i]).collect();
            if !asserted.contains(&(event.bits(), choice.clone())) {
                let (x, y) = witness_acts(ground, event, &choice);
                violations.push(AxiomViolation {
                    axiom: Axiom::Stability,
                    x,
                    y,
                    event,
                    detail: format!("concatenation of per-atom assertions on {event} is missing"),
                });
                break;
            }
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < per_atom[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }

    for a in 0..m {
        let n = ground.size(a);
        let at = alg.atom(a);
        let single = |v: usize, w: usize| witness_acts(ground, at, &[(v, w)]);
        if let Some(v) = (0..n).find(|&v| !rel[a][v][v]) {
            let (x, y) = single(v, v);
            violations.push(AxiomViolation {
                axiom: Axiom::Reflexivity,
                x,
                y,
                event: at,
                detail: format!("`{}` is not related to itself", ground.values(a)[v]),
            });
        }
        'trans: for u in 0..n {
            for v in 0..n {
                if !rel[a][u][v] {
                    continue;
                }
                for w in 0..n {
                    if rel[a][v][w] && !rel[a][u][w] {
                        let (x, y) = single(u, w);
                        violations.push(AxiomViolation {
                            axiom: Axiom::Transitivity,
                            x,
                            y,
                            event: at,
                            detail: format!(
                                "`{}` ≽ `{}` ≽ `{}` without `{0}` ≽ `{2}`",
                                ground.values(a)[u],
                                ground.values(a)[v],
                                ground.values(a)[w]
                            ),
                        });
                        break 'trans;
                    }
                }
            }
        }
        'total: for v in 0..n {
            for w in v + 1..n {
                if !rel[a][v][w] && !rel[a][w][v] {
                    let (x, y) = single(v, w);
                    violations.push(AxiomViolation {
                        axiom: Axiom::LocalCompleteness,
                        x,
                        y,
                        event: at,
                        detail: format!(
                            "`{}` and `{}` are incomparable",
                            ground.values(a)[v],
                            ground.values(a)[w]
                        ),
                    });
                    break 'total;
                }
            }
        }
    }

    let induced = if violations.is_empty() {
        Some(preorder_from_relation(ground.clone(), &rel)?)
    } else {
        None
    };
    Ok(AxiomReport {
        violations,
        induced,
    })
}

/// Tie-groups from per-atom total preorders given as relation matrices.
fn preorder_from_relation(ground: Ground, rel: &[Vec<Vec<bool>>]) -> Result<ConditionalPreference> {
    let groups = rel
        .iter()
        .map(|r| {
            let n = r.len();
            // In a total preorder, the number of values weakly below `v`
            // determines its group.
            let below = |v: usize| (0..n).filter(|&w| r[v][w]).count();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&v| std::cmp::Reverse(below(v)));
            let mut gs: Vec<Vec<usize>> = Vec::new();
            for v in order {
                match gs.last_mut() {
                    Some(g) if r[v][g[0]] && r[g[0]][v] => g.push(v),
                    _ => gs.push(vec![v]),
                }
            }
            for g in &mut gs {
                g.sort_unstable();
            }
            gs
        })
        .collect();
    ConditionalPreference::new_allow_trivial(ground, groups)
}

/// The complete relation induced by `pref`: every restricted pair on every
/// nonempty event. Off the event, acts take value 0. The size is the sum
/// over events of the product of per-atom relation sizes, so this is meant
/// for small instances.
pub fn induced_graph(pref: &ConditionalPreference) -> RelationGraph {
    let ground = pref.ground();
    let alg = ground.algebra();
    let mut pairs = Vec::new();
    for event in alg.all_events().filter(|e| !e.is_empty()) {
        let per_atom: Vec<Vec<(usize, usize)>> = event
            .atoms()
            .map(|a| {
                let n = ground.size(a);
                (0..n)
                    .flat_map(|v| (0..n).map(move |w| (v, w)))
                    .filter(|&(v, w)| pref.weakly_prefers(a, v, w))
                    .collect()
            })
            .collect();
        let mut idx = vec![0usize; per_atom.len()];
        loop {
            let choice: Vec<(usize, usize)> = idx.iter().zip(&per_atom).map(|(&i, r)| r[i]).collect();
            let (x, y) = witness_acts(ground, event, &choice);
            pairs.push(Assertion { x, y, event });
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < per_atom[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    RelationGraph { pairs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::Algebra;

    pub(crate) fn walk_museum() -> ConditionalPreference {
        let alg = Algebra::new(&["sunny", "not_sunny"]).unwrap();
        let ground = Ground::uniform(alg, &["walk", "museum"]).unwrap();
        ConditionalPreference::from_labels(
            ground,
            &[
                vec![vec!["walk"], vec!["museum"]],
                vec![vec!["museum"], vec!["walk"]],
            ],
            false,
        )
        .unwrap()
    }

    #[test]
    fn walk_museum_relations() {
        let p = walk_museum();
        let g = p.ground();
        let alg = g.algebra();
        let walk = g.constant_act("walk").unwrap();
        let museum = g.constant_act("museum").unwrap();
        assert_eq!(holds(&p, &walk, &walk).unwrap(), alg.full());
        assert_eq!(holds(&p, &walk, &museum).unwrap(), alg.atom(0));
        let x = g.act(&["walk", "museum"]).unwrap();
        let y = g.act(&["museum", "walk"]).unwrap();
        assert_eq!(holds(&p, &x, &y).unwrap(), alg.full());
        let t = tri_partition(&p, &walk, &museum).unwrap();
        assert_eq!(t.equiv, alg.empty());
        assert_eq!(t.strict_first, alg.atom(0));
        assert_eq!(t.strict_second, alg.atom(1));
        let s = strictly_preferred_set(&p, &museum).unwrap();
        assert_eq!(s.living(), alg.atom(0));
        assert_eq!(s.members_at(0), vec![0]);
    }

    #[test]
    fn extremes_of_contours() {
        let p = walk_museum();
        let g = p.ground();
        let top = g.act(&["walk", "museum"]).unwrap();
        let bottom = g.act(&["museum", "walk"]).unwrap();
        assert!(strictly_preferred_set(&p, &top).unwrap().living().is_empty());
        assert_eq!(upper_contour(&p, &bottom).unwrap(), g.ambient());
        let up = upper_contour(&p, &top).unwrap();
        assert_eq!(up.members_at(0), vec![0]);
        assert_eq!(up.members_at(1), vec![1]);
    }

    #[test]
    fn trivial_preference_needs_override() {
        let alg = Algebra::anonymous(2).unwrap();
        let g = Ground::uniform(alg, &["a", "b"]).unwrap();
        let tied = vec![vec![vec![0, 1]], vec![vec![0, 1]]];
        assert!(matches!(
            ConditionalPreference::new(g.clone(), tied.clone()),
            Err(Error::Degenerate(_))
        ));
        assert!(ConditionalPreference::new_allow_trivial(g, tied).is_ok());
    }

    #[test]
    fn malformed_rankings() {
        let alg = Algebra::anonymous(1).unwrap();
        let g = Ground::uniform(alg, &["a", "b"]).unwrap();
        assert!(ConditionalPreference::new(g.clone(), vec![vec![vec![0]]]).is_err());
        assert!(ConditionalPreference::new(g.clone(), vec![vec![vec![0], vec![0, 1]]]).is_err());
        assert!(ConditionalPreference::new(g, vec![vec![vec![0], vec![2]]]).is_err());
    }

    #[test]
    fn induced_graph_passes_and_round_trips() {
        let p = walk_museum();
        let graph = induced_graph(&p);
        assert_eq!(graph.pairs.len(), 3 + 3 + 9);
        let rep = verify_axioms(&graph, p.ground()).unwrap();
        assert!(rep.passed(), "{:?}", rep.violations);
        assert_eq!(rep.induced.unwrap(), p);
    }

    #[test]
    fn dropped_subevent_breaks_consistency() {
        let p = walk_museum();
        let alg = p.ground().algebra().clone();
        let mut graph = induced_graph(&p);
        // Remove one assertion on {sunny} that restricts a full-event one.
        let walk = p.ground().constant_act("walk").unwrap();
        graph
            .pairs
            .retain(|a| !(a.event == alg.atom(0) && a.x.at(0) == Some(&0) && a.y.at(0) == Some(&0)));
        assert!(graph.pairs.iter().any(|a| a.event.is_full() && a.x == walk && a.y == walk));
        let rep = verify_axioms(&graph, p.ground()).unwrap();
        assert!(rep.violated(Axiom::Consistency));
        let v = rep.violations.iter().find(|v| v.axiom == Axiom::Consistency).unwrap();
        assert_eq!(v.event, alg.atom(0));
        assert!(rep.induced.is_none());
    }
}
