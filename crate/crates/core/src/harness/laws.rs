//! Boolean-algebra laws for conditional subsets of a product ground.
//!
//! [`first_violation`] checks one triple against operations supplied by the
//! caller, so a suite can swap in corrupted ones. [`exhaustive`] enumerates
//! every conditional subset of a small ground and checks every triple
//! through lookup tables filled from the library operations.

use serde::Serialize;

use crate::condcore::{ConditionalSubset, Ground};
use crate::error::{Error, Result};
use crate::events::Algebra;
use crate::par::{self, Execution};

/// Lattice operations under test.
pub trait SubsetOps {
    fn union(&self, a: &ConditionalSubset, b: &ConditionalSubset) -> ConditionalSubset;
    fn intersection(&self, a: &ConditionalSubset, b: &ConditionalSubset) -> ConditionalSubset;
    fn complement(&self, a: &ConditionalSubset) -> ConditionalSubset;
    fn bottom(&self) -> ConditionalSubset;
    fn top(&self) -> ConditionalSubset;
}

/// The library operations relative to a ground.
pub struct LibraryOps<'a> {
    pub ground: &'a Ground,
}

impl SubsetOps for LibraryOps<'_> {
    fn union(&self, a: &ConditionalSubset, b: &ConditionalSubset) -> ConditionalSubset {
        a.union(b)
    }

    fn intersection(&self, a: &ConditionalSubset, b: &ConditionalSubset) -> ConditionalSubset {
        a.intersection(b)
    }

    fn complement(&self, a: &ConditionalSubset) -> ConditionalSubset {
        a.complement(&self.ground.ambient())
    }

    fn bottom(&self) -> ConditionalSubset {
        ConditionalSubset::nowhere(self.ground.algebra())
    }

    fn top(&self) -> ConditionalSubset {
        self.ground.ambient()
    }
}

pub const LAWS: [&str; 16] = [
    "union-commutative",
    "intersection-commutative",
    "union-associative",
    "intersection-associative",
    "union-absorption",
    "intersection-absorption",
    "union-distributive",
    "intersection-distributive",
    "union-identity",
    "intersection-identity",
    "complement-join",
    "complement-meet",
    "involution",
    "de-morgan-union",
    "de-morgan-intersection",
    "idempotence",
];

/// First law violated by `(a, b, c)`, if any.
pub fn first_violation<O: SubsetOps + ?Sized>(
    ops: &O,
    a: &ConditionalSubset,
    b: &ConditionalSubset,
    c: &ConditionalSubset,
) -> Option<&'static str> {
    let u = |x: &ConditionalSubset, y: &ConditionalSubset| ops.union(x, y);
    let i = |x: &ConditionalSubset, y: &ConditionalSubset| ops.intersection(x, y);
    let n = |x: &ConditionalSubset| ops.complement(x);
    let (bot, top) = (ops.bottom(), ops.top());
    let checks = [
        u(a, b) == u(b, a),
        i(a, b) == i(b, a),
        u(&u(a, b), c) == u(a, &u(b, c)),
        i(&i(a, b), c) == i(a, &i(b, c)),
        u(a, &i(a, b)) == *a,
        i(a, &u(a, b)) == *a,
        u(a, &i(b, c)) == i(&u(a, b), &u(a, c)),
        i(a, &u(b, c)) == u(&i(a, b), &i(a, c)),
        u(a, &bot) == *a,
        i(a, &top) == *a,
        u(a, &n(a)) == top,
        i(a, &n(a)) == bot,
        n(&n(a)) == *a,
        n(&u(a, b)) == i(&n(a), &n(b)),
        n(&i(a, b)) == u(&n(a), &n(b)),
        u(a, a) == *a && i(a, a) == *a,
    ];
    checks.iter().position(|ok| !ok).map(|k| LAWS[k])
}

/// Outcome of an exhaustive check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExhaustiveReport {
    pub sizes: Vec<usize>,
    pub subsets: usize,
    pub triples: u64,
    /// Law and subset indices of the first failure found.
    pub violation: Option<(String, [usize; 3])>,
}

/// Bit offsets of each atom's mask inside a subset index.
fn offsets(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .scan(0, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect()
}

fn index_of(s: &ConditionalSubset, offs: &[usize]) -> usize {
    s.masks()
        .iter()
        .zip(offs)
        .map(|(&m, &o)| (m as usize) << o)
        .sum()
}

/// Every law on every triple of conditional subsets of the product ground
/// with the given per-atom sizes (at most 12 bits in total).
pub fn exhaustive(sizes: &[usize], exec: Execution) -> Result<ExhaustiveReport> {
    let total: usize = sizes.iter().sum();
    if sizes.is_empty() || sizes.contains(&0) || total > 12 {
        return Err(Error::Config(format!(
            "exhaustive law check needs nonempty grounds with at most 12 values in total, got {sizes:?}"
        )));
    }
    let algebra = Algebra::anonymous(sizes.len())?;
    let ground = Ground::new(
        algebra.clone(),
        sizes.iter().map(|&s| (0..s).map(|v| format!("v{v}")).collect()).collect(),
    )?;
    let offs = offsets(sizes);
    let n = 1usize << total;
    let subsets: Vec<ConditionalSubset> = (0..n)
        .map(|k| {
            let masks = sizes
                .iter()
                .zip(&offs)
                .map(|(&s, &o)| ((k >> o) & ((1 << s) - 1)) as u64)
                .collect();
            ConditionalSubset::from_masks(&algebra, masks)
        })
        .collect::<Result<_>>()?;
    let ops = LibraryOps { ground: &ground };

    // One- and two-variable laws go through the operations directly.
    for a in 0..n {
        for b in 0..n {
            let (x, y) = (&subsets[a], &subsets[b]);
            if let Some(law) = first_violation(&ops, x, y, x) {
                return Ok(ExhaustiveReport {
                    sizes: sizes.to_vec(),
                    subsets: n,
                    triples: 0,
                    violation: Some((law.to_string(), [a, b, a])),
                });
            }
        }
    }

    let table = |f: &dyn Fn(&ConditionalSubset, &ConditionalSubset) -> ConditionalSubset| -> Vec<u16> {
        let mut t = vec![0u16; n * n];
        for a in 0..n {
            for b in 0..n {
                t[a * n + b] = index_of(&f(&subsets[a], &subsets[b]), &offs) as u16;
            }
        }
        t
    };
    let un = table(&|x, y| ops.union(x, y));
    let it = table(&|x, y| ops.intersection(x, y));

    // Associativity and both distributive laws over all triples.
    let hits = par::map_range(exec, n, |a| {
        let (ua, ia) = (&un[a * n..(a + 1) * n], &it[a * n..(a + 1) * n]);
        for b in 0..n {
            let (ub, ib) = (&un[b * n..(b + 1) * n], &it[b * n..(b + 1) * n]);
            let (ab_u, ab_i) = (ua[b] as usize, ia[b] as usize);
            let (uab, iab) = (&un[ab_u * n..(ab_u + 1) * n], &it[ab_i * n..(ab_i + 1) * n]);
            let (u_abi, i_abu) = (&un[ab_i * n..(ab_i + 1) * n], &it[ab_u * n..(ab_u + 1) * n]);
            for c in 0..n {
                let (bc_u, bc_i) = (ub[c] as usize, ib[c] as usize);
                let law = if uab[c] != ua[bc_u] {
                    Some("union-associative")
                } else if iab[c] != ia[bc_i] {
                    Some("intersection-associative")
                } else if ia[bc_u] != u_abi[ia[c] as usize] {
                    Some("intersection-distributive")
                } else if ua[bc_i] != i_abu[ua[c] as usize] {
                    Some("union-distributive")
                } else {
                    None
                };
                if let Some(law) = law {
                    return Some((law, [a, b, c]));
                }
            }
        }
        None
    });
    Ok(ExhaustiveReport {
        sizes: sizes.to_vec(),
        subsets: n,
        triples: (n as u64).pow(3),
        violation: hits.into_iter().flatten().next().map(|(l, t)| (l.to_string(), t)),
    })
}

/// [`exhaustive`] over every size vector in `1..=max_size` for every atom
/// count in `1..=max_atoms`.
pub fn exhaustive_all(max_atoms: usize, max_size: usize, exec: Execution) -> Result<Vec<ExhaustiveReport>> {
    let mut out = Vec::new();
    for m in 1..=max_atoms {
        let mut sizes = vec![1usize; m];
        loop {
            out.push(exhaustive(&sizes, exec)?);
            let Some(k) = sizes.iter().position(|&s| s < max_size) else {
                break;
            };
            sizes[k] += 1;
            for s in &mut sizes[..k] {
                *s = 1;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct BrokenComplement<'a>(LibraryOps<'a>);

    impl SubsetOps for BrokenComplement<'_> {
        fn union(&self, a: &ConditionalSubset, b: &ConditionalSubset) -> ConditionalSubset {
            self.0.union(a, b)
        }
        fn intersection(&self, a: &ConditionalSubset, b: &ConditionalSubset) -> ConditionalSubset {
            self.0.intersection(a, b)
        }
        fn complement(&self, a: &ConditionalSubset) -> ConditionalSubset {
            a.clone()
        }
        fn bottom(&self) -> ConditionalSubset {
            self.0.bottom()
        }
        fn top(&self) -> ConditionalSubset {
            self.0.top()
        }
    }

    #[test]
    fn small_grounds_pass() {
        for r in exhaustive_all(2, 2, Execution::Sequential).unwrap() {
            assert_eq!(r.violation, None, "{r:?}");
        }
    }

    #[test]
    fn broken_complement_is_caught() {
        let alg = Algebra::anonymous(1).unwrap();
        let g = Ground::uniform(alg.clone(), &["a", "b"]).unwrap();
        let ops = BrokenComplement(LibraryOps { ground: &g });
        let a = ConditionalSubset::from_masks(&alg, vec![1]).unwrap();
        assert_eq!(first_violation(&ops, &a, &a, &a), Some("complement-join"));
    }

    #[test]
    fn size_vectors_enumerated() {
        assert_eq!(exhaustive_all(2, 2, Execution::Sequential).unwrap().len(), 2 + 4);
    }
}
