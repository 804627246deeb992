use condpref::condcore::CondElement;
use condpref::events::Algebra;
use condpref::gaps::{
    canonicalize, find_gaps, gap_normalize, has_normal_gaps, midpoint_embedding, ConditionalIntervalSet, GapShape,
    RationalInterval,
};
use condpref::rational::{int, rat, Rational};
use num_traits::{One, Zero};
use proptest::prelude::*;

const SPAN: usize = 24;

/// Membership of a union of integer-endpoint intervals inside `[0, SPAN]`,
/// as integer points and the open unit cells between them.
#[derive(Debug, Clone)]
struct Grid {
    point: Vec<bool>,
    cell: Vec<bool>,
}

/// Maximal run of missing grid items strictly between members.
#[derive(Debug, PartialEq)]
struct GridGap {
    lo: usize,
    hi: usize,
    lo_closed: bool,
    hi_closed: bool,
}

impl GridGap {
    fn shape(&self) -> GapShape {
        match (self.lo == self.hi, self.lo_closed, self.hi_closed) {
            (true, _, _) => GapShape::Singleton,
            (false, true, true) => GapShape::Closed,
            (false, true, false) => GapShape::LeftClosed,
            (false, false, true) => GapShape::RightClosed,
            (false, false, false) => GapShape::Open,
        }
    }

    fn len(&self) -> usize {
        self.hi - self.lo
    }
}

impl Grid {
    fn build(raw: &[(usize, usize, bool, bool)]) -> Self {
        let mut g = Grid { point: vec![false; SPAN + 1], cell: vec![false; SPAN] };
        for &(lo, len, lc, hc) in raw {
            let hi = lo + len;
            if len == 0 {
                g.point[lo] = true;
                continue;
            }
            g.point[lo] |= lc;
            g.point[hi] |= hc;
            for k in lo..hi {
                g.cell[k] = true;
                if k > lo {
                    g.point[k] = true;
                }
            }
        }
        g
    }

    fn contains(&self, q: &Rational) -> bool {
        if q < &Rational::zero() || q > &int(SPAN as i64) {
            return false;
        }
        let k = q.floor().to_integer().try_into().unwrap_or(0usize);
        if q.is_integer() {
            self.point[k]
        } else {
            self.cell[k]
        }
    }

    /// Items in order: point 0, cell 0, point 1, ...
    fn items(&self) -> Vec<bool> {
        (0..=2 * SPAN).map(|i| if i % 2 == 0 { self.point[i / 2] } else { self.cell[i / 2] }).collect()
    }

    fn gaps(&self) -> Vec<GridGap> {
        let items = self.items();
        let Some(first) = items.iter().position(|&b| b) else { return vec![] };
        let last = items.iter().rposition(|&b| b).unwrap();
        let mut out = Vec::new();
        let mut i = first;
        while i < last {
            if items[i] {
                i += 1;
                continue;
            }
            let start = i;
            while !items[i] {
                i += 1;
            }
            let end = i - 1;
            // Item index 2k is the point k, 2k+1 is the cell (k, k+1).
            out.push(GridGap {
                lo: if start % 2 == 0 { start / 2 } else { (start - 1) / 2 },
                hi: end.div_ceil(2),
                lo_closed: start % 2 == 0,
                hi_closed: end % 2 == 0,
            });
        }
        out
    }

    /// `x` minus the total length of the non-open gaps below it.
    fn expected_shift(&self, x: &Rational) -> Rational {
        let below: usize = self
            .gaps()
            .iter()
            .filter(|g| g.shape() != GapShape::Open && int(g.hi as i64) <= *x)
            .map(GridGap::len)
            .sum();
        x - int(below as i64)
    }
}

fn raw_intervals() -> impl Strategy<Value = Vec<(usize, usize, bool, bool)>> {
    prop::collection::vec((0usize..SPAN - 4, 0usize..=4, any::<bool>(), any::<bool>()), 1..6)
}

fn interval((lo, len, lc, hc): (usize, usize, bool, bool)) -> RationalInterval {
    let (lo, hi) = (int(lo as i64), int((lo + len) as i64));
    if len == 0 {
        RationalInterval::point(lo)
    } else {
        RationalInterval::new(lo.into(), hi.into(), lc, hc).unwrap()
    }
}

fn build(raws: &[Vec<(usize, usize, bool, bool)>]) -> (ConditionalIntervalSet, Vec<Grid>) {
    let alg = Algebra::anonymous(raws.len()).unwrap();
    let set = canonicalize(&alg, raws.iter().map(|r| r.iter().copied().map(interval).collect()).collect()).unwrap();
    (set, raws.iter().map(|r| Grid::build(r)).collect())
}

/// Quarter-integer probes across the span and a little beyond.
fn probes() -> impl Iterator<Item = Rational> {
    (-4..=(4 * SPAN as i64 + 4)).map(|k| rat(k, 4))
}

proptest! {
    #[test]
    fn canonical_form_preserves_membership(raws in prop::collection::vec(raw_intervals(), 1..4)) {
        let (set, grids) = build(&raws);
        for (a, grid) in grids.iter().enumerate() {
            for q in probes() {
                prop_assert_eq!(set.contains(a, &q), grid.contains(&q), "atom {} at {}", a, q);
            }
            let cs = set.components(a);
            for w in cs.windows(2) {
                // Sorted, disjoint and not touching through a shared attained endpoint.
                prop_assert!(w[0].hi() < w[1].lo() || (w[0].hi() == w[1].lo() && !w[0].hi_closed() && !w[1].lo_closed()));
            }
        }
    }

    #[test]
    fn gap_shapes_match_the_grid(raws in prop::collection::vec(raw_intervals(), 1..4)) {
        let (set, grids) = build(&raws);
        let records = find_gaps(&set);
        for (a, grid) in grids.iter().enumerate() {
            let expected = grid.gaps();
            let found: Vec<GapShape> = records.iter().filter_map(|r| r.shape_at(a)).collect();
            prop_assert_eq!(found, expected.iter().map(GridGap::shape).collect::<Vec<_>>());
        }
        for r in &records {
            for shape in GapShape::ALL {
                let e = r.shape_event(shape);
                prop_assert!(e.is_subset(&r.living));
                for a in e.atoms() {
                    prop_assert_eq!(r.shape_at(a), Some(shape));
                }
            }
        }
    }

    #[test]
    fn normalization_matches_the_length_oracle(raws in prop::collection::vec(raw_intervals(), 1..4)) {
        let (set, grids) = build(&raws);
        let (g, image) = gap_normalize(&set);
        prop_assert!(has_normal_gaps(&image));
        for (a, grid) in grids.iter().enumerate() {
            let members: Vec<Rational> = probes().filter(|q| grid.contains(q)).collect();
            for q in &members {
                let gq = g.apply(a, q).expect("source covered");
                prop_assert_eq!(&gq, &grid.expected_shift(q));
                prop_assert!(image.contains(a, &gq));
            }
            for w in members.windows(2) {
                prop_assert!(g.apply(a, &w[0]).unwrap() < g.apply(a, &w[1]).unwrap());
            }
            // Open gaps survive, closed and singleton gaps become singletons, half-open ones merge.
            let expected = grid.gaps().iter().filter(|x| matches!(x.shape(), GapShape::Open | GapShape::Closed | GapShape::Singleton)).count();
            let image_gaps = find_gaps(&image).iter().filter(|r| r.living.contains(a)).count();
            prop_assert_eq!(image_gaps, expected);
            prop_assert!(image_gaps <= grid.gaps().len());
        }
    }

    #[test]
    fn normalization_is_idempotent(raws in prop::collection::vec(raw_intervals(), 1..4)) {
        let (set, _) = build(&raws);
        let (_, once) = gap_normalize(&set);
        let (g2, twice) = gap_normalize(&once);
        prop_assert_eq!(twice.components(0), once.components(0));
        for a in 0..raws.len() {
            for p in g2.pieces(a) {
                prop_assert!(p.offset.is_zero() && p.scale.is_one());
            }
        }
    }

    #[test]
    fn midpoint_embedding_preserves_order_and_agrees_with_the_sup_rule(
        cols in prop::collection::vec(prop::collection::hash_set(-30i64..30, 1..12), 1..4),
    ) {
        let n = cols.iter().map(|c| c.len()).min().unwrap();
        let cols: Vec<Vec<i64>> = cols.into_iter().map(|c| c.into_iter().take(n).collect()).collect();
        let alg = Algebra::anonymous(cols.len()).unwrap();
        let chain: Vec<_> = (0..n).map(|k| CondElement::from_fn(&alg, |a| int(cols[a][k]))).collect();
        let f = midpoint_embedding(&chain).unwrap();
        for a in 0..cols.len() {
            prop_assert_eq!(f.value(1).at(a).unwrap(), &rat(1, 2));
            for i in 0..n {
                let fi = f.value(i + 1).at(a).unwrap();
                prop_assert!(fi > &Rational::zero() && fi < &Rational::one());
                let d = fi.denom();
                prop_assert!((d & (d - 1u32)).is_zero());
                prop_assert_eq!(&f.extend(a, &int(cols[a][i])), fi);
                for j in 0..n {
                    let fj = f.value(j + 1).at(a).unwrap();
                    prop_assert_eq!(cols[a][i] < cols[a][j], fi < fj);
                }
            }
            // The extension is monotone and vanishes below the chain.
            prop_assert!(f.extend(a, &int(-31)).is_zero());
            let ext: Vec<Rational> = (-31..31).map(|s| f.extend(a, &int(s))).collect();
            prop_assert!(ext.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
