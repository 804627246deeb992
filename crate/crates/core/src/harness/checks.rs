//! Sampled checks of the midpoint embedding and of mixtures under planted
//! expected-utility oracles.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use super::generate::{outcome_labels, random_index, rng, trial_seed, Rng64};
use super::suites::random_lottery;
use crate::condcore::{concatenate, seq_index, CondNatural, CondRational};
use crate::error::{Error, Result};
use crate::events::Algebra;
use crate::gaps::midpoint_embedding;
use crate::par::{self, Execution};
use crate::rational::{self, dyadic, rat, Rational};
use crate::vnm::{
    anchors, calibrate_alpha, expected_utility, mix, mix_scalar, ConditionalLottery, IndependenceSample, PlantedEu,
    PreferenceOracle, UtilityIndex,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn collect(name: &'static str, per_case: Vec<Vec<String>>) -> Self {
        Self {
            name,
            cases: per_case.len(),
            failures: per_case.into_iter().flatten().collect(),
        }
    }
}

/// A chain of `n` elements over `m` atoms with distinct values per atom,
/// enumerated in random order.
pub fn random_chain(r: &mut Rng64, algebra: &Algebra, n: usize) -> Vec<CondRational> {
    let cols: Vec<Vec<Rational>> = (0..algebra.atoms())
        .map(|_| {
            let den: i64 = r.gen_range(1..=6);
            let mut nums: Vec<i64> = (-40..40).collect();
            for i in 0..n {
                let j = r.gen_range(i..nums.len());
                nums.swap(i, j);
            }
            nums[..n].iter().map(|&k| rat(k, den)).collect()
        })
        .collect();
    (0..n)
        .map(|k| CondRational::from_fn(algebra, |a| cols[a][k].clone()))
        .collect()
}

fn midpoint_case(seed: u64, max_len: usize) -> Result<Vec<String>> {
    let mut r = rng(seed);
    let m = r.gen_range(1..=4);
    let n = r.gen_range(1..=max_len);
    let alg = Algebra::anonymous(m)?;
    let chain = random_chain(&mut r, &alg, n);
    let f = midpoint_embedding(&chain)?;
    let mut errs = Vec::new();
    if f.value(1) != &CondRational::constant(&alg, rat(1, 2)) {
        errs.push(format!("seed {seed}: f(u1) is not 1/2"));
    }
    for a in 0..m {
        for k in 0..n {
            for l in 0..n {
                let (uk, ul) = (chain[k].at(a).unwrap(), chain[l].at(a).unwrap());
                let (fk, fl) = (f.values()[k].at(a).unwrap(), f.values()[l].at(a).unwrap());
                if uk < ul && fk >= fl {
                    errs.push(format!("seed {seed}: f not increasing at atom {a} on ({}, {})", k + 1, l + 1));
                }
            }
        }
    }
    for _ in 0..8 {
        let ev = alg.from_bits(r.gen_range(0..1u64 << m))?;
        let (i, j) = (r.gen_range(1..=n as u64), r.gen_range(1..=n as u64));
        let idx = CondNatural::from_fn(&alg, |a| if ev.contains(a) { i } else { j });
        let lhs_direct = f.at_index(&idx)?;
        let lhs_eval = f.eval(&seq_index(&chain, &idx)?)?;
        let vi = f.value(i as usize).clone();
        let vj = f.value(j as usize).clone();
        let rhs = concatenate(&[(ev, &vi), (!ev, &vj)])?;
        if lhs_direct != rhs || lhs_eval != rhs {
            errs.push(format!("seed {seed}: conditional index identity fails for ({i}, {j}) on {ev}"));
        }
    }
    Ok(errs)
}

/// Strict monotonicity, `f(u₁) = 1/2` and the conditional index identity on
/// `count` random chains of length at most `max_len`.
pub fn midpoint_chains(seed: u64, count: usize, max_len: usize, exec: Execution) -> CheckReport {
    let per = par::map_range(exec, count, |t| {
        let s = trial_seed(seed, t);
        midpoint_case(s, max_len).unwrap_or_else(|e| vec![format!("seed {s}: {e}")])
    });
    CheckReport::collect("midpoint-chains", per)
}

fn eu(index: &UtilityIndex, mu: &ConditionalLottery, a: usize) -> Rational {
    expected_utility(index, mu).expect("same outcomes").at(a).unwrap().clone()
}

fn mixture_case(seed: u64, bits: u32) -> Result<Vec<String>> {
    let mut r = rng(seed);
    let m = r.gen_range(1..=3);
    let n = r.gen_range(2..=4);
    let alg = Algebra::anonymous(m)?;
    let os: Arc<[String]> = outcome_labels(n);
    let index = UtilityIndex::new(os.clone(), random_index(&mut r, m, n))?;
    let oracle = PlantedEu { index: index.clone() };
    let mut errs = Vec::new();

    // Best and worst point masses span every atom's utility range.
    let (best, worst): (Vec<usize>, Vec<usize>) = (0..m)
        .map(|a| {
            let row = index.row(a);
            let hi = (0..n).max_by(|&i, &j| row[i].cmp(&row[j])).unwrap();
            let lo = (0..n).min_by(|&i, &j| row[i].cmp(&row[j])).unwrap();
            (hi, lo)
        })
        .unzip();
    let p = ConditionalLottery::point_masses(&alg, os.clone(), &best);
    let q = ConditionalLottery::point_masses(&alg, os.clone(), &worst);

    // Monotone mixtures: x ≻ y everywhere and α < β.
    let x = random_lottery(&mut r, &alg, &os);
    let x = mix_scalar(&rat(1, 2), &x, &p)?;
    let y = mix_scalar(&rat(1, 2), &random_lottery(&mut r, &alg, &os), &q)?;
    let strict = oracle.compare(&x, &y).strict_first.is_full();
    if strict {
        let (a1, a2) = (r.gen_range(0..=16), r.gen_range(0..=16));
        let (lo, hi) = (rat(a1.min(a2), 16), rat(a1.max(a2), 16));
        if lo != hi {
            let t = oracle.compare(&mix_scalar(&hi, &x, &y)?, &mix_scalar(&lo, &x, &y)?);
            if !t.strict_first.is_full() {
                errs.push(format!("seed {seed}: mixture monotonicity fails on {}", !t.strict_first));
            }
        }
    }

    // Substitution: y' ∼ x everywhere, built exactly from the anchors.
    let alpha = CondRational::from_fn(&alg, |a| {
        let (ep, eq) = (eu(&index, &p, a), eu(&index, &q, a));
        if ep == eq {
            rat(1, 2)
        } else {
            (eu(&index, &x, a) - &eq) / (ep - eq)
        }
    });
    let twin = mix(&alpha, &p, &q)?;
    if !oracle.compare(&x, &twin).equiv.is_full() {
        errs.push(format!("seed {seed}: constructed twin is not indifferent"));
    }
    let z = random_lottery(&mut r, &alg, &os);
    let gamma = rat(r.gen_range(0..=12), 12);
    let t = oracle.compare(&mix_scalar(&gamma, &x, &z)?, &mix_scalar(&gamma, &twin, &z)?);
    if !t.equiv.is_full() {
        errs.push(format!("seed {seed}: substitution fails on {}", !t.equiv));
    }

    // Calibration against a planted weight, on atoms where p ≻ q.
    let planted = CondRational::from_fn(&alg, |_| rat(r.gen_range(0..=1000), 1000));
    let live = oracle.compare(&p, &q).strict_first;
    if live.is_full() {
        let target = mix(&planted, &p, &q)?;
        let got = calibrate_alpha(&oracle, &p, &target, &q, bits)?;
        for a in 0..m {
            let (g, w) = (got.at(a).unwrap(), planted.at(a).unwrap());
            if g > w || w - g > dyadic(bits) {
                errs.push(format!(
                    "seed {seed}: calibrated {} for planted {} at atom {a}",
                    rational::format(g),
                    rational::format(w)
                ));
            }
        }
    }
    Ok(errs)
}

/// Monotone mixtures, substitution and calibration accuracy for planted
/// oracles on `count` random triples.
pub fn lottery_mixtures(seed: u64, count: usize, bits: u32, exec: Execution) -> CheckReport {
    let per = par::map_range(exec, count, |t| {
        let s = trial_seed(seed, t);
        mixture_case(s, bits).unwrap_or_else(|e| vec![format!("seed {s}: {e}")])
    });
    CheckReport::collect("lottery-mixtures", per)
}

/// `count` random samples `(x, y, z, α)` with `α = k/12`, `k ≥ 1`.
pub fn independence_samples(
    algebra: &Algebra,
    outcomes: &Arc<[String]>,
    count: usize,
    seed: u64,
) -> Vec<IndependenceSample> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let x = random_lottery(&mut r, algebra, outcomes);
            let y = random_lottery(&mut r, algebra, outcomes);
            let z = random_lottery(&mut r, algebra, outcomes);
            (x, y, z, rat(r.gen_range(1..=12), 12))
        })
        .collect()
}

/// `count` samples `x ≻ y ≻ z` everywhere: `x` and `z` are the oracle's
/// anchors and `y` is a random lottery strictly between them, falling back
/// to a mixture of the anchors after 20 misses.
pub fn archimedean_samples(
    oracle: &dyn PreferenceOracle,
    algebra: &Algebra,
    outcomes: &Arc<[String]>,
    count: usize,
    seed: u64,
) -> Result<Vec<(ConditionalLottery, ConditionalLottery, ConditionalLottery)>> {
    let (best, worst) = anchors(oracle, algebra, outcomes)?;
    let x = ConditionalLottery::point_masses(algebra, outcomes.clone(), &best);
    let z = ConditionalLottery::point_masses(algebra, outcomes.clone(), &worst);
    let flat = !oracle.compare(&x, &z).strict_first;
    if !flat.is_empty() {
        return Err(Error::Degenerate(format!("no strictly ranked pair of outcomes on {flat}")));
    }
    let mut r = rng(seed);
    let between = |y: &ConditionalLottery| {
        oracle.compare(&x, y).strict_first.is_full() && oracle.compare(y, &z).strict_first.is_full()
    };
    (0..count)
        .map(|_| {
            let y = (0..20)
                .map(|_| random_lottery(&mut r, algebra, outcomes))
                .find(|y| between(y));
            let y = match y {
                Some(y) => y,
                None => mix_scalar(&rat(r.gen_range(1..12), 12), &x, &z)?,
            };
            Ok((x.clone(), y, z.clone()))
        })
        .collect()
}
