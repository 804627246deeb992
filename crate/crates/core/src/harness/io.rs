//! JSON encodings of instances, utilities, interval sets and lotteries.
//!
//! Rationals are always written as `"p/q"`. Events are arrays of atom
//! labels in atom order. Unbounded interval ends use the sentinels `"inf"`
//! (for −∞) and `"sup"` (for +∞); `"-inf"` and `"+inf"` are accepted too.

use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::generate::{Instance, OracleKind};
use crate::condcore::{Act, CondRational, ConditionalSubset, Ground};
use crate::error::{Error, Result};
use crate::events::{Algebra, Event};
use crate::gaps::{ConditionalIntervalSet, ExtRational, GapRecord, PiecewiseMap, RationalInterval};
use crate::preference::{
    Assertion, AxiomReport, ConditionalPreference, RelationGraph, TriPartition,
};
use crate::rational::{self, Rational};
use crate::representation::{FiniteCondTopology, UtilityTable, WeightScheme};
use crate::vnm::{ConditionalLottery, UtilityIndex};

fn malformed(e: serde_json::Error) -> Error {
    Error::Malformed(e.to_string())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssertionFile {
    x: IndexMap<String, String>,
    y: IndexMap<String, String>,
    event: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    atoms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ground: Option<IndexMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ranking: Option<IndexMap<String, Vec<Vec<String>>>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    allow_trivial: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    relation: Option<Vec<AssertionFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    outcomes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    planted_index: Option<IndexMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "is_planted")]
    oracle: OracleKind,
}

fn is_planted(k: &OracleKind) -> bool {
    *k == OracleKind::Planted
}

/// Looks up `atom`'s entry in a map keyed by atom labels.
fn per_atom<'a, T>(map: &'a IndexMap<String, T>, algebra: &Algebra, what: &str) -> Result<Vec<&'a T>> {
    if let Some(k) = map.keys().find(|k| algebra.index_of(k).is_none()) {
        return Err(Error::Malformed(format!("{what} names unknown atom `{k}`")));
    }
    algebra
        .labels()
        .iter()
        .map(|l| {
            map.get(l)
                .ok_or_else(|| Error::Malformed(format!("{what} has no entry for atom `{l}`")))
        })
        .collect()
}

fn parse_rationals(items: &[String]) -> Result<Vec<Rational>> {
    items.iter().map(|s| rational::parse(s)).collect()
}

fn rationals(items: &[Rational]) -> Vec<String> {
    items.iter().map(rational::format).collect()
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(malformed)?;
    let algebra = Algebra::new(&file.atoms)?;
    let ground = match &file.ground {
        Some(g) => {
            let values = per_atom(g, &algebra, "ground")?.into_iter().cloned().collect();
            Some(Ground::new(algebra.clone(), values)?)
        }
        None => None,
    };
    let preference = match (&file.ranking, &ground) {
        (Some(r), Some(g)) => {
            let groups: Vec<Vec<Vec<String>>> = per_atom(r, &algebra, "ranking")?.into_iter().cloned().collect();
            Some(ConditionalPreference::from_labels(g.clone(), &groups, file.allow_trivial)?)
        }
        (Some(_), None) => return Err(Error::Malformed("a ranking needs ground sets".into())),
        _ => None,
    };
    let relation = match (&file.relation, &ground) {
        (Some(pairs), Some(g)) => Some(RelationGraph {
            pairs: pairs
                .iter()
                .map(|p| {
                    Ok(Assertion {
                        x: parse_act(g, &p.x)?,
                        y: parse_act(g, &p.y)?,
                        event: algebra.event_from_labels(&p.event)?,
                    })
                })
                .collect::<Result<_>>()?,
        }),
        (Some(_), None) => return Err(Error::Malformed("a relation needs ground sets".into())),
        _ => None,
    };
    let outcomes: Option<Arc<[String]>> = file.outcomes.map(Into::into);
    let planted_index = match (&file.planted_index, &outcomes) {
        (Some(rows), Some(os)) => {
            let u = per_atom(rows, &algebra, "planted_index")?
                .into_iter()
                .map(|r| parse_rationals(r))
                .collect::<Result<_>>()?;
            Some(UtilityIndex::new(os.clone(), u)?)
        }
        (Some(_), None) => return Err(Error::Malformed("a planted index needs outcomes".into())),
        _ => None,
    };
    Ok(Instance {
        algebra,
        ground,
        preference,
        relation,
        outcomes,
        planted_index,
        oracle: file.oracle,
    })
}

pub fn instance_to_json(inst: &Instance) -> Value {
    let alg = &inst.algebra;
    let file = InstanceFile {
        atoms: alg.labels().to_vec(),
        ground: inst.ground.as_ref().map(|g| {
            (0..alg.atoms())
                .map(|a| (alg.label(a).to_string(), g.values(a).to_vec()))
                .collect()
        }),
        ranking: inst.preference.as_ref().map(ranking_map),
        allow_trivial: inst.preference.as_ref().is_some_and(|p| p.is_trivial()),
        relation: match (&inst.relation, &inst.ground) {
            (Some(r), Some(g)) => Some(
                r.pairs
                    .iter()
                    .map(|p| AssertionFile {
                        x: act_map(g, &p.x),
                        y: act_map(g, &p.y),
                        event: alg.event_labels(p.event),
                    })
                    .collect(),
            ),
            _ => None,
        },
        outcomes: inst.outcomes.as_ref().map(|o| o.to_vec()),
        planted_index: inst.planted_index.as_ref().map(|u| {
            (0..alg.atoms())
                .map(|a| (alg.label(a).to_string(), rationals(u.row(a))))
                .collect()
        }),
        oracle: inst.oracle,
    };
    serde_json::to_value(file).expect("instance encodes")
}

fn ranking_map(p: &ConditionalPreference) -> IndexMap<String, Vec<Vec<String>>> {
    let g = p.ground();
    (0..p.atoms())
        .map(|a| {
            let groups = p
                .groups(a)
                .iter()
                .map(|grp| grp.iter().map(|&v| g.values(a)[v].clone()).collect())
                .collect();
            (g.algebra().label(a).to_string(), groups)
        })
        .collect()
}

pub fn event_json(algebra: &Algebra, e: Event) -> Value {
    json!(algebra.event_labels(e))
}

fn act_map(g: &Ground, x: &Act) -> IndexMap<String, String> {
    (0..g.atoms())
        .filter_map(|a| x.at(a).map(|&v| (g.algebra().label(a).to_string(), g.values(a)[v].clone())))
        .collect()
}

pub fn act_json(g: &Ground, x: &Act) -> Value {
    json!(act_map(g, x))
}

pub fn parse_act(g: &Ground, map: &IndexMap<String, String>) -> Result<Act> {
    let labels: Vec<&String> = per_atom(map, g.algebra(), "act")?;
    g.act(&labels)
}

/// Reads an act given either as one value label (the constant act) or as
/// `atom=value` pairs separated by commas.
pub fn parse_act_spec(g: &Ground, spec: &str) -> Result<Act> {
    if !spec.contains('=') {
        return g.constant_act(spec);
    }
    let mut map = IndexMap::new();
    for part in spec.split(',') {
        let (a, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Malformed(format!("expected atom=value, got `{part}`")))?;
        map.insert(a.trim().to_string(), v.trim().to_string());
    }
    parse_act(g, &map)
}

pub fn cond_rational_json(algebra: &Algebra, q: &CondRational) -> Value {
    let m: Map<String, Value> = (0..algebra.atoms())
        .filter_map(|a| q.at(a).map(|v| (algebra.label(a).to_string(), json!(rational::format(v)))))
        .collect();
    Value::Object(m)
}

pub fn subset_json(g: &Ground, s: &ConditionalSubset) -> Value {
    json!(s.labels(g))
}

pub fn partition_json(algebra: &Algebra, t: &TriPartition) -> Value {
    json!({
        "equiv": event_json(algebra, t.equiv),
        "strict_first": event_json(algebra, t.strict_first),
        "strict_second": event_json(algebra, t.strict_second),
    })
}

pub fn axiom_report_json(g: &Ground, r: &AxiomReport) -> Value {
    let alg = g.algebra();
    json!({
        "passed": r.passed(),
        "violations": r.violations.iter().map(|v| json!({
            "axiom": v.axiom,
            "x": act_json(g, &v.x),
            "y": act_json(g, &v.y),
            "event": event_json(alg, v.event),
            "detail": v.detail,
        })).collect::<Vec<_>>(),
        "induced_ranking": r.induced.as_ref().map(ranking_map),
    })
}

/// `{value: {atom: "p/q"}}` over every value name in the ground.
pub fn utility_json(u: &UtilityTable) -> Value {
    let g = u.ground();
    let mut out: IndexMap<String, IndexMap<String, String>> = IndexMap::new();
    for a in 0..g.atoms() {
        for (v, name) in g.values(a).iter().enumerate() {
            out.entry(name.clone())
                .or_default()
                .insert(g.algebra().label(a).to_string(), rational::format(u.at(a, v)));
        }
    }
    json!(out)
}

/// Weights as `{atom: {value: "p/q"}}`.
pub fn parse_weights(g: &Ground, text: &str) -> Result<WeightScheme> {
    let map: IndexMap<String, IndexMap<String, String>> = serde_json::from_str(text).map_err(malformed)?;
    let rows = per_atom(&map, g.algebra(), "weights")?;
    let mut weights = Vec::with_capacity(g.atoms());
    for (a, row) in rows.into_iter().enumerate() {
        if let Some(k) = row.keys().find(|k| g.value_index(a, k).is_none()) {
            return Err(Error::Malformed(format!("weight for unknown value `{k}`")));
        }
        let w = g
            .values(a)
            .iter()
            .map(|v| {
                row.get(v)
                    .ok_or_else(|| Error::Malformed(format!("no weight for value `{v}`")))
                    .and_then(|s| rational::parse(s))
            })
            .collect::<Result<Vec<_>>>()?;
        weights.push(w);
    }
    WeightScheme::new(g, weights)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyFile {
    base: Vec<IndexMap<String, Vec<String>>>,
    #[serde(default)]
    weights: Option<Vec<String>>,
}

/// A topology file lists base sets as `{atom: [values]}`; atoms left out
/// are outside the base set's living event.
pub fn parse_topology(g: &Ground, text: &str) -> Result<(FiniteCondTopology, Option<Vec<Rational>>)> {
    let file: TopologyFile = serde_json::from_str(text).map_err(malformed)?;
    let alg = g.algebra();
    let mut base = Vec::with_capacity(file.base.len());
    for set in &file.base {
        let mut masks = vec![0u64; g.atoms()];
        for (label, values) in set {
            let a = alg
                .index_of(label)
                .ok_or_else(|| Error::Malformed(format!("unknown atom `{label}`")))?;
            for v in values {
                let i = g
                    .value_index(a, v)
                    .ok_or_else(|| Error::Malformed(format!("unknown value `{v}` at `{label}`")))?;
                masks[a] |= 1 << i;
            }
        }
        base.push(ConditionalSubset::from_masks(alg, masks)?);
    }
    let weights = file.weights.as_deref().map(parse_rationals).transpose()?;
    Ok((FiniteCondTopology::new(g, base)?, weights))
}

fn ext_json(q: &ExtRational) -> Value {
    match q {
        ExtRational::NegInf => json!("inf"),
        ExtRational::PosInf => json!("sup"),
        ExtRational::Finite(r) => json!(rational::format(r)),
    }
}

fn parse_ext(s: &str) -> Result<ExtRational> {
    Ok(match s {
        "inf" | "-inf" => ExtRational::NegInf,
        "sup" | "+inf" => ExtRational::PosInf,
        _ => ExtRational::Finite(rational::parse(s)?),
    })
}

pub fn interval_json(i: &RationalInterval) -> Value {
    json!({
        "lo": ext_json(i.lo()),
        "hi": ext_json(i.hi()),
        "lo_closed": i.lo_closed(),
        "hi_closed": i.hi_closed(),
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalFile {
    lo: String,
    hi: String,
    lo_closed: bool,
    hi_closed: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalSetFile {
    #[serde(default)]
    atoms: Option<Vec<String>>,
    intervals: IndexMap<String, Vec<IntervalFile>>,
}

/// Reads `{"atoms"?: [...], "intervals": {atom: [interval]}}`. Without an
/// atom list the keys of `intervals` fix the atoms; otherwise atoms missing
/// from `intervals` are outside the living event.
pub fn parse_interval_set(text: &str) -> Result<ConditionalIntervalSet> {
    let file: IntervalSetFile = serde_json::from_str(text).map_err(malformed)?;
    let labels = file
        .atoms
        .clone()
        .unwrap_or_else(|| file.intervals.keys().cloned().collect());
    let algebra = Algebra::new(&labels)?;
    if let Some(k) = file.intervals.keys().find(|k| algebra.index_of(k).is_none()) {
        return Err(Error::Malformed(format!("intervals name unknown atom `{k}`")));
    }
    let raw = labels
        .iter()
        .map(|l| {
            file.intervals
                .get(l)
                .map(|items| {
                    items
                        .iter()
                        .map(|i| {
                            RationalInterval::new(parse_ext(&i.lo)?, parse_ext(&i.hi)?, i.lo_closed, i.hi_closed)
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .unwrap_or_else(|| Ok(Vec::new()))
        })
        .collect::<Result<Vec<_>>>()?;
    crate::gaps::canonicalize(&algebra, raw)
}

pub fn interval_set_json(s: &ConditionalIntervalSet) -> Value {
    let alg = s.algebra();
    let intervals: Map<String, Value> = (0..alg.atoms())
        .filter(|&a| s.living().contains(a))
        .map(|a| {
            (
                alg.label(a).to_string(),
                Value::Array(s.components(a).iter().map(interval_json).collect()),
            )
        })
        .collect();
    json!({ "atoms": alg.labels(), "intervals": intervals })
}

pub fn gaps_json(algebra: &Algebra, gaps: &[GapRecord]) -> Value {
    Value::Array(
        gaps.iter()
            .map(|r| {
                let per: Map<String, Value> = (0..algebra.atoms())
                    .filter_map(|a| {
                        r.intervals[a].as_ref().map(|i| {
                            let mut v = interval_json(i);
                            v["shape"] = json!(r.shape_at(a));
                            (algebra.label(a).to_string(), v)
                        })
                    })
                    .collect();
                json!({ "index": r.index, "living": event_json(algebra, r.living), "gaps": per })
            })
            .collect(),
    )
}

pub fn piecewise_json(algebra: &Algebra, g: &PiecewiseMap) -> Value {
    let m: Map<String, Value> = (0..algebra.atoms())
        .map(|a| {
            let pieces = g
                .pieces(a)
                .iter()
                .map(|p| {
                    json!({
                        "source": interval_json(&p.source),
                        "scale": rational::format(&p.scale),
                        "offset": rational::format(&p.offset),
                    })
                })
                .collect();
            (algebra.label(a).to_string(), Value::Array(pieces))
        })
        .collect();
    Value::Object(m)
}

pub fn lottery_json(mu: &ConditionalLottery) -> Value {
    let alg = mu.algebra();
    let pmf: Map<String, Value> = (0..alg.atoms())
        .map(|a| (alg.label(a).to_string(), json!(rationals(mu.pmf(a)))))
        .collect();
    json!({ "outcomes": mu.outcomes().to_vec(), "pmf": pmf })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LotteryFile {
    outcomes: Vec<String>,
    pmf: IndexMap<String, Vec<String>>,
}

pub fn parse_lottery(algebra: &Algebra, text: &str) -> Result<ConditionalLottery> {
    let file: LotteryFile = serde_json::from_str(text).map_err(malformed)?;
    let pmf = per_atom(&file.pmf, algebra, "pmf")?
        .into_iter()
        .map(|r| parse_rationals(r))
        .collect::<Result<_>>()?;
    ConditionalLottery::new(algebra, file.outcomes.into(), pmf)
}

/// `{atom: {outcome: "p/q"}}`.
pub fn index_json(algebra: &Algebra, u: &UtilityIndex) -> Value {
    let m: Map<String, Value> = (0..algebra.atoms())
        .map(|a| {
            let row: Map<String, Value> = u
                .outcomes()
                .iter()
                .zip(u.row(a))
                .map(|(o, q)| (o.clone(), json!(rational::format(q))))
                .collect();
            (algebra.label(a).to_string(), Value::Object(row))
        })
        .collect();
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generate::{generate, walk_museum, InstanceSpec};

    #[test]
    fn instance_round_trip() {
        let inst = generate(&InstanceSpec {
            seed: 7,
            atoms: 3,
            lottery_outcomes: 3,
            ..Default::default()
        })
        .unwrap();
        let v = instance_to_json(&inst);
        assert_eq!(instance_to_json(&parse_instance(&v.to_string()).unwrap()), v);
    }

    #[test]
    fn relation_round_trip() {
        let mut inst = walk_museum();
        inst.relation = Some(crate::preference::induced_graph(inst.preference.as_ref().unwrap()));
        let v = instance_to_json(&inst);
        let back = parse_instance(&v.to_string()).unwrap();
        assert_eq!(back.relation.as_ref().unwrap().pairs.len(), 15);
        assert_eq!(instance_to_json(&back), v);
    }

    #[test]
    fn unknown_fields_are_malformed() {
        let err = parse_instance(r#"{"atoms":["a"],"bogus":1}"#).unwrap_err();
        assert!(matches!(err, Error::Malformed(_)));
    }

    #[test]
    fn interval_sentinels() {
        let text = r#"{"intervals":{"a":[{"lo":"inf","hi":"0/1","lo_closed":false,"hi_closed":true},
                                         {"lo":"1","hi":"+inf","lo_closed":false,"hi_closed":false}]}}"#;
        let s = parse_interval_set(text).unwrap();
        assert_eq!(s.components(0).len(), 2);
        let back = parse_interval_set(&interval_set_json(&s).to_string()).unwrap();
        assert_eq!(back.components(0), s.components(0));
        assert_eq!(interval_json(&s.components(0)[1])["hi"], json!("sup"));
    }

    #[test]
    fn act_specs() {
        let inst = walk_museum();
        let g = inst.ground.as_ref().unwrap();
        let x = parse_act_spec(g, "sunny=walk,not_sunny=museum").unwrap();
        assert_eq!(act_json(g, &x), json!({"sunny": "walk", "not_sunny": "museum"}));
        assert!(parse_act_spec(g, "swim").is_err());
    }
}
