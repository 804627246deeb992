use condpref::harness::io::{instance_to_json, parse_instance};
use condpref::harness::{generate, run_suite, InstanceSpec, OracleKind, Suite, SuiteConfig};
use condpref::par::Execution;
use proptest::prelude::*;

fn spec(seed: u64, atoms: usize, tie: f64, outcomes: usize) -> InstanceSpec {
    InstanceSpec { seed, atoms, min_values: 2, max_values: 5, tie_probability: tie, lottery_outcomes: outcomes }
}

proptest! {
    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), atoms in 1usize..=5, outcomes in 0usize..4) {
        let s = spec(seed, atoms, 0.3, if outcomes == 1 { 2 } else { outcomes });
        prop_assert_eq!(instance_to_json(&generate(&s).unwrap()), instance_to_json(&generate(&s).unwrap()));
    }

    #[test]
    fn zero_tie_probability_gives_strict_orders(seed in any::<u64>(), atoms in 1usize..=5) {
        let p = generate(&spec(seed, atoms, 0.0, 0)).unwrap().preference.unwrap();
        let g = p.ground();
        for a in 0..g.atoms() {
            for v in 0..g.size(a) {
                for w in 0..g.size(a) {
                    prop_assert_eq!(v != w, p.strictly_prefers(a, v, w) || p.strictly_prefers(a, w, v));
                }
            }
        }
    }

    #[test]
    fn instances_round_trip_through_json(seed in any::<u64>(), atoms in 1usize..=4, outcomes in 2usize..4, oracle in 0usize..3) {
        let mut inst = generate(&spec(seed, atoms, 0.3, outcomes)).unwrap();
        inst.oracle = [OracleKind::Planted, OracleKind::Lexicographic, OracleKind::RankDependent][oracle];
        let json = instance_to_json(&inst);
        let back = parse_instance(&json.to_string()).unwrap();
        prop_assert_eq!(instance_to_json(&back), json);
    }
}

fn small(suite: Suite, seed: u64, execution: Execution) -> SuiteConfig {
    SuiteConfig { seed, trials: 12, execution, ..SuiteConfig::defaults(suite) }
}

#[test]
fn suite_reports_are_reproducible_and_independent_of_execution() {
    for suite in Suite::ALL {
        for seed in [0, 7, 12345] {
            let seq = run_suite(suite, &small(suite, seed, Execution::Sequential)).unwrap();
            let par = run_suite(suite, &small(suite, seed, Execution::Parallel)).unwrap();
            let again = run_suite(suite, &small(suite, seed, Execution::Parallel)).unwrap();
            assert!(seq.passed(), "{suite} seed {seed}: {:?}", seq.failures);
            assert_eq!(seq.content(), par.content(), "{suite} seed {seed}");
            assert_eq!(par.content(), again.content(), "{suite} seed {seed}");
        }
    }
}

#[test]
fn different_seeds_draw_different_instances() {
    let a = instance_to_json(&generate(&spec(1, 4, 0.3, 0)).unwrap());
    let b = instance_to_json(&generate(&spec(2, 4, 0.3, 0)).unwrap());
    assert_ne!(a, b);
}
