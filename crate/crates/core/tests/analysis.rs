mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use support::Gen;
use wsticky::analysis::{
    build_dependency_graph, classify, compute_ranks, mark_variables, Analysis, DependencyGraph,
    Rank,
};
use wsticky::model::{Position, Rule};
use wsticky::syntax::parse_program;

fn rules(text: &str) -> Vec<Rule> {
    parse_program(text).unwrap().rules
}

fn pos(p: &str, i: usize) -> Position {
    Position::new(p, i - 1)
}

const RSU_CYCLE: &str = "
r(X,Y), p(X,Z) -> s(X,Y,Z).
u(X) -> exists Y: r(Y,X).
s(X,Y,Z) -> u(Y).
";

const VRPT: &str = "
v(X) -> exists Y: r(X,Y).
p(X,Y) -> exists Z: p(Y,Z).
r(X,Y), r(Y,Z) -> p(X,Z).
p(X,Y), p(Y,Z) -> t(Y,Z).
";

fn marked(rules: &[Rule]) -> BTreeSet<(usize, String)> {
    mark_variables(rules)
        .marked
        .into_iter()
        .map(|(i, v)| (i, v.to_string()))
        .collect()
}

fn pairs(items: &[(usize, &str)]) -> BTreeSet<(usize, String)> {
    items.iter().map(|(i, v)| (*i, v.to_string())).collect()
}

#[test]
fn rsu_cycle_marking() {
    let m = marked(&rules(RSU_CYCLE));
    assert_eq!(m, pairs(&[(0, "X"), (0, "Z"), (2, "X"), (2, "Z")]));
}

#[test]
fn no_marks_when_every_body_variable_reaches_the_head() {
    assert!(mark_variables(&rules("p(X,Y) -> q(X,Y).")).is_empty());
}

#[test]
fn vrpt_marking() {
    let m = marked(&rules(VRPT));
    for expected in [(1, "X"), (1, "Y"), (2, "Y"), (3, "X")] {
        assert!(
            m.contains(&(expected.0, expected.1.to_string())),
            "{expected:?}"
        );
    }
    // the propagation step reaches further than the displayed hats
    assert_eq!(
        m,
        pairs(&[
            (0, "X"),
            (1, "X"),
            (1, "Y"),
            (2, "X"),
            (2, "Y"),
            (2, "Z"),
            (3, "X")
        ])
    );
}

#[test]
fn rsu_cycle_graph() {
    let g = build_dependency_graph(&rules(RSU_CYCLE));
    let special: BTreeSet<_> = [(pos("u", 1), pos("r", 1))].into_iter().collect();
    assert_eq!(g.special_edges, special);
    for (a, b) in [
        (pos("r", 1), pos("s", 1)),
        (pos("p", 1), pos("s", 1)),
        (pos("r", 2), pos("s", 2)),
        (pos("p", 2), pos("s", 3)),
        (pos("s", 2), pos("u", 1)),
        (pos("u", 1), pos("r", 2)),
    ] {
        assert!(
            g.normal_edges.contains(&(a.clone(), b.clone())),
            "{a} -> {b}"
        );
    }
    assert_eq!(g.normal_edges.len(), 6);
}

#[test]
fn no_existentials_no_special_edges() {
    let g = build_dependency_graph(&rules("p(X,Y) -> q(Y,X).\nq(X,Y) -> p(X,X)."));
    assert!(g.special_edges.is_empty());
}

#[test]
fn single_existential_rule_graph() {
    let g = build_dependency_graph(&rules("p(X,Y) -> exists Z: p(Y,Z)."));
    let normal: BTreeSet<_> = [(pos("p", 2), pos("p", 1))].into_iter().collect();
    let special: BTreeSet<_> = [(pos("p", 2), pos("p", 2))].into_iter().collect();
    assert_eq!(g.normal_edges, normal);
    assert_eq!(g.special_edges, special);
}

#[test]
fn rsu_cycle_ranks() {
    let r = compute_ranks(&build_dependency_graph(&rules(RSU_CYCLE)));
    for (p, i) in [("u", 1), ("s", 2), ("r", 2), ("s", 3), ("p", 1), ("p", 2)] {
        assert_eq!(r.rank(&pos(p, i)), Some(Rank::Finite(0)), "{p}[{i}]");
    }
    for (p, i) in [("r", 1), ("s", 1)] {
        assert_eq!(r.rank(&pos(p, i)), Some(Rank::Finite(1)), "{p}[{i}]");
    }
    assert!(r.infinite().is_empty());
}

#[test]
fn vrpt_partition() {
    let r = compute_ranks(&build_dependency_graph(&rules(VRPT)));
    assert_eq!(r.finite(), vec![pos("v", 1), pos("r", 1), pos("r", 2)]);
    assert_eq!(
        r.infinite(),
        vec![pos("p", 1), pos("p", 2), pos("t", 1), pos("t", 2)]
    );
}

#[test]
fn empty_rule_set_ranks_over_declared_schema() {
    let program = parse_program("p(a,b).\ns(c).").unwrap();
    let a = Analysis::of_program(&program, None).unwrap();
    assert_eq!(a.ranks.finite().len(), 3);
    assert!(a.ranks.iter().all(|(_, r)| r == Rank::Finite(0)));
    assert!(a.report.weakly_acyclic && a.report.sticky && a.report.weakly_sticky);
}

#[test]
fn rsu_cycle_classes() {
    let c = classify(&rules(RSU_CYCLE));
    assert!(!c.sticky);
    assert!(c.weakly_acyclic);
    assert!(c.weakly_sticky);
}

#[test]
fn vrpt_classes() {
    let c = classify(&rules(VRPT));
    assert!(c.weakly_sticky);
    assert!(!c.weakly_acyclic);
    assert!(!c.sticky);
    assert!(!c.zero_infinity);
}

#[test]
fn non_ws_program() {
    // X is marked and p[1] has infinite rank
    let c = classify(&rules(
        "p(X,Y) -> exists Z: p(Y,Z).\np(X,Y), p(X,Z) -> s(Y).",
    ));
    assert!(!c.weakly_sticky);
}

/// Marking by repeated full sweeps of the two-step definition, visiting rules
/// in the given order.
fn marking_oracle(rules: &[Rule], order: &[usize]) -> BTreeSet<(usize, Arc<str>)> {
    let mut marked: BTreeSet<(usize, Arc<str>)> = BTreeSet::new();
    for &i in order {
        let r = &rules[i];
        for v in r.body_variables() {
            if !r.head.variables().any(|w| *w == v) {
                marked.insert((i, v));
            }
        }
    }
    loop {
        let before = marked.len();
        for &i in order {
            let positions: Vec<Position> = marked
                .iter()
                .filter(|(j, _)| *j == i)
                .flat_map(|(_, v)| rules[i].body_positions_of(v))
                .collect();
            for pi in positions {
                for &j in order {
                    let other = &rules[j];
                    for v in other.body_variables() {
                        if other.head_positions_of(&v).contains(&pi) {
                            marked.insert((j, v));
                        }
                    }
                }
            }
        }
        if marked.len() == before {
            return marked;
        }
    }
}

/// Rank by bounded walk enumeration: the largest special-edge count over
/// walks of bounded length ending at each vertex. A finite rank never
/// exceeds the number of special edges, so exceeding it means infinite.
fn rank_oracle(g: &DependencyGraph) -> BTreeMap<Position, Rank> {
    let mut edges: Vec<(&Position, &Position, usize)> = Vec::new();
    edges.extend(g.normal_edges.iter().map(|(a, b)| (a, b, 0)));
    edges.extend(g.special_edges.iter().map(|(a, b)| (a, b, 1)));
    let bound = g.positions.len() * (1 + g.special_edges.len()) + 1;
    let mut best: BTreeMap<&Position, usize> = g.positions.iter().map(|p| (p, 0)).collect();
    for _ in 0..bound {
        let mut next = best.clone();
        for (a, b, w) in &edges {
            let cand = best[a] + w;
            if cand > next[b] {
                next.insert(b, cand);
            }
        }
        best = next;
    }
    best.into_iter()
        .map(|(p, n)| {
            let r = if n > g.special_edges.len() {
                Rank::Infinite
            } else {
                Rank::Finite(n)
            };
            (p.clone(), r)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn marking_matches_sweeps_in_any_order(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let rules = g.rules(4, 3);
        let mut order: Vec<usize> = (0..rules.len()).collect();
        order.shuffle(&mut g.rng);
        prop_assert_eq!(mark_variables(&rules).marked, marking_oracle(&rules, &order));
    }

    #[test]
    fn ranks_match_walk_enumeration(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let rules = g.rules(3, 2);
        let graph = build_dependency_graph(&rules);
        prop_assume!(graph.positions.len() <= 8);
        let ranks = compute_ranks(&graph);
        let oracle = rank_oracle(&graph);
        for (p, r) in ranks.iter() {
            prop_assert_eq!(Some(&r), oracle.get(p), "{}", p);
        }
    }

    #[test]
    fn class_implications(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let c = classify(&g.rules(4, 3));
        prop_assert!(!c.sticky || c.weakly_sticky);
        prop_assert!(!c.weakly_acyclic || c.weakly_sticky);
    }

    #[test]
    fn ranks_partition_the_schema(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let p = g.program(4, 3, 4);
        let a = Analysis::of_program(&p, None).unwrap();
        let fin: BTreeSet<_> = a.ranks.finite().into_iter().collect();
        let inf: BTreeSet<_> = a.ranks.infinite().into_iter().collect();
        let all: BTreeSet<_> = a.schema.positions().collect();
        prop_assert!(fin.is_disjoint(&inf));
        prop_assert_eq!(fin.union(&inf).cloned().collect::<BTreeSet<_>>(), all);
    }
}
