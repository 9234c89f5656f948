#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wsticky::analysis::{classify, Analysis};
use wsticky::chase::GroundProgram;
use wsticky::model::{pi_homomorphic, Atom, ConjunctiveQuery, Program, Rule, Term};

pub const PREDICATES: &[(&str, usize)] = &[("p", 2), ("r", 2), ("s", 1), ("t", 2)];
pub const VARIABLES: &[&str] = &["X", "Y", "Z", "W"];
pub const CONSTANTS: &[&str] = &["a", "b", "c"];

/// Seeded generator of small rule sets, databases and queries.
pub struct Gen {
    pub rng: ChaCha8Rng,
    /// Chance that a rule head gets an existential variable.
    pub existential_rate: f64,
    pub max_query_atoms: usize,
    pub predicates: &'static [(&'static str, usize)],
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            existential_rate: 0.35,
            max_query_atoms: 2,
            predicates: PREDICATES,
        }
    }

    fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.rng.random_range(0..items.len())]
    }

    fn body_term(&mut self) -> Term {
        if self.rng.random_bool(0.1) {
            Term::constant(*self.pick(CONSTANTS))
        } else {
            Term::var(*self.pick(VARIABLES))
        }
    }

    pub fn rule(&mut self, max_body: usize) -> Rule {
        let n = self.rng.random_range(1..=max_body);
        let body: Vec<Atom> = (0..n)
            .map(|_| {
                let (p, k) = *self.pick(self.predicates);
                Atom::new(p, (0..k).map(|_| self.body_term()).collect())
            })
            .collect();
        let body_vars: Vec<Term> = body
            .iter()
            .flat_map(|a| a.args.iter())
            .filter(|t| t.is_variable())
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let (p, k) = *self.pick(self.predicates);
        let existential = self.rng.random_bool(self.existential_rate);
        let mut head_args = Vec::new();
        for _ in 0..k {
            let roll = self.rng.random_range(0..10);
            let t = if existential && roll < 3 {
                Term::var("E")
            } else if roll == 9 || body_vars.is_empty() {
                Term::constant(*self.pick(CONSTANTS))
            } else {
                self.pick(&body_vars).clone()
            };
            head_args.push(t);
        }
        Rule::with_inferred_existentials(body, Atom::new(p, head_args))
    }

    pub fn rules(&mut self, max_rules: usize, max_body: usize) -> Vec<Rule> {
        let n = self.rng.random_range(1..=max_rules);
        (0..n).map(|_| self.rule(max_body)).collect()
    }

    pub fn database(&mut self, max_facts: usize) -> BTreeSet<Atom> {
        let n = self.rng.random_range(1..=max_facts);
        (0..n)
            .map(|_| {
                let (p, k) = *self.pick(self.predicates);
                Atom::new(
                    p,
                    (0..k)
                        .map(|_| Term::constant(*self.pick(CONSTANTS)))
                        .collect(),
                )
            })
            .collect()
    }

    pub fn program(&mut self, max_rules: usize, max_body: usize, max_facts: usize) -> Program {
        let rules = self.rules(max_rules, max_body);
        let database = self.database(max_facts);
        Program::new(rules, database).expect("generator keeps arities fixed")
    }

    /// Draws programs until one is weakly sticky.
    pub fn ws_program(&mut self, max_rules: usize, max_body: usize, max_facts: usize) -> Program {
        loop {
            let p = self.program(max_rules, max_body, max_facts);
            if classify(&p.rules).weakly_sticky {
                return p;
            }
        }
    }

    /// A conjunctive query with at most `max_vars` distinct variables; the
    /// answer tuple is a random subset of them.
    pub fn query(&mut self, max_vars: usize) -> ConjunctiveQuery {
        let vars = &VARIABLES[..max_vars.min(VARIABLES.len())];
        let n = self.rng.random_range(1..=self.max_query_atoms);
        let body: Vec<Atom> = (0..n)
            .map(|_| {
                let (p, k) = *self.pick(self.predicates);
                let args = (0..k)
                    .map(|_| {
                        if self.rng.random_bool(0.1) {
                            Term::constant(*self.pick(CONSTANTS))
                        } else {
                            Term::var(*self.pick(vars))
                        }
                    })
                    .collect();
                Atom::new(p, args)
            })
            .collect();
        let present: BTreeSet<Term> = body
            .iter()
            .flat_map(|a| a.args.iter())
            .filter(|t| t.is_variable())
            .cloned()
            .collect();
        let answer = present
            .into_iter()
            .filter(|_| self.rng.random_bool(0.5))
            .collect();
        ConjunctiveQuery::new("q", answer, body).expect("answer drawn from body")
    }
}

/// Pairs of ground rules from the same phase where the later head is
/// Π_F-homomorphic to the earlier one, as rule text.
pub fn pi_duplicates(p: &Program, gp: &GroundProgram) -> Vec<(String, String)> {
    let a = Analysis::of_program(p, None).unwrap();
    let pi: BTreeSet<_> = a.ranks.finite().into_iter().collect();
    let mut out = Vec::new();
    for (j, later) in gp.ground_rules.iter().enumerate() {
        for (i, earlier) in gp.ground_rules[..j].iter().enumerate() {
            if gp.phase[i] == gp.phase[j]
                && pi_homomorphic(&later.head, &earlier.head, &pi).unwrap()
            {
                out.push((later.to_string(), earlier.to_string()));
            }
        }
    }
    out
}
