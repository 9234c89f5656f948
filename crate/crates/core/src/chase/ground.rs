use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::ops::ControlFlow;
use std::sync::Arc;

use super::ChaseError;
use crate::analysis::{Analysis, RankMap};
use crate::model::{
    for_each_match, match_atom, pi_homomorphic_ground, Atom, ConjunctiveQuery, Fresh, Instance,
    Program, Rule, Substitution, Term,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroundingConfig {
    pub resumptions: usize,
    pub max_rules: usize,
}

impl GroundingConfig {
    pub const DEFAULT_MAX_RULES: usize = 1_000_000;

    pub fn new(resumptions: usize) -> Self {
        GroundingConfig {
            resumptions,
            max_rules: Self::DEFAULT_MAX_RULES,
        }
    }

    pub fn for_query(query: &ConjunctiveQuery) -> Self {
        Self::new(resumptions_for(query))
    }
}

impl Default for GroundingConfig {
    fn default() -> Self {
        Self::new(0)
    }
}

/// Resumptions needed for `query`: its number of distinct variables.
pub fn resumptions_for(query: &ConjunctiveQuery) -> usize {
    query.variables().len()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundProgram {
    pub ground_rules: Vec<Rule>,
    pub database: BTreeSet<Atom>,
    pub resumptions_performed: usize,
    pub level: BTreeMap<Atom, usize>,
    /// Phase (0 for the first pass, k after the k-th resumption) in which
    /// each ground rule was produced.
    pub phase: Vec<usize>,
}

impl GroundProgram {
    pub fn to_program(&self) -> Program {
        Program {
            rules: self.ground_rules.clone(),
            database: self.database.clone(),
        }
    }
}

/// Query-driven grounding of a weakly-sticky program.
///
/// Each phase applies (rule, homomorphism) pairs level by level: pairs whose
/// body atoms have maximum level L are collected, sorted by rule index and
/// then by the instantiated body, and applied in that order. A pair is
/// skipped when a pair of the same rule with the same frontier image was
/// applied before, and is blocked when some existing head
/// atom is the image of the candidate head under a homomorphism fixing the
/// candidate's terms at finite-rank positions. Between phases every labeled
/// null is frozen into a fresh constant, which can unblock pairs.
pub fn ground_ws(program: &Program, config: &GroundingConfig) -> Result<GroundProgram, ChaseError> {
    let analysis = Analysis::of_program(program, None)?;
    if !analysis.report.weakly_sticky {
        return Err(ChaseError::NotWeaklySticky);
    }
    let mut g = Grounder::new(&program.rules, &analysis.ranks, config.max_rules);
    for fact in &program.database {
        g.add_atom(fact.clone(), 0);
    }
    for phase in 0..=config.resumptions {
        if phase > 0 {
            g.freeze();
        }
        g.run_phase(phase)?;
    }
    let level = g
        .atoms
        .atoms()
        .iter()
        .zip(&g.levels)
        .map(|(a, l)| (a.clone(), *l))
        .collect();
    Ok(GroundProgram {
        ground_rules: g.ground,
        database: program.database.clone(),
        resumptions_performed: config.resumptions,
        level,
        phase: g.phase,
    })
}

type PairKey = (usize, Vec<Term>);

struct Grounder<'a> {
    rules: &'a [Rule],
    frontier: Vec<Vec<Arc<str>>>,
    ranks: &'a RankMap,
    max_rules: usize,
    atoms: Instance,
    levels: Vec<usize>,
    by_level: BTreeMap<usize, Vec<usize>>,
    heads: Instance,
    ground: Vec<Rule>,
    phase: Vec<usize>,
    applied: HashSet<PairKey>,
    nulls: Fresh,
    frozen: Fresh,
}

impl<'a> Grounder<'a> {
    fn new(rules: &'a [Rule], ranks: &'a RankMap, max_rules: usize) -> Self {
        Grounder {
            rules,
            frontier: rules.iter().map(Rule::frontier).collect(),
            ranks,
            max_rules,
            atoms: Instance::new(),
            levels: Vec::new(),
            by_level: BTreeMap::new(),
            heads: Instance::new(),
            ground: Vec::new(),
            phase: Vec::new(),
            applied: HashSet::new(),
            nulls: Fresh::default(),
            frozen: Fresh::default(),
        }
    }

    fn add_atom(&mut self, atom: Atom, level: usize) {
        let (id, new) = self.atoms.insert(atom);
        if new {
            self.levels.push(level);
        } else if level < self.levels[id] {
            self.levels[id] = level;
        } else {
            return;
        }
        self.by_level.entry(level).or_default().push(id);
    }

    /// Pairs are identified by the image of the rule's frontier: two
    /// matches agreeing on it produce the same head up to fresh nulls.
    fn key(&self, rule: usize, h: &Substitution) -> PairKey {
        let images = self.frontier[rule]
            .iter()
            .map(|v| h.apply_term(&Term::Variable(v.clone())))
            .collect();
        (rule, images)
    }

    fn run_phase(&mut self, phase: usize) -> Result<(), ChaseError> {
        let mut level = 0;
        while self.by_level.range(level..).next().is_some() {
            let batch = self.matches_at(level);
            for ((rule, _), h) in batch {
                let key = self.key(rule, &h);
                if self.applied.contains(&key) || self.blocked(rule, &h) {
                    continue;
                }
                self.apply(rule, h, level + 1, phase)?;
                self.applied.insert(key);
            }
            level += 1;
        }
        Ok(())
    }

    /// Every match with at least one body atom at `level` and none above,
    /// sorted by rule index and instantiated body.
    fn matches_at(&self, level: usize) -> BTreeMap<(usize, Vec<Atom>), Substitution> {
        let mut delta: Vec<usize> = self
            .by_level
            .get(&level)
            .into_iter()
            .flatten()
            .copied()
            .filter(|&id| self.levels[id] == level)
            .collect();
        delta.sort_unstable();
        delta.dedup();
        let mut delta_by_pred: HashMap<&str, Vec<usize>> = HashMap::new();
        for &id in &delta {
            delta_by_pred
                .entry(&self.atoms.get(id).predicate)
                .or_default()
                .push(id);
        }

        let mut batch = BTreeMap::new();
        for (ri, rule) in self.rules.iter().enumerate() {
            for (i, pivot) in rule.body.iter().enumerate() {
                let Some(ids) = delta_by_pred.get(&*pivot.predicate) else {
                    continue;
                };
                let rest: Vec<Atom> = rule
                    .body
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, a)| a.clone())
                    .collect();
                let original: Vec<usize> = (0..rule.body.len()).filter(|&j| j != i).collect();
                for &id in ids {
                    let mut init = Substitution::new();
                    if !match_atom(pivot, self.atoms.get(id), &mut init) {
                        continue;
                    }
                    // atoms before the pivot stay strictly below the level so
                    // each match is found through its first delta atom only
                    let mut accept = |k: usize, other: usize| {
                        let l = self.levels[other];
                        if original[k] < i {
                            l < level
                        } else {
                            l <= level
                        }
                    };
                    let _ = for_each_match(&rest, &self.atoms, &init, &mut accept, &mut |h, _| {
                        let body = h.apply_all(&rule.body);
                        batch.entry((ri, body)).or_insert_with(|| h.clone());
                        ControlFlow::Continue(())
                    });
                }
            }
        }
        batch
    }

    fn blocked(&self, rule: usize, h: &Substitution) -> bool {
        let r = &self.rules[rule];
        let mut ext = h.clone();
        for (k, z) in r.existential_vars.iter().enumerate() {
            // placeholders never collide with allocated nulls
            ext.bind(
                Term::Variable(z.clone()),
                Term::LabeledNull(u64::MAX - k as u64),
            );
        }
        let candidate = ext.apply(&r.head);
        let in_pi = |p: &crate::model::Position| self.ranks.is_finite(p);
        let mut best: Option<&[usize]> = None;
        for (i, t) in candidate.args.iter().enumerate() {
            let fixed = t.is_rigid() || (t.is_labeled_null() && in_pi(&candidate.position(i)));
            if !fixed {
                continue;
            }
            let list = self.heads.with_slot(&candidate.predicate, i, t);
            if best.is_none_or(|b| list.len() < b.len()) {
                best = Some(list);
            }
        }
        let pool = best.unwrap_or_else(|| self.heads.with_predicate(&candidate.predicate));
        pool.iter()
            .any(|&id| pi_homomorphic_ground(&candidate, self.heads.get(id), in_pi))
    }

    fn apply(
        &mut self,
        rule: usize,
        h: Substitution,
        level: usize,
        phase: usize,
    ) -> Result<(), ChaseError> {
        if self.ground.len() >= self.max_rules {
            return Err(ChaseError::RuleCapExceeded(self.max_rules));
        }
        let r = &self.rules[rule];
        let mut ext = h;
        for z in &r.existential_vars {
            ext.bind(
                Term::Variable(z.clone()),
                Term::LabeledNull(self.nulls.next_id()),
            );
        }
        let body = ext.apply_all(&r.body);
        let head = ext.apply(&r.head);
        self.heads.insert(head.clone());
        self.add_atom(head.clone(), level);
        self.ground.push(Rule {
            body,
            head,
            existential_vars: BTreeSet::new(),
        });
        self.phase.push(phase);
        Ok(())
    }

    /// Replaces every labeled null by a fresh frozen null, numbering nulls
    /// by first appearance in the ground rule list.
    fn freeze(&mut self) {
        let mut map: HashMap<u64, Term> = HashMap::new();
        for rule in &self.ground {
            for t in rule.terms() {
                if let Term::LabeledNull(id) = t {
                    map.entry(*id)
                        .or_insert_with(|| Term::FrozenNull(self.frozen.next_id()));
                }
            }
        }
        if map.is_empty() {
            return;
        }
        let tr = |t: &Term| match t {
            Term::LabeledNull(id) => map[id].clone(),
            other => other.clone(),
        };
        let tr_atom = |a: &Atom| Atom::new(a.predicate.clone(), a.args.iter().map(tr).collect());
        for rule in &mut self.ground {
            rule.body = rule.body.iter().map(tr_atom).collect();
            rule.head = tr_atom(&rule.head);
        }
        // translation is injective, so ids and levels carry over unchanged
        self.atoms = self.atoms.atoms().iter().map(tr_atom).collect();
        self.heads = self.heads.atoms().iter().map(tr_atom).collect();
        self.applied = self
            .applied
            .drain()
            .map(|(r, images)| (r, images.iter().map(tr).collect()))
            .collect();
    }
}
