use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::TransformError;
use crate::analysis::{Analysis, Rank, RankMap};
use crate::model::{Atom, ConjunctiveQuery, Fresh, Position, Program, Rule, Term};
use crate::syntax::has_expansion_suffix;

/// Predicate renaming and position widths of one ReduceRank iteration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExpansionMap {
    /// Old predicate name to its expanded name.
    pub renamed: BTreeMap<Arc<str>, Arc<str>>,
    /// Widened positions, under their old predicate names.
    pub widths: BTreeMap<Position, usize>,
}

impl ExpansionMap {
    pub fn width(&self, p: &Position) -> usize {
        self.widths.get(p).copied().unwrap_or(1)
    }

    /// Arity of the expanded predicate replacing `predicate`.
    pub fn expanded_arity(&self, predicate: &str, arity: usize) -> usize {
        (0..arity)
            .map(|i| self.width(&Position::new(predicate, i)))
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.renamed.is_empty()
    }
}

/// One Skolemization performed by [`reduce_rank_traced`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReduceRankStep {
    pub rule: usize,
    pub variable: Arc<str>,
    pub function: u64,
    pub expansion: ExpansionMap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReduceRankOutput {
    pub program: Program,
    pub query: ConjunctiveQuery,
    pub steps: Vec<ReduceRankStep>,
}

/// Removes every existential variable sitting at a finite-rank position.
///
/// Each iteration picks the existential occurrence of least finite rank
/// (ties broken by rule and head position) and replaces the variable by a
/// fresh function constant followed by the rule's frontier variables.
/// Positions that can receive the new value through normal dependency edges
/// are widened accordingly in every rule and in the query; database
/// predicates among them get a load rule.
pub fn reduce_rank(
    program: &Program,
    query: &ConjunctiveQuery,
) -> Result<(Program, ConjunctiveQuery), TransformError> {
    let out = reduce_rank_traced(program, query)?;
    Ok((out.program, out.query))
}

pub fn reduce_rank_traced(
    program: &Program,
    query: &ConjunctiveQuery,
) -> Result<ReduceRankOutput, TransformError> {
    let mut rules = program.rules.clone();
    let mut query = query.clone();
    let mut functions = Fresh::starting_at(next_function_id(&rules, &query));
    let mut used: BTreeSet<Arc<str>> = rules
        .iter()
        .flat_map(Rule::atoms)
        .chain(&program.database)
        .chain(&query.body)
        .map(|a| a.predicate.clone())
        .collect();
    used.insert(query.head_predicate.clone());
    let mut db_arity: BTreeMap<&str, usize> = BTreeMap::new();
    for fact in &program.database {
        db_arity.entry(&fact.predicate).or_insert(fact.arity());
    }

    // every iteration removes one existential variable
    let budget: usize = rules.iter().map(|r| r.existential_vars.len()).sum();
    let mut steps = Vec::new();
    loop {
        let analysis = Analysis::of_rules(&rules);
        let Some((ri, z)) = pick_existential(&rules, &analysis.ranks) else {
            break;
        };
        if steps.len() >= budget {
            return Err(TransformError::IterationCap(budget));
        }
        let function = functions.next_id();
        let frontier = rules[ri].frontier();
        let mut skolem = vec![Term::FunctionConstant(function)];
        skolem.extend(frontier.iter().map(|v| Term::Variable(v.clone())));

        let mut map = ExpansionMap::default();
        if frontier.is_empty() {
            rules[ri] = skolemize(&rules[ri], &z, &skolem[0]);
        } else {
            let width = skolem.len();
            let start = rules[ri].head_positions_of(&z);
            for p in analysis.graph.normal_closure(start) {
                map.widths.insert(p, width);
            }
            let preds: BTreeSet<Arc<str>> =
                map.widths.keys().map(|p| p.predicate.clone()).collect();
            for p in preds {
                let name = expanded_name(&p, &used);
                used.insert(name.clone());
                map.renamed.insert(p, name);
            }
            rules = rules
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let sk = (i == ri).then_some((&*z, skolem.as_slice()));
                    expand_rule(r, &map, sk)
                })
                .collect();
            for (old, new) in &map.renamed {
                if let Some(&arity) = db_arity.get(&**old) {
                    rules.push(load_rule(old, new, arity, &map));
                }
            }
            query = expand_query(&query, &map);
        }
        steps.push(ReduceRankStep {
            rule: ri,
            variable: z,
            function,
            expansion: map,
        });
    }
    Ok(ReduceRankOutput {
        program: Program {
            rules,
            database: program.database.clone(),
        },
        query,
        steps,
    })
}

fn next_function_id(rules: &[Rule], query: &ConjunctiveQuery) -> u64 {
    rules
        .iter()
        .flat_map(Rule::terms)
        .chain(query.body.iter().flat_map(|a| a.args.iter()))
        .filter_map(|t| match t {
            Term::FunctionConstant(id) => Some(*id),
            _ => None,
        })
        .max()
        .map_or(1, |m| m + 1)
}

fn pick_existential(rules: &[Rule], ranks: &RankMap) -> Option<(usize, Arc<str>)> {
    let mut best: Option<((usize, usize, usize), Arc<str>)> = None;
    for (ri, rule) in rules.iter().enumerate() {
        for (j, (p, t)) in rule.head.slots().enumerate() {
            let Term::Variable(z) = t else { continue };
            if !rule.is_existential(z) {
                continue;
            }
            let rank = match ranks.rank(&p) {
                Some(Rank::Finite(r)) => r,
                Some(Rank::Infinite) => continue,
                None => 0,
            };
            let key = (rank, ri, j);
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, z.clone()));
            }
        }
    }
    best.map(|((_, ri, _), z)| (ri, z))
}

fn skolemize(rule: &Rule, z: &str, f: &Term) -> Rule {
    let args = rule
        .head
        .args
        .iter()
        .map(|t| {
            if t.var_name() == Some(z) {
                f.clone()
            } else {
                t.clone()
            }
        })
        .collect();
    let mut existential_vars = rule.existential_vars.clone();
    existential_vars.remove(z);
    Rule {
        body: rule.body.clone(),
        head: Atom::new(rule.head.predicate.clone(), args),
        existential_vars,
    }
}

fn expanded_name(predicate: &str, used: &BTreeSet<Arc<str>>) -> Arc<str> {
    let base = if has_expansion_suffix(predicate) {
        &predicate[..predicate.rfind("_x").unwrap_or(predicate.len())]
    } else {
        predicate
    };
    (1..)
        .map(|g| Arc::<str>::from(format!("{base}_x{g}")))
        .find(|name| !used.contains(name))
        .expect("unbounded generation counter")
}

/// Variables all of whose occurrences in `atoms` sit at widened positions,
/// in order of first occurrence.
fn wide_variables(atoms: &[Atom], map: &ExpansionMap) -> Vec<Arc<str>> {
    let mut order: Vec<Arc<str>> = Vec::new();
    let mut narrow: BTreeSet<Arc<str>> = BTreeSet::new();
    for a in atoms {
        for (p, t) in a.slots() {
            let Term::Variable(v) = t else { continue };
            if !order.contains(v) {
                order.push(v.clone());
            }
            if !map.widths.contains_key(&p) {
                narrow.insert(v.clone());
            }
        }
    }
    order.retain(|v| !narrow.contains(v));
    order
}

/// Hands out primed variable names not yet taken.
struct Namer {
    taken: BTreeSet<String>,
}

impl Namer {
    fn new<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Self {
        Namer {
            taken: terms
                .into_iter()
                .filter_map(|t| t.var_name().map(str::to_string))
                .collect(),
        }
    }

    fn components(&mut self, v: &str, width: usize) -> Vec<Term> {
        let mut out = vec![Term::var(v)];
        let mut name = v.to_string();
        while out.len() < width {
            name.push('\'');
            if self.taken.insert(name.clone()) {
                out.push(Term::var(name.clone()));
            }
        }
        out
    }
}

fn components_for(
    atoms: &[Atom],
    map: &ExpansionMap,
    namer: &mut Namer,
) -> BTreeMap<Arc<str>, Vec<Term>> {
    let mut out = BTreeMap::new();
    for v in wide_variables(atoms, map) {
        let width = atoms
            .iter()
            .flat_map(Atom::slots)
            .find(|(_, t)| t.var_name() == Some(&*v))
            .map_or(1, |(p, _)| map.width(&p));
        out.insert(v.clone(), namer.components(&v, width));
    }
    out
}

fn expand_atom(a: &Atom, map: &ExpansionMap, expand: &dyn Fn(&Term, usize) -> Vec<Term>) -> Atom {
    let Some(name) = map.renamed.get(&a.predicate) else {
        return a.clone();
    };
    let mut args = Vec::new();
    for (p, t) in a.slots() {
        match map.width(&p) {
            1 => args.push(t.clone()),
            w => args.extend(expand(t, w)),
        }
    }
    Atom::new(name.clone(), args)
}

fn padded(t: &Term, width: usize) -> Vec<Term> {
    let mut out = vec![t.clone()];
    out.resize(width, Term::Filler);
    out
}

fn expand_rule(rule: &Rule, map: &ExpansionMap, skolem: Option<(&str, &[Term])>) -> Rule {
    let mut namer = Namer::new(rule.terms());
    let components = components_for(&rule.body, map, &mut namer);
    let expand = |t: &Term, w: usize| -> Vec<Term> {
        if let Term::Variable(v) = t {
            if let Some((z, sk)) = skolem {
                if &**v == z {
                    return sk.to_vec();
                }
            }
            if let Some(c) = components.get(v) {
                return c.clone();
            }
        }
        padded(t, w)
    };
    let mut existential_vars = rule.existential_vars.clone();
    if let Some((z, _)) = skolem {
        existential_vars.remove(z);
    }
    Rule {
        body: rule
            .body
            .iter()
            .map(|a| expand_atom(a, map, &expand))
            .collect(),
        head: expand_atom(&rule.head, map, &expand),
        existential_vars,
    }
}

fn load_rule(old: &Arc<str>, new: &Arc<str>, arity: usize, map: &ExpansionMap) -> Rule {
    let vars: Vec<Term> = (1..=arity).map(|i| Term::var(format!("X{i}"))).collect();
    let body = Atom::new(old.clone(), vars);
    let mut head = expand_atom(&body, map, &padded);
    head.predicate = new.clone();
    Rule {
        body: vec![body],
        head,
        existential_vars: BTreeSet::new(),
    }
}

fn expand_query(query: &ConjunctiveQuery, map: &ExpansionMap) -> ConjunctiveQuery {
    let mut namer = Namer::new(query.body.iter().flat_map(|a| a.args.iter()));
    let components = components_for(&query.body, map, &mut namer);
    let expand = |t: &Term, w: usize| -> Vec<Term> {
        match t.var_name().and_then(|v| components.get(v)) {
            Some(c) => c.clone(),
            None => padded(t, w),
        }
    };
    ConjunctiveQuery {
        head_predicate: query.head_predicate.clone(),
        answer: query.answer.clone(),
        body: query
            .body
            .iter()
            .map(|a| expand_atom(a, map, &expand))
            .collect(),
    }
}
