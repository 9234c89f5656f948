use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use super::RewriteError;
use crate::analysis::classify;
use crate::chase::answers;
use crate::model::{has_homomorphism, Atom, ConjunctiveQuery, Instance, Rule, Substitution, Term};

pub const DEFAULT_MAX_DISJUNCTS: usize = 100_000;

/// A union of conjunctive queries sharing the answer arity of `query`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UCQRewriting {
    /// The query that was rewritten; always one of the disjuncts.
    pub query: ConjunctiveQuery,
    pub disjuncts: Vec<ConjunctiveQuery>,
}

impl UCQRewriting {
    pub fn len(&self) -> usize {
        self.disjuncts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.disjuncts.is_empty()
    }
}

impl fmt::Display for UCQRewriting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.disjuncts {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Rewrites `query` against a sticky rule set into a UCQ whose plain
/// evaluation over any database gives the certain answers.
///
/// Disjuncts are produced with piece unifiers: a set of query atoms is
/// unified with a rule head, provided every existential head variable is
/// unified only with query variables that occur nowhere outside the set and
/// are not answer variables. New disjuncts are reduced to their cores and
/// kept only when no earlier disjunct subsumes them.
pub fn rewrite_sticky(
    query: &ConjunctiveQuery,
    rules: &[Rule],
    max_disjuncts: usize,
) -> Result<UCQRewriting, RewriteError> {
    saturate(query, rules, max_disjuncts, &|_| true)
}

/// Rewriting specialised to one database: disjuncts that can never match
/// `database` are not explored. A disjunct is dropped when it mentions a
/// predicate no fact or rule can populate, or when its atoms over predicates
/// that no rule derives have no match in `database`; every further rewriting
/// of such a disjunct keeps the defect. Evaluating the result over
/// `database` gives the same answers as [`rewrite_sticky`].
pub fn rewrite_sticky_over<'a>(
    query: &ConjunctiveQuery,
    rules: &[Rule],
    database: impl IntoIterator<Item = &'a Atom>,
    max_disjuncts: usize,
) -> Result<UCQRewriting, RewriteError> {
    let db: Instance = database.into_iter().cloned().collect();
    let derived: BTreeSet<&str> = rules.iter().map(|r| &*r.head.predicate).collect();
    let mut populated: BTreeSet<&str> = db.atoms().iter().map(|a| &*a.predicate).collect();
    loop {
        let before = populated.len();
        for r in rules {
            if r.body.iter().all(|a| populated.contains(&*a.predicate)) {
                populated.insert(&r.head.predicate);
            }
        }
        if populated.len() == before {
            break;
        }
    }
    let viable = |q: &ConjunctiveQuery| {
        if q.body.iter().any(|a| !populated.contains(&*a.predicate)) {
            return false;
        }
        let extensional: Vec<Atom> = q
            .body
            .iter()
            .filter(|a| !derived.contains(&*a.predicate))
            .cloned()
            .collect();
        has_homomorphism(&extensional, &db, &Substitution::new())
    };
    saturate(query, rules, max_disjuncts, &viable)
}

fn saturate(
    query: &ConjunctiveQuery,
    rules: &[Rule],
    max_disjuncts: usize,
    viable: &dyn Fn(&ConjunctiveQuery) -> bool,
) -> Result<UCQRewriting, RewriteError> {
    if !classify(rules).sticky {
        return Err(RewriteError::NotSticky);
    }
    let rules: Vec<Rule> = rules.iter().map(rename_apart).collect();
    let names: Vec<Option<Arc<str>>> = query
        .answer
        .iter()
        .map(|t| match t {
            Term::Variable(v) => Some(v.clone()),
            _ => None,
        })
        .collect();

    let start = canonical(&core(query), &names);
    let mut found: Vec<Indexed> = Vec::new();
    let mut alive = Vec::new();
    if viable(&start) {
        found.push(Indexed::new(start));
        alive.push(true);
    }
    // raw rewritings repeat a lot; skip the ones already handled
    let mut seen: HashSet<ConjunctiveQuery> = HashSet::new();
    let mut queue: VecDeque<usize> = (0..found.len()).collect();
    while let Some(i) = queue.pop_front() {
        if !alive[i] {
            continue;
        }
        let current = found[i].query.clone();
        for rule in &rules {
            for next in one_step(&current, rule) {
                if !seen.insert(canonical(&next, &names)) {
                    continue;
                }
                let next = canonical(&core(&next), &names);
                if !viable(&next) {
                    continue;
                }
                let next = Indexed::new(next);
                if found.iter().any(|d| next.subsumed_by(&d.query)) {
                    continue;
                }
                for (j, d) in found.iter().enumerate() {
                    if alive[j] && d.subsumed_by(&next.query) {
                        alive[j] = false;
                    }
                }
                if found.len() >= max_disjuncts {
                    return Err(RewriteError::DisjunctCapExceeded(max_disjuncts));
                }
                found.push(next);
                alive.push(true);
                queue.push_back(found.len() - 1);
            }
        }
    }

    let mut disjuncts = vec![query.clone()];
    for (d, live) in found.into_iter().zip(alive) {
        if live && !d.subsumed_by(query) {
            disjuncts.push(d.query);
        }
    }
    disjuncts.sort_by_cached_key(|d| (d.body.len(), d.to_string()));
    Ok(UCQRewriting {
        query: query.clone(),
        disjuncts,
    })
}

/// Union of the answers of every disjunct over the database alone.
pub fn evaluate_ucq<'a>(
    ucq: &UCQRewriting,
    database: impl IntoIterator<Item = &'a Atom>,
) -> BTreeSet<Vec<Term>> {
    let inst: Instance = database.into_iter().cloned().collect();
    ucq.disjuncts
        .iter()
        .flat_map(|d| answers(d, &inst))
        .collect()
}

fn rename_apart(rule: &Rule) -> Rule {
    let s: Substitution = rule
        .terms()
        .filter_map(Term::var_name)
        .map(|v| (Term::var(v), Term::var(format!("{v}~"))))
        .collect();
    let mut r = s.apply_rule(rule);
    r.existential_vars = rule
        .existential_vars
        .iter()
        .map(|z| Arc::from(format!("{z}~")))
        .collect();
    r
}

/// Union-find over terms; a class may hold at most one rigid term.
#[derive(Default)]
struct Unifier {
    parent: BTreeMap<Term, Term>,
}

impl Unifier {
    fn find(&self, t: &Term) -> Term {
        let mut cur = t.clone();
        while let Some(p) = self.parent.get(&cur) {
            cur = p.clone();
        }
        cur
    }

    fn union(&mut self, a: &Term, b: &Term) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return true;
        }
        match (ra.is_variable(), rb.is_variable()) {
            (false, false) => false,
            (true, _) => {
                self.parent.insert(ra, rb);
                true
            }
            (false, true) => {
                self.parent.insert(rb, ra);
                true
            }
        }
    }

    fn substitution(&self) -> Substitution {
        self.parent
            .keys()
            .map(|k| (k.clone(), self.find(k)))
            .collect()
    }
}

/// Every rewriting of `query` obtained from one piece unifier with `rule`.
fn one_step(query: &ConjunctiveQuery, rule: &Rule) -> Vec<ConjunctiveQuery> {
    let head = &rule.head;
    let candidates: Vec<usize> = (0..query.body.len())
        .filter(|&i| {
            query.body[i].predicate == head.predicate && query.body[i].arity() == head.arity()
        })
        .collect();
    if candidates.is_empty() {
        return Vec::new();
    }
    assert!(candidates.len() < 64, "query too large to enumerate pieces");
    let answer_vars: BTreeSet<&str> = query.answer.iter().filter_map(Term::var_name).collect();
    let mut out = Vec::new();
    for mask in 1u64..(1 << candidates.len()) {
        let piece: Vec<usize> = (0..candidates.len())
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| candidates[b])
            .collect();
        let mut u = Unifier::default();
        let unified = piece.iter().all(|&i| {
            query.body[i]
                .args
                .iter()
                .zip(&head.args)
                .all(|(a, b)| u.union(a, b))
        });
        if !unified {
            continue;
        }
        let outside: BTreeSet<&str> = (0..query.body.len())
            .filter(|i| !piece.contains(i))
            .flat_map(|i| query.body[i].args.iter().filter_map(Term::var_name))
            .collect();
        let admissible = rule.existential_vars.iter().all(|z| {
            let root = u.find(&Term::Variable(z.clone()));
            if !root.is_variable() {
                return false;
            }
            let class = head
                .args
                .iter()
                .chain(piece.iter().flat_map(|&i| query.body[i].args.iter()))
                .filter(|t| u.find(t) == root);
            class.into_iter().all(|t| match t.var_name() {
                Some(v) if rule.is_existential(v) => v == &**z,
                Some(v) if v.ends_with('~') => false,
                Some(v) => !answer_vars.contains(v) && !outside.contains(v),
                None => false,
            })
        });
        if !admissible {
            continue;
        }
        let s = u.substitution();
        let mut body = s.apply_all(&rule.body);
        for (i, a) in query.body.iter().enumerate() {
            if !piece.contains(&i) {
                body.push(s.apply(a));
            }
        }
        out.push(ConjunctiveQuery {
            head_predicate: query.head_predicate.clone(),
            answer: query.answer.iter().map(|t| s.apply_term(t)).collect(),
            body,
        });
    }
    out
}

/// Whether every answer of `specific` is an answer of `general`: some
/// homomorphism maps `general` onto `specific`, answer tuple included.
pub fn subsumes(general: &ConjunctiveQuery, specific: &ConjunctiveQuery) -> bool {
    Indexed::new(specific.clone()).subsumed_by(general)
}

/// A disjunct with its body indexed as a homomorphism target.
struct Indexed {
    query: ConjunctiveQuery,
    body: Instance,
    predicates: BTreeSet<Arc<str>>,
    rigid: BTreeSet<Term>,
}

impl Indexed {
    fn new(query: ConjunctiveQuery) -> Self {
        let body: Instance = query.body.iter().cloned().collect();
        let predicates = query.body.iter().map(|a| a.predicate.clone()).collect();
        let rigid = query
            .body
            .iter()
            .flat_map(|a| a.args.iter())
            .filter(|t| t.is_rigid())
            .cloned()
            .collect();
        Indexed {
            query,
            body,
            predicates,
            rigid,
        }
    }

    fn subsumed_by(&self, general: &ConjunctiveQuery) -> bool {
        let specific = &self.query;
        if general.answer.len() != specific.answer.len() {
            return false;
        }
        let cheap_reject = general.body.iter().any(|a| {
            !self.predicates.contains(&a.predicate)
                || a.args
                    .iter()
                    .any(|t| t.is_rigid() && !self.rigid.contains(t))
        });
        if cheap_reject {
            return false;
        }
        let mut init = Substitution::new();
        for (g, s) in general.answer.iter().zip(&specific.answer) {
            if g.is_variable() {
                if !init.bind(g.clone(), s.clone()) {
                    return false;
                }
            } else if g != s {
                return false;
            }
        }
        has_homomorphism(&general.body, &self.body, &init)
    }
}

/// Drops body atoms as long as the query still maps into the rest with its
/// answer variables fixed.
fn core(query: &ConjunctiveQuery) -> ConjunctiveQuery {
    let mut body: Vec<Atom> = Vec::new();
    for a in &query.body {
        if !body.contains(a) {
            body.push(a.clone());
        }
    }
    let fixed: Substitution = query
        .answer
        .iter()
        .filter(|t| t.is_variable())
        .map(|t| (t.clone(), t.clone()))
        .collect();
    let mut i = 0;
    while i < body.len() {
        let rest: Vec<Atom> = body
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, a)| a.clone())
            .collect();
        let target: Instance = rest.iter().cloned().collect();
        if !rest.is_empty() && has_homomorphism(&body, &target, &fixed) {
            body = rest;
        } else {
            i += 1;
        }
    }
    ConjunctiveQuery {
        head_predicate: query.head_predicate.clone(),
        answer: query.answer.clone(),
        body,
    }
}

/// Renames answer variables after the original query's answer names and the
/// remaining variables to `U1, U2, ...` in order of first occurrence, then
/// sorts the body.
fn canonical(query: &ConjunctiveQuery, names: &[Option<Arc<str>>]) -> ConjunctiveQuery {
    let reserved: BTreeSet<&str> = names.iter().flatten().map(|n| &**n).collect();
    let mut map: BTreeMap<Arc<str>, Arc<str>> = BTreeMap::new();
    for (t, name) in query.answer.iter().zip(names) {
        if let (Term::Variable(v), Some(name)) = (t, name) {
            map.entry(v.clone()).or_insert_with(|| name.clone());
        }
    }
    let mut counter = 0;
    let mut rename = |map: &mut BTreeMap<Arc<str>, Arc<str>>, atoms: &[Atom]| {
        for v in atoms.iter().flat_map(Atom::variables) {
            if map.contains_key(v) {
                continue;
            }
            let fresh = loop {
                counter += 1;
                let n = format!("U{counter}");
                if !reserved.contains(n.as_str()) {
                    break n;
                }
            };
            map.insert(v.clone(), fresh.into());
        }
    };
    rename(&mut map, &query.body);
    let s: Substitution = map
        .iter()
        .map(|(k, v)| (Term::Variable(k.clone()), Term::Variable(v.clone())))
        .collect();
    let mut body = s.apply_all(&query.body);
    body.sort();
    body.dedup();
    ConjunctiveQuery {
        head_predicate: query.head_predicate.clone(),
        answer: query.answer.iter().map(|t| s.apply_term(t)).collect(),
        body,
    }
}
