use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;
use std::sync::Arc;

use super::TransformError;
use crate::analysis::{repeated_body_variables, Analysis, Marking, RankMap};
use crate::chase::{ground_ws, minimal_model, GroundingConfig};
use crate::model::{for_each_match, Position, Program, Rule, Substitution, Term};

/// Weak variables of each rule, in order of first body occurrence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WeakVariableReport {
    pub per_rule: Vec<Vec<Arc<str>>>,
}

impl WeakVariableReport {
    pub fn get(&self, rule: usize) -> &[Arc<str>] {
        self.per_rule.get(rule).map_or(&[], Vec::as_slice)
    }

    /// Indices of the rules with at least one weak variable.
    pub fn weak_rules(&self) -> Vec<usize> {
        (0..self.per_rule.len())
            .filter(|&i| !self.per_rule[i].is_empty())
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.per_rule.iter().all(Vec::is_empty)
    }
}

/// Marked variables repeated in a rule body with at least one occurrence at
/// a finite-rank position.
pub fn weak_variables(rules: &[Rule], marking: &Marking, ranks: &RankMap) -> WeakVariableReport {
    let per_rule = rules
        .iter()
        .enumerate()
        .map(|(i, rule)| {
            repeated_body_variables(rule)
                .into_iter()
                .filter(|v| marking.is_marked(i, v))
                .filter(|v| rule.body_positions_of(v).iter().any(|p| ranks.is_finite(p)))
                .collect()
        })
        .collect();
    WeakVariableReport { per_rule }
}

fn check_preconditions(analysis: &Analysis) -> Result<(), TransformError> {
    if !analysis.report.weakly_sticky {
        return Err(TransformError::PreconditionViolated(
            "program is not weakly sticky".into(),
        ));
    }
    if !analysis.report.zero_infinity {
        return Err(TransformError::PreconditionViolated(
            "an existential variable occurs at a finite-rank position".into(),
        ));
    }
    Ok(())
}

/// Candidate values for the weak variables of a program.
///
/// A finite-rank position can only hold database constants and the rigid
/// terms written by rule heads at positions that reach it through normal
/// edges; a variable's domain is the part of that set common to all of its
/// finite-rank body positions.
pub struct GroundingDomains {
    active: BTreeSet<Term>,
    reaching: BTreeMap<Position, BTreeSet<Term>>,
    ranks: RankMap,
}

impl GroundingDomains {
    pub fn new(program: &Program, analysis: &Analysis) -> Self {
        let mut written: BTreeMap<Position, BTreeSet<Term>> = BTreeMap::new();
        for rule in &program.rules {
            for (p, t) in rule.head.slots() {
                if t.is_rigid() {
                    written.entry(p).or_default().insert(t.clone());
                }
            }
        }
        let mut reaching: BTreeMap<Position, BTreeSet<Term>> = BTreeMap::new();
        for (p, terms) in written {
            for q in analysis.graph.normal_closure([p]) {
                reaching.entry(q).or_default().extend(terms.iter().cloned());
            }
        }
        GroundingDomains {
            active: program.active_domain(),
            reaching,
            ranks: analysis.ranks.clone(),
        }
    }

    pub fn domain(&self, rule: &Rule, var: &str) -> BTreeSet<Term> {
        let mut common: Option<BTreeSet<Term>> = None;
        for p in rule.body_positions_of(var) {
            if !self.ranks.is_finite(&p) {
                continue;
            }
            let here = self.reaching.get(&p).cloned().unwrap_or_default();
            common = Some(match common {
                None => here,
                Some(c) => c.intersection(&here).cloned().collect(),
            });
        }
        let mut out = self.active.clone();
        out.extend(common.unwrap_or_default());
        out
    }
}

/// Replaces every weak rule by its instances over the candidate values of
/// its weak variables; the result is sticky.
pub fn partial_grounding(program: &Program) -> Result<Program, TransformError> {
    let analysis = Analysis::of_rules(&program.rules);
    check_preconditions(&analysis)?;
    let domains = GroundingDomains::new(program, &analysis);
    Ok(ground_weak_rules(program, &analysis, |rule, _, v| {
        domains.domain(rule, v)
    }))
}

/// Like [`partial_grounding`], but each weak variable only ranges over the
/// values it takes in the grounded program (see
/// [`restrict_grounding_domain`]).
pub fn partial_grounding_restricted(program: &Program) -> Result<Program, TransformError> {
    let analysis = Analysis::of_rules(&program.rules);
    check_preconditions(&analysis)?;
    let domains = GroundingDomains::new(program, &analysis);
    let weak = weak_variables(&program.rules, &analysis.marking, &analysis.ranks);
    let mut restricted: BTreeMap<(usize, Arc<str>), BTreeSet<Term>> = BTreeMap::new();
    for i in weak.weak_rules() {
        let rule = &program.rules[i];
        let cfg = GroundingConfig::new(rule.body_variables().len());
        for v in weak.get(i) {
            let found = restrict_grounding_domain(program, rule, v, &cfg)?;
            let full = domains.domain(rule, v);
            restricted.insert((i, v.clone()), found.intersection(&full).cloned().collect());
        }
    }
    Ok(ground_weak_rules(program, &analysis, |_, i, v| {
        restricted.remove(&(i, Arc::from(v))).unwrap_or_default()
    }))
}

fn ground_weak_rules(
    program: &Program,
    analysis: &Analysis,
    mut domain: impl FnMut(&Rule, usize, &str) -> BTreeSet<Term>,
) -> Program {
    let weak = weak_variables(&program.rules, &analysis.marking, &analysis.ranks);
    let mut rules = Vec::new();
    for (i, rule) in program.rules.iter().enumerate() {
        let vars = weak.get(i);
        if vars.is_empty() {
            rules.push(rule.clone());
            continue;
        }
        let values: Vec<Vec<Term>> = vars
            .iter()
            .map(|v| domain(rule, i, v).into_iter().collect())
            .collect();
        for choice in cartesian(&values) {
            let s: Substitution = vars
                .iter()
                .zip(choice)
                .map(|(v, t)| (Term::Variable(v.clone()), t))
                .collect();
            rules.push(s.apply_rule(rule));
        }
    }
    Program {
        rules,
        database: program.database.clone(),
    }
}

/// All picks of one value per list, first list varying slowest.
fn cartesian(lists: &[Vec<Term>]) -> Vec<Vec<Term>> {
    let mut out = vec![Vec::new()];
    for list in lists {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                list.iter().map(move |t| {
                    let mut next = prefix.clone();
                    next.push(t.clone());
                    next
                })
            })
            .collect();
    }
    out
}

/// Values `var` takes over matches of the body of `rule` in the model of the
/// grounded program, i.e. the answers of the auxiliary query
/// `q_g(var) :- body(rule)`. Nulls are dropped; the engine's special
/// constants are kept since they may sit at finite-rank positions.
pub fn restrict_grounding_domain(
    program: &Program,
    rule: &Rule,
    var: &str,
    cfg: &GroundingConfig,
) -> Result<BTreeSet<Term>, TransformError> {
    let gp = ground_ws(program, cfg)?;
    let model = minimal_model(&gp);
    let mut out = BTreeSet::new();
    let _ = for_each_match(
        &rule.body,
        &model,
        &Substitution::new(),
        &mut |_, _| true,
        &mut |h, _| {
            if let Some(t) = h.get_var(var) {
                if t.is_constant() || matches!(t, Term::FunctionConstant(_) | Term::Filler) {
                    out.insert(t.clone());
                }
            }
            ControlFlow::Continue(())
        },
    );
    Ok(out)
}
