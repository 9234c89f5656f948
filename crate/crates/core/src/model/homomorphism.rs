use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;
use std::sync::Arc;

use foldhash::{HashMap, HashMapExt};

use super::atom::{Atom, Position};
use super::subst::Substitution;
use super::term::Term;
use super::ModelError;

/// An indexed set of atoms supporting join lookups by predicate and by
/// `(predicate, argument index, term)`.
#[derive(Clone, Debug, Default)]
pub struct Instance {
    atoms: Vec<Atom>,
    ids: HashMap<Atom, usize>,
    by_predicate: HashMap<Arc<str>, Vec<usize>>,
    /// Per predicate and argument index: atom ids by term.
    by_slot: HashMap<Arc<str>, Vec<HashMap<Term, Vec<usize>>>>,
}

impl Instance {
    pub fn new() -> Self {
        Instance::default()
    }

    /// Inserts `atom`, returning its id and whether it was new.
    pub fn insert(&mut self, atom: Atom) -> (usize, bool) {
        if let Some(&id) = self.ids.get(&atom) {
            return (id, false);
        }
        let id = self.atoms.len();
        self.by_predicate
            .entry(atom.predicate.clone())
            .or_default()
            .push(id);
        let slots = self.by_slot.entry(atom.predicate.clone()).or_default();
        if slots.len() < atom.arity() {
            slots.resize_with(atom.arity(), HashMap::new);
        }
        for (i, t) in atom.args.iter().enumerate() {
            slots[i].entry(t.clone()).or_default().push(id);
        }
        self.ids.insert(atom.clone(), id);
        self.atoms.push(atom);
        (id, true)
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.ids.contains_key(atom)
    }

    pub fn id_of(&self, atom: &Atom) -> Option<usize> {
        self.ids.get(atom).copied()
    }

    pub fn get(&self, id: usize) -> &Atom {
        &self.atoms[id]
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Ids of atoms carrying `term` at argument `index` of `predicate`.
    pub fn with_slot(&self, predicate: &str, index: usize, term: &Term) -> &[usize] {
        self.by_slot
            .get(predicate)
            .and_then(|slots| slots.get(index))
            .and_then(|m| m.get(term))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn with_predicate(&self, predicate: &str) -> &[usize] {
        self.by_predicate
            .get(predicate)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Atom ids that could match `pattern` under `subst`: the shortest
    /// posting list among the bound arguments, or all atoms of the predicate.
    pub fn candidates(&self, pattern: &Atom, subst: &Substitution) -> &[usize] {
        let mut best: Option<&[usize]> = None;
        for (i, t) in pattern.args.iter().enumerate() {
            let bound = match t {
                Term::Variable(_) => match subst.get(t) {
                    Some(v) => v,
                    None => continue,
                },
                other => other,
            };
            let list = self.with_slot(&pattern.predicate, i, bound);
            if best.is_none_or(|b| list.len() < b.len()) {
                best = Some(list);
            }
            if list.is_empty() {
                break;
            }
        }
        best.unwrap_or_else(|| {
            self.by_predicate
                .get(&pattern.predicate)
                .map(Vec::as_slice)
                .unwrap_or(&[])
        })
    }
}

impl FromIterator<Atom> for Instance {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        let mut inst = Instance::new();
        for a in iter {
            inst.insert(a);
        }
        inst
    }
}

/// Extends `subst` so that `pattern` maps onto `target`. Only variables are
/// bindable; every other term must match itself.
pub fn match_atom(pattern: &Atom, target: &Atom, subst: &mut Substitution) -> bool {
    if pattern.predicate != target.predicate || pattern.arity() != target.arity() {
        return false;
    }
    for (p, t) in pattern.args.iter().zip(&target.args) {
        match p {
            Term::Variable(_) => {
                if !subst.bind(p.clone(), t.clone()) {
                    return false;
                }
            }
            other => {
                if other != t {
                    return false;
                }
            }
        }
    }
    true
}

/// Backtracking join of `conjunction` into `instance`, starting from `init`.
///
/// `accept(body_index, atom_id)` filters the atoms each conjunct may map
/// to. `on_match` receives the substitution and the matched atom id per
/// conjunct; returning `ControlFlow::Break` stops the search.
pub fn for_each_match(
    conjunction: &[Atom],
    instance: &Instance,
    init: &Substitution,
    accept: &mut dyn FnMut(usize, usize) -> bool,
    on_match: &mut dyn FnMut(&Substitution, &[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let mut chosen = vec![usize::MAX; conjunction.len()];
    let mut done = vec![false; conjunction.len()];
    search(
        conjunction,
        instance,
        init.clone(),
        &mut chosen,
        &mut done,
        accept,
        on_match,
    )
}

fn search(
    conjunction: &[Atom],
    instance: &Instance,
    subst: Substitution,
    chosen: &mut Vec<usize>,
    done: &mut Vec<bool>,
    accept: &mut dyn FnMut(usize, usize) -> bool,
    on_match: &mut dyn FnMut(&Substitution, &[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    // most selective remaining conjunct first
    let next = (0..conjunction.len())
        .filter(|&i| !done[i])
        .min_by_key(|&i| instance.candidates(&conjunction[i], &subst).len());
    let Some(i) = next else {
        return on_match(&subst, chosen);
    };
    done[i] = true;
    for &id in instance.candidates(&conjunction[i], &subst) {
        if !accept(i, id) {
            continue;
        }
        let mut extended = subst.clone();
        if match_atom(&conjunction[i], instance.get(id), &mut extended) {
            chosen[i] = id;
            search(
                conjunction,
                instance,
                extended,
                chosen,
                done,
                accept,
                on_match,
            )?;
        }
    }
    done[i] = false;
    ControlFlow::Continue(())
}

/// Every homomorphism from `from` into `into` extending `init`, restricted
/// to the variables of `from` and sorted by (variable, image) under the
/// canonical term order.
pub fn find_homomorphisms_from(
    from: &[Atom],
    into: &Instance,
    init: &Substitution,
) -> Vec<Substitution> {
    let vars: BTreeSet<Term> = from
        .iter()
        .flat_map(|a| a.args.iter())
        .filter(|t| t.is_variable())
        .cloned()
        .collect();
    let mut out = BTreeSet::new();
    let _ = for_each_match(from, into, init, &mut |_, _| true, &mut |s, _| {
        out.insert(s.restrict(|k| vars.contains(k) || init.get(k).is_some()));
        ControlFlow::Continue(())
    });
    out.into_iter().collect()
}

/// Every homomorphism mapping the conjunction `from` into the atom set
/// `into`, in deterministic order.
pub fn find_homomorphisms<'a>(
    from: &[Atom],
    into: impl IntoIterator<Item = &'a Atom>,
) -> Vec<Substitution> {
    let inst: Instance = into.into_iter().cloned().collect();
    find_homomorphisms_from(from, &inst, &Substitution::new())
}

/// Whether some homomorphism maps `from` into `into` extending `init`.
pub fn has_homomorphism(from: &[Atom], into: &Instance, init: &Substitution) -> bool {
    for_each_match(from, into, init, &mut |_, _| true, &mut |_, _| {
        ControlFlow::Break(())
    })
    .is_break()
}

/// Whether a homomorphism `h` with `h(a) = b` exists that is the identity on
/// every term occurring in `a` at a position of `pi`. Both atoms must be
/// ground; only labeled nulls outside the fixed set may be remapped.
pub fn pi_homomorphic(a: &Atom, b: &Atom, pi: &BTreeSet<Position>) -> Result<bool, ModelError> {
    for x in [a, b] {
        if !x.is_ground() {
            return Err(ModelError::NotGround(x.to_string()));
        }
    }
    Ok(pi_homomorphic_ground(a, b, |p| pi.contains(p)))
}

pub(crate) fn pi_homomorphic_ground(a: &Atom, b: &Atom, in_pi: impl Fn(&Position) -> bool) -> bool {
    if a.predicate != b.predicate || a.arity() != b.arity() {
        return false;
    }
    let fixed: BTreeSet<&Term> = a
        .slots()
        .filter(|(p, t)| t.is_labeled_null() && in_pi(p))
        .map(|(_, t)| t)
        .collect();
    let mut image: BTreeMap<&Term, &Term> = BTreeMap::new();
    for (s, t) in a.args.iter().zip(&b.args) {
        if s.is_labeled_null() && !fixed.contains(s) {
            match image.get(s) {
                Some(prev) if *prev != t => return false,
                Some(_) => {}
                None => {
                    image.insert(s, t);
                }
            }
        } else if s != t {
            return false;
        }
    }
    true
}

/// The source constants occurring in `database`.
pub fn active_domain<'a>(database: impl IntoIterator<Item = &'a Atom>) -> BTreeSet<Term> {
    database
        .into_iter()
        .flat_map(|a| a.args.iter())
        .filter(|t| t.is_constant())
        .cloned()
        .collect()
}
