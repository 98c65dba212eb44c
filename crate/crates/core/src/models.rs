//! Bounded model oracles: forward closure for the least Herbrand model and
//! a local backward-closure check for membership in the greatest one.

use std::collections::{HashMap, HashSet};

use crate::program::Program;
use crate::subst::Substitution;
use crate::term::{Symbol, Term, VarGen};
use crate::unify::{mgm, RationalStore, UnifyOutcome};

/// Ground atoms whose arguments have depth at most `cap`.
#[derive(Clone, Debug, Default)]
pub struct GroundAtomSet {
    pub atoms: HashSet<Term>,
    pub cap: usize,
}

impl GroundAtomSet {
    pub fn contains(&self, t: &Term) -> bool {
        self.atoms.contains(t)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Members ordered by depth, then text.
    pub fn sorted(&self) -> Vec<Term> {
        let mut v: Vec<Term> = self.atoms.iter().cloned().collect();
        v.sort_by_cached_key(|t| (t.depth(), t.to_string()));
        v
    }

    pub fn with_predicate<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Term> + 'a {
        self.atoms.iter().filter(move |a| a.symbol().is_some_and(|s| s.name() == name))
    }
}

fn arg_depth(atom: &Term) -> usize {
    atom.args().iter().map(Term::depth).max().unwrap_or(0)
}

/// Ground terms over the function symbols of `p` up to depth `cap`.
pub fn herbrand_universe(p: &Program, cap: usize) -> Vec<Term> {
    let funs: Vec<Symbol> = p.function_symbols().into_iter().collect();
    let mut levels: Vec<Term> = Vec::new();
    for _ in 0..cap {
        let mut next: Vec<Term> = Vec::new();
        for f in &funs {
            let mut tuples: Vec<Vec<Term>> = vec![Vec::new()];
            for _ in 0..f.arity() {
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| {
                        levels.iter().map(move |a| {
                            let mut t = t.clone();
                            t.push(a.clone());
                            t
                        })
                    })
                    .collect();
            }
            next.extend(tuples.into_iter().map(|args| Term::from_symbol(f.clone(), args)));
        }
        if next.len() == levels.len() {
            break;
        }
        levels = next;
    }
    levels
}

fn join(
    body: &[Term],
    sigma: Substitution,
    known: &HashMap<Symbol, Vec<Term>>,
    out: &mut Vec<Substitution>,
) {
    let Some((first, rest)) = body.split_first() else {
        out.push(sigma);
        return;
    };
    let pattern = sigma.apply_acyclic(first);
    let Some(candidates) = pattern.symbol().and_then(|s| known.get(s)) else { return };
    for fact in candidates {
        if let UnifyOutcome::Matcher(m) = mgm(&pattern, fact) {
            let mut next = sigma.clone();
            for (v, t) in m.iter() {
                next.bind(v.clone(), t.clone());
            }
            join(rest, next, known, out);
        }
    }
}

/// Forward closure under the big-step rule, restricted to ground atoms
/// whose arguments have depth at most `cap`.
pub fn lfp_enumerate(p: &Program, cap: usize) -> GroundAtomSet {
    let mut set = GroundAtomSet { atoms: HashSet::new(), cap };
    if !p.function_symbols().iter().any(|s| s.arity() == 0) {
        return set;
    }
    let universe = herbrand_universe(p, cap);
    let mut known: HashMap<Symbol, Vec<Term>> = HashMap::new();
    loop {
        let mut added = Vec::new();
        for c in &p.clauses {
            let mut sols = Vec::new();
            join(&c.body, Substitution::new(), &known, &mut sols);
            for s in sols {
                let head = s.apply_acyclic(&c.head);
                let mut heads = vec![head];
                for v in c.head.variables_ordered() {
                    if s.get(&v).is_some() {
                        continue;
                    }
                    heads = heads
                        .into_iter()
                        .flat_map(|h| {
                            let v = v.clone();
                            universe.iter().map(move |u| Substitution::singleton(v.clone(), u.clone()).apply_acyclic(&h))
                        })
                        .collect();
                }
                for h in heads {
                    if arg_depth(&h) <= cap && !set.atoms.contains(&h) && !added.contains(&h) {
                        added.push(h);
                    }
                }
            }
        }
        if added.is_empty() {
            return set;
        }
        for a in added {
            let sym = a.symbol().expect("atoms are applications").clone();
            known.entry(sym).or_default().push(a.clone());
            set.atoms.insert(a);
        }
    }
}

/// Whether a backward application of the big-step rule can be chosen at
/// every node of a proof tree for `σ(t)` down to depth `d`. `σ` may be
/// circular.
pub fn gfp_local_check(p: &Program, t: &Term, sigma: &Substitution, d: usize, fresh: &VarGen) -> bool {
    let store = RationalStore::from_substitution(sigma);
    prove(p, vec![(t.clone(), d)], store, fresh)
}

fn prove(p: &Program, mut goals: Vec<(Term, usize)>, store: RationalStore, fresh: &VarGen) -> bool {
    let Some((atom, d)) = goals.pop() else { return true };
    if d == 0 {
        return prove(p, goals, store, fresh);
    }
    for c in &p.clauses {
        let inst = c.instance(fresh);
        let mut s = store.clone();
        if !s.unify(&inst.head, &atom) {
            continue;
        }
        let mut next = goals.clone();
        next.extend(inst.body.into_iter().map(|b| (b, d - 1)));
        if prove(p, next, s, fresh) {
            return true;
        }
    }
    false
}
