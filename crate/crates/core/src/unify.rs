//! Matching (`≺`), unification with occurs check (`∼`) and rational-tree
//! unification without occurs check (`≈`).

use std::collections::{HashMap, HashSet};

use crate::subst::Substitution;
use crate::term::{match_into, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum UnifierKind {
    Matcher,
    ProperUnifier,
    RationalUnifier,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnifyOutcome {
    Matcher(Substitution),
    ProperUnifier(Substitution),
    RationalUnifier(Substitution),
    Fail,
}

impl UnifyOutcome {
    pub fn kind(&self) -> Option<UnifierKind> {
        match self {
            UnifyOutcome::Matcher(_) => Some(UnifierKind::Matcher),
            UnifyOutcome::ProperUnifier(_) => Some(UnifierKind::ProperUnifier),
            UnifyOutcome::RationalUnifier(_) => Some(UnifierKind::RationalUnifier),
            UnifyOutcome::Fail => None,
        }
    }

    pub fn substitution(&self) -> Option<&Substitution> {
        match self {
            UnifyOutcome::Matcher(s)
            | UnifyOutcome::ProperUnifier(s)
            | UnifyOutcome::RationalUnifier(s) => Some(s),
            UnifyOutcome::Fail => None,
        }
    }

    pub fn into_substitution(self) -> Option<Substitution> {
        match self {
            UnifyOutcome::Matcher(s)
            | UnifyOutcome::ProperUnifier(s)
            | UnifyOutcome::RationalUnifier(s) => Some(s),
            UnifyOutcome::Fail => None,
        }
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, UnifyOutcome::Fail)
    }
}

/// Most general matcher: `σ(pattern) = target`, binding pattern variables
/// only. A binding for a variable that also occurs in `target` would
/// change the target under `σ`, so such matches are rejected.
pub fn mgm(pattern: &Term, target: &Term) -> UnifyOutcome {
    let mut map = HashMap::new();
    if match_into(pattern, target, &mut map)
        && map.iter().all(|(v, t)| t.as_var() == Some(v) || !target.contains_var(v))
    {
        UnifyOutcome::Matcher(Substitution::from_pairs(map))
    } else {
        UnifyOutcome::Fail
    }
}

/// Most general unifier with occurs check. Reported as a matcher whenever
/// `a` can be matched onto `b`.
pub fn mgu(a: &Term, b: &Term) -> UnifyOutcome {
    let m = mgm(a, b);
    if !m.is_fail() {
        return m;
    }
    let mut store = RationalStore::new();
    if store.unify_checked(a, b, true) {
        UnifyOutcome::ProperUnifier(store.substitution())
    } else {
        UnifyOutcome::Fail
    }
}

/// Unification over rational trees. Fails only on symbol clashes.
pub fn rational_unify(a: &Term, b: &Term) -> UnifyOutcome {
    let proper = mgu(a, b);
    if !proper.is_fail() {
        return proper;
    }
    let mut store = RationalStore::new();
    if store.unify(a, b) {
        UnifyOutcome::RationalUnifier(store.substitution())
    } else {
        UnifyOutcome::Fail
    }
}

/// Identity of an application node. Bindings hand out clones of the same
/// `Arc`, so revisiting a node through a cycle yields the same key.
fn node_key(args: &std::sync::Arc<[Term]>) -> usize {
    std::sync::Arc::as_ptr(args) as *const Term as usize
}

pub fn occurs_in(v: &Var, t: &Term) -> bool {
    t.contains_var(v)
}

/// A triangular binding store over rational trees. Bindings may be
/// circular; unification is coinductive over pairs already assumed equal.
#[derive(Clone, Debug, Default)]
pub struct RationalStore {
    bindings: HashMap<Var, Term>,
}

impl RationalStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Seed the store with existing (possibly circular) bindings.
    pub fn from_substitution(s: &Substitution) -> Self {
        RationalStore {
            bindings: s.iter().map(|(v, t)| (v.clone(), t.clone())).collect(),
        }
    }

    pub fn deref<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match self.bindings.get(v) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    pub fn is_bound(&self, v: &Var) -> bool {
        self.bindings.contains_key(v)
    }

    /// Unify without occurs check. Leaves the store untouched on failure.
    pub fn unify(&mut self, a: &Term, b: &Term) -> bool {
        self.unify_checked(a, b, false)
    }

    pub fn unify_checked(&mut self, a: &Term, b: &Term, occurs_check: bool) -> bool {
        self.solve(a, b, occurs_check, &HashSet::new())
    }

    /// Unify where the variables in `rigid` may not be bound.
    pub fn unify_rigid(&mut self, a: &Term, b: &Term, rigid: &HashSet<Var>) -> bool {
        self.solve(a, b, false, rigid)
    }

    fn solve(&mut self, a: &Term, b: &Term, occurs_check: bool, rigid: &HashSet<Var>) -> bool {
        let saved = self.bindings.clone();
        let mut work = vec![(a.clone(), b.clone())];
        let mut assumed: HashSet<(usize, usize)> = HashSet::new();
        while let Some((x, y)) = work.pop() {
            let x = self.deref(&x).clone();
            let y = self.deref(&y).clone();
            let ok = match (&x, &y) {
                (Term::Var(v), Term::Var(w)) if v == w => true,
                (Term::Var(v), Term::Var(w)) => {
                    // Younger (higher id) variable points at the older one.
                    let (young, old) = if v.id() > w.id() { (v, w) } else { (w, v) };
                    let (young, old) = match (rigid.contains(young), rigid.contains(old)) {
                        (false, _) => (young, old),
                        (true, false) => (old, young),
                        (true, true) => {
                            self.bindings = saved;
                            return false;
                        }
                    };
                    self.bindings.insert(young.clone(), Term::Var(old.clone()));
                    true
                }
                (Term::Var(v), t) | (t, Term::Var(v)) => {
                    if rigid.contains(v) || (occurs_check && self.occurs_resolved(v, t)) {
                        false
                    } else {
                        self.bindings.insert(v.clone(), t.clone());
                        true
                    }
                }
                (Term::App(f, xs), Term::App(g, ys)) => {
                    if f != g {
                        false
                    } else {
                        if assumed.insert((node_key(xs), node_key(ys))) {
                            for (p, q) in xs.iter().zip(ys.iter()).rev() {
                                work.push((p.clone(), q.clone()));
                            }
                        }
                        true
                    }
                }
            };
            if !ok {
                self.bindings = saved;
                return false;
            }
        }
        true
    }

    fn occurs_resolved(&self, v: &Var, t: &Term) -> bool {
        let mut seen = HashSet::new();
        let mut stack = vec![t.clone()];
        while let Some(t) = stack.pop() {
            match self.deref(&t) {
                Term::Var(w) => {
                    if w == v {
                        return true;
                    }
                }
                Term::App(_, args) => {
                    if seen.insert(node_key(args)) {
                        stack.extend(args.iter().cloned());
                    }
                }
            }
        }
        false
    }

    /// Coinductive equality of the rational trees denoted by `a` and `b`.
    pub fn rational_eq(&self, a: &Term, b: &Term) -> bool {
        let mut work = vec![(a.clone(), b.clone())];
        let mut assumed: HashSet<(usize, usize)> = HashSet::new();
        while let Some((x, y)) = work.pop() {
            let x = self.deref(&x);
            let y = self.deref(&y);
            match (x, y) {
                (Term::Var(v), Term::Var(w)) => {
                    if v != w {
                        return false;
                    }
                }
                (Term::App(f, xs), Term::App(g, ys)) => {
                    if f != g {
                        return false;
                    }
                    if xs.is_empty() {
                        continue;
                    }
                    if assumed.insert((node_key(xs), node_key(ys))) {
                        work.extend(xs.iter().cloned().zip(ys.iter().cloned()));
                    }
                }
                _ => return false,
            }
        }
        true
    }

    /// Normalized substitution view of the store.
    pub fn substitution(&self) -> Substitution {
        Substitution::from_pairs(self.bindings.iter().map(|(v, t)| (v.clone(), t.clone()))).normalized()
    }
}
