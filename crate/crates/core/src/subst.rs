//! Substitutions, possibly circular.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::error::{CircularSubstitution, Error};
use crate::term::{Term, Var, VarGen};

/// A finite map from variables to terms. Identity bindings are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(v: Var, t: Term) -> Self {
        let mut s = Self::new();
        s.bind(v, t);
        s
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Term)>) -> Self {
        let mut s = Self::new();
        for (v, t) in pairs {
            s.bind(v, t);
        }
        s
    }

    /// Insert `v ↦ t`, dropping it when `t` is `v` itself.
    pub fn bind(&mut self, v: Var, t: Term) {
        if t.as_var() == Some(&v) {
            self.bindings.remove(&v);
        } else {
            self.bindings.insert(v, t);
        }
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.bindings.get(v)
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.bindings.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.bindings.keys()
    }

    pub fn max_var_id(&self) -> u64 {
        self.bindings
            .iter()
            .map(|(v, t)| v.id().max(t.max_var_id()))
            .max()
            .unwrap_or(0)
    }

    /// Bound variables reachable from their own image through bindings.
    pub fn cyclic_vars(&self) -> BTreeSet<Var> {
        // Tarjan-free version: a bound var is cyclic iff a DFS from its
        // image's bound variables comes back to it.
        let mut out = BTreeSet::new();
        for v in self.bindings.keys() {
            let mut seen = HashSet::new();
            let mut stack: Vec<Var> = self.bindings[v]
                .variables()
                .into_iter()
                .filter(|w| self.bindings.contains_key(w))
                .collect();
            while let Some(w) = stack.pop() {
                if &w == v {
                    out.insert(v.clone());
                    break;
                }
                if seen.insert(w.clone()) {
                    stack.extend(
                        self.bindings[&w]
                            .variables()
                            .into_iter()
                            .filter(|u| self.bindings.contains_key(u)),
                    );
                }
            }
        }
        out
    }

    pub fn is_circular(&self) -> bool {
        !self.cyclic_vars().is_empty()
    }

    fn check_acyclic(&self) -> Result<(), Error> {
        let cyclic = self.cyclic_vars();
        match cyclic.into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::Circular(CircularSubstitution { var: v.to_string() })),
        }
    }

    /// Replace bound variables until none remains.
    pub fn apply(&self, t: &Term) -> Result<Term, Error> {
        self.check_acyclic()?;
        Ok(self.apply_acyclic(t))
    }

    /// `apply` for substitutions known to be non-circular.
    pub(crate) fn apply_acyclic(&self, t: &Term) -> Term {
        if self.bindings.is_empty() {
            return t.clone();
        }
        t.map_vars(&mut |v| match self.bindings.get(v) {
            Some(img) => self.apply_acyclic(img),
            None => Term::Var(v.clone()),
        })
    }

    pub fn apply_all(&self, ts: &[Term]) -> Result<Vec<Term>, Error> {
        self.check_acyclic()?;
        Ok(ts.iter().map(|t| self.apply_acyclic(t)).collect())
    }

    /// Single homomorphic pass: each variable is replaced by its image once.
    pub fn apply_once(&self, t: &Term) -> Term {
        t.map_vars(&mut |v| self.bindings.get(v).cloned().unwrap_or_else(|| Term::Var(v.clone())))
    }

    /// `outer ∘ inner`: applying the result equals applying `inner` then
    /// `outer`.
    pub fn compose(outer: &Substitution, inner: &Substitution) -> Result<Substitution, Error> {
        outer.check_acyclic()?;
        inner.check_acyclic()?;
        let mut out = Substitution::new();
        let domain: BTreeSet<&Var> = inner.bindings.keys().chain(outer.bindings.keys()).collect();
        for v in domain {
            let img = outer.apply_acyclic(&inner.apply_acyclic(&Term::Var(v.clone())));
            out.bind(v.clone(), img);
        }
        out.check_acyclic()?;
        Ok(out)
    }

    /// Keep only bindings for `vars`, with fully resolved images.
    pub fn restrict(&self, vars: &BTreeSet<Var>) -> Result<Substitution, Error> {
        self.check_acyclic()?;
        let mut out = Substitution::new();
        for v in vars {
            if self.bindings.contains_key(v) {
                out.bind(v.clone(), self.apply_acyclic(&Term::Var(v.clone())));
            }
        }
        Ok(out)
    }

    /// Normal form for possibly circular substitutions: images of cyclic
    /// variables are non-variable terms, and no image mentions a bound
    /// non-cyclic variable.
    pub fn normalized(&self) -> Substitution {
        let cyclic = self.cyclic_vars();
        let mut out = Substitution::new();
        for (v, img) in &self.bindings {
            let mut img = img.clone();
            // Skip through variable chains so cyclic images are non-variable.
            let mut hops = 0;
            while let Some(w) = img.as_var() {
                match self.bindings.get(w) {
                    Some(next) if hops <= self.bindings.len() => {
                        img = next.clone();
                        hops += 1;
                    }
                    _ => break,
                }
            }
            out.bind(v.clone(), self.expand_noncyclic(&img, &cyclic));
        }
        out
    }

    fn expand_noncyclic(&self, t: &Term, cyclic: &BTreeSet<Var>) -> Term {
        t.map_vars(&mut |w| match self.bindings.get(w) {
            Some(img) if !cyclic.contains(w) => self.expand_noncyclic(img, cyclic),
            _ => Term::Var(w.clone()),
        })
    }

    /// Bindings reachable from `vars`, keeping circular structure intact.
    pub fn reachable_from(&self, vars: &BTreeSet<Var>) -> Substitution {
        let mut out = Substitution::new();
        let mut stack: Vec<Var> = vars.iter().cloned().collect();
        let mut seen = HashSet::new();
        while let Some(v) = stack.pop() {
            if !seen.insert(v.clone()) {
                continue;
            }
            if let Some(img) = self.bindings.get(&v) {
                out.bind(v.clone(), img.clone());
                stack.extend(img.variables());
            }
        }
        out
    }

    pub fn into_map(self) -> BTreeMap<Var, Term> {
        self.bindings
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} ↦ {t}")?;
        }
        f.write_str("}")
    }
}

/// Rename every variable of `terms` to a fresh one. Returns the renamed
/// terms and the (bijective) renaming.
pub fn rename_apart(terms: &[Term], fresh: &VarGen) -> (Vec<Term>, Substitution) {
    let mut map: HashMap<Var, Var> = HashMap::new();
    let mut order = Vec::new();
    let renamed = terms
        .iter()
        .map(|t| {
            t.map_vars(&mut |v| {
                let nv = map
                    .entry(v.clone())
                    .or_insert_with(|| {
                        order.push(v.clone());
                        fresh.fresh_like(v)
                    })
                    .clone();
                Term::Var(nv)
            })
        })
        .collect();
    let renaming = Substitution::from_pairs(order.into_iter().map(|v| {
        let nv = map[&v].clone();
        (v, Term::Var(nv))
    }));
    (renamed, renaming)
}

/// Invert a renaming produced by [`rename_apart`].
pub fn invert_renaming(renaming: &Substitution) -> Option<Substitution> {
    let mut out = Substitution::new();
    for (v, t) in renaming.iter() {
        let w = t.as_var()?;
        if out.get(w).is_some() {
            return None;
        }
        out.bind(w.clone(), Term::Var(v.clone()));
    }
    Some(out)
}
