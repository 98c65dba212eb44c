//! Printing answers, including circular ones as fixpoint equations.

use std::collections::{BTreeSet, HashMap};

use crate::subst::Substitution;
use crate::term::{Term, Var};
use crate::unify::RationalStore;

/// `VAR = term` lines for the query variables bound in `store`.
///
/// Infinite bindings print in equation form: a cyclic subterm equal to a
/// query variable prints as that variable, any other one gets an auxiliary
/// name `_R<n>` with its own equation. Unbound non-query variables print
/// as `_A`, `_B`, ... in order of appearance. Prints `true` when nothing
/// is bound.
pub fn render_answer(store: &RationalStore, qvars: &[(String, Var)]) -> Vec<String> {
    let mut pr = Printer::new(store, qvars);
    let mut lines = Vec::new();
    for (name, v) in qvars {
        if let Some(img) = pr.subst.get(v).cloned() {
            let rhs = pr.term(&img);
            lines.push(format!("{name} = {rhs}"));
        }
    }
    let mut k = 0;
    while k < pr.aux.len() {
        let (rep, name) = pr.aux[k].clone();
        let img = pr.subst.get(&rep).cloned().expect("aux variables are bound");
        let rhs = pr.term(&img);
        lines.push(format!("{name} = {rhs}"));
        k += 1;
    }
    if lines.is_empty() {
        lines.push("true".to_string());
    }
    lines
}

pub fn render_substitution(s: &Substitution, qvars: &[(String, Var)]) -> Vec<String> {
    render_answer(&RationalStore::from_substitution(s), qvars)
}

struct Printer<'a> {
    store: &'a RationalStore,
    subst: Substitution,
    cyclic: BTreeSet<Var>,
    qvars: &'a [(String, Var)],
    free: HashMap<Var, String>,
    aux: Vec<(Var, String)>,
    infinite: HashMap<Var, bool>,
}

impl<'a> Printer<'a> {
    fn new(store: &'a RationalStore, qvars: &'a [(String, Var)]) -> Self {
        let subst = store.substitution();
        let cyclic = subst.cyclic_vars();
        Printer { store, subst, cyclic, qvars, free: HashMap::new(), aux: Vec::new(), infinite: HashMap::new() }
    }

    fn is_infinite(&mut self, v: &Var) -> bool {
        if let Some(&b) = self.infinite.get(v) {
            return b;
        }
        let reach = self.subst.reachable_from(&BTreeSet::from([v.clone()]));
        let b = reach.domain().any(|w| self.cyclic.contains(w));
        self.infinite.insert(v.clone(), b);
        b
    }

    fn name_for_cycle(&mut self, v: &Var) -> String {
        let as_term = Term::Var(v.clone());
        for (name, q) in self.qvars {
            if self.subst.get(q).is_some()
                && self.is_infinite(q)
                && self.store.rational_eq(&as_term, &Term::Var(q.clone()))
            {
                return name.clone();
            }
        }
        for (rep, name) in &self.aux {
            if self.store.rational_eq(&as_term, &Term::Var(rep.clone())) {
                return name.clone();
            }
        }
        let name = format!("_R{}", self.aux.len() + 1);
        self.aux.push((v.clone(), name.clone()));
        name
    }

    fn free_name(&mut self, v: &Var) -> String {
        if let Some((name, _)) = self.qvars.iter().find(|(_, q)| q == v) {
            return name.clone();
        }
        let n = self.free.len();
        self.free.entry(v.clone()).or_insert_with(|| letters(n)).clone()
    }

    fn term(&mut self, t: &Term) -> String {
        match t {
            Term::Var(v) => match self.subst.get(v).cloned() {
                Some(_) if self.is_infinite(v) => self.name_for_cycle(v),
                Some(img) => self.term(&img),
                None => self.free_name(v),
            },
            Term::App(f, args) if args.is_empty() => f.name().to_string(),
            Term::App(f, args) => {
                let parts: Vec<String> = args.iter().map(|a| self.term(a)).collect();
                format!("{}({})", f.name(), parts.join(", "))
            }
        }
    }
}

/// `_A`, ..., `_Z`, `_A1`, ...
fn letters(n: usize) -> String {
    let c = (b'A' + (n % 26) as u8) as char;
    if n < 26 {
        format!("_{c}")
    } else {
        format!("_{c}{}", n / 26)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_term;
    use crate::term::VarGen;

    #[test]
    fn circular_binding_prints_as_equation() {
        let g = VarGen::new();
        let t = parse_term("p(X, scons(0, Y), Y)", &g).unwrap();
        let x = t.args()[0].as_var().unwrap().clone();
        let y = t.args()[2].as_var().unwrap().clone();
        let mut store = RationalStore::new();
        assert!(store.unify(&Term::Var(x.clone()), &Term::Var(y.clone())));
        assert!(store.unify(&Term::Var(y), &t.args()[1]));
        let lines = render_answer(&store, &[("X".into(), x)]);
        assert_eq!(lines, ["X = scons(0, X)"]);
    }

    #[test]
    fn finite_and_free() {
        let g = VarGen::new();
        let t = parse_term("p(X, f(Z, W, Z))", &g).unwrap();
        let x = t.args()[0].as_var().unwrap().clone();
        let s = Substitution::singleton(x.clone(), t.args()[1].clone());
        assert_eq!(render_substitution(&s, &[("X".into(), x)]), ["X = f(_A, _B, _A)"]);
        assert_eq!(render_substitution(&Substitution::new(), &[]), ["true"]);
    }

    #[test]
    fn auxiliary_names_for_hidden_cycles() {
        let g = VarGen::new();
        let t = parse_term("p(X, f(B), B, s(B))", &g).unwrap();
        let x = t.args()[0].as_var().unwrap().clone();
        let mut store = RationalStore::new();
        assert!(store.unify(&t.args()[0], &t.args()[1]));
        assert!(store.unify(&t.args()[2], &t.args()[3]));
        let lines = render_answer(&store, &[("X".into(), x)]);
        assert_eq!(lines, ["X = f(_R1)", "_R1 = s(_R1)"]);
    }
}
