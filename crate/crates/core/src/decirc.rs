//! Decircularization of circular substitutions and depth-bounded unfolding.
//!
//! A circular binding `X ↦ t[X, Y]` becomes the chain `X ↦ t[X₁, Y₁]`,
//! `X₁ ↦ t[X₂, Y₂]`, ... with every free variable of `t` renamed per level.
//! All components share one table of renamed variables, so a component's
//! image refers to the same level-`n` copies as the other components.

use std::collections::{BTreeSet, HashMap};

use crate::subst::Substitution;
use crate::term::{truncate, Term, Var, VarGen};

pub struct DecircStream<'g> {
    source: Substitution,
    cyclic: BTreeSet<Var>,
    fresh: &'g VarGen,
    table: HashMap<(Var, usize), Var>,
}

impl<'g> DecircStream<'g> {
    pub fn new(s: &Substitution, fresh: &'g VarGen) -> Self {
        let source = s.normalized();
        let cyclic = source.cyclic_vars();
        DecircStream { source, cyclic, fresh, table: HashMap::new() }
    }

    pub fn source(&self) -> &Substitution {
        &self.source
    }

    pub fn is_circular(&self) -> bool {
        !self.cyclic.is_empty()
    }

    pub fn cyclic_vars(&self) -> &BTreeSet<Var> {
        &self.cyclic
    }

    /// The level-`n` copy of `v`; level 0 is `v` itself.
    pub fn var_at(&mut self, v: &Var, n: usize) -> Var {
        if n == 0 {
            return v.clone();
        }
        let fresh = self.fresh;
        self.table
            .entry((v.clone(), n))
            .or_insert_with(|| {
                let base = v.base_name().map(str::to_string).unwrap_or_else(|| format!("G{}", v.id()));
                fresh.fresh(Some(&format!("{base}_{n}")))
            })
            .clone()
    }

    /// Element `n ≥ 1`: `X₍ₙ₋₁₎ ↦ t₍ₙ₎` for each circular `X ↦ t`; the first
    /// element also carries the non-circular bindings unchanged.
    pub fn element(&mut self, n: usize) -> Substitution {
        assert!(n >= 1, "elements are numbered from 1");
        let mut out = Substitution::new();
        if n == 1 {
            for (v, t) in self.source.iter() {
                if !self.cyclic.contains(v) {
                    out.bind(v.clone(), t.clone());
                }
            }
        }
        let comps: Vec<(Var, Term)> = self
            .source
            .iter()
            .filter(|(v, _)| self.cyclic.contains(*v))
            .map(|(v, t)| (v.clone(), t.clone()))
            .collect();
        for (v, t) in comps {
            let img = t.map_vars(&mut |w| Term::Var(self.var_at(w, n)));
            let dom = self.var_at(&v, n - 1);
            out.bind(dom, img);
        }
        out
    }

    /// The first `k` elements.
    pub fn prefix(&mut self, k: usize) -> Vec<Substitution> {
        if !self.is_circular() {
            return vec![self.source.clone()];
        }
        (1..=k).map(|n| self.element(n)).collect()
    }

    /// `truncate(depth, ·)` of the infinite instance of `t`.
    pub fn unfold(&mut self, t: &Term, depth: usize) -> Term {
        let mut cur = truncate(depth, t);
        for n in 1..=depth + 1 {
            let e = self.element(n);
            cur = truncate(depth, &e.apply_acyclic(&cur));
            let pending: BTreeSet<Var> = self.cyclic.clone().iter().map(|x| self.var_at(x, n)).collect();
            if !cur.variables().iter().any(|v| pending.contains(v)) {
                break;
            }
        }
        cur
    }
}

/// The first `k` elements of the decircularization of `s`.
pub fn decircularize(s: &Substitution, k: usize, fresh: &VarGen) -> Vec<Substitution> {
    DecircStream::new(s, fresh).prefix(k)
}

/// Depth-`n` unfolding of `s` applied to `t`.
pub fn unfold(s: &Substitution, t: &Term, n: usize, fresh: &VarGen) -> Term {
    DecircStream::new(s, fresh).unfold(t, n)
}

/// Applies a sequence of non-circular substitutions in order.
pub fn apply_sequence(elements: &[Substitution], t: &Term) -> Term {
    elements.iter().fold(t.clone(), |acc, e| e.apply_acyclic(&acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_term;
    use crate::term::is_variant;

    fn vars(g: &VarGen, src: &str) -> Vec<Term> {
        parse_term(src, g).unwrap().args().to_vec()
    }

    #[test]
    fn example_a1_shape() {
        let g = VarGen::new();
        let v = vars(&g, "v(A1, B1, C1)");
        let (a1, b1, c1) = (v[0].clone(), v[1].clone(), v[2].clone());
        let sigma = Substitution::from_pairs([
            (a1.as_var().unwrap().clone(), Term::app("f", vec![a1.clone(), b1.clone(), c1.clone()])),
            (b1.as_var().unwrap().clone(), Term::app("s", vec![b1.clone()])),
        ]);
        let mut st = DecircStream::new(&sigma, &g);
        let els = st.prefix(3);
        assert_eq!(els.len(), 3);
        let (a, b, c) = (a1.as_var().unwrap().clone(), b1.as_var().unwrap().clone(), c1.as_var().unwrap().clone());
        for (i, e) in els.iter().enumerate() {
            let n = i + 1;
            assert_eq!(e.len(), 2);
            let ai = Term::Var(st.var_at(&a, n));
            let bi = Term::Var(st.var_at(&b, n));
            let ci = Term::Var(st.var_at(&c, n));
            assert_eq!(e.get(&st.var_at(&a, n - 1)).unwrap(), &Term::app("f", vec![ai, bi.clone(), ci]));
            assert_eq!(e.get(&st.var_at(&b, n - 1)).unwrap(), &Term::app("s", vec![bi]));
            assert!(!e.is_circular());
        }
    }

    #[test]
    fn non_circular_passes_through() {
        let g = VarGen::new();
        let v = vars(&g, "v(X, Y)");
        let s = Substitution::singleton(v[0].as_var().unwrap().clone(), Term::app("f", vec![v[1].clone()]));
        assert_eq!(decircularize(&s, 5, &g), vec![s.clone()]);
        let t = Term::app("p", vec![v[0].clone()]);
        assert_eq!(unfold(&s, &t, 2, &g).to_string(), "p(f(◇))");
        assert_eq!(unfold(&Substitution::new(), &t, 1, &g), truncate(1, &t));
    }

    #[test]
    fn simple_chain() {
        let g = VarGen::new();
        let x = vars(&g, "v(X)")[0].clone();
        let s = Substitution::singleton(x.as_var().unwrap().clone(), Term::app("s", vec![x.clone()]));
        let els = decircularize(&s, 2, &g);
        assert_eq!(els.len(), 2);
        let applied = apply_sequence(&els, &x);
        assert!(applied.to_string().starts_with("s(s("));
    }

    #[test]
    fn unfold_examples() {
        let g = VarGen::new();
        let x = vars(&g, "v(X)")[0].clone();
        let s = Substitution::singleton(x.as_var().unwrap().clone(), parse_term("scons(0, X)", &g).unwrap().map_vars(&mut |_| x.clone()));
        let t = Term::app("nats", vec![x.clone()]);
        assert_eq!(unfold(&s, &t, 4, &g).to_string(), "nats(scons(0, scons(0, scons(◇, ◇))))");

        let v = vars(&g, "v(X, Y, A1, B1, C1)");
        let sv = |i: usize| v[i].as_var().unwrap().clone();
        let sigma = Substitution::from_pairs([
            (sv(0), Term::app("f", vec![v[2].clone(), v[3].clone(), v[4].clone()])),
            (sv(1), Term::app("s", vec![v[3].clone()])),
            (sv(2), Term::app("f", vec![v[2].clone(), v[3].clone(), v[4].clone()])),
            (sv(3), Term::app("s", vec![v[3].clone()])),
        ]);
        let r = Term::app("r", vec![v[0].clone(), v[1].clone()]);
        let got = unfold(&sigma, &r, 3, &g);
        let expected = parse_term("r(f(f(D, D, D), s(D), C1), s(s(D)))", &g).unwrap();
        let expected = expected.map_vars(&mut |w| if w.name() == Some("D") { Term::diamond() } else { Term::Var(w.clone()) });
        assert!(is_variant(&got, &expected), "{got}");
    }

    #[test]
    fn truncation_coherence() {
        let g = VarGen::new();
        let v = vars(&g, "v(X, Y)");
        let sigma = Substitution::from_pairs([
            (v[0].as_var().unwrap().clone(), Term::app("g", vec![v[0].clone(), v[1].clone()])),
            (v[1].as_var().unwrap().clone(), Term::app("h", vec![v[1].clone()])),
        ]);
        let t = Term::app("p", vec![v[0].clone()]);
        let mut st = DecircStream::new(&sigma, &g);
        let deep = st.unfold(&t, 7);
        for n in 0..=7 {
            assert_eq!(truncate(n, &deep), st.unfold(&t, n));
        }
    }
}
