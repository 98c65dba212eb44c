//! Bounded search for infinite rewriting derivations.
//!
//! A loop is reported only when an atom is a variant of one of its own
//! rewriting ancestors; such loops always pump. `NoLoopFound` is not a
//! proof of productivity.

use std::fmt;

use crate::derivation::{rewrite_with, Trace, TraceStatus};
use crate::error::{Error, Result};
use crate::program::Program;
use crate::term::{is_variant, Term, VarGen};
use crate::unify::{mgm, UnifyOutcome};

pub const DEFAULT_BOUND: usize = 64;

/// `atom` was rewritten with `clause`; the chain continues with body atom
/// `body_index`.
#[derive(Clone, Debug, PartialEq)]
pub struct Link {
    pub atom: Term,
    pub clause: usize,
    pub body_index: usize,
}

/// A rewriting chain whose `last` atom is a variant of
/// `chain[ancestor_index].atom`.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopWitness {
    pub chain: Vec<Link>,
    pub last: Term,
    pub ancestor_index: usize,
}

impl LoopWitness {
    pub fn loop_len(&self) -> usize {
        self.chain.len() - self.ancestor_index
    }

    /// The witness as a goal-level rewriting derivation, together with the
    /// position of the chain atom in the final goal.
    pub fn to_trace(&self, p: &Program, fresh: &VarGen) -> Result<(Trace, usize)> {
        self.unroll(p, 0, fresh)
    }

    /// The witness followed by `times` further traversals of its loop.
    pub fn unroll(&self, p: &Program, times: usize, fresh: &VarGen) -> Result<(Trace, usize)> {
        let root = self.chain.first().map(|l| l.atom.clone()).unwrap_or_else(|| self.last.clone());
        let mut goal = vec![root.clone()];
        let mut pos = 0;
        let mut steps = Vec::new();
        let pumped = self.chain[self.ancestor_index..].iter().cycle().take(self.loop_len() * times);
        for link in self.chain.iter().chain(pumped) {
            let clause = p
                .clauses
                .get(link.clause)
                .ok_or_else(|| Error::Index(format!("clause {}", link.clause)))?;
            let (next, step) = rewrite_with(&goal, pos, link.clause, clause.instance(fresh))
                .ok_or_else(|| Error::Precondition(format!("clause {} does not rewrite {}", link.clause, goal[pos])))?;
            goal = next;
            steps.push(step);
            pos += link.body_index;
        }
        Ok((Trace { initial: vec![root], steps, status: TraceStatus::Suspended }, pos))
    }
}

impl fmt::Display for LoopWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.chain.iter().enumerate() {
            let mark = if i == self.ancestor_index { "*" } else { " " };
            writeln!(f, "{mark} {}  --clause {}-->", l.atom, l.clause)?;
        }
        writeln!(f, "  {}  (variant of *)", self.last)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainGuard {
    Continue,
    LoopWitness { ancestor: usize },
}

/// Loop iff `next` is a variant of some chain element; the most recent
/// such element is reported.
pub fn guard_rewrite_chain(chain: &[Term], next: &Term) -> ChainGuard {
    match chain.iter().rposition(|a| is_variant(a, next)) {
        Some(ancestor) => ChainGuard::LoopWitness { ancestor },
        None => ChainGuard::Continue,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductivityStatus {
    NonProductive,
    NoLoopFound,
}

#[derive(Clone, Debug)]
pub struct ProductivityVerdict {
    pub status: ProductivityStatus,
    pub witness: Option<LoopWitness>,
    pub bound: usize,
    pub roots: Vec<Term>,
}

impl ProductivityVerdict {
    pub fn is_non_productive(&self) -> bool {
        self.status == ProductivityStatus::NonProductive
    }
}

impl fmt::Display for ProductivityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.status, &self.witness) {
            (ProductivityStatus::NonProductive, Some(w)) => {
                writeln!(f, "non-productive: infinite rewriting derivation (loop of {} step(s))", w.loop_len())?;
                write!(f, "{w}")
            }
            _ => writeln!(
                f,
                "no loop found up to bound {} from {} root goal(s) (inconclusive: not a productivity proof)",
                self.bound,
                self.roots.len()
            ),
        }
    }
}

/// One most general atom per predicate, then every clause head.
pub fn default_roots(p: &Program, fresh: &VarGen) -> Vec<Term> {
    let mut roots: Vec<Term> = p
        .predicates()
        .into_iter()
        .map(|s| {
            let args = (0..s.arity()).map(|_| Term::Var(fresh.fresh(Some("X")))).collect();
            Term::from_symbol(s, args)
        })
        .collect();
    roots.extend(p.clauses.iter().map(|c| c.head.clone()));
    roots
}

/// Explores every rewriting derivation from every root up to `bound`
/// steps along each atom's chain.
pub fn check_productive(p: &Program, roots: &[Term], bound: usize, fresh: &VarGen) -> ProductivityVerdict {
    let mut chain = Vec::new();
    for root in roots {
        if let Some(w) = explore(p, &mut chain, root, bound, fresh) {
            return ProductivityVerdict {
                status: ProductivityStatus::NonProductive,
                witness: Some(w),
                bound,
                roots: roots.to_vec(),
            };
        }
    }
    ProductivityVerdict { status: ProductivityStatus::NoLoopFound, witness: None, bound, roots: roots.to_vec() }
}

pub fn check_productive_default(p: &Program, bound: usize, fresh: &VarGen) -> ProductivityVerdict {
    let roots = default_roots(p, fresh);
    check_productive(p, &roots, bound, fresh)
}

fn explore(p: &Program, chain: &mut Vec<Link>, atom: &Term, bound: usize, fresh: &VarGen) -> Option<LoopWitness> {
    if chain.len() >= bound {
        return None;
    }
    for (c, clause) in p.clauses.iter().enumerate() {
        let inst = clause.instance(fresh);
        let sigma = match mgm(&inst.head, atom) {
            UnifyOutcome::Matcher(s) => s,
            _ => continue,
        };
        for (k, b) in inst.body.iter().enumerate() {
            let b = sigma.apply_acyclic(b);
            chain.push(Link { atom: atom.clone(), clause: c, body_index: k });
            let atoms: Vec<Term> = chain.iter().map(|l| l.atom.clone()).collect();
            if let ChainGuard::LoopWitness { ancestor } = guard_rewrite_chain(&atoms, &b) {
                let w = LoopWitness { chain: chain.clone(), last: b, ancestor_index: ancestor };
                chain.pop();
                return Some(w);
            }
            let found = explore(p, chain, &b, bound, fresh);
            chain.pop();
            if found.is_some() {
                return found;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{parse_program, parse_term};

    fn setup(src: &str) -> (Program, VarGen) {
        let g = VarGen::new();
        let p = parse_program(src, &g).unwrap();
        (p, g)
    }

    #[test]
    fn bad_is_non_productive_with_one_step_witness() {
        let (p, g) = setup("bad(f(X)) :- bad(f(X)).");
        let v = check_productive_default(&p, DEFAULT_BOUND, &g);
        assert!(v.is_non_productive());
        let w = v.witness.unwrap();
        assert_eq!(w.chain.len(), 1);
        assert_eq!(w.loop_len(), 1);
        let (tr, pos) = w.to_trace(&p, &g).unwrap();
        let goals = tr.replay().unwrap();
        assert!(is_variant(&goals.last().unwrap()[pos], &goals[0][0]));
    }

    #[test]
    fn case_one_is_non_productive() {
        let (p, g) = setup("resource(In, L) :- resource(In, L). zeros([0|X]) :- zeros(X).");
        assert!(check_productive_default(&p, DEFAULT_BOUND, &g).is_non_productive());
    }

    #[test]
    fn nats_has_no_loop() {
        let (p, g) = setup("nat(0). nat(s(X)) :- nat(X). nats(scons(X,Y)) :- nat(X), nats(Y).");
        let v = check_productive_default(&p, 10, &g);
        assert_eq!(v.status, ProductivityStatus::NoLoopFound);
        assert_eq!(v.bound, 10);
    }

    #[test]
    fn guard_examples() {
        let g = VarGen::new();
        let t = |s: &str| parse_term(s, &g).unwrap();
        assert_eq!(guard_rewrite_chain(&[t("bad(f(X))")], &t("bad(f(Y))")), ChainGuard::LoopWitness { ancestor: 0 });
        assert_eq!(guard_rewrite_chain(&[t("nats(scons(X,Y))")], &t("nat(X)")), ChainGuard::Continue);
        let px = parse_term("p(X, X)", &g).unwrap();
        let x = px.args()[0].clone();
        let pxy = Term::app("p", vec![x, t("Y")]);
        assert_eq!(guard_rewrite_chain(&[px], &pxy), ChainGuard::Continue);
    }

    #[test]
    fn pumping_grows_the_derivation() {
        let (p, g) = setup("a(f(X)) :- b(X, X). b(Y, Z) :- c, a(f(Y)). c.");
        let v = check_productive_default(&p, 8, &g);
        let w = v.witness.expect("loop");
        let mut last = 0;
        for times in 0..=3 {
            let (tr, pos) = w.unroll(&p, times, &g).unwrap();
            let goals = tr.replay().unwrap();
            assert!(tr.steps.len() > last || times == 0);
            last = tr.steps.len();
            assert_eq!(tr.steps.len(), w.chain.len() + times * w.loop_len());
            let anchor = &goals[w.ancestor_index];
            let end = goals.last().unwrap();
            assert!(anchor.iter().any(|a| is_variant(a, &end[pos])));
        }
    }
}
