//! Co-S-resolution over goals annotated with ancestor sets, with either
//! CoLP-style loop detection or the restricted loop rule.

use std::collections::BTreeMap;
use std::fmt;

use crate::derivation::{rewrite_with, subst_with, Limits, Step, StepKind, Trace, TraceStatus};
use crate::error::{Error, Result};
use crate::productivity::{check_productive_default, DEFAULT_BOUND};
use crate::program::{check_universal, Clause, Program};
use crate::subst::Substitution;
use crate::term::{is_instance, Term, Var, VarGen};
use crate::unify::{rational_unify, RationalStore};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub atom: Term,
    /// Oldest first, without duplicates.
    pub ancestors: Vec<Term>,
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let anc: Vec<String> = self.ancestors.iter().map(|a| a.to_string()).collect();
        write!(f, "({}, {{{}}})", self.atom, anc.join(", "))
    }
}

pub type AnnotatedGoal = Vec<Entry>;

pub fn annotate(goal: &[Term]) -> AnnotatedGoal {
    goal.iter().map(|a| Entry { atom: a.clone(), ancestors: Vec::new() }).collect()
}

pub fn atoms_of(g: &AnnotatedGoal) -> Vec<Term> {
    g.iter().map(|e| e.atom.clone()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoMode {
    Colp,
    Restricted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LoopFail {
    NotAnAncestor,
    NoRationalUnifier,
    NotAnInstance,
}

impl fmt::Display for LoopFail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LoopFail::NotAnAncestor => "not an ancestor",
            LoopFail::NoRationalUnifier => "no rational unifier",
            LoopFail::NotAnInstance => "ancestor variant is not an instance of the subgoal",
        })
    }
}

fn with_ancestor(ancestors: &[Term], a: &Term) -> Vec<Term> {
    let mut out = ancestors.to_vec();
    if !out.contains(a) {
        out.push(a.clone());
    }
    out
}

fn dedup(ts: Vec<Term>) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::with_capacity(ts.len());
    for t in ts {
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

/// Applies a non-circular substitution to atoms and ancestor sets alike.
pub fn apply_to_goal(theta: &Substitution, g: &AnnotatedGoal) -> AnnotatedGoal {
    g.iter()
        .map(|e| Entry {
            atom: theta.apply_acyclic(&e.atom),
            ancestors: dedup(e.ancestors.iter().map(|a| theta.apply_acyclic(a)).collect()),
        })
        .collect()
}

/// Splits a rational unifier into its non-circular and circular bindings.
pub fn split_circular(theta: &Substitution) -> (Substitution, Substitution) {
    let n = theta.normalized();
    let cyclic = n.cyclic_vars();
    let (cyc, acyc): (Vec<_>, Vec<_>) =
        n.iter().map(|(v, t)| (v.clone(), t.clone())).partition(|(v, _)| cyclic.contains(v));
    (Substitution::from_pairs(acyc), Substitution::from_pairs(cyc))
}

pub(crate) fn co_rewrite_with(g: &AnnotatedGoal, i: usize, c: usize, inst: Clause) -> Option<(AnnotatedGoal, Step)> {
    let atoms = atoms_of(g);
    let (next, step) = rewrite_with(&atoms, i, c, inst)?;
    let body_len = next.len() + 1 - g.len();
    let anc = with_ancestor(&g[i].ancestors, &g[i].atom);
    let mut out = g[..i].to_vec();
    out.extend(next[i..i + body_len].iter().map(|b| Entry { atom: b.clone(), ancestors: anc.clone() }));
    out.extend(g[i + 1..].iter().cloned());
    Some((out, step))
}

pub(crate) fn co_subst_with(g: &AnnotatedGoal, i: usize, c: usize, inst: Clause) -> Option<(AnnotatedGoal, Step)> {
    let (_, step) = subst_with(&atoms_of(g), i, c, inst)?;
    Some((apply_to_goal(&step.substitution, g), step))
}

fn check(g: &AnnotatedGoal, p: &Program, i: usize, c: usize) -> Result<()> {
    if i >= g.len() || c >= p.clauses.len() {
        return Err(Error::Index(format!("atom {i} / clause {c}")));
    }
    Ok(())
}

/// Rewriting: body atoms get ancestors `S_k ∪ {A_k}`.
pub fn co_rewrite(g: &AnnotatedGoal, p: &Program, i: usize, c: usize, fresh: &VarGen) -> Result<Option<(AnnotatedGoal, Step)>> {
    check(g, p, i, c)?;
    Ok(co_rewrite_with(g, i, c, p.clauses[c].instance(fresh)))
}

/// Substitution reduction: the proper unifier instantiates every atom and
/// every ancestor.
pub fn co_subst(g: &AnnotatedGoal, p: &Program, i: usize, c: usize, fresh: &VarGen) -> Result<Option<(AnnotatedGoal, Step)>> {
    check(g, p, i, c)?;
    Ok(co_subst_with(g, i, c, p.clauses[c].instance(fresh)))
}

fn loop_unifier(g: &AnnotatedGoal, i: usize, ancestor: &Term) -> Result<Substitution, LoopFail> {
    let e = g.get(i).ok_or(LoopFail::NotAnAncestor)?;
    if !e.ancestors.contains(ancestor) {
        return Err(LoopFail::NotAnAncestor);
    }
    rational_unify(&e.atom, ancestor).into_substitution().ok_or(LoopFail::NoRationalUnifier)
}

fn remove(g: &AnnotatedGoal, i: usize) -> AnnotatedGoal {
    let mut out = g.clone();
    out.remove(i);
    out
}

/// CoLP loop detection. The entry closes; the non-circular part of the
/// unifier is applied to the rest of the goal.
pub fn colp_loop(g: &AnnotatedGoal, i: usize, ancestor: &Term) -> Result<(AnnotatedGoal, Substitution), LoopFail> {
    let theta = loop_unifier(g, i, ancestor)?;
    let (acyclic, _) = split_circular(&theta);
    Ok((apply_to_goal(&acyclic, &remove(g, i)), theta))
}

/// Restricted loop detection: additionally a fresh variant of the ancestor
/// must be an instance of the subgoal. The rest of the goal is untouched.
pub fn restricted_loop(g: &AnnotatedGoal, i: usize, ancestor: &Term, _fresh: &VarGen) -> Result<(AnnotatedGoal, Substitution), LoopFail> {
    let e = g.get(i).ok_or(LoopFail::NotAnAncestor)?;
    if !e.ancestors.contains(ancestor) {
        return Err(LoopFail::NotAnAncestor);
    }
    // Matching is one-way, so the ancestor needs no renaming.
    if !is_instance(&e.atom, ancestor) {
        return Err(LoopFail::NotAnInstance);
    }
    let theta = loop_unifier(g, i, ancestor)?;
    Ok((remove(g, i), theta))
}

/// Re-executes one co-S step.
pub fn apply_co_step(g: &AnnotatedGoal, s: &Step, mode: CoMode) -> Result<AnnotatedGoal> {
    let c = s.clause.unwrap_or(0);
    let redo = |inst: &Clause| match s.kind {
        StepKind::Rewrite => co_rewrite_with(g, s.atom, c, inst.clone()),
        StepKind::Subst => co_subst_with(g, s.atom, c, inst.clone()),
        _ => None,
    };
    match (s.kind, &s.instance, &s.ancestor) {
        (StepKind::Loop, _, Some(anc)) => {
            let res = match mode {
                CoMode::Colp => colp_loop(g, s.atom, anc),
                CoMode::Restricted => restricted_loop(g, s.atom, anc, &VarGen::starting_after(max_id(g))),
            };
            match res {
                Ok((next, theta)) if theta == s.substitution => Ok(next),
                Ok(_) => Err(Error::Precondition("loop step computed a different unifier".into())),
                Err(e) => Err(Error::Precondition(format!("loop step does not apply: {e}"))),
            }
        }
        (StepKind::Rewrite | StepKind::Subst, Some(inst), _) => match redo(inst) {
            Some((next, again)) if again.substitution == s.substitution => Ok(next),
            _ => Err(Error::Precondition(format!("{} step does not replay", s.kind))),
        },
        _ => Err(Error::Precondition(format!("malformed {} step", s.kind))),
    }
}

fn max_id(g: &AnnotatedGoal) -> u64 {
    g.iter()
        .flat_map(|e| std::iter::once(&e.atom).chain(e.ancestors.iter()))
        .map(Term::max_var_id)
        .max()
        .unwrap_or(0)
}

/// Every intermediate annotated goal of a co-S trace.
pub fn replay_co(tr: &Trace, mode: CoMode) -> Result<Vec<AnnotatedGoal>> {
    let mut goals = vec![annotate(&tr.initial)];
    for (n, s) in tr.steps.iter().enumerate() {
        let next = apply_co_step(goals.last().expect("nonempty"), s, mode)
            .map_err(|e| Error::Precondition(format!("step {n}: {e}")))?;
        goals.push(next);
    }
    Ok(goals)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopUse {
    /// Index of the loop step in the trace.
    pub step: usize,
    pub atom: Term,
    pub ancestor: Term,
    pub theta: Substitution,
}

#[derive(Clone, Debug)]
pub struct CoAnswer {
    /// Bindings reachable from the query variables, possibly circular.
    pub substitution: Substitution,
    pub store: RationalStore,
    pub loop_uses: Vec<LoopUse>,
    pub trace: Trace,
}

impl CoAnswer {
    pub fn is_circular(&self) -> bool {
        self.substitution.is_circular()
    }
}

#[derive(Clone, Debug)]
pub struct CoRefutation {
    pub answers: Vec<CoAnswer>,
    pub status: TraceStatus,
    pub cut: Option<Trace>,
    pub warnings: Vec<String>,
    /// Restricted-loop successes discarded because their unifier was not
    /// circular, which only happens on non-productive programs.
    pub diverged: usize,
    /// Loop-rule attempts against an ancestor that failed, by reason.
    pub rejections: BTreeMap<LoopFail, usize>,
    pub expansions: usize,
}

impl CoRefutation {
    pub fn rejected(&self, reason: LoopFail) -> usize {
        self.rejections.get(&reason).copied().unwrap_or(0)
    }
}

#[derive(Clone)]
struct Node {
    goal: AnnotatedGoal,
    chain: Vec<usize>,
    steps: Vec<Step>,
    qterms: Vec<Term>,
    equations: Vec<(Term, Term)>,
    loops: Vec<LoopUse>,
    depth: usize,
}

impl Node {
    fn instantiate(&mut self, theta: &Substitution) {
        if theta.is_empty() {
            return;
        }
        for t in &mut self.qterms {
            *t = theta.apply_acyclic(t);
        }
        for (l, r) in &mut self.equations {
            *l = theta.apply_acyclic(l);
            *r = theta.apply_acyclic(r);
        }
    }
}

/// Warnings for programs outside the hypotheses of the soundness theorem.
pub fn preflight(p: &Program, fresh: &VarGen) -> Vec<String> {
    let mut out = Vec::new();
    let u = check_universal(p);
    if !u.is_universal() {
        out.push(format!("program is not universal ({} clause(s) with existential variables)", u.violations.len()));
    }
    let v = check_productive_default(p, DEFAULT_BOUND, fresh);
    if v.is_non_productive() {
        out.push("program is not observationally productive (rewriting loop found)".into());
    }
    out
}

fn query_vars(query: &[Term]) -> Vec<Var> {
    let mut out: Vec<Var> = Vec::new();
    for a in query {
        for v in a.variables_ordered() {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

/// Depth-first co-S search. For the leftmost entry, alternatives are tried
/// in the order: loop detection (most recent ancestor first, first success
/// only), rewriting per clause, substitution then rewriting per clause.
pub fn co_refute(p: &Program, query: &[Term], mode: CoMode, limits: &Limits, fresh: &VarGen) -> CoRefutation {
    let warnings = if mode == CoMode::Restricted { preflight(p, fresh) } else { Vec::new() };
    let qvars = query_vars(query);
    let root = Node {
        goal: annotate(query),
        chain: vec![0; query.len()],
        steps: Vec::new(),
        qterms: qvars.iter().map(|v| Term::Var(v.clone())).collect(),
        equations: Vec::new(),
        loops: Vec::new(),
        depth: 0,
    };
    let trace_of = |n: &Node, status| Trace { initial: query.to_vec(), steps: n.steps.clone(), status };
    let mut stack = vec![root];
    let mut answers = Vec::new();
    let mut cut = None;
    let mut diverged = 0;
    let mut expansions = 0;
    let mut rejections = BTreeMap::new();
    while let Some(node) = stack.pop() {
        if node.goal.is_empty() {
            if let Some(a) = close(&node, &qvars, trace_of(&node, TraceStatus::Refuted)) {
                answers.push(a);
                if answers.len() >= limits.max_answers {
                    break;
                }
            }
            continue;
        }
        if expansions >= limits.max_steps {
            cut = Some(trace_of(&node, TraceStatus::LimitExceeded));
            break;
        }
        if node.depth >= limits.max_depth {
            cut.get_or_insert_with(|| trace_of(&node, TraceStatus::LimitExceeded));
            continue;
        }
        expansions += 1;
        let (mut children, cut_here) = expand(p, &node, mode, limits, fresh, &mut rejections);
        if cut_here > 0 {
            diverged += cut_here;
            cut.get_or_insert_with(|| trace_of(&node, TraceStatus::LimitExceeded));
        }
        children.reverse();
        stack.extend(children);
    }
    let status = if !answers.is_empty() {
        TraceStatus::Refuted
    } else if cut.is_some() {
        TraceStatus::LimitExceeded
    } else {
        TraceStatus::Failed
    };
    CoRefutation { answers, status, cut, warnings, diverged, rejections, expansions }
}

fn close(node: &Node, qvars: &[Var], trace: Trace) -> Option<CoAnswer> {
    let mut store = RationalStore::new();
    for (v, t) in qvars.iter().zip(&node.qterms) {
        if !store.unify(&Term::Var(v.clone()), t) {
            return None;
        }
    }
    for (l, r) in &node.equations {
        if !store.unify(l, r) {
            return None;
        }
    }
    let substitution = store.substitution().reachable_from(&qvars.iter().cloned().collect());
    Some(CoAnswer { substitution, store, loop_uses: node.loops.clone(), trace })
}

fn expand(
    p: &Program,
    node: &Node,
    mode: CoMode,
    limits: &Limits,
    fresh: &VarGen,
    rejections: &mut BTreeMap<LoopFail, usize>,
) -> (Vec<Node>, usize) {
    let i = 0;
    let entry = &node.goal[i];
    let mut children = Vec::new();
    let mut cut = 0;
    for anc in entry.ancestors.iter().rev() {
        let res = match mode {
            CoMode::Colp => colp_loop(&node.goal, i, anc),
            CoMode::Restricted => restricted_loop(&node.goal, i, anc, fresh),
        };
        let (goal, theta) = match res {
            Ok(r) => r,
            Err(e) => {
                *rejections.entry(e).or_insert(0) += 1;
                continue;
            }
        };
        if mode == CoMode::Restricted && !theta.is_circular() {
            cut += 1;
            break;
        }
        let (acyclic, cyclic) = split_circular(&theta);
        let mut child = node.clone();
        let recorded = if mode == CoMode::Colp { &cyclic } else { &theta };
        child.equations.extend(recorded.iter().map(|(v, t)| (Term::Var(v.clone()), t.clone())));
        if mode == CoMode::Colp {
            child.instantiate(&acyclic);
        }
        child.loops.push(LoopUse { step: node.steps.len(), atom: entry.atom.clone(), ancestor: anc.clone(), theta: theta.clone() });
        child.steps.push(Step {
            kind: StepKind::Loop,
            clause: None,
            atom: i,
            substitution: theta,
            instance: None,
            ancestor: Some(anc.clone()),
        });
        child.goal = goal;
        child.chain.remove(i);
        child.depth += 1;
        children.push(child);
        break;
    }
    let mut substs = Vec::new();
    for (c, clause) in p.clauses.iter().enumerate() {
        let inst = clause.instance(fresh);
        if let Some((goal, step)) = co_rewrite_with(&node.goal, i, c, inst.clone()) {
            let len = node.chain[i] + 1;
            if len > limits.max_rewrite_chain {
                cut += 1;
                continue;
            }
            let body_len = goal.len() + 1 - node.goal.len();
            let mut child = node.clone();
            child.chain.splice(i..=i, std::iter::repeat_n(len, body_len));
            child.goal = goal;
            child.steps.push(step);
            child.depth += 1;
            children.push(child);
        } else if let Some((g1, s1)) = co_subst_with(&node.goal, i, c, inst.clone()) {
            let (goal, s2) = co_rewrite_with(&g1, i, c, inst).expect("instantiated atom matches its clause");
            let body_len = goal.len() + 1 - node.goal.len();
            let mut child = node.clone();
            child.instantiate(&s1.substitution);
            child.chain.splice(i..=i, std::iter::repeat_n(1, body_len));
            child.goal = goal;
            child.steps.push(s1);
            child.steps.push(s2);
            child.depth += 1;
            substs.push(child);
        }
    }
    children.extend(substs);
    (children, cut)
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
    fn rewrite_extends_ancestors() {
        let (p, g) = setup("r(f(A,B,C), s(B)) :- r(A, B).");
        let t = parse_term("r(f(A1,B1,C1), s(B1))", &g).unwrap();
        let goal = annotate(std::slice::from_ref(&t));
        let (next, _) = co_rewrite(&goal, &p, 0, 0, &g).unwrap().unwrap();
        assert_eq!(next.len(), 1);
        assert_eq!(next[0].atom.to_string(), "r(A1, B1)");
        assert_eq!(next[0].ancestors, vec![t]);
    }

    #[test]
    fn subst_instantiates_ancestors() {
        let (p, g) = setup("p(X, s(X)) :- q(X). q(s(X)) :- p(X, X).");
        let t = parse_term("p(X, s(X))", &g).unwrap();
        let x = t.args()[0].clone();
        let goal = vec![Entry { atom: Term::app("q", vec![x]), ancestors: vec![t] }];
        let (next, step) = co_subst(&goal, &p, 0, 1, &g).unwrap().unwrap();
        assert_eq!(next[0].atom.args()[0].symbol().unwrap().name(), "s");
        assert_eq!(next[0].ancestors[0], step.substitution.apply(&goal[0].ancestors[0]).unwrap());
    }

    #[test]
    fn example_a2_restricted_refutation() {
        let (p, g) = setup("r(f(A,B,C), s(B)) :- r(A, B).");
        let q = parse_term("r(X, Y)", &g).unwrap();
        let r = co_refute(&p, &[q], CoMode::Restricted, &Limits::default(), &g);
        assert_eq!(r.status, TraceStatus::Refuted);
        let a = &r.answers[0];
        assert_eq!(a.loop_uses.len(), 1);
        let theta = &a.loop_uses[0].theta;
        assert!(theta.is_circular());
        assert_eq!(theta.len(), 2);
        let goals = replay_co(&a.trace, CoMode::Restricted).unwrap();
        assert!(goals.last().unwrap().is_empty());
    }

    #[test]
    fn example_5_1_modes() {
        let (p, g) = setup("p(X, s(X)) :- q(X). q(s(X)) :- p(X, X).");
        let q = parse_term("p(X, s(X))", &g).unwrap();
        let colp = co_refute(&p, std::slice::from_ref(&q), CoMode::Colp, &Limits::default(), &g);
        assert_eq!(colp.status, TraceStatus::Refuted);
        assert!(colp.answers[0].is_circular());
        let restricted = co_refute(&p, &[q], CoMode::Restricted, &Limits::default(), &g);
        assert_eq!(restricted.status, TraceStatus::Failed);
    }

    #[test]
    fn example_5_2_underlined_goal() {
        let g = VarGen::new();
        let a = parse_term("p(f(f(Y)), X1)", &g).unwrap();
        let y = a.args()[0].args()[0].args()[0].clone();
        let x1 = a.args()[1].clone();
        let anc1 = Term::app("p", vec![Term::app("f", vec![y.clone()]), Term::app("s", vec![x1.clone()])]);
        let anc0 = Term::app("p", vec![y, Term::app("s", vec![Term::app("s", vec![x1])])]);
        let goal = vec![Entry { atom: a, ancestors: vec![anc0.clone(), anc1.clone()] }];
        let (rest, theta) = colp_loop(&goal, 0, &anc0).unwrap();
        assert!(rest.is_empty());
        assert!(theta.is_circular());
        assert_eq!(restricted_loop(&goal, 0, &anc0, &g), Err(LoopFail::NotAnInstance));
        assert_eq!(restricted_loop(&goal, 0, &anc1, &g), Err(LoopFail::NotAnInstance));
    }

    #[test]
    fn nats_answer_is_circular() {
        let (p, g) = setup("nat(0). nat(s(X)) :- nat(X). nats(scons(X,Y)) :- nat(X), nats(Y).");
        let q = parse_term("nats(X)", &g).unwrap();
        let r = co_refute(&p, std::slice::from_ref(&q), CoMode::Restricted, &Limits::default(), &g);
        assert_eq!(r.status, TraceStatus::Refuted);
        assert!(r.warnings.is_empty());
        let x = q.args()[0].as_var().unwrap().clone();
        let lines = crate::answer::render_answer(&r.answers[0].store, &[("X".into(), x)]);
        assert_eq!(lines, ["X = scons(0, X)"]);
    }

    #[test]
    fn mode_refinement_on_a2() {
        let (p, g) = setup("r(f(A,B,C), s(B)) :- r(A, B).");
        let q = parse_term("r(X, Y)", &g).unwrap();
        let a = &co_refute(&p, &[q], CoMode::Restricted, &Limits::default(), &g).answers[0];
        let goals = replay_co(&a.trace, CoMode::Restricted).unwrap();
        let lu = &a.loop_uses[0];
        let (_, theta) = colp_loop(&goals[lu.step], 0, &lu.ancestor).unwrap();
        assert_eq!(theta, lu.theta);
    }
}
