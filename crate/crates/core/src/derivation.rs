//! Reduction steps, S-resolution and bounded refutation search.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::productivity::{guard_rewrite_chain, ChainGuard, Link, LoopWitness};
use crate::program::{Clause, Program};
use crate::subst::Substitution;
use crate::term::{Term, Var, VarGen};
use crate::unify::{mgm, mgu, UnifyOutcome};

pub type Goal = Vec<Term>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Sld,
    Rewrite,
    Subst,
    Loop,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepKind::Sld => "sld",
            StepKind::Rewrite => "rewrite",
            StepKind::Subst => "subst",
            StepKind::Loop => "loop",
        })
    }
}

/// One reduction. `instance` is the renamed clause that was used, so the
/// step can be replayed exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub kind: StepKind,
    pub clause: Option<usize>,
    pub atom: usize,
    pub substitution: Substitution,
    pub instance: Option<Clause>,
    pub ancestor: Option<Term>,
}

impl Step {
    pub fn render(&self, n: usize) -> String {
        let clause = self.clause.map_or("-".to_string(), |c| c.to_string());
        let mut line = format!("{n} {} clause={clause} atom={} subst={}", self.kind, self.atom, self.substitution);
        if let Some(a) = &self.ancestor {
            line.push_str(&format!(" loop ancestor={a}"));
        }
        line
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TraceStatus {
    Refuted,
    Failed,
    LimitExceeded,
    Suspended,
}

impl fmt::Display for TraceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceStatus::Refuted => "refuted",
            TraceStatus::Failed => "failed",
            TraceStatus::LimitExceeded => "limit-exceeded",
            TraceStatus::Suspended => "suspended",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub initial: Goal,
    pub steps: Vec<Step>,
    pub status: TraceStatus,
}

impl Trace {
    /// Every intermediate goal, recomputed from the recorded steps.
    pub fn replay(&self) -> Result<Vec<Goal>> {
        let mut goals = vec![self.initial.clone()];
        for (n, step) in self.steps.iter().enumerate() {
            let next = apply_step(goals.last().expect("nonempty"), step)
                .map_err(|e| Error::Precondition(format!("step {n}: {e}")))?;
            goals.push(next);
        }
        Ok(goals)
    }

    pub fn final_goal(&self) -> Result<Goal> {
        Ok(self.replay()?.pop().expect("nonempty"))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("goal {}\n", render_goal(&self.initial));
        for (n, s) in self.steps.iter().enumerate() {
            out.push_str(&s.render(n + 1));
            out.push('\n');
        }
        out.push_str(&format!("status {}\n", self.status));
        out
    }

    pub fn dump(&self) -> TraceDump {
        TraceDump {
            goal: self.initial.iter().map(|t| t.to_string()).collect(),
            steps: self
                .steps
                .iter()
                .enumerate()
                .map(|(n, s)| StepRecord {
                    n: n + 1,
                    kind: s.kind,
                    clause: s.clause,
                    atom: s.atom,
                    subst: s.substitution.to_string(),
                    ancestor: s.ancestor.as_ref().map(|a| a.to_string()),
                })
                .collect(),
            status: self.status,
        }
    }
}

/// Structured form of a trace for machine consumption.
#[derive(Clone, Debug, Serialize)]
pub struct TraceDump {
    pub goal: Vec<String>,
    pub steps: Vec<StepRecord>,
    pub status: TraceStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub n: usize,
    pub kind: StepKind,
    pub clause: Option<usize>,
    pub atom: usize,
    pub subst: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ancestor: Option<String>,
}

pub fn render_goal(g: &[Term]) -> String {
    let items: Vec<String> = g.iter().map(|t| t.to_string()).collect();
    format!("[{}]", items.join(", "))
}

fn check_indices(p: &Program, g: &Goal, atom: usize, clause: usize) -> Result<()> {
    if atom >= g.len() {
        return Err(Error::Index(format!("atom {atom} in a goal of length {}", g.len())));
    }
    if clause >= p.clauses.len() {
        return Err(Error::Index(format!("clause {clause} in a program of {} clauses", p.clauses.len())));
    }
    Ok(())
}

fn splice(g: &Goal, i: usize, body: impl IntoIterator<Item = Term>) -> Goal {
    let mut out = Vec::with_capacity(g.len() + 2);
    out.extend(g[..i].iter().cloned());
    out.extend(body);
    out.extend(g[i + 1..].iter().cloned());
    out
}

pub(crate) fn sld_with(g: &Goal, i: usize, c: usize, inst: Clause) -> Option<(Goal, Step)> {
    let theta = mgu(&inst.head, &g[i]).into_substitution()?;
    let spliced = splice(g, i, inst.body.iter().cloned());
    let goal = spliced.iter().map(|t| theta.apply_acyclic(t)).collect();
    Some((goal, step(StepKind::Sld, c, i, theta, inst)))
}

pub(crate) fn rewrite_with(g: &Goal, i: usize, c: usize, inst: Clause) -> Option<(Goal, Step)> {
    let sigma = match mgm(&inst.head, &g[i]) {
        UnifyOutcome::Matcher(s) => s,
        _ => return None,
    };
    let goal = splice(g, i, inst.body.iter().map(|b| sigma.apply_acyclic(b)));
    Some((goal, step(StepKind::Rewrite, c, i, sigma, inst)))
}

pub(crate) fn subst_with(g: &Goal, i: usize, c: usize, inst: Clause) -> Option<(Goal, Step)> {
    let theta = match mgu(&inst.head, &g[i]) {
        UnifyOutcome::ProperUnifier(s) => s,
        _ => return None,
    };
    let goal = g.iter().map(|t| theta.apply_acyclic(t)).collect();
    Some((goal, step(StepKind::Subst, c, i, theta, inst)))
}

fn step(kind: StepKind, c: usize, i: usize, s: Substitution, inst: Clause) -> Step {
    Step { kind, clause: Some(c), atom: i, substitution: s, instance: Some(inst), ancestor: None }
}

/// SLD-resolution reduction with a fresh instance of clause `clause`.
/// `Ok(None)` means the atom and the clause head do not unify.
pub fn sld_step(p: &Program, g: &Goal, atom: usize, clause: usize, fresh: &VarGen) -> Result<Option<(Goal, Step)>> {
    check_indices(p, g, atom, clause)?;
    Ok(sld_with(g, atom, clause, p.clauses[clause].instance(fresh)))
}

/// Rewriting reduction: the clause head must match the atom.
pub fn rewrite_step(p: &Program, g: &Goal, atom: usize, clause: usize, fresh: &VarGen) -> Result<Option<(Goal, Step)>> {
    check_indices(p, g, atom, clause)?;
    Ok(rewrite_with(g, atom, clause, p.clauses[clause].instance(fresh)))
}

/// Substitution reduction: the unifier must be proper, not a matcher.
pub fn subst_step(p: &Program, g: &Goal, atom: usize, clause: usize, fresh: &VarGen) -> Result<Option<(Goal, Step)>> {
    check_indices(p, g, atom, clause)?;
    Ok(subst_with(g, atom, clause, p.clauses[clause].instance(fresh)))
}

/// Re-executes a recorded step and checks it reproduces its substitution.
pub fn apply_step(g: &Goal, s: &Step) -> Result<Goal> {
    if s.atom >= g.len() {
        return Err(Error::Index(format!("atom {} in a goal of length {}", s.atom, g.len())));
    }
    let redo = |inst: &Clause| {
        let c = s.clause.unwrap_or(0);
        match s.kind {
            StepKind::Sld => sld_with(g, s.atom, c, inst.clone()),
            StepKind::Rewrite => rewrite_with(g, s.atom, c, inst.clone()),
            StepKind::Subst => subst_with(g, s.atom, c, inst.clone()),
            StepKind::Loop => None,
        }
    };
    match (&s.kind, &s.instance) {
        (StepKind::Loop, _) => Ok(splice(g, s.atom, None)),
        (_, Some(inst)) => match redo(inst) {
            Some((goal, again)) if again.substitution == s.substitution => Ok(goal),
            Some(_) => Err(Error::Precondition("replayed step computed a different substitution".into())),
            None => Err(Error::Precondition(format!("{} step does not apply", s.kind))),
        },
        (_, None) => Err(Error::Precondition("step carries no clause instance".into())),
    }
}

/// Checks that a trace is a valid S-derivation prefix: every step replays,
/// substitution steps happen only on goals in rewriting normal form and are
/// followed by a rewrite of the same atom with the same clause instance.
pub fn check_s_derivation(p: &Program, tr: &Trace, fresh: &VarGen) -> Result<()> {
    let goals = tr.replay()?;
    for (n, s) in tr.steps.iter().enumerate() {
        match s.kind {
            StepKind::Rewrite => {}
            StepKind::Subst => {
                let g = &goals[n];
                for (i, a) in g.iter().enumerate() {
                    for (c, cl) in p.clauses.iter().enumerate() {
                        if !mgm(&cl.instance(fresh).head, a).is_fail() {
                            return Err(Error::Precondition(format!(
                                "step {}: substitution while atom {i} is rewritable by clause {c}",
                                n + 1
                            )));
                        }
                    }
                }
                let next = tr.steps.get(n + 1);
                let paired = next.is_some_and(|r| {
                    r.kind == StepKind::Rewrite && r.atom == s.atom && r.instance == s.instance
                });
                if !paired {
                    return Err(Error::Precondition(format!("step {}: substitution not followed by its rewrite", n + 1)));
                }
            }
            other => return Err(Error::Precondition(format!("step {}: {other} step in an S-derivation", n + 1))),
        }
    }
    Ok(())
}

/// Composition of the first `k` recorded substitutions applied to `query`.
pub fn partial_answer(tr: &Trace, k: usize, query: &Term) -> Term {
    tr.steps.iter().take(k).fold(query.clone(), |t, s| match s.kind {
        StepKind::Sld | StepKind::Subst => s.substitution.apply_acyclic(&t),
        StepKind::Rewrite | StepKind::Loop => t,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Selector {
    #[default]
    Leftmost,
    /// The atom that has waited longest; ties go to the leftmost.
    Fair,
}

impl Selector {
    fn pick(self, born: &[u64]) -> usize {
        match self {
            Selector::Leftmost => 0,
            Selector::Fair => {
                let oldest = born.iter().min().copied().unwrap_or(0);
                born.iter().position(|b| *b == oldest).unwrap_or(0)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_steps: usize,
    pub max_depth: usize,
    pub max_answers: usize,
    pub max_rewrite_chain: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_steps: 10_000, max_depth: 64, max_answers: 1, max_rewrite_chain: 64 }
    }
}

#[derive(Clone, Debug)]
pub enum SOutcome {
    /// One S-reduction; `goal` may be empty.
    Step { goal: Goal, steps: Vec<Step> },
    Fail { steps: Vec<Step> },
    RewriteDiverged { steps: Vec<Step>, witness: Option<LoopWitness> },
}

/// A goal with per-atom arrival times, driving fair selection.
#[derive(Clone, Debug)]
pub(crate) struct Timed {
    pub goal: Goal,
    pub born: Vec<u64>,
}

pub(crate) enum SEnd {
    Done,
    Fail,
    Diverged(Option<LoopWitness>),
}

/// Rewrites exhaustively, leftmost atom and first matching clause first.
pub(crate) fn rewrite_phase(p: &Program, st: &mut Timed, clock: u64, bound: usize, fresh: &VarGen, out: &mut Vec<Step>) -> Option<SEnd> {
    let mut chains: Vec<Vec<Link>> = vec![Vec::new(); st.goal.len()];
    loop {
        let mut found = None;
        'scan: for i in 0..st.goal.len() {
            for (c, clause) in p.clauses.iter().enumerate() {
                let inst = clause.instance(fresh);
                if let Some(r) = rewrite_with(&st.goal, i, c, inst) {
                    found = Some((i, c, r));
                    break 'scan;
                }
            }
        }
        let (i, c, (goal, step)) = found?;
        let body_len = goal.len() + 1 - st.goal.len();
        let mut chain = chains[i].clone();
        chain.push(Link { atom: st.goal[i].clone(), clause: c, body_index: 0 });
        if chain.len() > bound {
            out.push(step);
            return Some(SEnd::Diverged(None));
        }
        let mut new_chains = Vec::with_capacity(body_len);
        for k in 0..body_len {
            let mut ck = chain.clone();
            ck.last_mut().expect("nonempty").body_index = k;
            let atoms: Vec<Term> = ck.iter().map(|l| l.atom.clone()).collect();
            if let ChainGuard::LoopWitness { ancestor } = guard_rewrite_chain(&atoms, &goal[i + k]) {
                out.push(step);
                let w = LoopWitness { chain: ck, last: goal[i + k].clone(), ancestor_index: ancestor };
                return Some(SEnd::Diverged(Some(w)));
            }
            new_chains.push(ck);
        }
        chains.splice(i..=i, new_chains);
        st.born.splice(i..=i, std::iter::repeat_n(clock, body_len));
        st.goal = goal;
        out.push(step);
    }
}

/// One S-resolution reduction on a timed goal.
pub(crate) fn s_step_timed(p: &Program, st: &mut Timed, clock: u64, selector: Selector, limits: &Limits, fresh: &VarGen, out: &mut Vec<Step>) -> SEnd {
    if let Some(end) = rewrite_phase(p, st, clock, limits.max_rewrite_chain, fresh, out) {
        return end;
    }
    if st.goal.is_empty() {
        return SEnd::Done;
    }
    let i = selector.pick(&st.born);
    for (c, clause) in p.clauses.iter().enumerate() {
        let inst = clause.instance(fresh);
        if let Some((goal, s1)) = subst_with(&st.goal, i, c, inst.clone()) {
            let (goal, s2) = rewrite_with(&goal, i, c, inst).expect("instantiated atom matches its clause");
            let body_len = goal.len() + 1 - st.goal.len();
            st.born.splice(i..=i, std::iter::repeat_n(clock, body_len));
            st.goal = goal;
            out.push(s1);
            out.push(s2);
            return SEnd::Done;
        }
    }
    SEnd::Fail
}

/// One S-resolution reduction with leftmost selection.
pub fn s_step(p: &Program, g: &Goal, limits: &Limits, fresh: &VarGen) -> SOutcome {
    let mut st = Timed { goal: g.clone(), born: vec![0; g.len()] };
    let mut steps = Vec::new();
    match s_step_timed(p, &mut st, 1, Selector::Leftmost, limits, fresh, &mut steps) {
        SEnd::Done => SOutcome::Step { goal: st.goal, steps },
        SEnd::Fail => SOutcome::Fail { steps },
        SEnd::Diverged(witness) => SOutcome::RewriteDiverged { steps, witness },
    }
}

/// A finite prefix of an S-derivation.
#[derive(Clone, Debug)]
pub struct SDerivation {
    pub trace: Trace,
    /// Number of elementary steps after each completed S-step.
    pub boundaries: Vec<usize>,
    pub witness: Option<LoopWitness>,
}

impl SDerivation {
    /// Partial answer after `s` S-steps.
    pub fn partial_answer(&self, s: usize, query: &Term) -> Term {
        let k = if s == 0 { 0 } else { self.boundaries[(s - 1).min(self.boundaries.len() - 1)] };
        partial_answer(&self.trace, k, query)
    }
}

/// Runs up to `n` S-steps from `g`. Status is `Suspended` when the budget
/// runs out first and `LimitExceeded` when rewriting diverges.
pub fn s_derive(p: &Program, g: &Goal, n: usize, selector: Selector, limits: &Limits, fresh: &VarGen) -> SDerivation {
    let mut st = Timed { goal: g.clone(), born: vec![0; g.len()] };
    let mut steps = Vec::new();
    let mut boundaries = Vec::new();
    let mut status = TraceStatus::Suspended;
    let mut witness = None;
    for clock in 1..=n as u64 {
        if st.goal.is_empty() {
            break;
        }
        match s_step_timed(p, &mut st, clock, selector, limits, fresh, &mut steps) {
            SEnd::Done => boundaries.push(steps.len()),
            SEnd::Fail => {
                status = TraceStatus::Failed;
                break;
            }
            SEnd::Diverged(w) => {
                status = TraceStatus::LimitExceeded;
                witness = w;
                break;
            }
        }
    }
    if st.goal.is_empty() {
        status = TraceStatus::Refuted;
    }
    SDerivation { trace: Trace { initial: g.clone(), steps, status }, boundaries, witness }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Sld,
    S,
}

#[derive(Clone, Debug)]
pub struct Answer {
    /// Bindings of the query variables.
    pub substitution: Substitution,
    pub trace: Trace,
}

#[derive(Clone, Debug)]
pub struct Refutation {
    pub answers: Vec<Answer>,
    pub status: TraceStatus,
    /// The branch being explored when a limit stopped the search.
    pub cut: Option<Trace>,
    pub expansions: usize,
}

#[derive(Clone)]
struct Node {
    goal: Goal,
    born: Vec<u64>,
    steps: Vec<Step>,
    qterms: Vec<Term>,
    depth: usize,
}

impl Node {
    fn child(&self, goal: Goal, new_steps: Vec<Step>) -> Node {
        let delta = goal.len() + 1 - self.goal.len();
        let i = new_steps[0].atom;
        let clock = self.depth as u64 + 1;
        let mut born = self.born.clone();
        born.splice(i..=i, std::iter::repeat_n(clock, delta));
        let mut qterms = self.qterms.clone();
        for s in &new_steps {
            if matches!(s.kind, StepKind::Sld | StepKind::Subst) {
                qterms = qterms.iter().map(|t| s.substitution.apply_acyclic(t)).collect();
            }
        }
        let mut steps = self.steps.clone();
        steps.extend(new_steps);
        Node { goal, born, steps, qterms, depth: self.depth + 1 }
    }
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

fn expand(p: &Program, node: &Node, mode: Mode, selector: Selector, fresh: &VarGen) -> Vec<Node> {
    let mut children = Vec::new();
    match mode {
        Mode::Sld => {
            let i = selector.pick(&node.born);
            for (c, clause) in p.clauses.iter().enumerate() {
                if let Some((g, s)) = sld_with(&node.goal, i, c, clause.instance(fresh)) {
                    children.push(node.child(g, vec![s]));
                }
            }
        }
        Mode::S => {
            // An atom no clause head unifies with stays dead under any
            // later instantiation.
            let heads: Vec<Term> = p.clauses.iter().map(|cl| cl.instance(fresh).head).collect();
            if node.goal.iter().any(|a| heads.iter().all(|h| mgu(h, a).is_fail())) {
                return children;
            }
            // Prefer an atom that some clause rewrites; otherwise substitute.
            let rewritable = (0..node.goal.len()).find(|&i| heads.iter().any(|h| !mgm(h, &node.goal[i]).is_fail()));
            let i = rewritable.unwrap_or_else(|| selector.pick(&node.born));
            for (c, clause) in p.clauses.iter().enumerate() {
                let inst = clause.instance(fresh);
                if let Some((g, s)) = rewrite_with(&node.goal, i, c, inst.clone()) {
                    children.push(node.child(g, vec![s]));
                } else if let Some((g, s1)) = subst_with(&node.goal, i, c, inst.clone()) {
                    let (g, s2) = rewrite_with(&g, i, c, inst).expect("instantiated atom matches its clause");
                    children.push(node.child(g, vec![s1, s2]));
                }
            }
        }
    }
    children
}

/// Depth-first, clause-order search for refutations. Depth counts clause
/// uses, so SLD and S searches are bounded alike.
pub fn refute(p: &Program, query: &[Term], mode: Mode, selector: Selector, limits: &Limits, fresh: &VarGen) -> Refutation {
    let qvars = query_vars(query);
    let root = Node {
        goal: query.to_vec(),
        born: vec![0; query.len()],
        steps: Vec::new(),
        qterms: qvars.iter().map(|v| Term::Var(v.clone())).collect(),
        depth: 0,
    };
    let mut stack = vec![root];
    let mut answers = Vec::new();
    let mut cut = None;
    let mut expansions = 0;
    let trace_of = |n: &Node, status| Trace { initial: query.to_vec(), steps: n.steps.clone(), status };
    while let Some(node) = stack.pop() {
        if node.goal.is_empty() {
            let substitution = Substitution::from_pairs(qvars.iter().cloned().zip(node.qterms.iter().cloned()));
            answers.push(Answer { substitution, trace: trace_of(&node, TraceStatus::Refuted) });
            if answers.len() >= limits.max_answers {
                break;
            }
            continue;
        }
        if expansions >= limits.max_steps {
            cut = Some(trace_of(&node, TraceStatus::LimitExceeded));
            break;
        }
        if node.depth >= limits.max_depth {
            if cut.is_none() {
                cut = Some(trace_of(&node, TraceStatus::LimitExceeded));
            }
            continue;
        }
        expansions += 1;
        let mut children = expand(p, &node, mode, selector, fresh);
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
    Refutation { answers, status, cut, expansions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{parse_program, parse_term};
    use crate::term::is_variant;

    const NAT: &str = "nat(0). nat(s(X)) :- nat(X).";
    const NATS: &str = "nat(0). nat(s(X)) :- nat(X). nats(scons(X,Y)) :- nat(X), nats(Y).";

    fn setup(src: &str) -> (Program, VarGen) {
        let g = VarGen::new();
        let p = parse_program(src, &g).unwrap();
        (p, g)
    }

    fn t(g: &VarGen, s: &str) -> Term {
        parse_term(s, g).unwrap()
    }

    #[test]
    fn sld_examples() {
        let (p, g) = setup(NATS);
        let (goal, _) = sld_step(&p, &vec![t(&g, "nats(X)")], 0, 2, &g).unwrap().unwrap();
        assert_eq!(goal.len(), 2);
        assert_eq!(goal[0].symbol().unwrap().name(), "nat");
        assert_eq!(goal[1].symbol().unwrap().name(), "nats");
        let (goal, _) = sld_step(&p, &vec![t(&g, "nat(0)")], 0, 0, &g).unwrap().unwrap();
        assert!(goal.is_empty());
        let (bp, bg) = setup("bad(f(X)) :- bad(f(X)).");
        let start = vec![t(&bg, "bad(f(X))")];
        let (goal, _) = sld_step(&bp, &start, 0, 0, &bg).unwrap().unwrap();
        assert!(is_variant(&goal[0], &start[0]));
    }

    #[test]
    fn rewrite_and_subst_examples() {
        let (p, g) = setup(NATS);
        let nx = vec![t(&g, "nats(X)")];
        for c in 0..3 {
            assert!(rewrite_step(&p, &nx, 0, c, &g).unwrap().is_none());
        }
        let (goal, _) = subst_step(&p, &nx, 0, 2, &g).unwrap().unwrap();
        assert_eq!(goal.len(), 1);
        assert_eq!(goal[0].args()[0].symbol().unwrap().name(), "scons");
        let (goal, _) = rewrite_step(&p, &goal, 0, 2, &g).unwrap().unwrap();
        assert_eq!(goal.len(), 2);
        assert!(subst_step(&p, &vec![t(&g, "nat(0)")], 0, 0, &g).unwrap().is_none());
        let (goal, _) = subst_step(&p, &vec![t(&g, "nat(Y)")], 0, 0, &g).unwrap().unwrap();
        assert_eq!(goal[0].to_string(), "nat(0)");
        assert!(matches!(sld_step(&p, &nx, 3, 0, &g), Err(Error::Index(_))));
    }

    #[test]
    fn s_step_examples() {
        let (p, g) = setup(NATS);
        let q = t(&g, "nats(X)");
        match s_step(&p, &vec![q.clone()], &Limits::default(), &g) {
            SOutcome::Step { goal, steps } => {
                assert_eq!(goal.len(), 2);
                let kinds: Vec<StepKind> = steps.iter().map(|s| s.kind).collect();
                assert_eq!(kinds, [StepKind::Subst, StepKind::Rewrite]);
                let tr = Trace { initial: vec![q.clone()], steps, status: TraceStatus::Suspended };
                let pa = partial_answer(&tr, 2, &q);
                assert_eq!(pa.args()[0].symbol().unwrap().name(), "scons");
            }
            other => panic!("{other:?}"),
        }
        match s_step(&p, &vec![t(&g, "nat(s(0))")], &Limits::default(), &g) {
            SOutcome::Step { goal, steps } => {
                assert!(goal.is_empty());
                assert!(steps.iter().all(|s| s.kind == StepKind::Rewrite));
            }
            other => panic!("{other:?}"),
        }
        let (bp, bg) = setup("bad(f(X)) :- bad(f(X)).");
        let limits = Limits { max_rewrite_chain: 1, ..Limits::default() };
        assert!(matches!(
            s_step(&bp, &vec![t(&bg, "bad(f(X))")], &limits, &bg),
            SOutcome::RewriteDiverged { witness: Some(_), .. }
        ));
    }

    #[test]
    fn refute_examples() {
        let (p, g) = setup(NAT);
        let r = refute(&p, &[t(&g, "nat(s(s(0)))")], Mode::Sld, Selector::Leftmost, &Limits::default(), &g);
        assert_eq!(r.status, TraceStatus::Refuted);
        assert!(r.answers[0].substitution.is_empty());
        assert_eq!(r.answers[0].trace.steps.len(), 3);
        let r = refute(&p, &[t(&g, "nat(f(0))")], Mode::S, Selector::Leftmost, &Limits::default(), &g);
        assert_eq!(r.status, TraceStatus::Failed);

        let (p, g) = setup(NATS);
        let limits = Limits { max_steps: 50, ..Limits::default() };
        let r = refute(&p, &[t(&g, "nats(X)")], Mode::Sld, Selector::Leftmost, &limits, &g);
        assert_eq!(r.status, TraceStatus::LimitExceeded);
    }

    #[test]
    fn traces_replay() {
        let (p, g) = setup(NAT);
        let q = t(&g, "nat(X)");
        let limits = Limits { max_answers: 3, ..Limits::default() };
        for mode in [Mode::Sld, Mode::S] {
            let r = refute(&p, std::slice::from_ref(&q), mode, Selector::Leftmost, &limits, &g);
            assert_eq!(r.answers.len(), 3);
            for a in &r.answers {
                let goals = a.trace.replay().unwrap();
                assert!(goals.last().unwrap().is_empty());
            }
        }
    }

    #[test]
    fn server_fair_partial_answer() {
        let (p, g) = setup(
            "resource([get(X)|In], [X|L]) :- resource(In, L).
             resource([get(X)|In], []) :- signal(novalue(get(X))).
             zeros([0|X]) :- zeros(X).",
        );
        let q = [t(&g, "resource(X, Y)")];
        let x = q[0].args()[0].clone();
        let zeros = Term::app("zeros", vec![q[0].args()[1].clone()]);
        let goal = vec![q[0].clone(), zeros];
        let d = s_derive(&p, &goal, 2, Selector::Fair, &Limits::default(), &g);
        assert_eq!(d.boundaries.len(), 2);
        let bound = d.partial_answer(2, &x);
        assert!(bound.to_string().starts_with("cons(get(0), "), "{bound}");
    }
}
