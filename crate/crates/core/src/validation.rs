//! Executable checks relating restricted-loop answers to infinite
//! S-derivations: loop unrolling, depth-wise agreement with the unfolded
//! answer, and convergence of partial answers.

use std::collections::BTreeSet;
use std::fmt;

use crate::coengine::{annotate, apply_co_step, co_refute, CoAnswer, CoMode};
use crate::decirc::DecircStream;
use crate::derivation::{
    check_s_derivation, partial_answer, rewrite_with, s_derive, subst_with, Goal, Limits, Selector, Step, StepKind,
    Trace, TraceStatus,
};
use crate::error::{Error, Result};
use crate::productivity::{check_productive_default, DEFAULT_BOUND};
use crate::program::{check_universal, Program};
use crate::subst::Substitution;
use crate::term::{is_variant, truncate, tuple, variant_distance, Distance, Term, Var, VarGen};
use crate::unify::{mgm, UnifyOutcome};

pub const DEFAULT_DEPTH: usize = 8;
pub const DEFAULT_ROUNDS: usize = 16;

/// How an entry of a co-S derivation was discharged.
#[derive(Clone, Debug, PartialEq)]
pub enum Resolution {
    Open,
    Clause { clause: usize, by_subst: bool },
    Loop { target: usize, loop_index: usize },
}

#[derive(Clone, Debug)]
pub struct ProofNode {
    pub atom: Term,
    pub resolution: Resolution,
    pub children: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct LoopPoint {
    pub step: usize,
    pub node: usize,
    pub target: usize,
    /// The ancestor when the loop was taken.
    pub ancestor: Term,
    /// The same ancestor as instantiated by the rest of the derivation.
    pub ancestor_final: Term,
    pub theta: Substitution,
}

/// A restricted co-S derivation read as a graph: every entry points to the
/// entries its clause produced, loop entries point back to their ancestor.
#[derive(Clone, Debug)]
pub struct ProofGraph {
    pub nodes: Vec<ProofNode>,
    pub roots: Vec<usize>,
    pub loops: Vec<LoopPoint>,
}

fn ids_after_subst(theta: &Substitution, old: &[Term], ids: &[usize]) -> Vec<usize> {
    let mut seen: Vec<Term> = Vec::new();
    let mut out = Vec::new();
    for (a, id) in old.iter().zip(ids) {
        let t = theta.apply_acyclic(a);
        if !seen.contains(&t) {
            seen.push(t);
            out.push(*id);
        }
    }
    out
}

/// Fails on traces that do not replay under the restricted loop rule,
/// which includes every trace using a CoLP-only loop.
pub fn proof_graph(tr: &Trace) -> Result<ProofGraph> {
    let mut goal = annotate(&tr.initial);
    let mut nodes: Vec<ProofNode> = tr
        .initial
        .iter()
        .map(|a| ProofNode { atom: a.clone(), resolution: Resolution::Open, children: Vec::new() })
        .collect();
    let roots: Vec<usize> = (0..nodes.len()).collect();
    let mut ids = roots.clone();
    let mut anc_ids: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    let mut loops = Vec::new();
    let mut pending = None;
    for (n, s) in tr.steps.iter().enumerate() {
        let next = apply_co_step(&goal, s, CoMode::Restricted)
            .map_err(|e| Error::Precondition(format!("step {}: not a restricted co-S step: {e}", n + 1)))?;
        let i = s.atom;
        match s.kind {
            StepKind::Subst => {
                for (k, e) in goal.iter().enumerate() {
                    anc_ids[k] = ids_after_subst(&s.substitution, &e.ancestors, &anc_ids[k]);
                }
                pending = Some(i);
            }
            StepKind::Rewrite => {
                let node = ids[i];
                let by_subst = pending.take() == Some(i);
                let body_len = next.len() + 1 - goal.len();
                let mut inherited = anc_ids[i].clone();
                if !goal[i].ancestors.contains(&goal[i].atom) {
                    inherited.push(node);
                }
                let children: Vec<usize> = (0..body_len)
                    .map(|k| {
                        nodes.push(ProofNode {
                            atom: next[i + k].atom.clone(),
                            resolution: Resolution::Open,
                            children: Vec::new(),
                        });
                        nodes.len() - 1
                    })
                    .collect();
                nodes[node].resolution = Resolution::Clause { clause: s.clause.unwrap_or(0), by_subst };
                nodes[node].children = children.clone();
                ids.splice(i..=i, children);
                anc_ids.splice(i..=i, std::iter::repeat_n(inherited, body_len));
            }
            StepKind::Loop => {
                let anc = s.ancestor.as_ref().ok_or_else(|| Error::Precondition("loop step without ancestor".into()))?;
                let k = goal[i]
                    .ancestors
                    .iter()
                    .position(|a| a == anc)
                    .ok_or_else(|| Error::Precondition(format!("step {}: ancestor not found", n + 1)))?;
                let node = ids[i];
                let target = anc_ids[i][k];
                nodes[node].resolution = Resolution::Loop { target, loop_index: loops.len() };
                loops.push(LoopPoint {
                    step: n,
                    node,
                    target,
                    ancestor: anc.clone(),
                    ancestor_final: anc.clone(),
                    theta: s.substitution.clone(),
                });
                ids.remove(i);
                anc_ids.remove(i);
            }
            StepKind::Sld => return Err(Error::Precondition(format!("step {}: SLD step in a co-S trace", n + 1))),
        }
        goal = next;
    }
    for lp in &mut loops {
        for s in &tr.steps[lp.step + 1..] {
            if s.kind == StepKind::Subst {
                lp.ancestor_final = s.substitution.apply_acyclic(&lp.ancestor_final);
            }
        }
    }
    Ok(ProofGraph { nodes, roots, loops })
}

/// One traversal of a loop inside an unrolling.
#[derive(Clone, Debug)]
pub struct Round {
    pub loop_index: usize,
    /// Traversals so far along this lineage, counting this one.
    pub round: usize,
    pub start_atom: Term,
    /// Number of trace steps before the start atom appeared.
    pub created: usize,
    /// The following round of the same loop in the same lineage.
    pub next: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Unrolling {
    pub trace: Trace,
    /// Step counts at which S-steps end.
    pub boundaries: Vec<usize>,
    pub rounds: Vec<Round>,
    pub graph: ProofGraph,
}

impl Unrolling {
    pub fn s_steps(&self) -> usize {
        self.boundaries.len()
    }
}

#[derive(Clone)]
struct Tag {
    node: usize,
    rounds: usize,
    lineage: Vec<usize>,
    born: u64,
}

struct Unroller<'a> {
    p: &'a Program,
    graph: &'a ProofGraph,
    rounds: Vec<Round>,
    max_rounds: usize,
    limit: usize,
}

impl Unroller<'_> {
    fn settle(&mut self, mut tag: Tag, atom: &Term, created: usize) -> Tag {
        let mut hops = 0;
        while let Resolution::Loop { target, loop_index } = self.graph.nodes[tag.node].resolution {
            tag.node = target;
            tag.rounds += 1;
            let id = self.rounds.len();
            self.rounds.push(Round { loop_index, round: tag.rounds, start_atom: atom.clone(), created, next: None });
            if let Some(&prev) = tag.lineage.iter().rev().find(|&&r| self.rounds[r].loop_index == loop_index) {
                self.rounds[prev].next = Some(id);
            }
            tag.lineage.push(id);
            hops += 1;
            if hops > self.graph.nodes.len() {
                break;
            }
        }
        tag
    }

    fn clause_of(&self, tag: &Tag) -> Option<usize> {
        match self.graph.nodes[tag.node].resolution {
            Resolution::Clause { clause, .. } => Some(clause),
            _ => None,
        }
    }

    fn children(&mut self, parent: &Tag, goal: &Goal, at: usize, born: u64, created: usize) -> Vec<Tag> {
        let kids = self.graph.nodes[parent.node].children.clone();
        kids.iter()
            .enumerate()
            .map(|(k, &node)| {
                let t = Tag { node, rounds: parent.rounds, lineage: parent.lineage.clone(), born };
                self.settle(t, &goal[at + k], created)
            })
            .collect()
    }

    fn run(&mut self, initial: &Goal, fresh: &VarGen) -> Result<(Trace, Vec<usize>)> {
        let mut goal = initial.clone();
        let mut tags: Vec<Tag> = Vec::new();
        for (k, &root) in self.graph.roots.iter().enumerate() {
            let t = Tag { node: root, rounds: 0, lineage: Vec::new(), born: 0 };
            tags.push(self.settle(t, &initial[k], 0));
        }
        let mut steps: Vec<Step> = Vec::new();
        let mut boundaries = Vec::new();
        let mut clock = 0u64;
        let status = loop {
            if steps.len() > self.limit {
                return Err(Error::Precondition("unrolling exceeded its step budget".into()));
            }
            // Rewriting to normal form along the recorded clauses.
            let mut chain = 0;
            while let Some(i) = (0..goal.len()).find(|&i| {
                self.clause_of(&tags[i])
                    .is_some_and(|c| !mgm(&self.p.clauses[c].instance(fresh).head, &goal[i]).is_fail())
            }) {
                chain += 1;
                if chain > self.limit {
                    return Err(Error::Precondition("rewriting does not terminate along the pattern".into()));
                }
                let c = self.clause_of(&tags[i]).expect("checked");
                let (next, step) = rewrite_with(&goal, i, c, self.p.clauses[c].instance(fresh)).expect("matches");
                let parent = tags[i].clone();
                let kids = self.children(&parent, &next, i, parent.born, steps.len() + 1);
                tags.splice(i..=i, kids);
                goal = next;
                steps.push(step);
            }
            for (i, a) in goal.iter().enumerate() {
                for (c, cl) in self.p.clauses.iter().enumerate() {
                    if let UnifyOutcome::Matcher(_) = mgm(&cl.instance(fresh).head, a) {
                        return Err(Error::Precondition(format!(
                            "atom {i} is rewritable by clause {c}, which the loop pattern does not use"
                        )));
                    }
                }
            }
            if goal.is_empty() {
                break TraceStatus::Refuted;
            }
            let Some(i) = (0..goal.len())
                .filter(|&i| tags[i].rounds <= self.max_rounds)
                .min_by_key(|&i| (tags[i].born, i))
            else {
                break TraceStatus::Suspended;
            };
            let c = self
                .clause_of(&tags[i])
                .ok_or_else(|| Error::Precondition("open entry in the co-S derivation".into()))?;
            let inst = self.p.clauses[c].instance(fresh);
            let (g1, s1) = subst_with(&goal, i, c, inst.clone())
                .ok_or_else(|| Error::Precondition(format!("clause {c} does not unify with {}", goal[i])))?;
            let (next, s2) = rewrite_with(&g1, i, c, inst).expect("instantiated atom matches its clause");
            clock += 1;
            let parent = tags[i].clone();
            let kids = self.children(&parent, &next, i, clock, steps.len() + 2);
            tags.splice(i..=i, kids);
            goal = next;
            steps.push(s1);
            steps.push(s2);
            boundaries.push(steps.len());
        };
        Ok((Trace { initial: initial.clone(), steps, status }, boundaries))
    }
}

const STEP_BUDGET: usize = 100_000;

/// Continues a restricted co-S refutation past its loop points: each loop
/// entry is resolved again the way its ancestor was, with fresh clause
/// instances, until every lineage has traversed its loops `rounds` times.
/// Atoms are selected oldest first, so loops from different lineages
/// interleave. With `rounds = 0` the result stops at the loop points.
pub fn build_loop_unrolling(p: &Program, tr: &Trace, rounds: usize, fresh: &VarGen) -> Result<Unrolling> {
    let graph = proof_graph(tr)?;
    if graph.loops.is_empty() {
        return Err(Error::Precondition("the derivation uses no loop".into()));
    }
    let mut u = Unroller { p, graph: &graph, rounds: Vec::new(), max_rounds: rounds, limit: STEP_BUDGET };
    let (trace, boundaries) = u.run(&tr.initial, fresh)?;
    check_s_derivation(p, &trace, fresh)?;
    let rounds = std::mem::take(&mut u.rounds);
    Ok(Unrolling { trace, boundaries, rounds, graph })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundCheck {
    pub loop_index: usize,
    pub round: usize,
    /// The round's start atom, instantiated by the round, is a variant of
    /// the loop's ancestor.
    pub equation: bool,
    /// The round's matcher is a variant of the matching element of the
    /// decircularized loop unifier.
    pub linkage: bool,
}

fn eqs(s: &Substitution) -> Vec<Term> {
    s.iter().map(|(v, t)| Term::app("=", vec![Term::Var(v.clone()), t.clone()])).collect()
}

fn permutations(items: Vec<Term>) -> Vec<Vec<Term>> {
    if items.len() <= 1 {
        return vec![items];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.clone();
        let head = rest.remove(k);
        for mut tail in permutations(rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Equality of substitutions up to a consistent renaming of all variables.
pub fn substitution_variant(a: &Substitution, b: &Substitution) -> bool {
    if a.len() != b.len() || a.len() > 7 {
        return false;
    }
    let left = tuple(&eqs(a));
    permutations(eqs(b)).into_iter().any(|perm| is_variant(&left, &tuple(&perm)))
}

fn round_substitution(tr: &Trace, from: usize, to: usize, t: &Term) -> Term {
    tr.steps[from..to]
        .iter()
        .filter(|s| s.kind == StepKind::Subst)
        .fold(t.clone(), |acc, s| s.substitution.apply_acyclic(&acc))
}

/// Checks every completed round of an unrolling against its loop. A round
/// runs from the appearance of its start atom; it is cut anywhere between
/// the appearance of the next round's atom and the one after, since atoms
/// of other lineages may complete its instantiation.
pub fn check_rounds(un: &Unrolling, answer: &CoAnswer, fresh: &VarGen) -> Vec<RoundCheck> {
    let full = answer.store.substitution();
    let mut streams: Vec<(DecircStream<'_>, Vec<Var>)> = un
        .graph
        .loops
        .iter()
        .map(|lp| {
            let dom: BTreeSet<Var> = lp.theta.domain().cloned().collect();
            let st = DecircStream::new(&full.reachable_from(&dom), fresh);
            let keys = dom.into_iter().filter(|v| st.cyclic_vars().contains(v)).collect();
            (st, keys)
        })
        .collect();
    let mut out = Vec::new();
    for r in &un.rounds {
        let Some(nx) = r.next else { continue };
        let lp = &un.graph.loops[r.loop_index];
        let until = un.rounds[nx].next.map_or(un.trace.steps.len(), |k| un.rounds[k].created);
        let (st, keys) = &mut streams[r.loop_index];
        let element = st.element(r.round);
        let wanted: Vec<Var> = keys.iter().map(|v| st.var_at(v, r.round - 1)).collect();
        let element =
            Substitution::from_pairs(element.iter().filter(|(v, _)| wanted.contains(v)).map(|(v, t)| (v.clone(), t.clone())));
        let (mut equation, mut linkage) = (false, false);
        for end in un.rounds[nx].created..=until {
            let inst = round_substitution(&un.trace, r.created, end, &r.start_atom);
            equation |= is_variant(&inst, &lp.ancestor) || is_variant(&inst, &lp.ancestor_final);
            if let UnifyOutcome::Matcher(s) = mgm(&r.start_atom, &inst) {
                let sigma = Substitution::from_pairs(
                    s.iter().filter(|(v, t)| t.as_var() != Some(*v)).map(|(v, t)| (v.clone(), t.clone())),
                );
                linkage |= substitution_variant(&sigma, &element);
            }
        }
        out.push(RoundCheck { loop_index: r.loop_index, round: r.round, equation, linkage });
    }
    out
}

/// A conjunctive query as a single term.
pub fn query_term(query: &[Term]) -> Term {
    match query {
        [a] => a.clone(),
        _ => tuple(query),
    }
}

#[derive(Clone, Debug)]
pub struct DepthRow {
    pub depth: usize,
    pub partial: Term,
    pub unfolded: Term,
    pub equal: bool,
}

#[derive(Clone, Debug)]
pub struct CorrespondenceReport {
    pub query: Term,
    pub theta: Substitution,
    pub unrolling: Option<Unrolling>,
    pub table: Vec<DepthRow>,
    pub rounds: Vec<RoundCheck>,
}

impl CorrespondenceReport {
    pub fn agrees(&self) -> bool {
        self.table.iter().all(|r| r.equal)
    }

    /// Once equal at some depth, equal at every smaller depth.
    pub fn is_monotone(&self) -> bool {
        let mut seen_equal = false;
        for r in self.table.iter().rev() {
            if seen_equal && !r.equal {
                return false;
            }
            seen_equal |= r.equal;
        }
        true
    }
}

impl fmt::Display for CorrespondenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "query    {}", self.query)?;
        writeln!(f, "answer   {}", self.theta)?;
        match &self.unrolling {
            Some(u) => writeln!(f, "unrolled {} S-step(s), {} loop(s)", u.s_steps(), u.graph.loops.len())?,
            None => writeln!(f, "no loop used; nothing to compare")?,
        }
        writeln!(f, "limit proxy: unfolded co-S answer")?;
        if !self.table.is_empty() {
            let w = self.table.iter().map(|r| r.partial.to_string().len()).max().unwrap_or(0).max(7);
            writeln!(f, "{:>5}  {:<5}  {:<w$}  unfolded", "depth", "equal", "partial")?;
            for r in &self.table {
                let eq = if r.equal { "yes" } else { "NO" };
                writeln!(f, "{:>5}  {:<5}  {:<w$}  {}", r.depth, eq, r.partial.to_string(), r.unfolded)?;
            }
        }
        let bad = self.rounds.iter().filter(|r| !r.equation || !r.linkage).count();
        write!(f, "rounds checked: {}, failing: {bad}", self.rounds.len())
    }
}

fn restricted_answer(p: &Program, query: &[Term], limits: &Limits, fresh: &VarGen) -> Result<CoAnswer> {
    let limits = Limits { max_answers: 1, ..*limits };
    co_refute(p, query, CoMode::Restricted, &limits, fresh)
        .answers
        .into_iter()
        .next()
        .ok_or_else(|| Error::Precondition("restricted co-S resolution found no refutation".into()))
}

/// Compares the unrolled derivation's partial answer with the unfolded
/// co-S answer at every depth up to `d_max`.
pub fn check_theorem_5_1(
    p: &Program,
    query: &[Term],
    d_max: usize,
    rounds: usize,
    limits: &Limits,
    fresh: &VarGen,
) -> Result<CorrespondenceReport> {
    let answer = restricted_answer(p, query, limits, fresh)?;
    let qt = query_term(query);
    let theta = answer.substitution.clone();
    if answer.loop_uses.is_empty() {
        return Ok(CorrespondenceReport { query: qt, theta, unrolling: None, table: Vec::new(), rounds: Vec::new() });
    }
    let un = build_loop_unrolling(p, &answer.trace, rounds, fresh)?;
    let partial = partial_answer(&un.trace, un.trace.steps.len(), &qt);
    let mut stream = DecircStream::new(&theta, fresh);
    let table = (1..=d_max)
        .map(|d| {
            let left = truncate(d, &partial);
            let right = stream.unfold(&qt, d);
            let equal = is_variant(&left, &right);
            DepthRow { depth: d, partial: left, unfolded: right, equal }
        })
        .collect();
    let round_checks = check_rounds(&un, &answer, fresh);
    Ok(CorrespondenceReport { query: qt, theta, unrolling: Some(un), table, rounds: round_checks })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub step: usize,
    pub distance: Distance,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub holds: bool,
    /// S-steps per round of the loop pattern.
    pub round_len: usize,
    pub depth: usize,
    pub proxy: Term,
    pub rows: Vec<ConvergenceRow>,
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "limit proxy (depth {}): {}", self.depth, self.proxy)?;
        writeln!(f, "round length: {} S-step(s)", self.round_len)?;
        writeln!(f, "{:>4}  distance", "step")?;
        for r in &self.rows {
            writeln!(f, "{:>4}  {}", r.step, r.distance)?;
        }
        write!(f, "{}", if self.holds { "converges" } else { "does NOT converge" })
    }
}

/// Distances from the partial answers of a fair S-derivation of length
/// `n` to the depth-`d` unfolding of the co-S answer. Holds when every
/// non-final positive distance is later strictly improved, and the
/// exponent grows by at least one per pattern round.
pub fn check_lemma_4_1(p: &Program, query: &[Term], n: usize, d: usize, fresh: &VarGen) -> Result<ConvergenceReport> {
    let u = check_universal(p);
    if !u.is_universal() {
        return Err(Error::Precondition(format!("program is not universal: {u}")));
    }
    if check_productive_default(p, DEFAULT_BOUND, fresh).is_non_productive() {
        return Err(Error::Precondition("program has an infinite rewriting derivation".into()));
    }
    let limits = Limits::default();
    let answer = restricted_answer(p, query, &limits, fresh)?;
    let qt = query_term(query);
    let proxy = DecircStream::new(&answer.substitution, fresh).unfold(&qt, d);
    let sd = s_derive(p, &query.to_vec(), n, Selector::Fair, &limits, fresh);
    if sd.boundaries.len() < n {
        return Err(Error::Precondition(format!("the S-derivation has only {} step(s)", sd.boundaries.len())));
    }
    let rows: Vec<ConvergenceRow> = (0..=n)
        .map(|i| ConvergenceRow { step: i, distance: variant_distance(&proxy, &truncate(d, &sd.partial_answer(i, &qt))) })
        .collect();
    let round_len = if answer.loop_uses.is_empty() {
        1
    } else {
        let one = build_loop_unrolling(p, &answer.trace, 1, fresh)?.s_steps();
        let two = build_loop_unrolling(p, &answer.trace, 2, fresh)?.s_steps();
        two.saturating_sub(one).max(1)
    };
    let improves = rows.iter().enumerate().take(n).all(|(i, r)| {
        r.distance == Distance::Zero || rows[i + 1..].iter().any(|later| later.distance < r.distance)
    });
    let per_round = rows.iter().enumerate().all(|(i, r)| match (r.distance.exponent(), rows.get(i + round_len)) {
        (Some(k), Some(later)) => later.distance.exponent().is_none_or(|k2| k2 > k),
        _ => true,
    });
    Ok(ConvergenceReport { holds: improves && per_round, round_len, depth: d, proxy, rows })
}
