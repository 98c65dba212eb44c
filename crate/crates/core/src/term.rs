//! First-order terms as finite trees.
//!
//! Infinite terms never exist in memory. They are represented either by a
//! truncation (cut at some depth, with the reserved leaf [`Symbol::diamond`])
//! or by a circular [`Substitution`](crate::subst::Substitution).

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// Name of the reserved truncation leaf. The parser can never produce it.
pub const DIAMOND: &str = "◇";

/// A function (or predicate) symbol. Same name with different arity is a
/// different symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    name: Arc<str>,
    arity: usize,
}

impl Symbol {
    pub fn new(name: impl Into<Arc<str>>, arity: usize) -> Self {
        let name = name.into();
        assert!(!name.is_empty(), "symbol names are non-empty");
        Symbol { name, arity }
    }

    pub fn diamond() -> Self {
        Symbol::new(DIAMOND, 0)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_diamond(&self) -> bool {
        self.arity == 0 && &*self.name == DIAMOND
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// A logic variable. Identity is the numeric id; the display name is
/// cosmetic.
#[derive(Clone, Debug)]
pub struct Var {
    id: u64,
    name: Option<Arc<str>>,
}

impl Var {
    pub fn new(id: u64, name: Option<Arc<str>>) -> Self {
        Var { id, name }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Source name with any `_<n>` renaming suffix removed.
    pub fn base_name(&self) -> Option<&str> {
        let name = self.name.as_deref()?;
        match name.rsplit_once('_') {
            Some((base, tail))
                if !base.is_empty() && !tail.is_empty() && tail.bytes().all(|b| b.is_ascii_digit()) =>
            {
                Some(base)
            }
            _ => Some(name),
        }
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for Var {}

impl Hash for Var {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Var {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id.cmp(&other.id)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.name {
            Some(n) => f.write_str(n),
            None => write!(f, "_G{}", self.id),
        }
    }
}

/// Source of fresh variable ids for one engine session. Safe to share
/// between threads.
#[derive(Debug, Default)]
pub struct VarGen {
    next: AtomicU64,
}

impl VarGen {
    pub fn new() -> Self {
        VarGen { next: AtomicU64::new(1) }
    }

    /// Next id strictly above `floor`, used when terms were built elsewhere.
    pub fn starting_after(floor: u64) -> Self {
        VarGen { next: AtomicU64::new(floor + 1) }
    }

    pub fn fresh_id(&self) -> u64 {
        self.next.fetch_add(1, Ordering::Relaxed)
    }

    pub fn fresh(&self, name: Option<&str>) -> Var {
        Var::new(self.fresh_id(), name.map(Arc::from))
    }

    /// A fresh copy of `v` whose display name is derived from the original.
    pub fn fresh_like(&self, v: &Var) -> Var {
        let id = self.fresh_id();
        let name = v.base_name().map(|b| Arc::from(format!("{b}_{id}")));
        Var::new(id, name)
    }
}

/// A finite first-order term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    App(Symbol, Arc<[Term]>),
}

impl Term {
    pub fn var(v: Var) -> Self {
        Term::Var(v)
    }

    pub fn constant(name: &str) -> Self {
        Term::App(Symbol::new(name, 0), Arc::from(Vec::new()))
    }

    pub fn app(name: &str, args: Vec<Term>) -> Self {
        let sym = Symbol::new(name, args.len());
        Term::App(sym, Arc::from(args))
    }

    pub fn from_symbol(sym: Symbol, args: Vec<Term>) -> Self {
        assert_eq!(sym.arity(), args.len(), "child count must equal arity");
        Term::App(sym, Arc::from(args))
    }

    pub fn diamond() -> Self {
        Term::App(Symbol::diamond(), Arc::from(Vec::new()))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::App(..) => None,
        }
    }

    pub fn symbol(&self) -> Option<&Symbol> {
        match self {
            Term::App(s, _) => Some(s),
            Term::Var(_) => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, a) => a,
            Term::Var(_) => &[],
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// `1 + max |w|` over node positions.
    pub fn depth(&self) -> usize {
        1 + self.args().iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.args().iter().map(Term::size).sum::<usize>()
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Variables in order of first occurrence (left to right, depth first).
    pub fn variables_ordered(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.walk_vars(&mut |v| {
            if !out.contains(v) {
                out.push(v.clone());
            }
        });
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        self.walk_vars(&mut |v| {
            out.insert(v.clone());
        });
    }

    fn walk_vars(&self, f: &mut impl FnMut(&Var)) {
        match self {
            Term::Var(v) => f(v),
            Term::App(_, args) => args.iter().for_each(|a| a.walk_vars(f)),
        }
    }

    pub fn max_var_id(&self) -> u64 {
        match self {
            Term::Var(v) => v.id(),
            Term::App(_, args) => args.iter().map(Term::max_var_id).max().unwrap_or(0),
        }
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(v)),
        }
    }

    /// Rebuild the term, replacing each variable by `f(v)`.
    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::App(s, args) => {
                let new: Vec<Term> = args.iter().map(|a| a.map_vars(f)).collect();
                Term::App(s.clone(), Arc::from(new))
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(s, args) => {
                f.write_str(s.name())?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

/// Exact distance between terms: either zero or `2^-exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Distance {
    Zero,
    /// `2^-k`; larger exponents are smaller distances.
    Pow2Neg(u32),
}

impl Distance {
    pub fn exponent(self) -> Option<u32> {
        match self {
            Distance::Zero => None,
            Distance::Pow2Neg(k) => Some(k),
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Distance::Zero => 0.0,
            Distance::Pow2Neg(k) => 2f64.powi(-(k as i32)),
        }
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (Distance::Zero, Distance::Zero) => Equal,
            (Distance::Zero, _) => Less,
            (_, Distance::Zero) => Greater,
            (Distance::Pow2Neg(a), Distance::Pow2Neg(b)) => b.cmp(a),
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Zero => f.write_str("0"),
            Distance::Pow2Neg(k) => write!(f, "2^-{k}"),
        }
    }
}

/// Cut `t` at depth `n`: nodes above depth `n` keep their labels, nodes at
/// depth `n` become the leaf `◇`, deeper nodes disappear.
pub fn truncate(n: usize, t: &Term) -> Term {
    if n == 0 {
        return Term::diamond();
    }
    match t {
        Term::Var(_) => t.clone(),
        Term::App(s, args) => {
            let new: Vec<Term> = args.iter().map(|a| truncate(n - 1, a)).collect();
            Term::App(s.clone(), Arc::from(new))
        }
    }
}

fn same_label(a: &Term, b: &Term) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => x == y,
        (Term::App(f, _), Term::App(g, _)) => f == g,
        _ => false,
    }
}

/// Smallest depth holding a differing label, if any.
fn first_difference(a: &Term, b: &Term) -> Option<usize> {
    if !same_label(a, b) {
        return Some(0);
    }
    a.args()
        .iter()
        .zip(b.args())
        .filter_map(|(x, y)| first_difference(x, y))
        .min()
        .map(|d| d + 1)
}

/// Ultrametric distance `2^-γ`, `γ` the least truncation depth at which the
/// two terms differ.
pub fn distance(s: &Term, t: &Term) -> Distance {
    match first_difference(s, t) {
        None => Distance::Zero,
        // Labels at depth `d` are first visible in the truncation at `d + 1`.
        Some(d) => Distance::Pow2Neg(d as u32 + 1),
    }
}

/// Distance modulo variable renaming: `γ` is the least depth at which the
/// truncations are not variants of each other.
pub fn variant_distance(s: &Term, t: &Term) -> Distance {
    let bound = s.depth().max(t.depth());
    if is_variant(s, t) {
        return Distance::Zero;
    }
    for n in 1..=bound {
        if !is_variant(&truncate(n, s), &truncate(n, t)) {
            return Distance::Pow2Neg(n as u32);
        }
    }
    // Unreachable for finite terms: at depth `bound` truncation is identity.
    Distance::Pow2Neg(bound as u32 + 1)
}

pub fn variables_of(t: &Term) -> BTreeSet<Var> {
    t.variables()
}

/// One-way matching: extends `bindings` so that `pattern` under it equals
/// `target`. Variables of `target` are treated as constants.
pub(crate) fn match_into(pattern: &Term, target: &Term, bindings: &mut HashMap<Var, Term>) -> bool {
    match pattern {
        Term::Var(v) => match bindings.get(v) {
            Some(bound) => bound == target,
            None => {
                bindings.insert(v.clone(), target.clone());
                true
            }
        },
        Term::App(f, fargs) => match target {
            Term::App(g, gargs) if f == g => fargs
                .iter()
                .zip(gargs.iter())
                .all(|(p, t)| match_into(p, t, bindings)),
            _ => false,
        },
    }
}

/// True iff some substitution maps `general` onto `specific`.
pub fn is_instance(general: &Term, specific: &Term) -> bool {
    match_into(general, specific, &mut HashMap::new())
}

/// True iff the terms are equal up to a bijective variable renaming.
pub fn is_variant(a: &Term, b: &Term) -> bool {
    fn go(a: &Term, b: &Term, fwd: &mut HashMap<u64, u64>, back: &mut HashMap<u64, u64>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                let f = *fwd.entry(x.id()).or_insert(y.id());
                let g = *back.entry(y.id()).or_insert(x.id());
                f == y.id() && g == x.id()
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g && xs.iter().zip(ys.iter()).all(|(x, y)| go(x, y, fwd, back))
            }
            _ => false,
        }
    }
    go(a, b, &mut HashMap::new(), &mut HashMap::new())
}

/// Variant test over sequences of terms sharing one renaming.
pub fn is_variant_seq(a: &[Term], b: &[Term]) -> bool {
    a.len() == b.len() && is_variant(&tuple(a), &tuple(b))
}

/// Reserved functor wrapping a conjunction so it can be treated as one term.
pub const TUPLE: &str = "$goal";

pub fn tuple(atoms: &[Term]) -> Term {
    Term::app(TUPLE, atoms.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(g: &VarGen, n: &str) -> Term {
        Term::Var(g.fresh(Some(n)))
    }

    fn c(n: &str) -> Term {
        Term::constant(n)
    }

    fn s(t: Term) -> Term {
        Term::app("s", vec![t])
    }

    #[test]
    fn truncation_examples() {
        let g = VarGen::new();
        let y = v(&g, "Y");
        assert_eq!(truncate(0, &c("nat")), Term::diamond());
        let stream = Term::app("stream", vec![Term::app("scons", vec![c("0"), y])]);
        let want = Term::app(
            "stream",
            vec![Term::app("scons", vec![Term::diamond(), Term::diamond()])],
        );
        assert_eq!(truncate(2, &stream), want);
        let nat = Term::app("nat", vec![s(s(c("0")))]);
        assert_eq!(truncate(3, &nat), Term::app("nat", vec![s(s(Term::diamond()))]));
    }

    #[test]
    fn distance_examples() {
        let g = VarGen::new();
        let nat0 = Term::app("nat", vec![c("0")]);
        let nat1 = Term::app("nat", vec![s(c("0"))]);
        assert_eq!(distance(&nat0, &nat0), Distance::Zero);
        assert_eq!(distance(&nat0, &nat1), Distance::Pow2Neg(2));
        // Cross-check γ against the truncation definition directly.
        let gamma = (0..10).find(|&n| truncate(n, &nat0) != truncate(n, &nat1)).unwrap();
        assert_eq!(gamma, 2);
        let stream = Term::app("stream", vec![v(&g, "X")]);
        assert_eq!(distance(&nat0, &stream), Distance::Pow2Neg(1));
        assert_eq!(Distance::Pow2Neg(1).to_f64(), 0.5);
    }

    #[test]
    fn distance_ordering() {
        assert!(Distance::Zero < Distance::Pow2Neg(9));
        assert!(Distance::Pow2Neg(3) < Distance::Pow2Neg(2));
    }

    #[test]
    fn variables() {
        let g = VarGen::new();
        let (x, y, s_) = (v(&g, "X"), v(&g, "Y"), v(&g, "S"));
        assert!(variables_of(&Term::app("nat", vec![c("0")])).is_empty());
        let fibs = Term::app(
            "fibs",
            vec![x.clone(), y.clone(), Term::app("cons", vec![x.clone(), s_.clone()])],
        );
        assert_eq!(variables_of(&fibs).len(), 3);
        assert_eq!(variables_of(&Term::app("p", vec![x.clone(), x])).len(), 1);
    }

    #[test]
    fn instance_and_variant() {
        let g = VarGen::new();
        let (y, x1) = (v(&g, "Y"), v(&g, "X1"));
        let f = |t: Term| Term::app("f", vec![t]);
        let general = Term::app("p", vec![f(v(&g, "Yp")), s(v(&g, "Xp"))]);
        let specific = Term::app("p", vec![f(f(y.clone())), x1.clone()]);
        assert!(!is_instance(&general, &specific));
        assert!(is_instance(&specific, &specific));

        let (a, b, c1, a1, b1) = (v(&g, "A"), v(&g, "B"), v(&g, "C1"), v(&g, "A1"), v(&g, "B1"));
        let r = Term::app("r", vec![a, b]);
        let r2 = Term::app(
            "r",
            vec![Term::app("f", vec![a1.clone(), b1.clone(), c1]), s(b1)],
        );
        assert!(is_instance(&r, &r2));

        let x = v(&g, "X");
        assert!(is_variant(&Term::app("nats", vec![y.clone()]), &Term::app("nats", vec![x.clone()])));
        assert!(!is_variant(
            &Term::app("p", vec![x.clone(), x.clone()]),
            &Term::app("p", vec![x.clone(), y.clone()])
        ));
        assert!(is_variant(&Term::app("bad", vec![f(x)]), &Term::app("bad", vec![f(y)])));
    }

    #[test]
    fn renamed_names_derive_from_base() {
        let g = VarGen::new();
        let x = g.fresh(Some("X"));
        let x1 = g.fresh_like(&x);
        let x2 = g.fresh_like(&x1);
        assert_eq!(x2.base_name(), Some("X"));
        assert_ne!(x1, x2);
    }
}
