#![allow(dead_code)]

use std::path::PathBuf;

use coresolve::{declared_query, parse_program, parse_query, Program, Query, VarGen};

pub const CORPUS: [&str; 12] =
    ["nat", "nats", "bad", "server", "case1", "case2", "case3", "ex21", "ex51", "ex52", "r", "fibs"];

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(format!("{name}.lp"))
}

pub struct Loaded {
    pub program: Program,
    pub query: Query,
    pub fresh: VarGen,
}

pub fn load(name: &str) -> Loaded {
    let src = std::fs::read_to_string(corpus_path(name)).expect("corpus file");
    let fresh = VarGen::new();
    let program = parse_program(&src, &fresh).expect("corpus parses");
    let q = declared_query(&src).expect("corpus file declares a query");
    let query = parse_query(q, &fresh).expect("query parses");
    Loaded { program, query, fresh }
}

/// Independent reference implementations used as oracles.
pub mod oracle {
    use std::collections::HashMap;
    use std::sync::atomic::{AtomicU64, Ordering};

    use coresolve::term::is_variant;
    use coresolve::{Program, Term, Var};

    pub type Bindings = HashMap<Var, Term>;

    static NEXT: AtomicU64 = AtomicU64::new(1 << 40);

    fn walk(t: &Term, b: &Bindings) -> Term {
        let mut cur = t.clone();
        while let Term::Var(v) = &cur {
            match b.get(v) {
                Some(next) => cur = next.clone(),
                None => break,
            }
        }
        cur
    }

    fn occurs(v: &Var, t: &Term, b: &Bindings) -> bool {
        match walk(t, b) {
            Term::Var(w) => &w == v,
            Term::App(_, args) => args.iter().any(|a| occurs(v, a, b)),
        }
    }

    /// Robinson unification with occurs check.
    pub fn unify(x: &Term, y: &Term, b: &mut Bindings) -> bool {
        let (x, y) = (walk(x, b), walk(y, b));
        match (&x, &y) {
            (Term::Var(v), Term::Var(w)) if v == w => true,
            (Term::Var(v), _) => {
                if occurs(v, &y, b) {
                    return false;
                }
                b.insert(v.clone(), y.clone());
                true
            }
            (_, Term::Var(_)) => unify(&y, &x, b),
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(s, t)| unify(s, t, b))
            }
        }
    }

    pub fn resolve(t: &Term, b: &Bindings) -> Term {
        match walk(t, b) {
            Term::App(f, args) => {
                Term::from_symbol(f.clone(), args.iter().map(|a| resolve(a, b)).collect())
            }
            v => v,
        }
    }

    fn rename(t: &Term, map: &mut HashMap<Var, Var>) -> Term {
        t.map_vars(&mut |v| {
            Term::Var(map.entry(v.clone()).or_insert_with(|| Var::new(NEXT.fetch_add(1, Ordering::Relaxed), None)).clone())
        })
    }

    fn search(p: &Program, goal: Vec<Term>, b: Bindings, left: usize, target: &Term, out: &mut Vec<Term>) {
        let Some((atom, rest)) = goal.split_first() else {
            let ans = resolve(target, &b);
            if !out.iter().any(|a| is_variant(a, &ans)) {
                out.push(ans);
            }
            return;
        };
        if left == 0 {
            return;
        }
        for c in &p.clauses {
            let mut map = HashMap::new();
            let head = rename(&c.head, &mut map);
            let mut b2 = b.clone();
            if unify(&head, atom, &mut b2) {
                let mut next: Vec<Term> = c.body.iter().map(|t| rename(t, &mut map)).collect();
                next.extend(rest.iter().cloned());
                search(p, next, b2, left - 1, target, out);
            }
        }
    }

    /// Instances of `target` computed by all SLD refutations of `query`
    /// using at most `depth` clauses, up to variant.
    pub fn sld_answers(p: &Program, query: &[Term], target: &Term, depth: usize) -> Vec<Term> {
        let mut out = Vec::new();
        search(p, query.to_vec(), Bindings::new(), depth, target, &mut out);
        out
    }
}

/// Equality of answer lists as sets up to variant.
pub fn same_up_to_variant(a: &[coresolve::Term], b: &[coresolve::Term]) -> bool {
    use coresolve::term::is_variant;
    a.iter().all(|x| b.iter().any(|y| is_variant(x, y))) && b.iter().all(|y| a.iter().any(|x| is_variant(x, y)))
}
