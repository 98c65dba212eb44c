//! Seeded generators for random programs, queries, terms and circular
//! substitutions. `CORESOLVE_SEED` overrides every default seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::program::{parse_program, parse_query, Program, Query};
use crate::subst::Substitution;
use crate::term::{Term, Var, VarGen};
use crate::unify::{rational_unify, UnifyOutcome};

pub const SEED_VAR: &str = "CORESOLVE_SEED";

/// `CORESOLVE_SEED` if set and numeric, else `default`.
pub fn seed_or(default: u64) -> u64 {
    std::env::var(SEED_VAR).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(default)
}

pub fn rng(default_seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed_or(default_seed))
}

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub predicates: usize,
    pub max_clauses: usize,
    pub max_body: usize,
    /// Maximum argument depth, constants having depth 1.
    pub max_depth: usize,
    pub functions: Vec<(&'static str, usize)>,
    pub constants: Vec<&'static str>,
    pub variables: Vec<&'static str>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            predicates: 4,
            max_clauses: 3,
            max_body: 2,
            max_depth: 3,
            functions: vec![("f", 1), ("g", 2)],
            constants: vec!["a", "b"],
            variables: vec!["X", "Y", "Z"],
        }
    }
}

/// Source text of a random term over the configured signature.
pub fn term_source<R: Rng>(rng: &mut R, cfg: &GenConfig, depth: usize, vars: &[&str]) -> String {
    let leaf = depth <= 1 || rng.gen_bool(0.4);
    if leaf {
        if !vars.is_empty() && rng.gen_bool(0.5) {
            return vars.choose(rng).expect("nonempty").to_string();
        }
        return cfg.constants.choose(rng).expect("constants").to_string();
    }
    let (f, n) = *cfg.functions.choose(rng).expect("functions");
    let args: Vec<String> = (0..n).map(|_| term_source(rng, cfg, depth - 1, vars)).collect();
    format!("{f}({})", args.join(", "))
}

fn atom_source<R: Rng>(rng: &mut R, cfg: &GenConfig, pred: usize, arity: usize, vars: &[&str]) -> String {
    let args: Vec<String> = (0..arity).map(|_| term_source(rng, cfg, cfg.max_depth, vars)).collect();
    if args.is_empty() {
        format!("p{pred}")
    } else {
        format!("p{pred}({})", args.join(", "))
    }
}

/// Predicate arities of a program built by [`program_source`].
fn arities<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Vec<usize> {
    (0..cfg.predicates.max(1)).map(|_| rng.gen_range(1..=2)).collect()
}

/// Source text of a random program: `p0 .. p{k-1}`, each with at least
/// one clause, at least one fact overall.
pub fn program_source<R: Rng>(rng: &mut R, cfg: &GenConfig) -> String {
    let ar = arities(rng, cfg);
    let vars = &cfg.variables[..];
    let mut lines = Vec::new();
    for (p, &n) in ar.iter().enumerate() {
        let clauses = rng.gen_range(1..=cfg.max_clauses.max(1));
        for k in 0..clauses {
            let head = atom_source(rng, cfg, p, n, vars);
            let body_len = if p == 0 && k == 0 { 0 } else { rng.gen_range(0..=cfg.max_body) };
            let body: Vec<String> = (0..body_len)
                .map(|_| {
                    let q = rng.gen_range(0..ar.len());
                    atom_source(rng, cfg, q, ar[q], vars)
                })
                .collect();
            if body.is_empty() {
                lines.push(format!("{head}."));
            } else {
                lines.push(format!("{head} :- {}.", body.join(", ")));
            }
        }
    }
    lines.join("\n")
}

/// A random query over the predicates occurring in `p`.
pub fn query_source<R: Rng>(rng: &mut R, cfg: &GenConfig, p: &Program) -> String {
    let preds: Vec<_> = p.predicates().into_iter().collect();
    let n = rng.gen_range(1..=2);
    let vars = ["Q", "R"];
    let atoms: Vec<String> = (0..n)
        .map(|_| {
            let s = preds.choose(rng).expect("program has predicates");
            let args: Vec<String> = (0..s.arity()).map(|_| term_source(rng, cfg, 2, &vars)).collect();
            if args.is_empty() {
                s.name().to_string()
            } else {
                format!("{}({})", s.name(), args.join(", "))
            }
        })
        .collect();
    atoms.join(", ")
}

pub fn random_program<R: Rng>(rng: &mut R, cfg: &GenConfig, fresh: &VarGen) -> Result<(String, Program)> {
    let src = program_source(rng, cfg);
    let p = parse_program(&src, fresh)?;
    Ok((src, p))
}

pub fn random_query<R: Rng>(rng: &mut R, cfg: &GenConfig, p: &Program, fresh: &VarGen) -> Result<(String, Query)> {
    let src = query_source(rng, cfg, p);
    let q = parse_query(&src, fresh)?;
    Ok((src, q))
}

/// A random term over `vars` with depth at most `depth`.
pub fn random_term<R: Rng>(rng: &mut R, cfg: &GenConfig, depth: usize, vars: &[Var]) -> Term {
    let leaf = depth <= 1 || rng.gen_bool(0.35);
    if leaf {
        if !vars.is_empty() && rng.gen_bool(0.5) {
            return Term::Var(vars.choose(rng).expect("nonempty").clone());
        }
        return Term::constant(cfg.constants.choose(rng).expect("constants"));
    }
    let (f, n) = *cfg.functions.choose(rng).expect("functions");
    Term::app(f, (0..n).map(|_| random_term(rng, cfg, depth - 1, vars)).collect())
}

/// Two random terms sharing a small pool of variables.
pub fn random_pair<R: Rng>(rng: &mut R, cfg: &GenConfig, fresh: &VarGen) -> (Term, Term) {
    let vars: Vec<Var> = cfg.variables.iter().map(|n| fresh.fresh(Some(n))).collect();
    let a = random_term(rng, cfg, cfg.max_depth + 1, &vars);
    let b = random_term(rng, cfg, cfg.max_depth + 1, &vars);
    (a, b)
}

/// A circular substitution obtained as a rational unifier of random terms
/// of the form `X = t[X, ...]` conjoined with a random pair.
pub fn random_circular<R: Rng>(rng: &mut R, cfg: &GenConfig, fresh: &VarGen) -> Substitution {
    loop {
        let vars: Vec<Var> = cfg.variables.iter().map(|n| fresh.fresh(Some(n))).collect();
        let x = Term::Var(vars[0].clone());
        let body = random_term(rng, cfg, cfg.max_depth + 1, &vars);
        let other = random_term(rng, cfg, cfg.max_depth, &vars);
        let third = random_term(rng, cfg, cfg.max_depth, &vars);
        let lhs = Term::app("e", vec![x, other]);
        let rhs = Term::app("e", vec![body, third]);
        if let UnifyOutcome::RationalUnifier(s) = rational_unify(&lhs, &rhs) {
            if s.is_circular() {
                return s;
            }
        }
    }
}
