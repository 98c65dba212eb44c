//! Horn clause programs: parsing, printing and the universality check.
//!
//! Syntax is a small Prolog subset: `head :- b1, ..., bn.` or `fact.`,
//! `%` line comments, list sugar `[]`, `[H|T]`, `[a,b]` for `nil`/`cons`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result, Span};
use crate::subst::{rename_apart, Substitution};
use crate::term::{Symbol, Term, Var, VarGen};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub head: Term,
    pub body: Vec<Term>,
    pub span: Span,
}

impl Clause {
    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = self.head.variables();
        for b in &self.body {
            out.extend(b.variables());
        }
        out
    }

    /// Body variables that do not occur in the head.
    pub fn existential_vars(&self) -> Vec<Var> {
        let head = self.head.variables();
        let mut out: Vec<Var> = Vec::new();
        for b in &self.body {
            for v in b.variables_ordered() {
                if !head.contains(&v) && !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// A fresh-variable variant of the clause.
    pub fn instance(&self, fresh: &VarGen) -> Clause {
        self.instance_with_renaming(fresh).0
    }

    pub fn instance_with_renaming(&self, fresh: &VarGen) -> (Clause, Substitution) {
        let mut all = Vec::with_capacity(1 + self.body.len());
        all.push(self.head.clone());
        all.extend(self.body.iter().cloned());
        let (mut renamed, ren) = rename_apart(&all, fresh);
        let body = renamed.split_off(1);
        let head = renamed.pop().expect("head present");
        (Clause { head, body, span: self.span }, ren)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, b) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{b}")?;
            }
        }
        f.write_str(".")
    }
}

/// `clause_instance`: the renamed-apart copy of `c`.
pub fn clause_instance(c: &Clause, fresh: &VarGen) -> Clause {
    c.instance(fresh)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub clauses: Vec<Clause>,
    pub warnings: Vec<String>,
}

impl Program {
    pub fn parse(text: &str, fresh: &VarGen) -> Result<Program> {
        parse_program(text, fresh)
    }

    /// Every symbol of the program, name and arity.
    pub fn signature(&self) -> BTreeSet<Symbol> {
        fn walk(t: &Term, out: &mut BTreeSet<Symbol>) {
            if let Term::App(s, args) = t {
                out.insert(s.clone());
                args.iter().for_each(|a| walk(a, out));
            }
        }
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            walk(&c.head, &mut out);
            c.body.iter().for_each(|b| walk(b, &mut out));
        }
        out
    }

    /// Root symbols of heads and body atoms.
    pub fn predicates(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            out.extend(c.head.symbol().cloned());
            out.extend(c.body.iter().filter_map(|b| b.symbol().cloned()));
        }
        out
    }

    /// Symbols occurring strictly below atom roots.
    pub fn function_symbols(&self) -> BTreeSet<Symbol> {
        fn walk(t: &Term, out: &mut BTreeSet<Symbol>) {
            if let Term::App(s, args) = t {
                out.insert(s.clone());
                args.iter().for_each(|a| walk(a, out));
            }
        }
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            for atom in std::iter::once(&c.head).chain(c.body.iter()) {
                atom.args().iter().for_each(|a| walk(a, &mut out));
            }
        }
        out
    }

    pub fn max_var_id(&self) -> u64 {
        self.clauses
            .iter()
            .flat_map(|c| std::iter::once(&c.head).chain(c.body.iter()))
            .map(Term::max_var_id)
            .max()
            .unwrap_or(0)
    }

    pub fn check_universal(&self) -> UniversalityReport {
        check_universal(self)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub clause_index: usize,
    pub span: Span,
    pub variables: Vec<Var>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UniversalityReport {
    pub violations: Vec<Violation>,
}

impl UniversalityReport {
    pub fn is_universal(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for UniversalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "universal: every body variable occurs in its clause head");
        }
        for v in &self.violations {
            let names: Vec<String> = v.variables.iter().map(|x| x.to_string()).collect();
            writeln!(
                f,
                "clause {} at {}: existential variable(s) {}",
                v.clause_index,
                v.span,
                names.join(", ")
            )?;
        }
        Ok(())
    }
}

/// One violation per clause whose body mentions a variable absent from
/// its head.
pub fn check_universal(p: &Program) -> UniversalityReport {
    let violations = p
        .clauses
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let ex = c.existential_vars();
            (!ex.is_empty()).then_some(Violation { clause_index: i, span: c.span, variables: ex })
        })
        .collect();
    UniversalityReport { violations }
}

/// A parsed query: its atoms and the named variables in source order.
#[derive(Clone, Debug)]
pub struct Query {
    pub atoms: Vec<Term>,
    pub vars: Vec<(String, Var)>,
}

impl Query {
    pub fn var_set(&self) -> BTreeSet<Var> {
        self.vars.iter().map(|(_, v)| v.clone()).collect()
    }
}

pub fn parse_program(text: &str, fresh: &VarGen) -> Result<Program> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0, fresh, scope: HashMap::new(), arities: BTreeMap::new() };
    let mut clauses = Vec::new();
    while !parser.at_end() {
        clauses.push(parser.clause()?);
    }
    let mut warnings = Vec::new();
    let program = Program { clauses, warnings: Vec::new() };
    if !program.clauses.is_empty() && !program.signature().iter().any(|s| s.arity() == 0) {
        warnings.push("signature has no constant (nullary symbol); Herbrand models are empty".into());
    }
    Ok(Program { warnings, ..program })
}

/// The query declared by a `% query: ...` comment line, if any.
pub fn declared_query(src: &str) -> Option<&str> {
    src.lines().find_map(|l| l.trim().strip_prefix('%').map(str::trim).and_then(|c| c.strip_prefix("query:")).map(str::trim))
}

/// Parse a comma-separated conjunction, optionally prefixed by `?-` and
/// terminated by `.`.
pub fn parse_query(text: &str, fresh: &VarGen) -> Result<Query> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0, fresh, scope: HashMap::new(), arities: BTreeMap::new() };
    if parser.peek_is(&Tok::Query) {
        parser.pos += 1;
    }
    let mut atoms = vec![parser.atom()?];
    while parser.peek_is(&Tok::Comma) {
        parser.pos += 1;
        atoms.push(parser.atom()?);
    }
    if parser.peek_is(&Tok::Dot) {
        parser.pos += 1;
    }
    if !parser.at_end() {
        return Err(parser.error("unexpected input after query"));
    }
    let mut vars: Vec<(String, Var)> = parser.scope.into_iter().collect();
    vars.sort_by_key(|(_, v)| v.id());
    Ok(Query { atoms, vars })
}

/// Parse a single term (variables are scoped to this call).
pub fn parse_term(text: &str, fresh: &VarGen) -> Result<Term> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0, fresh, scope: HashMap::new(), arities: BTreeMap::new() };
    let t = parser.term()?;
    if !parser.at_end() {
        return Err(parser.error("unexpected input after term"));
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    Var(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Bar,
    Comma,
    Dot,
    Neck,
    Query,
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let ident = |c: char| c.is_alphanumeric() || c == '_' || c == '\'';
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, column: col };
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                out.push((Tok::LParen, span));
                advance(1, &mut i, &mut col)
            }
            ')' => {
                out.push((Tok::RParen, span));
                advance(1, &mut i, &mut col)
            }
            '[' => {
                out.push((Tok::LBrack, span));
                advance(1, &mut i, &mut col)
            }
            ']' => {
                out.push((Tok::RBrack, span));
                advance(1, &mut i, &mut col)
            }
            '|' => {
                out.push((Tok::Bar, span));
                advance(1, &mut i, &mut col)
            }
            ',' => {
                out.push((Tok::Comma, span));
                advance(1, &mut i, &mut col)
            }
            '.' => {
                out.push((Tok::Dot, span));
                advance(1, &mut i, &mut col)
            }
            ':' if chars.get(i + 1) == Some(&'-') => {
                out.push((Tok::Neck, span));
                advance(2, &mut i, &mut col)
            }
            '?' if chars.get(i + 1) == Some(&'-') => {
                out.push((Tok::Query, span));
                advance(2, &mut i, &mut col)
            }
            c if c.is_ascii_lowercase() || c.is_ascii_digit() || c.is_uppercase() || c == '_' => {
                let start = i;
                while i < chars.len() && ident(chars[i]) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                col += i - start;
                let tok = if c.is_uppercase() || c == '_' { Tok::Var(word) } else { Tok::Name(word) };
                out.push((tok, span));
            }
            other => {
                return Err(Error::Parse { span, message: format!("unexpected character `{other}`") });
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, Span)>,
    pos: usize,
    fresh: &'a VarGen,
    scope: HashMap<String, Var>,
    arities: BTreeMap<String, (usize, Span)>,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn span(&self) -> Span {
        match self.tokens.get(self.pos) {
            Some((_, s)) => *s,
            None => self.tokens.last().map(|(_, s)| Span { line: s.line, column: s.column + 1 }).unwrap_or(Span { line: 1, column: 1 }),
        }
    }

    fn error(&self, message: &str) -> Error {
        let found = match self.tokens.get(self.pos) {
            Some((t, _)) => format!("{t:?}"),
            None => "end of input".into(),
        };
        Error::Parse { span: self.span(), message: format!("{message} (found {found})") }
    }

    fn peek_is(&self, t: &Tok) -> bool {
        matches!(self.tokens.get(self.pos), Some((x, _)) if x == t)
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek_is(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn clause(&mut self) -> Result<Clause> {
        self.scope.clear();
        let span = self.span();
        let head = self.atom()?;
        let mut body = Vec::new();
        if self.peek_is(&Tok::Neck) {
            self.pos += 1;
            body.push(self.atom()?);
            while self.peek_is(&Tok::Comma) {
                self.pos += 1;
                body.push(self.atom()?);
            }
        }
        self.expect(Tok::Dot, "`.` at end of clause")?;
        Ok(Clause { head, body, span })
    }

    fn atom(&mut self) -> Result<Term> {
        let span = self.span();
        let t = self.term()?;
        if t.as_var().is_some() {
            return Err(Error::Parse { span, message: "an atom cannot be a variable".into() });
        }
        Ok(t)
    }

    fn record_arity(&mut self, name: &str, arity: usize, span: Span) -> Result<()> {
        match self.arities.get(name) {
            Some(&(a, first)) if a != arity => Err(Error::ArityConflict {
                name: name.to_string(),
                first,
                first_arity: a,
                second: span,
                second_arity: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.arities.insert(name.to_string(), (arity, span));
                Ok(())
            }
        }
    }

    fn term(&mut self) -> Result<Term> {
        let span = self.span();
        match self.tokens.get(self.pos).cloned() {
            Some((Tok::Var(name), _)) => {
                self.pos += 1;
                if name == "_" {
                    return Ok(Term::Var(self.fresh.fresh(None)));
                }
                let fresh = self.fresh;
                let v = self.scope.entry(name.clone()).or_insert_with(|| fresh.fresh(Some(&name))).clone();
                Ok(Term::Var(v))
            }
            Some((Tok::Name(name), _)) => {
                self.pos += 1;
                let mut args = Vec::new();
                if self.peek_is(&Tok::LParen) {
                    self.pos += 1;
                    args.push(self.term()?);
                    while self.peek_is(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                }
                self.record_arity(&name, args.len(), span)?;
                Ok(Term::app(&name, args))
            }
            Some((Tok::LBrack, _)) => {
                self.pos += 1;
                if self.peek_is(&Tok::RBrack) {
                    self.pos += 1;
                    self.record_arity("nil", 0, span)?;
                    return Ok(Term::constant("nil"));
                }
                let mut items = vec![self.term()?];
                while self.peek_is(&Tok::Comma) {
                    self.pos += 1;
                    items.push(self.term()?);
                }
                let tail = if self.peek_is(&Tok::Bar) {
                    self.pos += 1;
                    self.term()?
                } else {
                    self.record_arity("nil", 0, span)?;
                    Term::constant("nil")
                };
                self.expect(Tok::RBrack, "`]`")?;
                self.record_arity("cons", 2, span)?;
                Ok(items.into_iter().rev().fold(tail, |acc, h| Term::app("cons", vec![h, acc])))
            }
            _ => Err(self.error("expected a term")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nat() {
        let g = VarGen::new();
        let p = parse_program("nat(0). nat(s(X)) :- nat(X).", &g).unwrap();
        assert_eq!(p.clauses.len(), 2);
        assert_eq!(p.clauses[1].to_string(), "nat(s(X)) :- nat(X).");
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn empty_program() {
        let p = parse_program("", &VarGen::new()).unwrap();
        assert!(p.clauses.is_empty());
    }

    #[test]
    fn unclosed_paren_is_located() {
        match parse_program("p(X) :- q(X", &VarGen::new()) {
            Err(Error::Parse { span, .. }) => assert_eq!(span, Span { line: 1, column: 12 }),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn arity_conflict_reports_both_spans() {
        match parse_program("p(a).\np(a, b).", &VarGen::new()) {
            Err(Error::ArityConflict { first, second, .. }) => {
                assert_eq!(first.line, 1);
                assert_eq!(second.line, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn list_sugar() {
        let g = VarGen::new();
        let t = parse_term("[a, b]", &g).unwrap();
        assert_eq!(t.to_string(), "cons(a, cons(b, nil))");
        let t = parse_term("[get(X)|In]", &g).unwrap();
        assert_eq!(t.to_string(), "cons(get(X), In)");
        assert_eq!(parse_term("[]", &g).unwrap().to_string(), "nil");
    }

    #[test]
    fn diamond_is_not_parseable() {
        assert!(parse_term("◇", &VarGen::new()).is_err());
    }

    #[test]
    fn variables_scoped_per_clause() {
        let g = VarGen::new();
        let p = parse_program("p(X). q(X).", &g).unwrap();
        assert_ne!(p.clauses[0].head.args()[0], p.clauses[1].head.args()[0]);
    }

    #[test]
    fn universality_examples() {
        let g = VarGen::new();
        let p = parse_program(
            "nat(0). nat(s(X)) :- nat(X). nats(scons(X,Y)) :- nat(X), nats(Y). p(Y) :- nats(X).",
            &g,
        )
        .unwrap();
        let r = check_universal(&p);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].clause_index, 3);
        let names: Vec<String> = r.violations[0].variables.iter().map(|v| v.to_string()).collect();
        assert_eq!(names, ["X"]);

        let fibs = parse_program(
            "add(0,Y,Y). add(s(X),Y,s(Z)) :- add(X,Y,Z). fibs(X,Y,[X|S]) :- add(X,Y,Z), fibs(Y,Z,S).",
            &g,
        )
        .unwrap();
        let r = check_universal(&fibs);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].variables[0].to_string(), "Z");

        let nats = parse_program("nat(0). nat(s(X)) :- nat(X). nats(scons(X,Y)) :- nat(X), nats(Y).", &g).unwrap();
        assert!(check_universal(&nats).is_universal());
    }

    #[test]
    fn clause_instances_are_fresh_variants() {
        let g = VarGen::new();
        let p = parse_program("nats(scons(X,Y)) :- nat(X), nats(Y).", &g).unwrap();
        let c = &p.clauses[0];
        let a = clause_instance(c, &g);
        let b = clause_instance(c, &g);
        assert!(a.variables().is_disjoint(&b.variables()));
        assert!(a.variables().is_disjoint(&c.variables()));
        let mut whole_a = vec![a.head.clone()];
        whole_a.extend(a.body.clone());
        let mut whole_c = vec![c.head.clone()];
        whole_c.extend(c.body.clone());
        assert!(crate::term::is_variant_seq(&whole_a, &whole_c));
    }

    #[test]
    fn query_parsing() {
        let g = VarGen::new();
        let q = parse_query("?- resource(X,Y), zeros(Y).", &g).unwrap();
        assert_eq!(q.atoms.len(), 2);
        let names: Vec<&str> = q.vars.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["X", "Y"]);
    }
}
