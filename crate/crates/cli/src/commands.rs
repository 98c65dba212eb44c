use std::fmt::Write as _;

use coresolve::productivity::DEFAULT_BOUND;
use coresolve::validation::{CorrespondenceReport, DEFAULT_DEPTH, DEFAULT_ROUNDS};
use coresolve::*;
use serde_json::json;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_LIMIT: u8 = 2;
pub const EXIT_USAGE: u8 = 3;
pub const EXIT_REFUSED: u8 = 4;

pub const TRACE_HEADER: &str = "coresolve-trace v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum EngineMode {
    Sld,
    S,
    Colp,
    Cos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum TraceFormat {
    Off,
    Text,
    Json,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: EngineMode,
    pub max_steps: usize,
    pub max_rewrite: usize,
    pub max_answers: usize,
    pub unfold_depth: usize,
    pub fair: bool,
    pub trace: TraceFormat,
    pub strict: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: EngineMode::Cos,
            max_steps: 10_000,
            max_rewrite: 64,
            max_answers: 1,
            unfold_depth: 0,
            fair: false,
            trace: TraceFormat::Off,
            strict: false,
        }
    }
}

impl RunConfig {
    fn limits(&self) -> Limits {
        Limits {
            max_steps: self.max_steps,
            max_rewrite_chain: self.max_rewrite,
            max_answers: self.max_answers,
            ..Limits::default()
        }
    }

    fn selector(&self) -> Selector {
        if self.fair {
            Selector::Fair
        } else {
            Selector::Leftmost
        }
    }
}

/// A loaded program together with its source, for commands that need the
/// declared query.
pub struct Session {
    pub src: String,
    pub program: Program,
    pub fresh: VarGen,
}

/// Text output plus the exit code it implies.
pub struct Outcome {
    pub out: String,
    pub err: String,
    pub code: u8,
}

impl Outcome {
    fn usage(msg: impl Into<String>) -> Self {
        let mut err = msg.into();
        err.push('\n');
        Outcome { out: String::new(), err, code: EXIT_USAGE }
    }
}

pub fn load(path: &str) -> Result<Session, String> {
    let src = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let fresh = VarGen::new();
    let program = parse_program(&src, &fresh).map_err(|e| format!("{path}: {e}"))?;
    Ok(Session { src, program, fresh })
}

impl Session {
    fn query(&self, text: Option<&str>) -> Result<Query, String> {
        let text = text.or_else(|| declared_query(&self.src)).ok_or("no query given and none declared in the file")?;
        parse_query(text, &self.fresh).map_err(|e| format!("query: {e}"))
    }
}

fn trace_block(tr: &Trace, fmt: TraceFormat, out: &mut String) {
    match fmt {
        TraceFormat::Off => {}
        TraceFormat::Text => {
            out.push_str(TRACE_HEADER);
            out.push('\n');
            out.push_str(&tr.to_text());
        }
        TraceFormat::Json => {
            let v = json!({ "format": TRACE_HEADER, "trace": tr.dump() });
            out.push_str(&serde_json::to_string(&v).expect("trace serializes"));
            out.push('\n');
        }
    }
}

fn answer_block(lines: &[String], out: &mut String) {
    if lines.is_empty() {
        out.push_str("true\n");
    }
    for l in lines {
        out.push_str(l);
        out.push('\n');
    }
}

fn status_code(found: bool, status: TraceStatus) -> u8 {
    match (found, status) {
        (true, _) => EXIT_OK,
        (false, TraceStatus::LimitExceeded) => EXIT_LIMIT,
        _ => EXIT_FAILED,
    }
}

fn status_notice(status: TraceStatus) -> &'static str {
    match status {
        TraceStatus::LimitExceeded => "no answer: limit exceeded\n",
        _ => "no answer: finite failure\n",
    }
}

pub fn run(s: &Session, query: Option<&str>, cfg: &RunConfig) -> Outcome {
    let q = match s.query(query) {
        Ok(q) => q,
        Err(e) => return Outcome::usage(e),
    };
    let mut out = String::new();
    let mut err = String::new();
    let limits = cfg.limits();
    match cfg.mode {
        EngineMode::Sld | EngineMode::S => {
            let mode = if cfg.mode == EngineMode::Sld { Mode::Sld } else { Mode::S };
            let r = refute(&s.program, &q.atoms, mode, cfg.selector(), &limits, &s.fresh);
            for (i, a) in r.answers.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                answer_block(&render_substitution(&a.substitution, &q.vars), &mut out);
                trace_block(&a.trace, cfg.trace, &mut out);
            }
            if r.answers.is_empty() {
                err.push_str(status_notice(r.status));
                if let Some(tr) = &r.cut {
                    trace_block(tr, cfg.trace, &mut out);
                }
            }
            Outcome { out, err, code: status_code(!r.answers.is_empty(), r.status) }
        }
        EngineMode::Colp | EngineMode::Cos => {
            let mode = if cfg.mode == EngineMode::Colp { CoMode::Colp } else { CoMode::Restricted };
            if mode == CoMode::Restricted && cfg.strict {
                let refusal = strict_refusal(s);
                if !refusal.is_empty() {
                    return Outcome { out, err: refusal, code: EXIT_REFUSED };
                }
            }
            let r = co_refute(&s.program, &q.atoms, mode, &limits, &s.fresh);
            for w in &r.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            for (i, a) in r.answers.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                answer_block(&render_answer(&a.store, &q.vars), &mut out);
                if cfg.unfold_depth > 0 && a.is_circular() {
                    for (name, v) in &q.vars {
                        let t = unfold(&a.substitution, &Term::Var(v.clone()), cfg.unfold_depth, &s.fresh);
                        let _ = writeln!(out, "{name} ~{} {}", cfg.unfold_depth, render_term(&t, &q.vars));
                    }
                }
                trace_block(&a.trace, cfg.trace, &mut out);
            }
            if r.answers.is_empty() {
                err.push_str(status_notice(r.status));
                if let Some(tr) = &r.cut {
                    trace_block(tr, cfg.trace, &mut out);
                }
            }
            Outcome { out, err, code: status_code(!r.answers.is_empty(), r.status) }
        }
    }
}

/// Prints unfolded terms with query variable names and canonical names for
/// the rest.
fn render_term(t: &Term, qvars: &[(String, Var)]) -> String {
    let mut names: Vec<(Var, String)> = qvars.iter().map(|(n, v)| (v.clone(), n.clone())).collect();
    let renamed = t.map_vars(&mut |v| {
        let name = match names.iter().find(|(w, _)| w == v) {
            Some((_, n)) => n.clone(),
            None => {
                let n = format!("_{}", names.len() - qvars.len());
                names.push((v.clone(), n.clone()));
                n
            }
        };
        Term::Var(Var::new(v.id(), Some(name.into())))
    });
    renamed.to_string()
}

fn strict_refusal(s: &Session) -> String {
    let mut msg = String::new();
    let u = check_universal(&s.program);
    if !u.is_universal() {
        let _ = write!(msg, "refused: program is not universal\n{u}");
    }
    let v = check_productive_default(&s.program, DEFAULT_BOUND, &s.fresh);
    if v.is_non_productive() {
        let _ = write!(msg, "refused: {v}");
    }
    msg
}

pub fn check(s: &Session, universal: bool, productive: bool, bound: usize) -> Outcome {
    let (universal, productive) = if universal || productive { (universal, productive) } else { (true, true) };
    let mut out = String::new();
    let mut code = EXIT_OK;
    if universal {
        let u = check_universal(&s.program);
        out.push_str(&u.to_string());
        if !u.is_universal() {
            code = EXIT_REFUSED;
        }
    }
    if productive {
        let v = check_productive_default(&s.program, bound, &s.fresh);
        out.push_str(&v.to_string());
        if !out.ends_with('\n') {
            out.push('\n');
        }
        if v.is_non_productive() {
            code = EXIT_REFUSED;
        }
    }
    Outcome { out, err: String::new(), code }
}

pub fn validate(s: &Session, query: Option<&str>, depth: Option<usize>, rounds: Option<usize>, json: bool) -> Outcome {
    let q = match s.query(query) {
        Ok(q) => q,
        Err(e) => return Outcome::usage(e),
    };
    let depth = depth.unwrap_or(DEFAULT_DEPTH);
    let rounds = rounds.unwrap_or(DEFAULT_ROUNDS);
    let rep = match check_theorem_5_1(&s.program, &q.atoms, depth, rounds, &Limits::default(), &s.fresh) {
        Ok(r) => r,
        Err(e) => return Outcome::usage(format!("cannot validate: {e}")),
    };
    let code = if rep.agrees() { EXIT_OK } else { EXIT_FAILED };
    let mut out = if json { report_json(&rep) } else { rep.to_string() };
    if !out.ends_with('\n') {
        out.push('\n');
    }
    Outcome { out, err: String::new(), code }
}

fn report_json(rep: &CorrespondenceReport) -> String {
    let rows: Vec<_> = rep
        .table
        .iter()
        .map(|r| json!({ "depth": r.depth, "partial": r.partial.to_string(), "unfolded": r.unfolded.to_string(), "equal": r.equal }))
        .collect();
    let rounds: Vec<_> = rep
        .rounds
        .iter()
        .map(|r| json!({ "loop": r.loop_index, "round": r.round, "equation": r.equation, "linkage": r.linkage }))
        .collect();
    let v = json!({
        "query": rep.query.to_string(),
        "theta": rep.theta.to_string(),
        "proxy": "unfolded co-S answer",
        "agrees": rep.agrees(),
        "table": rows,
        "rounds": rounds,
    });
    let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
    s.push('\n');
    s
}

pub fn oracle(s: &Session, cap: usize) -> Outcome {
    let set = lfp_enumerate(&s.program, cap);
    let mut lines: Vec<String> = set.atoms.iter().map(|a| a.to_string()).collect();
    lines.sort();
    let mut out = String::new();
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    let err = format!("{} atom(s) with argument depth at most {cap}\n", set.len());
    Outcome { out, err, code: EXIT_OK }
}
