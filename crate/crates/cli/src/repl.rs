use std::io::{self, BufRead, IsTerminal, Write};

use clap::ValueEnum;
use coresolve::productivity::DEFAULT_BOUND;

use crate::commands::{self, EngineMode, RunConfig, Session, TraceFormat};

const HELP: &str = "\
queries:   ?- goal, goal.   (the `?-` is optional)
:set mode sld|s|colp|cos     :set max-steps N    :set max-rewrite N
:set max-answers K           :set unfold-depth D :set fair on|off
:set trace off|text|json     :set strict on|off
:check universal|productive  :show   :help   :quit
";

fn flag(v: &str) -> Result<bool, String> {
    match v {
        "on" | "true" | "yes" => Ok(true),
        "off" | "false" | "no" => Ok(false),
        _ => Err(format!("expected on or off, got `{v}`")),
    }
}

fn number(v: &str) -> Result<usize, String> {
    match v.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive number, got `{v}`")),
    }
}

fn set(cfg: &mut RunConfig, key: &str, value: &str) -> Result<(), String> {
    match key {
        "mode" => cfg.mode = EngineMode::from_str(value, true)?,
        "trace" => cfg.trace = TraceFormat::from_str(value, true)?,
        "max-steps" => cfg.max_steps = number(value)?,
        "max-rewrite" => cfg.max_rewrite = number(value)?,
        "max-answers" => cfg.max_answers = number(value)?,
        "unfold-depth" => cfg.unfold_depth = value.parse().map_err(|_| format!("bad depth `{value}`"))?,
        "fair" => cfg.fair = flag(value)?,
        "strict" => cfg.strict = flag(value)?,
        _ => return Err(format!("unknown setting `{key}`")),
    }
    Ok(())
}

/// Handles one input line. Returns false when the session should end.
fn line(s: &Session, cfg: &mut RunConfig, input: &str, out: &mut impl Write) -> io::Result<bool> {
    let input = input.trim();
    if input.is_empty() || input.starts_with('%') {
        return Ok(true);
    }
    let Some(cmd) = input.strip_prefix(':') else {
        let o = commands::run(s, Some(input), cfg);
        write!(out, "{}{}", o.out, o.err)?;
        return Ok(true);
    };
    let words: Vec<&str> = cmd.split_whitespace().collect();
    match words.as_slice() {
        ["quit"] | ["q"] | ["exit"] => return Ok(false),
        ["help"] => write!(out, "{HELP}")?,
        ["show"] => writeln!(out, "{cfg:?}")?,
        ["set", key, value] => match set(cfg, key, value) {
            Ok(()) => {}
            Err(e) => writeln!(out, "error: {e}")?,
        },
        ["check", which] if *which == "universal" || *which == "productive" => {
            let o = commands::check(s, *which == "universal", *which == "productive", DEFAULT_BOUND);
            write!(out, "{}", o.out)?;
        }
        _ => writeln!(out, "error: unknown command `:{cmd}` (try :help)")?,
    }
    Ok(true)
}

pub fn repl(s: &Session, cfg: RunConfig) -> io::Result<()> {
    let mut cfg = cfg;
    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    let mut out = io::stdout().lock();
    let mut input = stdin.lock();
    let mut buf = String::new();
    loop {
        if interactive {
            write!(out, "?- ")?;
            out.flush()?;
        }
        buf.clear();
        if input.read_line(&mut buf)? == 0 {
            return Ok(());
        }
        let text = buf.trim().trim_start_matches("?-");
        if !line(s, &mut cfg, text, &mut out)? {
            return Ok(());
        }
    }
}
