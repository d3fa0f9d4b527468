//! Batch command-line front end: `check`, `run`, and `effects`.
//!
//! Results go to standard output, diagnostics to standard error. Exit
//! codes: 0 success, 1 diagnostics, 2 usage or I/O error, 3 stuck or
//! out of fuel, 4 monitor violation.

use crate::classtable::{build_table, ClassTable};
use crate::diag::Diagnostic;
use crate::interp::{eval, has_violation, monitored_eval, EvalOutcome};
use crate::relations::effect_graph;
use crate::syntax::{parse_program, print_expr, Effect, Program};
use crate::typecheck::check_program;
use std::fmt::Write;

pub const DEFAULT_FUEL: u64 = 100_000;

/// Options for `run`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub fuel: u64,
    pub trace: bool,
    pub monitor: bool,
    pub unchecked: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            fuel: DEFAULT_FUEL,
            trace: false,
            monitor: false,
            unchecked: false,
        }
    }
}

/// Everything a command produced; `main` prints and exits with `code`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CmdResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CmdResult {
    fn usage_error(msg: &str) -> CmdResult {
        CmdResult {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {msg}\n{USAGE}"),
        }
    }

    fn diagnostics(file: &str, source: &str, diags: &[Diagnostic]) -> CmdResult {
        let mut stderr = String::new();
        for d in diags {
            let _ = writeln!(stderr, "{}", d.render(file, source));
        }
        CmdResult {
            code: 1,
            stdout: String::new(),
            stderr,
        }
    }
}

pub const USAGE: &str = "usage: callee <command> [options]

commands:
  check FILE                 parse and type-check FILE
  run FILE [--fuel N] [--trace] [--monitor] [--unchecked]
                             evaluate FILE's main expression
  effects FILE [--dot]       print the effect annotation graph

exit codes: 0 ok, 1 diagnostics, 2 usage or I/O error,
            3 stuck or out of fuel, 4 monitor violation
";

enum Loaded {
    Ok(String, Program, ClassTable),
    Failed(CmdResult),
}

fn load(path: &str) -> Loaded {
    let source = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            return Loaded::Failed(CmdResult {
                code: 2,
                stdout: String::new(),
                stderr: format!("error: {path}: {e}\n"),
            })
        }
    };
    let program = match parse_program(&source) {
        Ok(p) => p,
        Err(diags) => return Loaded::Failed(CmdResult::diagnostics(path, &source, &diags)),
    };
    let table = match build_table(&program) {
        Ok(t) => t,
        Err(diags) => return Loaded::Failed(CmdResult::diagnostics(path, &source, &diags)),
    };
    Loaded::Ok(source, program, table)
}

/// Type-checks a file; silent on success.
pub fn cmd_check(path: &str) -> CmdResult {
    let (source, program, table) = match load(path) {
        Loaded::Ok(s, p, t) => (s, p, t),
        Loaded::Failed(r) => return r,
    };
    let diags = check_program(&table, &program);
    if diags.is_empty() {
        CmdResult::default()
    } else {
        CmdResult::diagnostics(path, &source, &diags)
    }
}

/// Evaluates a file's main expression, optionally monitored, printing
/// the final value in canonical form.
pub fn cmd_run(path: &str, config: &RunConfig) -> CmdResult {
    let (source, program, table) = match load(path) {
        Loaded::Ok(s, p, t) => (s, p, t),
        Loaded::Failed(r) => return r,
    };
    if !config.unchecked {
        let diags = check_program(&table, &program);
        if !diags.is_empty() {
            return CmdResult::diagnostics(path, &source, &diags);
        }
    }
    let Some(main) = &program.main else {
        return CmdResult {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {path}: no main expression\n"),
        };
    };
    let (outcome, events) = if config.monitor {
        monitored_eval(&table, main, &[Effect::Wildcard], config.fuel)
    } else {
        eval(&table, main, config.fuel)
    };
    let mut stdout = String::new();
    if config.trace {
        for ev in &events {
            let _ = writeln!(stdout, "{}", ev.render());
        }
    }
    let mut stderr = String::new();
    let mut code = match outcome {
        EvalOutcome::Value(v) => {
            let _ = writeln!(stdout, "{}", print_expr(&v.to_expr()));
            0
        }
        EvalOutcome::Stuck(msg) => {
            let _ = writeln!(stderr, "error: stuck: {msg}");
            3
        }
        EvalOutcome::OutOfFuel => {
            let _ = writeln!(stderr, "error: out of fuel after {} step(s)", config.fuel);
            3
        }
    };
    if has_violation(&events) {
        code = 4;
    }
    CmdResult {
        code,
        stdout,
        stderr,
    }
}

/// Prints each method with its annotation, or the DOT graph with
/// `--dot`. The file must check cleanly first.
pub fn cmd_effects(path: &str, dot: bool) -> CmdResult {
    let (source, program, table) = match load(path) {
        Loaded::Ok(s, p, t) => (s, p, t),
        Loaded::Failed(r) => return r,
    };
    let diags = check_program(&table, &program);
    if !diags.is_empty() {
        return CmdResult::diagnostics(path, &source, &diags);
    }
    let graph = effect_graph(&table);
    CmdResult {
        code: 0,
        stdout: if dot { graph.to_dot() } else { graph.listing() },
        stderr: String::new(),
    }
}

/// Parses command-line arguments (without the program name) and runs
/// the selected command.
pub fn dispatch(args: &[String]) -> CmdResult {
    let mut it = args.iter();
    let Some(command) = it.next() else {
        return CmdResult::usage_error("missing command");
    };
    match command.as_str() {
        "check" => {
            let rest: Vec<&String> = it.collect();
            match rest.as_slice() {
                [file] => cmd_check(file),
                _ => CmdResult::usage_error("`check` takes exactly one file"),
            }
        }
        "run" => {
            let mut file = None;
            let mut config = RunConfig::default();
            let rest: Vec<&String> = it.collect();
            let mut i = 0;
            while i < rest.len() {
                match rest[i].as_str() {
                    "--trace" => config.trace = true,
                    "--monitor" => config.monitor = true,
                    "--unchecked" => config.unchecked = true,
                    "--fuel" => {
                        i += 1;
                        let Some(raw) = rest.get(i) else {
                            return CmdResult::usage_error("`--fuel` needs a value");
                        };
                        match raw.parse::<u64>() {
                            Ok(n) if n >= 1 => config.fuel = n,
                            _ => {
                                return CmdResult::usage_error("`--fuel` needs a positive integer")
                            }
                        }
                    }
                    flag if flag.starts_with("--") => {
                        return CmdResult::usage_error(&format!("unknown flag `{flag}`"))
                    }
                    f => {
                        if file.replace(f.to_string()).is_some() {
                            return CmdResult::usage_error("`run` takes exactly one file");
                        }
                    }
                }
                i += 1;
            }
            match file {
                Some(f) => cmd_run(&f, &config),
                None => CmdResult::usage_error("`run` needs a file"),
            }
        }
        "effects" => {
            let mut file = None;
            let mut dot = false;
            for a in it {
                match a.as_str() {
                    "--dot" => dot = true,
                    flag if flag.starts_with("--") => {
                        return CmdResult::usage_error(&format!("unknown flag `{flag}`"))
                    }
                    f => {
                        if file.replace(f.to_string()).is_some() {
                            return CmdResult::usage_error("`effects` takes exactly one file");
                        }
                    }
                }
            }
            match file {
                Some(f) => cmd_effects(&f, dot),
                None => CmdResult::usage_error("`effects` needs a file"),
            }
        }
        other => CmdResult::usage_error(&format!("unknown command `{other}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_file_is_exit_2() {
        let r = cmd_check("definitely/not/here.cle");
        assert_eq!(r.code, 2);
        assert!(r.stdout.is_empty());
        assert!(r.stderr.starts_with("error: definitely/not/here.cle"));
    }

    #[test]
    fn unknown_command_is_usage_error() {
        let r = dispatch(&["frobnicate".to_string()]);
        assert_eq!(r.code, 2);
        assert!(r.stderr.contains("usage:"));
    }

    #[test]
    fn fuel_must_be_positive() {
        let r = dispatch(&[
            "run".to_string(),
            "f.cle".to_string(),
            "--fuel".to_string(),
            "0".to_string(),
        ]);
        assert_eq!(r.code, 2);
    }
}
