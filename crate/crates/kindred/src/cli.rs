//! Command-line driver: `infer`, `check`, `oracle`, and `corpus run`.
//!
//! Exit codes: 0 on success, 1 for inference/oracle/corpus-mismatch
//! failures (diagnostic on stderr as `error[CODE] file:line:col: message`),
//! 2 for usage, parse, and corpus-format errors.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::diag::Diagnostic;
use crate::ghc_compat::{load_corpus, report_json, report_table, run_corpus};
use crate::h98::{run_h98_detailed, run_h98_stages};
use crate::kindcore::Kind;
use crate::oracle::{
    declarative_accepts, group_principal, group_satisfiable, PrincipalOutcome, MAX_DEPTH,
};
use crate::poly::run_poly_detailed;
use crate::surface::{parse_program, Mode, Program};

/// What one invocation produced.
#[derive(Debug, Clone, PartialEq)]
pub struct CliOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CliOutcome {
    fn ok(stdout: String, stderr: String) -> CliOutcome {
        CliOutcome { code: 0, stdout, stderr }
    }
}

const USAGE: &str = "\
usage: kindred <command> [options]

commands:
  infer --mode h98|poly [--emit kinds|elab|json] [--trace] FILE|-
      infer kinds and print them (or elaborated declarations, or JSON)
  check --mode h98|poly [--trace] FILE|-
      infer kinds; print nothing on success
  oracle [--depth N] FILE|-
      run the brute-force soundness/principality checks (h98 rules)
  corpus run PATH [--json OUT]
      run the divergence corpus and print the report

Setting KINDRED_TRACE=1 is equivalent to --trace. Trace output goes to
standard error as STEP lines.
";

#[derive(Serialize)]
struct JsonTyCon {
    name: String,
    kind: String,
}

#[derive(Serialize)]
struct JsonError {
    code: String,
    line: u32,
    col: u32,
    message: String,
}

#[derive(Serialize)]
struct JsonDoc {
    mode: String,
    tycons: Vec<JsonTyCon>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elab: Option<Vec<String>>,
    errors: Vec<JsonError>,
}

fn json_doc(
    mode: Mode,
    program: Option<(&Program, &BTreeMap<String, Kind>)>,
    elab: Option<Vec<String>>,
    error: Option<&Diagnostic>,
) -> String {
    let tycons = match program {
        Some((p, kinds)) => p
            .decls
            .iter()
            .map(|d| JsonTyCon {
                name: d.name.clone(),
                kind: kinds.get(&d.name).unwrap().to_string(),
            })
            .collect(),
        None => Vec::new(),
    };
    let errors = error
        .iter()
        .map(|d| JsonError {
            code: d.code.as_str().to_string(),
            line: d.pos.line,
            col: d.pos.col,
            message: d.message.clone(),
        })
        .collect();
    let doc = JsonDoc { mode: mode.to_string(), tycons, elab, errors };
    let mut text = serde_json::to_string(&doc).expect("serialization cannot fail");
    text.push('\n');
    text
}

fn usage_error(msg: impl Into<String>) -> CliOutcome {
    CliOutcome {
        code: 2,
        stdout: String::new(),
        stderr: format!("{}\n{USAGE}", msg.into()),
    }
}

struct Args<'a> {
    mode: Option<Mode>,
    emit: &'a str,
    trace: bool,
    depth: usize,
    json_out: Option<&'a str>,
    positional: Vec<&'a str>,
}

fn parse_flags<'a>(args: &'a [String]) -> Result<Args<'a>, CliOutcome> {
    let mut out = Args {
        mode: None,
        emit: "kinds",
        trace: std::env::var("KINDRED_TRACE").map(|v| v == "1").unwrap_or(false),
        depth: 2,
        json_out: None,
        positional: Vec::new(),
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--mode" => match it.next().map(String::as_str) {
                Some("h98") => out.mode = Some(Mode::H98),
                Some("poly") => out.mode = Some(Mode::Poly),
                Some(other) => {
                    return Err(usage_error(format!("unknown mode '{other}'")))
                }
                None => return Err(usage_error("--mode needs a value (h98|poly)")),
            },
            "--emit" => match it.next().map(String::as_str) {
                Some(e @ ("kinds" | "elab" | "json")) => {
                    out.emit = match e {
                        "kinds" => "kinds",
                        "elab" => "elab",
                        _ => "json",
                    }
                }
                Some(other) => {
                    return Err(usage_error(format!("unknown emit format '{other}'")))
                }
                None => return Err(usage_error("--emit needs a value (kinds|elab|json)")),
            },
            "--trace" => out.trace = true,
            "--depth" => match it.next().and_then(|v| v.parse::<usize>().ok()) {
                Some(d) if d <= MAX_DEPTH => out.depth = d,
                Some(d) => {
                    return Err(usage_error(format!(
                        "--depth {d} exceeds the maximum of {MAX_DEPTH}"
                    )))
                }
                None => return Err(usage_error("--depth needs a small integer")),
            },
            "--json" => match it.next() {
                Some(path) => out.json_out = Some(path.as_str()),
                None => return Err(usage_error("--json needs an output path")),
            },
            flag if flag.starts_with("--") => {
                return Err(usage_error(format!("unknown flag '{flag}'")))
            }
            positional => out.positional.push(positional),
        }
    }
    Ok(out)
}

fn read_input(
    file: &str,
    stdin: Option<&str>,
) -> Result<(String, String), CliOutcome> {
    if file == "-" {
        Ok((stdin.unwrap_or_default().to_string(), "<stdin>".to_string()))
    } else {
        match std::fs::read_to_string(file) {
            Ok(text) => Ok((text, file.to_string())),
            Err(e) => Err(usage_error(format!("cannot read '{file}': {e}"))),
        }
    }
}

enum RunResult {
    Ok {
        program: Program,
        kinds: BTreeMap<String, Kind>,
        elab: Option<Vec<String>>,
        trace: Vec<String>,
    },
    Failed {
        program: Program,
        error: Diagnostic,
    },
}

fn run_engine(program: Program, trace: bool) -> RunResult {
    match program.mode {
        Mode::H98 => match run_h98_detailed(&program, trace) {
            Ok(run) => RunResult::Ok {
                program,
                kinds: run.kinds,
                elab: None,
                trace: run.trace,
            },
            Err(error) => RunResult::Failed { program, error },
        },
        Mode::Poly => match run_poly_detailed(&program, trace) {
            Ok(run) => RunResult::Ok {
                program,
                kinds: run.kinds,
                elab: Some(run.elab.iter().map(|e| e.to_string()).collect()),
                trace: run.trace,
            },
            Err(error) => RunResult::Failed { program, error },
        },
    }
}

fn infer_or_check(args: &[String], stdin: Option<&str>, check_only: bool) -> CliOutcome {
    let flags = match parse_flags(args) {
        Ok(f) => f,
        Err(u) => return u,
    };
    let Some(mode) = flags.mode else {
        return usage_error("--mode h98|poly is required");
    };
    if check_only && flags.emit != "kinds" {
        return usage_error("check does not take --emit");
    }
    if flags.emit == "elab" && mode == Mode::H98 {
        return usage_error("--emit elab requires --mode poly");
    }
    let [file] = flags.positional.as_slice() else {
        return usage_error("expected exactly one input file (or '-')");
    };
    let (text, display) = match read_input(file, stdin) {
        Ok(t) => t,
        Err(u) => return u,
    };
    let program = match parse_program(&text, mode) {
        Ok(p) => p,
        Err(d) => {
            let stdout = if flags.emit == "json" {
                json_doc(mode, None, None, Some(&d))
            } else {
                String::new()
            };
            return CliOutcome {
                code: 2,
                stdout,
                stderr: format!("{}\n", d.render(&display)),
            };
        }
    };
    match run_engine(program, flags.trace) {
        RunResult::Ok { program, kinds, elab, trace } => {
            let mut stderr = String::new();
            for line in &trace {
                stderr.push_str(line);
                stderr.push('\n');
            }
            if check_only {
                return CliOutcome::ok(String::new(), stderr);
            }
            let stdout = match flags.emit {
                "kinds" => {
                    let mut out = String::new();
                    for d in &program.decls {
                        out.push_str(&format!(
                            "{} :: {}\n",
                            d.name,
                            kinds.get(&d.name).unwrap()
                        ));
                    }
                    out
                }
                "elab" => {
                    let mut out = String::new();
                    for line in elab.as_deref().unwrap_or_default() {
                        out.push_str(line);
                        out.push('\n');
                    }
                    out
                }
                _ => json_doc(program.mode, Some((&program, &kinds)), elab, None),
            };
            CliOutcome::ok(stdout, stderr)
        }
        RunResult::Failed { program, error } => {
            let stdout = if flags.emit == "json" {
                json_doc(program.mode, None, None, Some(&error))
            } else {
                String::new()
            };
            CliOutcome {
                code: 1,
                stdout,
                stderr: format!("{}\n", error.render(&display)),
            }
        }
    }
}

fn oracle_cmd(args: &[String], stdin: Option<&str>) -> CliOutcome {
    let flags = match parse_flags(args) {
        Ok(f) => f,
        Err(u) => return u,
    };
    let [file] = flags.positional.as_slice() else {
        return usage_error("expected exactly one input file (or '-')");
    };
    let (text, display) = match read_input(file, stdin) {
        Ok(t) => t,
        Err(u) => return u,
    };
    let program = match parse_program(&text, Mode::H98) {
        Ok(p) => p,
        Err(d) => {
            return CliOutcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("{}\n", d.render(&display)),
            }
        }
    };
    let depth = flags.depth;
    let fail = |msg: String| CliOutcome { code: 1, stdout: msg, stderr: String::new() };

    // Groups are judged in stages: completeness and principality for each
    // group hold relative to the closed (defaulted) kinds of earlier groups.
    let (stages, engine_err) = run_h98_stages(&program);
    let mut pinned: BTreeMap<String, Kind> = BTreeMap::new();
    for stage in &stages {
        match group_principal(&program, &stage.members, &pinned, &stage.schemes, depth) {
            Ok(PrincipalOutcome::Ok) => {}
            Ok(PrincipalOutcome::Counterexample(cx)) => {
                let rendered: Vec<String> =
                    cx.iter().map(|(n, k)| format!("{n} :: {k}")).collect();
                return fail(format!(
                    "oracle: FAIL principality: accepted non-instance {}\n",
                    rendered.join("; ")
                ));
            }
            Err(d) => {
                return CliOutcome {
                    code: 1,
                    stdout: String::new(),
                    stderr: format!("{}\n", d.render(&display)),
                }
            }
        }
        pinned.extend(stage.finals.clone());
    }
    match engine_err {
        None => {
            if !declarative_accepts(&program, &pinned) {
                return fail(
                    "oracle: FAIL soundness: the declarative rules reject the inferred kinds\n"
                        .to_string(),
                );
            }
            CliOutcome::ok(
                format!("oracle: OK (soundness and principality at depth {depth})\n"),
                String::new(),
            )
        }
        Some(err) => {
            // Completeness side: the rejected group must have no acceptable
            // assignment under the pinned prefix.
            let groups = match crate::deps::group_topo(&program) {
                Ok(g) => g,
                Err(d) => {
                    return fail(format!(
                        "oracle: OK (rejection confirmed: {})\n",
                        d.code
                    ))
                }
            };
            let failed = &groups[stages.len()];
            match group_satisfiable(&program, &failed.members, &pinned, depth) {
                Ok(false) => CliOutcome::ok(
                    format!(
                        "oracle: OK (rejection confirmed at depth {depth}: {})\n",
                        err.code
                    ),
                    String::new(),
                ),
                Ok(true) => fail(format!(
                    "oracle: FAIL completeness: inference rejected ({}) but a depth-{depth} \
                     assignment satisfies the group\n",
                    err.code
                )),
                Err(d) => CliOutcome {
                    code: 1,
                    stdout: String::new(),
                    stderr: format!("{}\n", d.render(&display)),
                },
            }
        }
    }
}

fn corpus_cmd(args: &[String]) -> CliOutcome {
    let Some(("run", rest)) = args.split_first().map(|(a, r)| (a.as_str(), r)) else {
        return usage_error("corpus supports one subcommand: run");
    };
    let flags = match parse_flags(rest) {
        Ok(f) => f,
        Err(u) => return u,
    };
    let [path] = flags.positional.as_slice() else {
        return usage_error("corpus run expects exactly one corpus file");
    };
    let cases = match load_corpus(Path::new(path)) {
        Ok(c) => c,
        Err(d) => {
            return CliOutcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("{}\n", d.render(path)),
            }
        }
    };
    let report = run_corpus(&cases);
    let table = report_table(&report);
    if let Some(out_path) = flags.json_out {
        if let Err(e) = std::fs::write(out_path, report_json(&report)) {
            return CliOutcome {
                code: 2,
                stdout: table,
                stderr: format!("cannot write '{out_path}': {e}\n"),
            };
        }
    }
    let code = if report.summary.spec_match == report.summary.total {
        0
    } else {
        1
    };
    CliOutcome { code, stdout: table, stderr: String::new() }
}

/// Entry point shared by the binary and the tests. `stdin` supplies the
/// program text when the file argument is `-`.
pub fn run_cli(args: &[String], stdin: Option<&str>) -> CliOutcome {
    let Some((cmd, rest)) = args.split_first() else {
        return usage_error("missing command");
    };
    match cmd.as_str() {
        "infer" => infer_or_check(rest, stdin, false),
        "check" => infer_or_check(rest, stdin, true),
        "oracle" => oracle_cmd(rest, stdin),
        "corpus" => corpus_cmd(rest),
        "--help" | "-h" | "help" => CliOutcome::ok(USAGE.to_string(), String::new()),
        other => usage_error(format!("unknown command '{other}'")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str], stdin: Option<&str>) -> CliOutcome {
        let owned: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        run_cli(&owned, stdin)
    }

    #[test]
    fn infer_from_stdin() {
        let out = cli(
            &["infer", "--mode", "h98", "-"],
            Some("data Maybe a = Nothing | Just a"),
        );
        assert_eq!(out.code, 0, "stderr: {}", out.stderr);
        assert_eq!(out.stdout, "Maybe :: * -> *\n");
    }

    #[test]
    fn infer_failure_exits_one_with_code_on_stderr() {
        let out = cli(&["infer", "--mode", "h98", "-"], Some("data T a = MkT (a a)"));
        assert_eq!(out.code, 1);
        assert!(out.stdout.is_empty());
        assert!(out.stderr.contains("error[OCCURS_CHECK]"));
        assert!(out.stderr.contains("<stdin>"));
    }

    #[test]
    fn bad_flag_exits_two_with_usage() {
        let out = cli(&["infer", "--badflag"], None);
        assert_eq!(out.code, 2);
        assert!(out.stderr.contains("usage:"));
    }

    #[test]
    fn parse_error_exits_two() {
        let out = cli(&["infer", "--mode", "h98", "-"], Some("data T a = MkT (a"));
        assert_eq!(out.code, 2);
        assert!(out.stderr.contains("error[PARSE_ERROR]"));
    }

    #[test]
    fn check_is_silent_on_success() {
        let out = cli(&["check", "--mode", "poly", "-"], Some("data P a = MkP"));
        assert_eq!(out.code, 0);
        assert!(out.stdout.is_empty());
    }

    #[test]
    fn emit_json_has_the_schema_fields() {
        let out = cli(
            &["infer", "--mode", "h98", "--emit", "json", "-"],
            Some("data Maybe a = Nothing | Just a"),
        );
        assert_eq!(out.code, 0);
        let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["mode"], "h98");
        assert_eq!(v["tycons"][0]["name"], "Maybe");
        assert_eq!(v["tycons"][0]["kind"], "* -> *");
        assert!(v["errors"].as_array().unwrap().is_empty());
        assert!(v.get("elab").is_none());
    }

    #[test]
    fn emit_json_reports_errors_in_band() {
        let out = cli(
            &["infer", "--mode", "h98", "--emit", "json", "-"],
            Some("data T a = MkT (a a)"),
        );
        assert_eq!(out.code, 1);
        let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["errors"][0]["code"], "OCCURS_CHECK");
        assert!(v["errors"][0]["line"].as_u64().unwrap() >= 1);
    }

    #[test]
    fn emit_elab_requires_poly() {
        let out = cli(&["infer", "--mode", "h98", "--emit", "elab", "-"], Some(""));
        assert_eq!(out.code, 2);

        let out = cli(
            &["infer", "--mode", "poly", "--emit", "elab", "-"],
            Some("data App f a = MkApp (f a)"),
        );
        assert_eq!(out.code, 0);
        assert_eq!(
            out.stdout,
            "data App @(k1 :: *) (f :: k1 -> *) (a :: k1) = MkApp (f a :: *)\n"
        );
    }

    #[test]
    fn oracle_verdicts() {
        let out = cli(&["oracle", "-"], Some("data App f a = MkApp (f a)"));
        assert_eq!(out.code, 0, "stderr: {}", out.stderr);
        assert_eq!(
            out.stdout,
            "oracle: OK (soundness and principality at depth 2)\n"
        );

        let out = cli(&["oracle", "-"], Some("data T a = MkT (a a)"));
        assert_eq!(out.code, 0);
        assert!(out.stdout.contains("rejection confirmed"));

        let out = cli(&["oracle", "--depth", "9", "-"], Some("data T"));
        assert_eq!(out.code, 2);
    }

    #[test]
    fn trace_goes_to_stderr() {
        let out = cli(
            &["infer", "--mode", "h98", "--trace", "-"],
            Some("data Maybe a = Nothing | Just a"),
        );
        assert_eq!(out.code, 0);
        assert_eq!(out.stdout, "Maybe :: * -> *\n");
        assert!(out.stderr.contains("STEP 0: "));
        assert!(out.stderr.contains("UNIFY"));
    }

    #[test]
    fn missing_mode_is_a_usage_error() {
        let out = cli(&["infer", "-"], Some("data T"));
        assert_eq!(out.code, 2);
    }
}
