//! End-to-end tests against the compiled binary: real process exit codes,
//! stdin piping, file arguments, the KINDRED_TRACE environment variable,
//! and the corpus subcommand's JSON output file.

use std::io::Write;
use std::process::{Command, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kindred"))
}

fn run_with_stdin(args: &[&str], stdin: &str, envs: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = bin();
    cmd.args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().expect("binary spawns");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn infer_file_argument() {
    let dir = std::env::temp_dir().join("kindred-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("maybe.dat");
    std::fs::write(&file, "data Maybe a = Nothing | Just a\n").unwrap();
    let out = bin()
        .args(["infer", "--mode", "h98", file.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "Maybe :: * -> *\n");
}

#[test]
fn missing_file_is_a_usage_error() {
    let out = bin()
        .args(["infer", "--mode", "h98", "/nonexistent/kindred-no-such-file"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn occurs_check_exit_code_through_the_binary() {
    let (code, stdout, stderr) =
        run_with_stdin(&["infer", "--mode", "h98", "-"], "data T a = MkT (a a)", &[]);
    assert_eq!(code, 1);
    assert!(stdout.is_empty());
    assert!(stderr.contains("error[OCCURS_CHECK]"));
}

#[test]
fn trace_env_var_matches_flag() {
    let src = "data Maybe a = Nothing | Just a";
    let (code_flag, out_flag, err_flag) =
        run_with_stdin(&["infer", "--mode", "h98", "--trace", "-"], src, &[]);
    let (code_env, out_env, err_env) = run_with_stdin(
        &["infer", "--mode", "h98", "-"],
        src,
        &[("KINDRED_TRACE", "1")],
    );
    assert_eq!(code_flag, 0);
    assert_eq!(code_env, 0);
    assert_eq!(out_flag, out_env);
    assert_eq!(err_flag, err_env);
    assert!(err_env.contains("STEP 0: "));
    // Any other value leaves tracing off.
    let (_, _, err_off) = run_with_stdin(
        &["infer", "--mode", "h98", "-"],
        src,
        &[("KINDRED_TRACE", "0")],
    );
    assert!(err_off.is_empty());
}

#[test]
fn corpus_run_writes_the_json_report() {
    let corpus = format!("{}/corpus/ghc.corpus", env!("CARGO_MANIFEST_DIR"));
    let dir = std::env::temp_dir().join("kindred-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let json_path = dir.join("report.json");
    let out = bin()
        .args(["corpus", "run", &corpus, "--json", json_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "corpus must spec-match");
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("spec-match"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert!(json["summary"]["total"].as_u64().unwrap() >= 20);
    assert_eq!(
        json["summary"]["total"],
        json["summary"]["spec_match"],
        "shipped corpus must fully match"
    );
}

#[test]
fn corpus_mismatch_exits_one() {
    let dir = std::env::temp_dir().join("kindred-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.corpus");
    std::fs::write(
        &bad,
        "[case wrong]\nmode = h98\nsource = \"\"\"data P a = MkP\"\"\"\n\
         expect_spec = accept P :: *\nexpect_ghc = unspecified\n",
    )
    .unwrap();
    let out = bin()
        .args(["corpus", "run", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("MISMATCH"));
}

#[test]
fn corpus_format_error_exits_two() {
    let dir = std::env::temp_dir().join("kindred-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("broken.corpus");
    std::fs::write(&bad, "mode = h98\n").unwrap();
    let out = bin()
        .args(["corpus", "run", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("error[CORPUS_FORMAT_ERROR]"));
}

#[test]
fn oracle_through_the_binary() {
    let (code, stdout, _) =
        run_with_stdin(&["oracle", "--depth", "2", "-"], "data App f a = MkApp (f a)", &[]);
    assert_eq!(code, 0);
    assert_eq!(stdout, "oracle: OK (soundness and principality at depth 2)\n");
}

#[test]
fn help_prints_usage() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("usage: kindred"));
}
