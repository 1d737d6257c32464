//! Exact-string golden tests for the CLI surfaces: kind output, elaborated
//! declarations, JSON documents, diagnostics, and the trace format.

use kindred::cli::run_cli;

fn cli(args: &[&str], stdin: Option<&str>) -> kindred::cli::CliOutcome {
    let owned: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    run_cli(&owned, stdin)
}

fn check_stdout(args: &[&str], stdin: &str, golden: &str) {
    let out = cli(args, Some(stdin));
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert_eq!(out.stdout, golden);
}

#[test]
fn golden_app_h98_kinds() {
    check_stdout(
        &["infer", "--mode", "h98", "-"],
        "data App f a = MkApp (f a)",
        include_str!("golden/app_h98_kinds.txt"),
    );
}

#[test]
fn golden_app_poly_kinds() {
    check_stdout(
        &["infer", "--mode", "poly", "-"],
        "data App f a = MkApp (f a)",
        include_str!("golden/app_poly_kinds.txt"),
    );
}

#[test]
fn golden_proxy_poly_kinds() {
    check_stdout(
        &["infer", "--mode", "poly", "-"],
        "data Proxy a = MkProxy",
        include_str!("golden/proxy_poly_kinds.txt"),
    );
}

#[test]
fn golden_compose_poly_kinds() {
    check_stdout(
        &["infer", "--mode", "poly", "-"],
        "data Compose f g a = MkCompose (f (g a))",
        include_str!("golden/compose_poly_kinds.txt"),
    );
}

#[test]
fn golden_app_elaboration() {
    check_stdout(
        &["infer", "--mode", "poly", "--emit", "elab", "-"],
        "data App f a = MkApp (f a)",
        include_str!("golden/app_poly_elab.txt"),
    );
}

#[test]
fn golden_signature_elaboration() {
    check_stdout(
        &["infer", "--mode", "poly", "--emit", "elab", "-"],
        "sig P :: forall k. k -> *\ndata P a = MkP\ndata W f a = MkW (f a) (P f)",
        include_str!("golden/sig_elab.txt"),
    );
}

#[test]
fn golden_json_document() {
    check_stdout(
        &["infer", "--mode", "h98", "--emit", "json", "-"],
        "data App f a = MkApp (f a)",
        include_str!("golden/app_h98_json.txt"),
    );
}

#[test]
fn golden_occurs_check_diagnostics() {
    for (mode, golden) in [
        ("h98", include_str!("golden/selfapp_h98_stderr.txt")),
        ("poly", include_str!("golden/selfapp_poly_stderr.txt")),
    ] {
        let out = cli(&["infer", "--mode", mode, "-"], Some("data T a = MkT (a a)"));
        assert_eq!(out.code, 1);
        assert!(out.stdout.is_empty());
        assert_eq!(out.stderr, golden, "mode {mode}");
    }
}

#[test]
fn golden_trace_format() {
    let out = cli(
        &["infer", "--mode", "h98", "--trace", "-"],
        Some("data Maybe a = Nothing | Just a"),
    );
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout, "Maybe :: * -> *\n");
    assert_eq!(out.stderr, include_str!("golden/maybe_trace.txt"));
}

#[test]
fn golden_pretty_canonical_layout() {
    // Messy but legal input normalizes to the canonical layout.
    let src = "sig  P::forall k.k->*;data P (a::k)=MkP;data T f a=MkT (f a) (forall b. b->a)";
    let p = kindred::surface::parse_program(src, kindred::surface::Mode::Poly).unwrap();
    assert_eq!(
        kindred::surface::pretty_program(&p),
        "sig P :: forall k. k -> *\n\
         data P (a :: k) = MkP\n\
         data T f a = MkT (f a) (forall b. b -> a)\n"
    );
}
