//! Data-driven divergence corpus.
//!
//! Each case carries a source program, the outcome the inference rules here
//! require (`expect_spec`), and the documented GHC outcome (`expect_ghc`).
//! GHC behavior is data, never code: the harness runs the engine, compares
//! kinds alpha-insensitively, and reports where the two systems part ways.
//!
//! Corpus file format, one case per block:
//!
//! ```text
//! [case <id>]
//! mode = h98|poly
//! source = """
//! data T a = MkT a
//! """
//! expect_spec = accept T :: * -> *           (or: reject OCCURS_CHECK)
//! expect_ghc  = accept T :: * -> * | reject CODE | unspecified
//! note = "free text"
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diag::{Diagnostic, ErrorCode};
use crate::h98::run_h98;
use crate::kindcore::{alpha_eq, Kind};
use crate::poly::run_poly;
use crate::surface::{parse_kind, parse_program, Mode};

/// An expected or actual outcome: acceptance with per-tycon kinds, or
/// rejection with an error code.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Accept(Vec<(String, Kind)>),
    Reject(String),
}

impl Outcome {
    fn render(&self) -> String {
        match self {
            Outcome::Accept(kinds) => {
                let parts: Vec<String> =
                    kinds.iter().map(|(n, k)| format!("{n} :: {k}")).collect();
                format!("accept {}", parts.join("; "))
            }
            Outcome::Reject(code) => format!("reject {code}"),
        }
    }

    /// Alpha- and whitespace-insensitive comparison: kinds were parsed, so
    /// only their structure matters; rejections compare by code.
    fn matches(&self, other: &Outcome) -> bool {
        match (self, other) {
            (Outcome::Accept(a), Outcome::Accept(b)) => {
                a.len() == b.len()
                    && a.iter()
                        .all(|(n, k)| b.iter().any(|(n2, k2)| n == n2 && alpha_eq(k, k2)))
            }
            (Outcome::Reject(a), Outcome::Reject(b)) => a == b,
            _ => false,
        }
    }
}

/// The documented GHC outcome, when known.
#[derive(Debug, Clone, PartialEq)]
pub enum GhcExpectation {
    Known(Outcome),
    Unspecified,
}

/// One corpus case.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusCase {
    pub id: String,
    pub mode: Mode,
    pub source: String,
    pub expect_spec: Outcome,
    pub expect_ghc: GhcExpectation,
    pub note: String,
}

/// Three-valued divergence judgment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Divergence {
    Yes,
    No,
    Unknown,
}

/// Per-case result row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseResult {
    pub id: String,
    pub actual: String,
    pub spec_match: bool,
    pub ghc_divergence: Divergence,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub spec_match: usize,
    pub divergences: usize,
    pub unknown: usize,
}

/// The divergence report: one row per case (sorted by id) plus counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub cases: Vec<CaseResult>,
    pub summary: Summary,
}

fn format_err(line: usize, msg: impl Into<String>) -> Diagnostic {
    let mut d = Diagnostic::bare(ErrorCode::CorpusFormatError, msg);
    d.pos.line = line as u32;
    d
}

fn parse_outcome(value: &str, line: usize) -> Result<Outcome, Diagnostic> {
    if let Some(rest) = value.strip_prefix("accept") {
        let mut kinds = Vec::new();
        let rest = rest.trim();
        if rest.is_empty() {
            return Err(format_err(line, "'accept' needs at least one 'T :: kind'"));
        }
        for item in rest.split(';') {
            let item = item.trim();
            let (name, kind_text) = item.split_once("::").ok_or_else(|| {
                format_err(line, format!("expected 'Name :: kind', found '{item}'"))
            })?;
            let kind = parse_kind(kind_text.trim()).map_err(|e| {
                format_err(line, format!("bad kind for '{}': {}", name.trim(), e.message))
            })?;
            kinds.push((name.trim().to_string(), kind));
        }
        Ok(Outcome::Accept(kinds))
    } else if let Some(code) = value.strip_prefix("reject") {
        let code = code.trim();
        if code.is_empty()
            || !code
                .chars()
                .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
        {
            return Err(format_err(line, format!("bad error code '{code}'")));
        }
        Ok(Outcome::Reject(code.to_string()))
    } else {
        Err(format_err(
            line,
            format!("expected 'accept ...' or 'reject CODE', found '{value}'"),
        ))
    }
}

struct Partial {
    id: String,
    line: usize,
    mode: Option<Mode>,
    source: Option<String>,
    expect_spec: Option<Outcome>,
    expect_ghc: Option<GhcExpectation>,
    note: Option<String>,
}

fn finish(p: Partial) -> Result<CorpusCase, Diagnostic> {
    let missing =
        |field: &str| format_err(p.line, format!("case '{}' is missing '{field}'", p.id));
    let case = CorpusCase {
        mode: p.mode.ok_or_else(|| missing("mode"))?,
        source: p.source.ok_or_else(|| missing("source"))?,
        expect_spec: p.expect_spec.ok_or_else(|| missing("expect_spec"))?,
        expect_ghc: p.expect_ghc.ok_or_else(|| missing("expect_ghc"))?,
        note: p.note.unwrap_or_default(),
        id: p.id.clone(),
    };
    if matches!(case.expect_spec, Outcome::Accept(_)) {
        parse_program(&case.source, case.mode).map_err(|e| {
            format_err(
                p.line,
                format!(
                    "source of accept-case '{}' does not parse: {}",
                    case.id, e.message
                ),
            )
        })?;
    }
    Ok(case)
}

/// Parse corpus text. Cases are validated: unique ids, parseable expected
/// kinds, and (for accept cases) a source that parses in the stated mode.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusCase>, Diagnostic> {
    let mut cases: Vec<CorpusCase> = Vec::new();
    let mut ids = BTreeSet::new();
    let mut current: Option<Partial> = None;
    let mut lines = text.lines().enumerate().peekable();

    while let Some((i, raw)) = lines.next() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(header) = line.strip_prefix("[case") {
            let id = header
                .strip_suffix(']')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| format_err(lineno, "malformed case header"))?;
            if !ids.insert(id.to_string()) {
                return Err(format_err(lineno, format!("duplicate case id '{id}'")));
            }
            if let Some(prev) = current.take() {
                cases.push(finish(prev)?);
            }
            current = Some(Partial {
                id: id.to_string(),
                line: lineno,
                mode: None,
                source: None,
                expect_spec: None,
                expect_ghc: None,
                note: None,
            });
            continue;
        }
        let Some(part) = current.as_mut() else {
            return Err(format_err(lineno, "content before the first [case ...] header"));
        };
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| {
                format_err(lineno, format!("expected 'key = value', found '{line}'"))
            })?;
        match key {
            "mode" => {
                part.mode = Some(match value {
                    "h98" => Mode::H98,
                    "poly" => Mode::Poly,
                    other => return Err(format_err(lineno, format!("unknown mode '{other}'"))),
                });
            }
            "source" => {
                if let Some(rest) = value.strip_prefix("\"\"\"") {
                    if let Some(inline) = rest.strip_suffix("\"\"\"") {
                        part.source = Some(inline.to_string());
                    } else {
                        let mut body = String::new();
                        if !rest.is_empty() {
                            body.push_str(rest);
                            body.push('\n');
                        }
                        let mut closed = false;
                        for (_, src_line) in lines.by_ref() {
                            if src_line.trim() == "\"\"\"" {
                                closed = true;
                                break;
                            }
                            body.push_str(src_line);
                            body.push('\n');
                        }
                        if !closed {
                            return Err(format_err(lineno, "unterminated source block"));
                        }
                        part.source = Some(body);
                    }
                } else {
                    part.source = Some(value.to_string());
                }
            }
            "expect_spec" => part.expect_spec = Some(parse_outcome(value, lineno)?),
            "expect_ghc" => {
                part.expect_ghc = Some(if value == "unspecified" {
                    GhcExpectation::Unspecified
                } else {
                    GhcExpectation::Known(parse_outcome(value, lineno)?)
                });
            }
            "note" => {
                part.note = Some(value.trim_matches('"').to_string());
            }
            other => return Err(format_err(lineno, format!("unknown key '{other}'"))),
        }
    }
    if let Some(prev) = current.take() {
        cases.push(finish(prev)?);
    }
    Ok(cases)
}

/// Load and validate a corpus file.
pub fn load_corpus(path: &Path) -> Result<Vec<CorpusCase>, Diagnostic> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Diagnostic::bare(
            ErrorCode::CorpusFormatError,
            format!("cannot read '{}': {e}", path.display()),
        )
    })?;
    parse_corpus(&text)
}

/// Run one case through the engine for its mode.
pub fn run_case(case: &CorpusCase) -> Outcome {
    let program = match parse_program(&case.source, case.mode) {
        Ok(p) => p,
        Err(d) => return Outcome::Reject(d.code.as_str().to_string()),
    };
    let kinds = match case.mode {
        Mode::H98 => run_h98(&program),
        Mode::Poly => run_poly(&program).map(|(k, _)| k),
    };
    match kinds {
        Ok(map) => Outcome::Accept(
            program
                .decls
                .iter()
                .map(|d| (d.name.clone(), map.get(&d.name).unwrap().clone()))
                .collect(),
        ),
        Err(d) => Outcome::Reject(d.code.as_str().to_string()),
    }
}

/// Execute every case and assemble the report (rows sorted by id). Failures
/// are recorded per case and never abort the run.
pub fn run_corpus(cases: &[CorpusCase]) -> Report {
    let mut rows: Vec<CaseResult> = cases
        .iter()
        .map(|case| {
            let actual = run_case(case);
            let spec_match = case.expect_spec.matches(&actual);
            let ghc_divergence = match &case.expect_ghc {
                GhcExpectation::Unspecified => Divergence::Unknown,
                GhcExpectation::Known(expected) => {
                    if expected.matches(&actual) {
                        Divergence::No
                    } else {
                        Divergence::Yes
                    }
                }
            };
            CaseResult {
                id: case.id.clone(),
                actual: actual.render(),
                spec_match,
                ghc_divergence,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    let summary = Summary {
        total: rows.len(),
        spec_match: rows.iter().filter(|r| r.spec_match).count(),
        divergences: rows
            .iter()
            .filter(|r| r.ghc_divergence == Divergence::Yes)
            .count(),
        unknown: rows
            .iter()
            .filter(|r| r.ghc_divergence == Divergence::Unknown)
            .count(),
    };
    Report { cases: rows, summary }
}

/// Machine-readable report.
pub fn report_json(report: &Report) -> String {
    serde_json::to_string(report).expect("report serialization cannot fail")
}

/// Human-readable table.
pub fn report_table(report: &Report) -> String {
    let id_width = report
        .cases
        .iter()
        .map(|c| c.id.len())
        .chain(std::iter::once(4))
        .max()
        .unwrap();
    let mut out = String::new();
    let _ = writeln!(out, "{:<id_width$}  {:<10}  {:<9}  actual", "case", "spec", "ghc-div");
    for c in &report.cases {
        let spec = if c.spec_match { "match" } else { "MISMATCH" };
        let div = match c.ghc_divergence {
            Divergence::Yes => "yes",
            Divergence::No => "no",
            Divergence::Unknown => "unknown",
        };
        let _ = writeln!(out, "{:<id_width$}  {:<10}  {:<9}  {}", c.id, spec, div, c.actual);
    }
    let s = &report.summary;
    let _ = writeln!(
        out,
        "{} cases: {} spec-match, {} divergences, {} unknown",
        s.total, s.spec_match, s.divergences, s.unknown
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_corpus_parses() {
        assert!(parse_corpus("").unwrap().is_empty());
        assert!(parse_corpus("# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn one_well_formed_case() {
        let text = r#"
[case maybe]
mode = h98
source = """data Maybe a = Nothing | Just a"""
expect_spec = accept Maybe :: * -> *
expect_ghc = accept Maybe :: * -> *
note = "basic container"
"#;
        let cases = parse_corpus(text).unwrap();
        assert_eq!(cases.len(), 1);
        assert_eq!(cases[0].id, "maybe");
        assert_eq!(cases[0].mode, Mode::H98);
        assert_eq!(cases[0].note, "basic container");
    }

    #[test]
    fn duplicate_id_is_a_format_error() {
        let text = "[case a]\nmode = h98\nsource = \"\"\"data T\"\"\"\n\
                    expect_spec = accept T :: *\nexpect_ghc = unspecified\n\
                    [case a]\nmode = h98\nsource = \"\"\"data S\"\"\"\n\
                    expect_spec = accept S :: *\nexpect_ghc = unspecified\n";
        let err = parse_corpus(text).unwrap_err();
        assert_eq!(err.code, ErrorCode::CorpusFormatError);
        assert!(err.message.contains("duplicate"));
    }

    #[test]
    fn missing_field_and_bad_source_are_reported() {
        let text =
            "[case a]\nmode = h98\nexpect_spec = accept T :: *\nexpect_ghc = unspecified\n";
        assert!(parse_corpus(text).unwrap_err().message.contains("source"));

        let text = "[case a]\nmode = h98\nsource = \"\"\"data data\"\"\"\n\
                    expect_spec = accept T :: *\nexpect_ghc = unspecified\n";
        assert!(parse_corpus(text)
            .unwrap_err()
            .message
            .contains("does not parse"));
    }

    #[test]
    fn multiline_source_blocks() {
        let text = "[case two]\nmode = h98\nsource = \"\"\"\ndata A = MkA B\ndata B = MkB\n\"\"\"\n\
                    expect_spec = accept A :: *; B :: *\nexpect_ghc = accept A :: *; B :: *\n";
        let cases = parse_corpus(text).unwrap();
        assert_eq!(cases[0].source, "data A = MkA B\ndata B = MkB\n");
        let report = run_corpus(&cases);
        assert!(report.cases[0].spec_match);
        assert_eq!(report.cases[0].ghc_divergence, Divergence::No);
    }

    #[test]
    fn spec_match_and_divergence_judgments() {
        let text = r#"
[case agree]
mode = h98
source = """data Maybe a = Nothing | Just a"""
expect_spec = accept Maybe :: * -> *
expect_ghc = accept Maybe :: * -> *

[case unknown_ghc]
mode = h98
source = """data P a = MkP"""
expect_spec = accept P :: * -> *
expect_ghc = unspecified

[case ghc_differs]
mode = h98
source = """data T a = MkT (a a)"""
expect_spec = reject OCCURS_CHECK
expect_ghc = accept T :: * -> *
"#;
        let cases = parse_corpus(text).unwrap();
        let report = run_corpus(&cases);
        // Rows are sorted by id: agree, ghc_differs, unknown_ghc.
        assert_eq!(report.cases[0].id, "agree");
        assert!(report.cases[0].spec_match);
        assert_eq!(report.cases[0].ghc_divergence, Divergence::No);
        assert_eq!(report.cases[1].id, "ghc_differs");
        assert!(report.cases[1].spec_match);
        assert_eq!(report.cases[1].ghc_divergence, Divergence::Yes);
        assert_eq!(report.cases[2].id, "unknown_ghc");
        assert_eq!(report.cases[2].ghc_divergence, Divergence::Unknown);
        assert_eq!(report.summary.total, 3);
        assert_eq!(report.summary.spec_match, 3);
        assert_eq!(report.summary.divergences, 1);
        assert_eq!(report.summary.unknown, 1);

        let json = report_json(&report);
        let parsed: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.summary.total, 3);
    }

    #[test]
    fn kind_comparison_is_alpha_insensitive() {
        let text = "[case alpha]\nmode = poly\nsource = \"\"\"data P a = MkP\"\"\"\n\
                    expect_spec = accept P :: forall j. j -> *\n\
                    expect_ghc = unspecified\n";
        let cases = parse_corpus(text).unwrap();
        let report = run_corpus(&cases);
        assert!(
            report.cases[0].spec_match,
            "forall j and forall k1 must compare equal"
        );
    }
}
