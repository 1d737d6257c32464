//! Surface syntax: datatype declarations, standalone kind signatures, and
//! the deterministic pretty-printer.
//!
//! Structural equality on AST nodes ignores source positions, so a program
//! compares equal to the result of pretty-printing and reparsing it.

mod lexer;
mod parser;

use std::fmt;

use crate::diag::{Diagnostic, Pos};
use crate::kindcore::Kind;

pub use parser::{parse_kind, parse_program};

/// Which inference system the source is written for. Poly mode adds
/// standalone signatures, kind-annotated binders, `forall` types, and
/// kind annotations on types.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    H98,
    Poly,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::H98 => f.write_str("h98"),
            Mode::Poly => f.write_str("poly"),
        }
    }
}

/// A type expression node.
#[derive(Debug, Clone)]
pub enum TyNode {
    Var(String),
    TyCon(String),
    App(Box<SurfaceType>, Box<SurfaceType>),
    Arrow(Box<SurfaceType>, Box<SurfaceType>),
    /// `forall a. t` — poly mode only.
    Forall(String, Box<SurfaceType>),
    /// `(t :: k)` — poly mode only.
    Annot(Box<SurfaceType>, Kind),
}

/// A type expression with its source position.
#[derive(Debug, Clone)]
pub struct SurfaceType {
    pub node: TyNode,
    pub pos: Pos,
}

impl SurfaceType {
    pub fn new(node: TyNode, pos: Pos) -> SurfaceType {
        SurfaceType { node, pos }
    }

    pub fn var(name: impl Into<String>) -> SurfaceType {
        SurfaceType::new(TyNode::Var(name.into()), Pos::NONE)
    }

    pub fn tycon(name: impl Into<String>) -> SurfaceType {
        SurfaceType::new(TyNode::TyCon(name.into()), Pos::NONE)
    }

    pub fn app(f: SurfaceType, a: SurfaceType) -> SurfaceType {
        SurfaceType::new(TyNode::App(Box::new(f), Box::new(a)), Pos::NONE)
    }

    pub fn arrow(d: SurfaceType, c: SurfaceType) -> SurfaceType {
        SurfaceType::new(TyNode::Arrow(Box::new(d), Box::new(c)), Pos::NONE)
    }
}

impl PartialEq for SurfaceType {
    fn eq(&self, other: &Self) -> bool {
        match (&self.node, &other.node) {
            (TyNode::Var(a), TyNode::Var(b)) => a == b,
            (TyNode::TyCon(a), TyNode::TyCon(b)) => a == b,
            (TyNode::App(f1, a1), TyNode::App(f2, a2)) => f1 == f2 && a1 == a2,
            (TyNode::Arrow(d1, c1), TyNode::Arrow(d2, c2)) => d1 == d2 && c1 == c2,
            (TyNode::Forall(v1, b1), TyNode::Forall(v2, b2)) => v1 == v2 && b1 == b2,
            (TyNode::Annot(t1, k1), TyNode::Annot(t2, k2)) => t1 == t2 && k1 == k2,
            _ => false,
        }
    }
}

impl Eq for SurfaceType {}

/// A datatype parameter; the kind annotation is permitted only in poly mode.
#[derive(Debug, Clone)]
pub struct Param {
    pub name: String,
    pub ann: Option<Kind>,
    pub pos: Pos,
}

impl PartialEq for Param {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.ann == other.ann
    }
}

/// A data constructor and its argument types.
#[derive(Debug, Clone)]
pub struct DataCon {
    pub name: String,
    pub args: Vec<SurfaceType>,
    pub pos: Pos,
}

impl PartialEq for DataCon {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.args == other.args
    }
}

/// One `data` declaration.
#[derive(Debug, Clone)]
pub struct DataDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub ctors: Vec<DataCon>,
    pub pos: Pos,
}

impl PartialEq for DataDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.params == other.params && self.ctors == other.ctors
    }
}

/// A standalone kind signature `sig T :: <kind>` (poly mode only).
#[derive(Debug, Clone)]
pub struct Sig {
    pub name: String,
    pub kind: Kind,
    pub pos: Pos,
}

impl PartialEq for Sig {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.kind == other.kind
    }
}

/// A parsed program: declarations in source order plus the signature map.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub mode: Mode,
    pub decls: Vec<DataDecl>,
    pub sigs: Vec<Sig>,
}

impl Program {
    pub fn decl_index(&self, name: &str) -> Option<usize> {
        self.decls.iter().position(|d| d.name == name)
    }

    pub fn declares(&self, name: &str) -> bool {
        self.decl_index(name).is_some()
    }

    pub fn sig_kind(&self, name: &str) -> Option<&Kind> {
        self.sigs.iter().find(|s| s.name == name).map(|s| &s.kind)
    }

    pub fn has_sig(&self, name: &str) -> bool {
        self.sig_kind(name).is_some()
    }
}

// Precedence levels for printing types: 0 = full type (arrows, foralls),
// 1 = application spine, 2 = atom.
fn fmt_type(t: &SurfaceType, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
    match &t.node {
        TyNode::Var(n) | TyNode::TyCon(n) => f.write_str(n),
        TyNode::App(fun, arg) => {
            if prec > 1 {
                f.write_str("(")?;
            }
            fmt_type(fun, f, 1)?;
            f.write_str(" ")?;
            fmt_type(arg, f, 2)?;
            if prec > 1 {
                f.write_str(")")?;
            }
            Ok(())
        }
        TyNode::Arrow(dom, cod) => {
            if prec > 0 {
                f.write_str("(")?;
            }
            fmt_type(dom, f, 1)?;
            f.write_str(" -> ")?;
            fmt_type(cod, f, 0)?;
            if prec > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
        TyNode::Forall(v, body) => {
            if prec > 0 {
                f.write_str("(")?;
            }
            write!(f, "forall {v}")?;
            let mut b = body.as_ref();
            while let TyNode::Forall(v2, b2) = &b.node {
                write!(f, " {v2}")?;
                b = b2;
            }
            f.write_str(". ")?;
            fmt_type(b, f, 0)?;
            if prec > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
        TyNode::Annot(inner, kind) => {
            f.write_str("(")?;
            fmt_type(inner, f, 0)?;
            write!(f, " :: {kind})")
        }
    }
}

impl fmt::Display for SurfaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_type(self, f, 0)
    }
}

impl fmt::Display for DataDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "data {}", self.name)?;
        for p in &self.params {
            match &p.ann {
                None => write!(f, " {}", p.name)?,
                Some(k) => write!(f, " ({} :: {})", p.name, k)?,
            }
        }
        if !self.ctors.is_empty() {
            f.write_str(" = ")?;
            for (i, c) in self.ctors.iter().enumerate() {
                if i > 0 {
                    f.write_str(" | ")?;
                }
                f.write_str(&c.name)?;
                for arg in &c.args {
                    f.write_str(" ")?;
                    fmt_type(arg, f, 2)?;
                }
            }
        }
        Ok(())
    }
}

/// Canonical layout: one declaration per line, signatures first, single
/// spaces, parentheses only where precedence requires them.
pub fn pretty_program(p: &Program) -> String {
    let mut out = String::new();
    for s in &p.sigs {
        out.push_str(&format!("sig {} :: {}\n", s.name, s.kind));
    }
    for d in &p.decls {
        out.push_str(&d.to_string());
        out.push('\n');
    }
    out
}

/// Deterministic kind text: arrows right-associative, `forall` prefix form.
pub fn pretty_kind(k: &Kind) -> String {
    k.to_string()
}

/// Round-trip helper used by tests: parse the pretty-printed form back.
pub fn reparse(p: &Program) -> Result<Program, Diagnostic> {
    parse_program(&pretty_program(p), p.mode)
}
