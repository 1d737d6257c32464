//! Recursive descent parser for programs and kinds.
//!
//! Grammar (whitespace-insensitive, `;` optional between declarations):
//!
//! ```text
//! program  ::= { sig | decl }
//! sig      ::= "sig" UCID "::" kind               (poly mode only)
//! decl     ::= "data" UCID { binder } [ "=" ctors ]
//! binder   ::= LCID | "(" LCID "::" kind ")"      (annotated form poly only)
//! ctors    ::= ctor { "|" ctor }
//! ctor     ::= UCID { atype }
//! type     ::= btype [ "->" type ] | "forall" LCID+ "." type    (forall poly only)
//! btype    ::= btype atype | atype
//! atype    ::= LCID | UCID | "(" type ")" | "(" type "::" kind ")"  (annot poly only)
//! kind     ::= akind [ "->" kind ] | "forall" LCID+ "." kind    (forall poly only)
//! akind    ::= "*" | LCID | "(" kind ")"
//! ```

use std::collections::HashSet;

use crate::diag::{Diagnostic, ErrorCode, Pos};
use crate::kindcore::Kind;

use super::lexer::{lex, Tok, Token};
use super::{DataCon, DataDecl, Mode, Param, Program, Sig, SurfaceType, TyNode};

struct Parser {
    toks: Vec<Token>,
    at: usize,
    mode: Mode,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::new(ErrorCode::ParseError, self.pos(), msg)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, Diagnostic> {
        if *self.peek() == want {
            Ok(self.bump())
        } else {
            Err(self.err(format!(
                "expected {} {what}, found {}",
                want.describe(),
                self.peek().describe()
            )))
        }
    }

    fn expect_upper(&mut self, what: &str) -> Result<(String, Pos), Diagnostic> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Upper(n) => {
                self.bump();
                Ok((n, pos))
            }
            other => Err(self.err(format!(
                "expected {what} (an uppercase identifier), found {}",
                other.describe()
            ))),
        }
    }

    fn expect_lower(&mut self, what: &str) -> Result<(String, Pos), Diagnostic> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Lower(n) => {
                self.bump();
                Ok((n, pos))
            }
            other => Err(self.err(format!(
                "expected {what} (a lowercase identifier), found {}",
                other.describe()
            ))),
        }
    }

    fn program(&mut self) -> Result<Program, Diagnostic> {
        let mut decls = Vec::new();
        let mut sigs: Vec<Sig> = Vec::new();
        loop {
            match self.peek() {
                Tok::Semi => {
                    self.bump();
                }
                Tok::Eof => break,
                Tok::KwSig => {
                    if self.mode == Mode::H98 {
                        return Err(self.err(
                            "standalone kind signatures require poly mode",
                        ));
                    }
                    sigs.push(self.sig()?);
                }
                Tok::KwData => decls.push(self.decl()?),
                other => {
                    return Err(self.err(format!(
                        "expected 'data' or 'sig', found {}",
                        other.describe()
                    )))
                }
            }
        }
        self.validate(&decls, &sigs)?;
        Ok(Program { mode: self.mode, decls, sigs })
    }

    fn validate(&self, decls: &[DataDecl], sigs: &[Sig]) -> Result<(), Diagnostic> {
        let mut tycons = HashSet::new();
        for d in decls {
            if !tycons.insert(d.name.as_str()) {
                return Err(Diagnostic::new(
                    ErrorCode::DuplicateTyCon,
                    d.pos,
                    format!("type constructor '{}' is declared more than once", d.name),
                ));
            }
        }
        let mut ctors = HashSet::new();
        for d in decls {
            for c in &d.ctors {
                if !ctors.insert(c.name.as_str()) {
                    return Err(Diagnostic::new(
                        ErrorCode::DuplicateCtor,
                        c.pos,
                        format!("data constructor '{}' is declared more than once", c.name),
                    ));
                }
            }
        }
        let mut signed = HashSet::new();
        for s in sigs {
            if !signed.insert(s.name.as_str()) {
                return Err(Diagnostic::new(
                    ErrorCode::DuplicateSig,
                    s.pos,
                    format!("duplicate signature for '{}'", s.name),
                ));
            }
            if !tycons.contains(s.name.as_str()) {
                return Err(Diagnostic::new(
                    ErrorCode::UnboundTyCon,
                    s.pos,
                    format!("signature names undeclared type constructor '{}'", s.name),
                ));
            }
        }
        Ok(())
    }

    fn sig(&mut self) -> Result<Sig, Diagnostic> {
        let kw = self.bump(); // 'sig'
        let (name, _) = self.expect_upper("a type constructor name")?;
        self.expect(Tok::DblColon, "after the signature head")?;
        let kind = self.kind()?;
        // Signatures must be closed: quantify every kind variable explicitly.
        if let Some(free) = kind.free_kvars().into_iter().next() {
            return Err(Diagnostic::new(
                ErrorCode::UnboundVar,
                kw.pos,
                format!("kind variable '{free}' is unbound in the signature; bind it with forall"),
            ));
        }
        Ok(Sig { name, kind, pos: kw.pos })
    }

    fn decl(&mut self) -> Result<DataDecl, Diagnostic> {
        let kw = self.bump(); // 'data'
        let (name, _) = self.expect_upper("a type constructor name")?;
        let mut params: Vec<Param> = Vec::new();
        loop {
            match self.peek() {
                Tok::Lower(_) => {
                    let (pname, ppos) = self.expect_lower("a type parameter")?;
                    params.push(Param { name: pname, ann: None, pos: ppos });
                }
                Tok::LParen => {
                    let ppos = self.pos();
                    if self.mode == Mode::H98 {
                        return Err(Diagnostic::new(
                            ErrorCode::AnnotationInH98Mode,
                            ppos,
                            "kind-annotated binders require poly mode",
                        ));
                    }
                    self.bump();
                    let (pname, _) = self.expect_lower("a type parameter")?;
                    self.expect(Tok::DblColon, "in the annotated binder")?;
                    let ann = self.kind()?;
                    self.expect(Tok::RParen, "to close the annotated binder")?;
                    params.push(Param { name: pname, ann: Some(ann), pos: ppos });
                }
                _ => break,
            }
        }
        let mut seen = HashSet::new();
        for p in &params {
            if !seen.insert(p.name.as_str()) {
                return Err(Diagnostic::new(
                    ErrorCode::DuplicateParam,
                    p.pos,
                    format!("duplicate type parameter '{}'", p.name),
                ));
            }
        }
        let mut ctors = Vec::new();
        if *self.peek() == Tok::Equals {
            self.bump();
            ctors.push(self.ctor()?);
            while *self.peek() == Tok::Pipe {
                self.bump();
                ctors.push(self.ctor()?);
            }
        }
        Ok(DataDecl { name, params, ctors, pos: kw.pos })
    }

    fn ctor(&mut self) -> Result<DataCon, Diagnostic> {
        let (name, pos) = self.expect_upper("a data constructor name")?;
        let mut args = Vec::new();
        while self.starts_atype() {
            args.push(self.atype()?);
        }
        Ok(DataCon { name, args, pos })
    }

    fn starts_atype(&self) -> bool {
        matches!(self.peek(), Tok::Lower(_) | Tok::Upper(_) | Tok::LParen)
    }

    fn ty(&mut self) -> Result<SurfaceType, Diagnostic> {
        let pos = self.pos();
        if *self.peek() == Tok::KwForall {
            if self.mode == Mode::H98 {
                return Err(self.err("forall types require poly mode"));
            }
            self.bump();
            let mut vars = vec![self.expect_lower("a forall-bound type variable")?];
            while matches!(self.peek(), Tok::Lower(_)) {
                vars.push(self.expect_lower("a forall-bound type variable")?);
            }
            self.expect(Tok::Dot, "after the forall binders")?;
            let body = self.ty()?;
            let mut t = body;
            for (v, vpos) in vars.into_iter().rev() {
                t = SurfaceType::new(TyNode::Forall(v, Box::new(t)), vpos);
            }
            // Outermost node carries the 'forall' keyword position.
            return Ok(SurfaceType { pos, ..t });
        }
        let dom = self.btype()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let cod = self.ty()?;
            Ok(SurfaceType::new(TyNode::Arrow(Box::new(dom), Box::new(cod)), pos))
        } else {
            Ok(dom)
        }
    }

    fn btype(&mut self) -> Result<SurfaceType, Diagnostic> {
        let mut t = self.atype()?;
        while self.starts_atype() {
            let arg = self.atype()?;
            let pos = t.pos;
            t = SurfaceType::new(TyNode::App(Box::new(t), Box::new(arg)), pos);
        }
        Ok(t)
    }

    fn atype(&mut self) -> Result<SurfaceType, Diagnostic> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Lower(n) => {
                self.bump();
                Ok(SurfaceType::new(TyNode::Var(n), pos))
            }
            Tok::Upper(n) => {
                self.bump();
                Ok(SurfaceType::new(TyNode::TyCon(n), pos))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.ty()?;
                if *self.peek() == Tok::DblColon {
                    if self.mode == Mode::H98 {
                        return Err(Diagnostic::new(
                            ErrorCode::AnnotationInH98Mode,
                            self.pos(),
                            "kind annotations on types require poly mode",
                        ));
                    }
                    self.bump();
                    let kind = self.kind()?;
                    self.expect(Tok::RParen, "to close the annotation")?;
                    Ok(SurfaceType::new(TyNode::Annot(Box::new(inner), kind), pos))
                } else {
                    self.expect(Tok::RParen, "to close the parenthesized type")?;
                    Ok(inner)
                }
            }
            Tok::Star => Err(self.err("'*' is a kind, not a type")),
            other => Err(self.err(format!("expected a type, found {}", other.describe()))),
        }
    }

    fn kind(&mut self) -> Result<Kind, Diagnostic> {
        if *self.peek() == Tok::KwForall {
            self.bump();
            let mut vars = vec![self.expect_lower("a forall-bound kind variable")?.0];
            while matches!(self.peek(), Tok::Lower(_)) {
                vars.push(self.expect_lower("a forall-bound kind variable")?.0);
            }
            self.expect(Tok::Dot, "after the forall binders")?;
            let body = self.kind()?;
            let mut k = body;
            for v in vars.into_iter().rev() {
                k = Kind::Forall(v, Box::new(k));
            }
            return Ok(k);
        }
        let dom = self.akind()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let cod = self.kind()?;
            Ok(Kind::arrow(dom, cod))
        } else {
            Ok(dom)
        }
    }

    fn akind(&mut self) -> Result<Kind, Diagnostic> {
        match self.peek().clone() {
            Tok::Star => {
                self.bump();
                Ok(Kind::Star)
            }
            Tok::Lower(n) => {
                self.bump();
                Ok(Kind::KVar(n))
            }
            Tok::LParen => {
                self.bump();
                let k = self.kind()?;
                self.expect(Tok::RParen, "to close the parenthesized kind")?;
                Ok(k)
            }
            other => Err(self.err(format!("expected a kind, found {}", other.describe()))),
        }
    }
}

/// Parse a program in the given mode. Every AST node carries its source
/// position; the AST invariants (distinct names, mode restrictions) are
/// checked here.
pub fn parse_program(text: &str, mode: Mode) -> Result<Program, Diagnostic> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, mode };
    p.program()
}

/// Parse a standalone kind (poly syntax always allowed). The kind must be
/// closed: free kind variables are rejected.
pub fn parse_kind(text: &str) -> Result<Kind, Diagnostic> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, mode: Mode::Poly };
    let k = p.kind()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err(format!(
            "unexpected {} after the kind",
            p.peek().describe()
        )));
    }
    if let Some(free) = k.free_kvars().into_iter().next() {
        return Err(Diagnostic::new(
            ErrorCode::UnboundVar,
            Pos::NONE,
            format!("kind variable '{free}' is unbound; bind it with forall"),
        ));
    }
    Ok(k)
}
