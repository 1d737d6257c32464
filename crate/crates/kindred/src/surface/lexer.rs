//! Hand-rolled lexer for the surface language.

use crate::diag::{Diagnostic, ErrorCode, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    KwData,
    KwSig,
    KwForall,
    Star,
    Arrow,
    DblColon,
    Equals,
    Pipe,
    LParen,
    RParen,
    Dot,
    Semi,
    Upper(String),
    Lower(String),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::KwData => "'data'".into(),
            Tok::KwSig => "'sig'".into(),
            Tok::KwForall => "'forall'".into(),
            Tok::Star => "'*'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::DblColon => "'::'".into(),
            Tok::Equals => "'='".into(),
            Tok::Pipe => "'|'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Dot => "'.'".into(),
            Tok::Semi => "';'".into(),
            Tok::Upper(s) | Tok::Lower(s) => format!("'{s}'"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut toks = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut it = src.char_indices().peekable();

    while let Some((offset, c)) = it.next() {
        let pos = Pos::new(line, col, offset);
        match c {
            '\n' => {
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                col += 1;
                continue;
            }
            '-' => {
                match it.peek() {
                    Some((_, '>')) => {
                        it.next();
                        col += 2;
                        toks.push(Token { tok: Tok::Arrow, pos });
                    }
                    Some((_, '-')) => {
                        // Line comment: skip to end of line (or EOF).
                        let mut saw_newline = false;
                        for (_, c2) in it.by_ref() {
                            col += 1;
                            if c2 == '\n' {
                                saw_newline = true;
                                break;
                            }
                        }
                        if saw_newline {
                            line += 1;
                            col = 1;
                        }
                        continue;
                    }
                    _ => {
                        return Err(Diagnostic::new(
                            ErrorCode::ParseError,
                            pos,
                            "unexpected character '-'; expected '->' or a '--' comment",
                        ))
                    }
                }
            }
            ':' => match it.peek() {
                Some((_, ':')) => {
                    it.next();
                    col += 2;
                    toks.push(Token { tok: Tok::DblColon, pos });
                }
                _ => {
                    return Err(Diagnostic::new(
                        ErrorCode::ParseError,
                        pos,
                        "unexpected character ':'; expected '::'",
                    ))
                }
            },
            '*' => {
                col += 1;
                toks.push(Token { tok: Tok::Star, pos });
            }
            '=' => {
                col += 1;
                toks.push(Token { tok: Tok::Equals, pos });
            }
            '|' => {
                col += 1;
                toks.push(Token { tok: Tok::Pipe, pos });
            }
            '(' => {
                col += 1;
                toks.push(Token { tok: Tok::LParen, pos });
            }
            ')' => {
                col += 1;
                toks.push(Token { tok: Tok::RParen, pos });
            }
            '.' => {
                col += 1;
                toks.push(Token { tok: Tok::Dot, pos });
            }
            ';' => {
                col += 1;
                toks.push(Token { tok: Tok::Semi, pos });
            }
            c if is_ident_start(c) => {
                let mut name = String::new();
                name.push(c);
                let mut len = 1;
                while let Some(&(_, c2)) = it.peek() {
                    if is_ident_char(c2) {
                        name.push(c2);
                        it.next();
                        len += 1;
                    } else {
                        break;
                    }
                }
                col += len;
                let tok = match name.as_str() {
                    "data" => Tok::KwData,
                    "sig" => Tok::KwSig,
                    "forall" => Tok::KwForall,
                    _ if c.is_ascii_uppercase() => Tok::Upper(name),
                    _ => Tok::Lower(name),
                };
                toks.push(Token { tok, pos });
            }
            other => {
                return Err(Diagnostic::new(
                    ErrorCode::ParseError,
                    pos,
                    format!("unexpected character '{other}'"),
                ))
            }
        }
    }

    toks.push(Token {
        tok: Tok::Eof,
        pos: Pos::new(line, col, src.len()),
    });
    Ok(toks)
}
