//! Hand-written lexer. Produces a token stream with byte spans; `//`
//! and `/* */` comments and whitespace are skipped.

use crate::diag::{Code, Diagnostic, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    KwClass,
    KwInterface,
    KwNew,
    KwRestrict,
    KwEffect,
    KwMain,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Comma,
    Dot,
    Semi,
    Colon,
    Eq,
    Star,
    Eof,
}

impl TokenKind {
    /// How the token is written, for error messages.
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::KwClass => "`class`".into(),
            TokenKind::KwInterface => "`interface`".into(),
            TokenKind::KwNew => "`new`".into(),
            TokenKind::KwRestrict => "`restrict`".into(),
            TokenKind::KwEffect => "`effect`".into(),
            TokenKind::KwMain => "`main`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::LBracket => "`[`".into(),
            TokenKind::RBracket => "`]`".into(),
            TokenKind::Lt => "`<`".into(),
            TokenKind::Gt => "`>`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Dot => "`.`".into(),
            TokenKind::Semi => "`;`".into(),
            TokenKind::Colon => "`:`".into(),
            TokenKind::Eq => "`=`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

/// Tokenizes `src`. On a lexical error the single offending position is
/// reported as E001.
pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
            }
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                let open = i;
                i += 2;
                loop {
                    if i + 1 >= bytes.len() {
                        return Err(Diagnostic::new(
                            Code::E001,
                            "unterminated block comment",
                            Span::new(open, open + 2),
                        ));
                    }
                    if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                        i += 2;
                        break;
                    }
                    i += 1;
                }
            }
            b'A'..=b'Z' | b'a'..=b'z' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let text = &src[start..i];
                let kind = match text {
                    "class" => TokenKind::KwClass,
                    "interface" => TokenKind::KwInterface,
                    "new" => TokenKind::KwNew,
                    "restrict" => TokenKind::KwRestrict,
                    "effect" => TokenKind::KwEffect,
                    "main" => TokenKind::KwMain,
                    _ => TokenKind::Ident(text.to_string()),
                };
                tokens.push(Token {
                    kind,
                    span: Span::new(start, i),
                });
            }
            _ => {
                let kind = match b {
                    b'(' => TokenKind::LParen,
                    b')' => TokenKind::RParen,
                    b'{' => TokenKind::LBrace,
                    b'}' => TokenKind::RBrace,
                    b'[' => TokenKind::LBracket,
                    b']' => TokenKind::RBracket,
                    b'<' => TokenKind::Lt,
                    b'>' => TokenKind::Gt,
                    b',' => TokenKind::Comma,
                    b'.' => TokenKind::Dot,
                    b';' => TokenKind::Semi,
                    b':' => TokenKind::Colon,
                    b'=' => TokenKind::Eq,
                    b'*' => TokenKind::Star,
                    _ => {
                        return Err(Diagnostic::new(
                            Code::E001,
                            format!(
                                "unexpected character `{}`",
                                src[i..].chars().next().unwrap()
                            ),
                            Span::new(i, i + 1),
                        ));
                    }
                };
                tokens.push(Token {
                    kind,
                    span: Span::new(i, i + 1),
                });
                i += 1;
            }
        }
    }
    let eof = if src.is_empty() {
        Span::new(0, 0)
    } else {
        Span::new(src.len() - 1, src.len())
    };
    tokens.push(Token {
        kind: TokenKind::Eof,
        span: eof,
    });
    Ok(tokens)
}
