//! Recursive descent parser for the concrete grammar:
//!
//! ```text
//! program   := decl* ("main" "=" expr ";")?
//! decl      := "class" Id "(" fieldList? ")" (":" Id ("," Id)*)? "{" method* "}"
//!            | "interface" Id "{" (sig ";")* "}"
//! fieldList := Id Id ("," Id Id)*
//! sig       := Id Id tparams? "(" paramList? ")" "effect" "[" effList? "]"
//! method    := sig "=" expr ";"
//! tparams   := "<" Id ":" Id ("," Id ":" Id)* ">"
//! paramList := Id Id ("," Id Id)*
//! effList   := eff ("," eff)*
//! eff       := "*" | Id "." Id targs?
//! targs     := "<" Id ("," Id)* ">"
//! expr      := prim ("." Id (targs? "(" argList? ")")? )*
//! prim      := Id | "new" Id "(" argList? ")" | "restrict" "[" effList? "]" expr
//!            | "(" expr ")"
//! ```
//!
//! A member access is a call exactly when `<` or `(` follows the member
//! name. Parsing stops at the first error. Type names are classified
//! after each signature is complete: a name matching one of the
//! signature's type parameters is a type variable, anything else a
//! class name.

use super::ast::*;
use super::lexer::{lex, Token, TokenKind};
use crate::diag::{Code, Diagnostic, Span};
use std::collections::BTreeSet;

/// Parses a whole source file.
pub fn parse_program(src: &str) -> Result<Program, Vec<Diagnostic>> {
    let tokens = lex(src).map_err(|d| vec![d])?;
    let mut p = Parser::new(tokens);
    p.program().map_err(|d| vec![d])
}

/// Parses a single expression; type names in selector arguments are
/// classified against an empty scope (all class names).
pub fn parse_expr(src: &str) -> Result<Expr, Vec<Diagnostic>> {
    let tokens = lex(src).map_err(|d| vec![d])?;
    let mut p = Parser::new(tokens);
    let mut e = p.expr().map_err(|d| vec![d])?;
    p.expect_eof().map_err(|d| vec![d])?;
    resolve_expr(&mut e, &BTreeSet::new());
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        Parser { tokens, pos: 0 }
    }

    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek_span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &str) -> Diagnostic {
        Diagnostic::new(
            Code::E001,
            format!("expected {expected}, found {}", self.peek().describe()),
            self.peek_span(),
        )
    }

    fn expect(&mut self, kind: TokenKind, expected: &str) -> Result<Token, Diagnostic> {
        if self.peek() == &kind {
            Ok(self.bump())
        } else {
            Err(self.error(expected))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<Ident, Diagnostic> {
        match self.peek().clone() {
            TokenKind::Ident(text) => {
                let t = self.bump();
                Ok(Ident::new(text, t.span))
            }
            _ => Err(self.error(what)),
        }
    }

    fn expect_eof(&mut self) -> Result<(), Diagnostic> {
        if self.peek() == &TokenKind::Eof {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    fn program(&mut self) -> Result<Program, Diagnostic> {
        let mut decls = Vec::new();
        let mut main = None;
        loop {
            match self.peek() {
                TokenKind::KwClass => decls.push(Decl::Class(self.class_decl()?)),
                TokenKind::KwInterface => decls.push(Decl::Interface(self.interface_decl()?)),
                TokenKind::KwMain => {
                    self.bump();
                    self.expect(TokenKind::Eq, "`=`")?;
                    let mut e = self.expr()?;
                    self.expect(TokenKind::Semi, "`;`")?;
                    resolve_expr(&mut e, &BTreeSet::new());
                    main = Some(e);
                    break;
                }
                TokenKind::Eof => break,
                _ => return Err(self.error("`class`, `interface`, or `main`")),
            }
        }
        self.expect_eof()?;
        Ok(Program { decls, main })
    }

    fn class_decl(&mut self) -> Result<ClassDecl, Diagnostic> {
        self.expect(TokenKind::KwClass, "`class`")?;
        let name = self.expect_ident("class name")?;
        self.expect(TokenKind::LParen, "`(`")?;
        let mut fields = Vec::new();
        if self.peek() != &TokenKind::RParen {
            loop {
                let ty = self.expect_ident("field type")?;
                let fname = self.expect_ident("field name")?;
                fields.push(FieldDecl { ty, name: fname });
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen, "`)`")?;
        let mut interfaces = Vec::new();
        if self.eat(&TokenKind::Colon) {
            loop {
                interfaces.push(self.expect_ident("interface name")?);
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::LBrace, "`{`")?;
        let mut methods = Vec::new();
        while self.peek() != &TokenKind::RBrace {
            let mut sig = self.signature()?;
            self.expect(TokenKind::Eq, "`=`")?;
            let mut body = self.expr()?;
            self.expect(TokenKind::Semi, "`;`")?;
            let scope: BTreeSet<String> = sig
                .type_params
                .iter()
                .map(|tp| tp.name.text.clone())
                .collect();
            resolve_signature(&mut sig, &scope);
            resolve_expr(&mut body, &scope);
            methods.push(Method { sig, body });
        }
        self.expect(TokenKind::RBrace, "`}`")?;
        Ok(ClassDecl {
            name,
            fields,
            interfaces,
            methods,
        })
    }

    fn interface_decl(&mut self) -> Result<InterfaceDecl, Diagnostic> {
        self.expect(TokenKind::KwInterface, "`interface`")?;
        let name = self.expect_ident("interface name")?;
        self.expect(TokenKind::LBrace, "`{`")?;
        let mut sigs = Vec::new();
        while self.peek() != &TokenKind::RBrace {
            let mut sig = self.signature()?;
            self.expect(TokenKind::Semi, "`;`")?;
            let scope: BTreeSet<String> = sig
                .type_params
                .iter()
                .map(|tp| tp.name.text.clone())
                .collect();
            resolve_signature(&mut sig, &scope);
            sigs.push(sig);
        }
        self.expect(TokenKind::RBrace, "`}`")?;
        Ok(InterfaceDecl { name, sigs })
    }

    /// Type names are produced as class names here and reclassified by
    /// the caller once the signature's type parameters are known.
    fn signature(&mut self) -> Result<Signature, Diagnostic> {
        let ret = self.expect_ident("return type")?;
        let name = self.expect_ident("method name")?;
        let mut type_params = Vec::new();
        if self.eat(&TokenKind::Lt) {
            loop {
                let pname = self.expect_ident("type parameter")?;
                self.expect(TokenKind::Colon, "`:`")?;
                let bound = self.expect_ident("type parameter bound")?;
                type_params.push(TypeParam { name: pname, bound });
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
            self.expect(TokenKind::Gt, "`>`")?;
        }
        self.expect(TokenKind::LParen, "`(`")?;
        let mut params = Vec::new();
        if self.peek() != &TokenKind::RParen {
            loop {
                let ty = self.expect_ident("parameter type")?;
                let pname = self.expect_ident("parameter name")?;
                params.push(Param {
                    ty: TypeName::class(ty),
                    name: pname,
                });
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen, "`)`")?;
        self.expect(TokenKind::KwEffect, "`effect`")?;
        let effects = self.effect_list()?;
        Ok(Signature {
            return_type: TypeName::class(ret),
            name,
            type_params,
            params,
            effects,
        })
    }

    /// `[` eff ("," eff)* `]`
    fn effect_list(&mut self) -> Result<EffectList, Diagnostic> {
        self.expect(TokenKind::LBracket, "`[`")?;
        let mut effects = Vec::new();
        if self.peek() != &TokenKind::RBracket {
            loop {
                effects.push(self.effect()?);
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RBracket, "`]`")?;
        Ok(effects)
    }

    fn effect(&mut self) -> Result<Effect, Diagnostic> {
        if self.eat(&TokenKind::Star) {
            return Ok(Effect::Wildcard);
        }
        let recv = self.expect_ident("effect")?;
        self.expect(TokenKind::Dot, "`.`")?;
        let name = self.expect_ident("method name")?;
        let type_args = self.opt_type_args()?;
        Ok(Effect::Method {
            receiver: TypeName::class(recv),
            selector: MethodSelector::new(name, type_args),
        })
    }

    fn opt_type_args(&mut self) -> Result<Vec<TypeName>, Diagnostic> {
        let mut args = Vec::new();
        if self.eat(&TokenKind::Lt) {
            loop {
                args.push(TypeName::class(self.expect_ident("type argument")?));
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
            self.expect(TokenKind::Gt, "`>`")?;
        }
        Ok(args)
    }

    fn expr(&mut self) -> Result<Expr, Diagnostic> {
        let mut e = self.prim()?;
        while self.peek() == &TokenKind::Dot {
            self.bump();
            let member = self.expect_ident("member name")?;
            if self.peek() == &TokenKind::Lt || self.peek() == &TokenKind::LParen {
                let type_args = self.opt_type_args()?;
                self.expect(TokenKind::LParen, "`(`")?;
                let args = self.arg_list()?;
                let close = self.expect(TokenKind::RParen, "`)`")?;
                let span = e.span.merge(close.span);
                e = Expr::new(
                    ExprKind::Call {
                        recv: Box::new(e),
                        selector: MethodSelector::new(member, type_args),
                        args,
                    },
                    span,
                );
            } else {
                let span = e.span.merge(member.span);
                e = Expr::new(
                    ExprKind::Field {
                        recv: Box::new(e),
                        field: member,
                    },
                    span,
                );
            }
        }
        Ok(e)
    }

    fn prim(&mut self) -> Result<Expr, Diagnostic> {
        match self.peek().clone() {
            TokenKind::Ident(text) => {
                let t = self.bump();
                Ok(Expr::new(ExprKind::Var(Ident::new(text, t.span)), t.span))
            }
            TokenKind::KwNew => {
                let start = self.bump().span;
                let class = self.expect_ident("class name")?;
                self.expect(TokenKind::LParen, "`(`")?;
                let args = self.arg_list()?;
                let close = self.expect(TokenKind::RParen, "`)`")?;
                Ok(Expr::new(
                    ExprKind::New { class, args },
                    start.merge(close.span),
                ))
            }
            TokenKind::KwRestrict => {
                let start = self.bump().span;
                let bound = self.effect_list()?;
                let body = self.expr()?;
                let span = start.merge(body.span);
                Ok(Expr::new(
                    ExprKind::Restrict {
                        bound,
                        body: Box::new(body),
                    },
                    span,
                ))
            }
            TokenKind::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.error("an expression")),
        }
    }

    fn arg_list(&mut self) -> Result<Vec<Expr>, Diagnostic> {
        let mut args = Vec::new();
        if self.peek() != &TokenKind::RParen {
            loop {
                args.push(self.expr()?);
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        Ok(args)
    }
}

fn resolve_type(t: &mut TypeName, scope: &BTreeSet<String>) {
    t.kind = if scope.contains(&t.name.text) {
        TypeKind::Var
    } else {
        TypeKind::Class
    };
}

fn resolve_effect(e: &mut Effect, scope: &BTreeSet<String>) {
    if let Effect::Method { receiver, selector } = e {
        resolve_type(receiver, scope);
        for a in &mut selector.type_args {
            resolve_type(a, scope);
        }
    }
}

fn resolve_signature(sig: &mut Signature, scope: &BTreeSet<String>) {
    resolve_type(&mut sig.return_type, scope);
    for p in &mut sig.params {
        resolve_type(&mut p.ty, scope);
    }
    for e in &mut sig.effects {
        resolve_effect(e, scope);
    }
}

fn resolve_expr(e: &mut Expr, scope: &BTreeSet<String>) {
    match &mut e.kind {
        ExprKind::Var(_) => {}
        ExprKind::New { args, .. } => {
            for a in args {
                resolve_expr(a, scope);
            }
        }
        ExprKind::Field { recv, .. } => resolve_expr(recv, scope),
        ExprKind::Call {
            recv,
            selector,
            args,
        } => {
            resolve_expr(recv, scope);
            for a in &mut selector.type_args {
                resolve_type(a, scope);
            }
            for a in args {
                resolve_expr(a, scope);
            }
        }
        ExprKind::Restrict { bound, body } => {
            for b in bound {
                resolve_effect(b, scope);
            }
            resolve_expr(body, scope);
        }
    }
}
