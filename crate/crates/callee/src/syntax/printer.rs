//! Canonical pretty-printer. Printing is deterministic and its output
//! re-parses to a structurally identical tree. Type-argument lists are
//! printed tight (`m<A,B>`); all other lists use `, `. A restrict
//! expression used as a receiver is parenthesized, since the grammar
//! otherwise folds the member access into the restrict body.

use super::ast::*;
use std::fmt::Write;

pub fn print_type(t: &TypeName) -> String {
    t.name.text.clone()
}

pub fn print_selector(sel: &MethodSelector) -> String {
    let mut s = sel.name.text.clone();
    if !sel.type_args.is_empty() {
        s.push('<');
        s.push_str(
            &sel.type_args
                .iter()
                .map(print_type)
                .collect::<Vec<_>>()
                .join(","),
        );
        s.push('>');
    }
    s
}

pub fn print_effect(e: &Effect) -> String {
    match e {
        Effect::Wildcard => "*".to_string(),
        Effect::Method { receiver, selector } => {
            format!("{}.{}", print_type(receiver), print_selector(selector))
        }
    }
}

pub fn print_effect_list(effects: &[Effect]) -> String {
    effects
        .iter()
        .map(print_effect)
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e);
    s
}

fn write_receiver(out: &mut String, recv: &Expr) {
    if matches!(recv.kind, ExprKind::Restrict { .. }) {
        out.push('(');
        write_expr(out, recv);
        out.push(')');
    } else {
        write_expr(out, recv);
    }
}

fn write_args(out: &mut String, args: &[Expr]) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, a);
    }
    out.push(')');
}

fn write_expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Var(v) => out.push_str(&v.text),
        ExprKind::New { class, args } => {
            out.push_str("new ");
            out.push_str(&class.text);
            write_args(out, args);
        }
        ExprKind::Field { recv, field } => {
            write_receiver(out, recv);
            out.push('.');
            out.push_str(&field.text);
        }
        ExprKind::Call {
            recv,
            selector,
            args,
        } => {
            write_receiver(out, recv);
            out.push('.');
            out.push_str(&print_selector(selector));
            write_args(out, args);
        }
        ExprKind::Restrict { bound, body } => {
            let _ = write!(out, "restrict[{}] ", print_effect_list(bound));
            write_expr(out, body);
        }
    }
}

pub fn print_signature(sig: &Signature) -> String {
    let mut s = format!("{} {}", print_type(&sig.return_type), sig.name.text);
    if !sig.type_params.is_empty() {
        s.push('<');
        s.push_str(
            &sig.type_params
                .iter()
                .map(|tp| format!("{}: {}", tp.name.text, tp.bound.text))
                .collect::<Vec<_>>()
                .join(", "),
        );
        s.push('>');
    }
    s.push('(');
    s.push_str(
        &sig.params
            .iter()
            .map(|p| format!("{} {}", print_type(&p.ty), p.name.text))
            .collect::<Vec<_>>()
            .join(", "),
    );
    s.push(')');
    let _ = write!(s, " effect[{}]", print_effect_list(&sig.effects));
    s
}

fn print_decl(d: &Decl) -> String {
    match d {
        Decl::Class(c) => {
            let mut s = format!("class {}(", c.name.text);
            s.push_str(
                &c.fields
                    .iter()
                    .map(|f| format!("{} {}", f.ty.text, f.name.text))
                    .collect::<Vec<_>>()
                    .join(", "),
            );
            s.push(')');
            if !c.interfaces.is_empty() {
                s.push_str(": ");
                s.push_str(
                    &c.interfaces
                        .iter()
                        .map(|i| i.text.clone())
                        .collect::<Vec<_>>()
                        .join(", "),
                );
            }
            if c.methods.is_empty() {
                s.push_str(" { }");
            } else {
                s.push_str(" {\n");
                for m in &c.methods {
                    let _ = writeln!(
                        s,
                        "    {} = {};",
                        print_signature(&m.sig),
                        print_expr(&m.body)
                    );
                }
                s.push('}');
            }
            s
        }
        Decl::Interface(i) => {
            let mut s = format!("interface {}", i.name.text);
            if i.sigs.is_empty() {
                s.push_str(" { }");
            } else {
                s.push_str(" {\n");
                for sig in &i.sigs {
                    let _ = writeln!(s, "    {};", print_signature(sig));
                }
                s.push('}');
            }
            s
        }
    }
}

pub fn print_program(p: &Program) -> String {
    let mut blocks: Vec<String> = p.decls.iter().map(print_decl).collect();
    if let Some(main) = &p.main {
        blocks.push(format!("main = {};", print_expr(main)));
    }
    let mut s = blocks.join("\n\n");
    if !s.is_empty() {
        s.push('\n');
    }
    s
}
