//! Concrete grammar, abstract syntax, parser, and pretty-printer.
//!
//! Source files use the `.cle` extension and are UTF-8. The parser is a
//! pure function of its input; all syntax values are immutable once
//! built.

mod ast;
mod lexer;
mod parser;
mod printer;

pub use ast::{
    ClassDecl, Decl, Effect, EffectList, Expr, ExprKind, FieldDecl, Ident, InterfaceDecl, Method,
    MethodSelector, Param, Program, Signature, TypeKind, TypeName, TypeParam,
};
pub use parser::{parse_expr, parse_program};
pub use printer::{
    print_effect, print_effect_list, print_expr, print_program, print_selector, print_signature,
    print_type,
};
