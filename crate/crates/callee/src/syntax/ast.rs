//! Abstract syntax.
//!
//! Equality on identifiers, type names, selectors, and effects ignores
//! source spans: those values flow through substitution and effect
//! reasoning where only structure matters. Whole expressions likewise
//! compare structurally, so round-trip tests need no span scrubbing.

use crate::diag::Span;
use std::fmt;
use std::hash::{Hash, Hasher};

/// An identifier with its source location. Compares and hashes on the
/// text alone.
#[derive(Debug, Clone, Eq)]
pub struct Ident {
    pub text: String,
    pub span: Span,
}

impl Ident {
    pub fn new(text: impl Into<String>, span: Span) -> Self {
        Ident {
            text: text.into(),
            span,
        }
    }

    /// An identifier with a dummy span, for synthesized nodes.
    pub fn synthetic(text: impl Into<String>) -> Self {
        Ident::new(text, Span::default())
    }
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Hash for Ident {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.text.hash(state);
    }
}

impl PartialOrd for Ident {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ident {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.text.cmp(&other.text)
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Whether a type name refers to a class/interface or a generic method
/// parameter. Resolved while parsing: a name matching an in-scope type
/// parameter is a variable, anything else is a class name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeKind {
    Class,
    Var,
}

/// A type: either a class/interface name or a generic type variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeName {
    pub kind: TypeKind,
    pub name: Ident,
}

impl TypeName {
    pub fn class(name: Ident) -> Self {
        TypeName {
            kind: TypeKind::Class,
            name,
        }
    }

    pub fn var(name: Ident) -> Self {
        TypeName {
            kind: TypeKind::Var,
            name,
        }
    }

    pub fn is_class(&self) -> bool {
        self.kind == TypeKind::Class
    }

    pub fn span(&self) -> Span {
        self.name.span
    }
}

impl fmt::Display for TypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name.text)
    }
}

/// A method selector: a method name applied to type arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodSelector {
    pub name: Ident,
    pub type_args: Vec<TypeName>,
}

impl MethodSelector {
    pub fn new(name: Ident, type_args: Vec<TypeName>) -> Self {
        MethodSelector { name, type_args }
    }

    pub fn plain(name: impl Into<String>) -> Self {
        MethodSelector {
            name: Ident::synthetic(name),
            type_args: Vec::new(),
        }
    }
}

/// A single effect: the wildcard, or a method on a receiver type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Effect {
    Wildcard,
    Method {
        receiver: TypeName,
        selector: MethodSelector,
    },
}

impl Effect {
    pub fn method(receiver: TypeName, selector: MethodSelector) -> Self {
        Effect::Method { receiver, selector }
    }

    pub fn span(&self) -> Span {
        match self {
            Effect::Wildcard => Span::default(),
            Effect::Method { receiver, selector } => receiver.span().merge(selector.name.span),
        }
    }
}

/// Ordered list of effects; order is preserved as written and
/// duplicates are permitted.
pub type EffectList = Vec<Effect>;

/// A generic method parameter with its upper bound (always a
/// class/interface name).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeParam {
    pub name: Ident,
    pub bound: Ident,
}

/// A value parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub ty: TypeName,
    pub name: Ident,
}

/// A method signature: return type, name, generic parameters with
/// bounds, value parameters, and the effect annotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub return_type: TypeName,
    pub name: Ident,
    pub type_params: Vec<TypeParam>,
    pub params: Vec<Param>,
    pub effects: EffectList,
}

/// A class field; field types are class/interface names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub ty: Ident,
    pub name: Ident,
}

/// A method implementation inside a class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Method {
    pub sig: Signature,
    pub body: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: Ident,
    pub fields: Vec<FieldDecl>,
    pub interfaces: Vec<Ident>,
    pub methods: Vec<Method>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceDecl {
    pub name: Ident,
    pub sigs: Vec<Signature>,
}

/// A top-level declaration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Class(ClassDecl),
    Interface(InterfaceDecl),
}

impl Decl {
    pub fn name(&self) -> &Ident {
        match self {
            Decl::Class(c) => &c.name,
            Decl::Interface(i) => &i.name,
        }
    }

    pub fn is_interface(&self) -> bool {
        matches!(self, Decl::Interface(_))
    }
}

/// An expression. The span covers the whole node; equality ignores it.
#[derive(Debug, Clone, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Var(Ident),
    New {
        class: Ident,
        args: Vec<Expr>,
    },
    Field {
        recv: Box<Expr>,
        field: Ident,
    },
    Call {
        recv: Box<Expr>,
        selector: MethodSelector,
        args: Vec<Expr>,
    },
    Restrict {
        bound: EffectList,
        body: Box<Expr>,
    },
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    /// True for fully constructed values: `new C(v...)` with all
    /// arguments values.
    pub fn is_value(&self) -> bool {
        match &self.kind {
            ExprKind::New { args, .. } => args.iter().all(Expr::is_value),
            _ => false,
        }
    }
}

/// A whole source file: declarations plus an optional main expression.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub decls: Vec<Decl>,
    pub main: Option<Expr>,
}
