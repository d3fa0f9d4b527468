//! The global class table and capture-respecting substitution.
//!
//! `instantiate` implements selector-substituting lookup: looking up
//! `C.m<T...>` returns `C.m` with each declared type parameter replaced
//! by the corresponding argument everywhere except the binding
//! positions of the type-parameter list itself.

use crate::diag::{Code, Diagnostic, Span};
use crate::syntax::{
    Decl, Effect, Expr, ExprKind, MethodSelector, Program, Signature, TypeKind, TypeName,
};
use std::collections::BTreeMap;

/// A method found on a class or interface. Interface entries have no
/// body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodEntry {
    pub owner: String,
    pub sig: Signature,
    pub body: Option<Expr>,
}

/// Immutable map from declaration names to declarations.
#[derive(Debug, Clone, Default)]
pub struct ClassTable {
    decls: BTreeMap<String, Decl>,
}

impl ClassTable {
    pub fn get(&self, name: &str) -> Option<&Decl> {
        self.decls.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.decls.contains_key(name)
    }

    /// Declarations in name order.
    pub fn decls(&self) -> impl Iterator<Item = &Decl> {
        self.decls.values()
    }

    /// Interfaces listed by the declaration named `name` (empty for
    /// interfaces, which cannot extend one another).
    pub fn interfaces_of(&self, name: &str) -> &[crate::syntax::Ident] {
        match self.decls.get(name) {
            Some(Decl::Class(c)) => &c.interfaces,
            _ => &[],
        }
    }
}

/// Mapping of generic parameters to their upper bounds. Class and
/// interface names resolve to themselves.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeEnv {
    bounds: BTreeMap<String, String>,
}

impl TypeEnv {
    pub fn new() -> Self {
        TypeEnv::default()
    }

    /// The environment for a signature's type parameters.
    pub fn for_signature(sig: &Signature) -> Self {
        let mut env = TypeEnv::new();
        for tp in &sig.type_params {
            env.bounds
                .insert(tp.name.text.clone(), tp.bound.text.clone());
        }
        env
    }

    pub fn bind(&mut self, var: impl Into<String>, bound: impl Into<String>) {
        self.bounds.insert(var.into(), bound.into());
    }

    /// Resolves a type to the class/interface name it stands for:
    /// identity on class names, the declared bound on variables.
    pub fn resolve<'a>(&'a self, t: &'a TypeName) -> Option<&'a str> {
        match t.kind {
            TypeKind::Class => Some(&t.name.text),
            TypeKind::Var => self.bounds.get(&t.name.text).map(String::as_str),
        }
    }
}

/// Variable environment for expression typing.
pub type VarEnv = BTreeMap<String, TypeName>;

fn duplicate(what: &str, name: &str, span: Span) -> Diagnostic {
    Diagnostic::new(Code::E102, format!("duplicate {what} name `{name}`"), span)
}

/// Builds the class table, rejecting duplicate declaration and member
/// names. Also rejects a parameter named `this`, which would shadow the
/// receiver binding.
pub fn build_table(p: &Program) -> Result<ClassTable, Vec<Diagnostic>> {
    let mut table = ClassTable::default();
    let mut diags = Vec::new();
    for decl in &p.decls {
        let name = decl.name();
        if table.contains(&name.text) {
            diags.push(duplicate("declaration", &name.text, name.span));
            continue;
        }
        check_members(decl, &mut diags);
        table.decls.insert(name.text.clone(), decl.clone());
    }
    if diags.is_empty() {
        Ok(table)
    } else {
        crate::diag::sort_diagnostics(&mut diags);
        Err(diags)
    }
}

fn check_members(decl: &Decl, diags: &mut Vec<Diagnostic>) {
    match decl {
        Decl::Class(c) => {
            let mut fields = BTreeMap::new();
            for f in &c.fields {
                if fields.insert(&f.name.text, ()).is_some() {
                    diags.push(duplicate("field", &f.name.text, f.name.span));
                }
            }
            let mut ifaces = BTreeMap::new();
            for i in &c.interfaces {
                if ifaces.insert(&i.text, ()).is_some() {
                    diags.push(duplicate("interface", &i.text, i.span));
                }
            }
            let mut methods = BTreeMap::new();
            for m in &c.methods {
                if methods.insert(&m.sig.name.text, ()).is_some() {
                    diags.push(duplicate("method", &m.sig.name.text, m.sig.name.span));
                }
                check_signature_names(&m.sig, diags);
            }
        }
        Decl::Interface(i) => {
            let mut methods = BTreeMap::new();
            for sig in &i.sigs {
                if methods.insert(&sig.name.text, ()).is_some() {
                    diags.push(duplicate("method", &sig.name.text, sig.name.span));
                }
                check_signature_names(sig, diags);
            }
        }
    }
}

fn check_signature_names(sig: &Signature, diags: &mut Vec<Diagnostic>) {
    let mut tparams = BTreeMap::new();
    for tp in &sig.type_params {
        if tparams.insert(&tp.name.text, ()).is_some() {
            diags.push(duplicate("type parameter", &tp.name.text, tp.name.span));
        }
    }
    let mut params = BTreeMap::new();
    for p in &sig.params {
        if p.name.text == "this" {
            diags.push(duplicate("parameter", "this", p.name.span));
            continue;
        }
        if params.insert(&p.name.text, ()).is_some() {
            diags.push(duplicate("parameter", &p.name.text, p.name.span));
        }
    }
}

/// Finds a method by name on a class or interface. Absence is a value;
/// callers diagnose.
pub fn lookup_method(table: &ClassTable, owner: &str, name: &str) -> Option<MethodEntry> {
    match table.get(owner)? {
        Decl::Class(c) => c
            .methods
            .iter()
            .find(|m| m.sig.name.text == name)
            .map(|m| MethodEntry {
                owner: owner.to_string(),
                sig: m.sig.clone(),
                body: Some(m.body.clone()),
            }),
        Decl::Interface(i) => i
            .sigs
            .iter()
            .find(|s| s.name.text == name)
            .map(|sig| MethodEntry {
                owner: owner.to_string(),
                sig: sig.clone(),
                body: None,
            }),
    }
}

/// Substitution of type variables by types.
pub type Subst = BTreeMap<String, TypeName>;

/// Builds the substitution for a method's type parameters applied to
/// the selector's type arguments.
pub fn selector_subst(sig: &Signature, sel: &MethodSelector) -> Subst {
    sig.type_params
        .iter()
        .zip(sel.type_args.iter())
        .map(|(tp, arg)| (tp.name.text.clone(), arg.clone()))
        .collect()
}

/// Capture-avoiding substitution over syntax. A signature's own type
/// parameters shield its components from an outer substitution.
pub trait Substitute {
    fn substitute(&self, subst: &Subst) -> Self;
}

impl Substitute for TypeName {
    fn substitute(&self, subst: &Subst) -> Self {
        match self.kind {
            TypeKind::Var => subst
                .get(&self.name.text)
                .cloned()
                .unwrap_or_else(|| self.clone()),
            TypeKind::Class => self.clone(),
        }
    }
}

impl Substitute for MethodSelector {
    fn substitute(&self, subst: &Subst) -> Self {
        MethodSelector {
            name: self.name.clone(),
            type_args: self.type_args.iter().map(|t| t.substitute(subst)).collect(),
        }
    }
}

impl Substitute for Effect {
    fn substitute(&self, subst: &Subst) -> Self {
        match self {
            Effect::Wildcard => Effect::Wildcard,
            Effect::Method { receiver, selector } => Effect::Method {
                receiver: receiver.substitute(subst),
                selector: selector.substitute(subst),
            },
        }
    }
}

impl Substitute for Expr {
    fn substitute(&self, subst: &Subst) -> Self {
        let kind = match &self.kind {
            ExprKind::Var(v) => ExprKind::Var(v.clone()),
            ExprKind::New { class, args } => ExprKind::New {
                class: class.clone(),
                args: args.iter().map(|a| a.substitute(subst)).collect(),
            },
            ExprKind::Field { recv, field } => ExprKind::Field {
                recv: Box::new(recv.substitute(subst)),
                field: field.clone(),
            },
            ExprKind::Call {
                recv,
                selector,
                args,
            } => ExprKind::Call {
                recv: Box::new(recv.substitute(subst)),
                selector: selector.substitute(subst),
                args: args.iter().map(|a| a.substitute(subst)).collect(),
            },
            ExprKind::Restrict { bound, body } => ExprKind::Restrict {
                bound: bound.iter().map(|e| e.substitute(subst)).collect(),
                body: Box::new(body.substitute(subst)),
            },
        };
        Expr::new(kind, self.span)
    }
}

impl Substitute for Signature {
    fn substitute(&self, subst: &Subst) -> Self {
        // This signature's binders shield their occurrences.
        let shielded: Subst = subst
            .iter()
            .filter(|(name, _)| !self.type_params.iter().any(|tp| &tp.name.text == *name))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        substitute_signature_components(self, &shielded)
    }
}

/// Applies `subst` to a signature's return type, parameter types, and
/// effects, leaving the type-parameter list untouched. Bounds are
/// class/interface names, so substitution cannot reach them.
fn substitute_signature_components(sig: &Signature, subst: &Subst) -> Signature {
    Signature {
        return_type: sig.return_type.substitute(subst),
        name: sig.name.clone(),
        type_params: sig.type_params.clone(),
        params: sig
            .params
            .iter()
            .map(|p| crate::syntax::Param {
                ty: p.ty.substitute(subst),
                name: p.name.clone(),
            })
            .collect(),
        effects: sig.effects.iter().map(|e| e.substitute(subst)).collect(),
    }
}

/// Selector-substituting lookup: the entry for `owner.name` with its
/// declared type parameters replaced by the selector's arguments. The
/// substitution is generated by the entry's own binder, so it applies
/// beneath it, unlike `Substitute` for signatures.
pub fn instantiate(
    table: &ClassTable,
    owner: &str,
    sel: &MethodSelector,
) -> Result<Option<MethodEntry>, Diagnostic> {
    let Some(entry) = lookup_method(table, owner, &sel.name.text) else {
        return Ok(None);
    };
    if entry.sig.type_params.len() != sel.type_args.len() {
        return Err(Diagnostic::new(
            Code::E103,
            format!(
                "method `{}.{}` takes {} type argument(s), got {}",
                owner,
                sel.name.text,
                entry.sig.type_params.len(),
                sel.type_args.len()
            ),
            sel.name.span,
        ));
    }
    if sel.type_args.is_empty() {
        return Ok(Some(entry));
    }
    let subst = selector_subst(&entry.sig, sel);
    Ok(Some(MethodEntry {
        owner: entry.owner,
        sig: substitute_signature_components(&entry.sig, &subst),
        body: entry.body.map(|b| b.substitute(&subst)),
    }))
}
