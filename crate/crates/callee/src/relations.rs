//! Subtyping, the sub-effect relation, effect well-formedness, and the
//! effect annotation graph.
//!
//! The sub-effect rules are declarative (transitivity plus free list
//! recombination), so derivability here is computed as a least fixed
//! point: a list is a sub-effect of another when every element is, and
//! a single effect `T.m` is below a set `R` when
//!
//!   1. `R` contains the wildcard, or
//!   2. some supertype `T'` of `T` has `T'.m` in `R` (type arguments
//!      compared structurally), or
//!   3. some supertype `T'` of `T` declares `m`, and every element of
//!      the substituted annotation of `T'.m` is recursively below `R`.
//!
//! Goals already on the search path count as failed, which is exactly
//! the least-fixed-point reading and makes self-referential annotations
//! like `print effect[Console.print]` behave: the cycle branch dies and
//! only genuine derivations survive. Successful goals are memoized per
//! query; failures are not cached since they may be path-dependent.

use crate::classtable::{instantiate, ClassTable, TypeEnv};
use crate::diag::{Code, Diagnostic};
use crate::syntax::{print_effect, Decl, Effect, EffectList, Ident, TypeKind, TypeName, TypeParam};
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

/// Class/interface names `t` is a subtype of: `t` itself when it is a
/// class name, the bound it resolves to, and the interfaces implemented
/// by that bound. Declared interface order is preserved.
pub fn supertypes(
    table: &ClassTable,
    env: &TypeEnv,
    t: &TypeName,
) -> Result<Vec<String>, Diagnostic> {
    let resolved = env.resolve(t).ok_or_else(|| {
        Diagnostic::new(
            Code::E101,
            format!("unknown type `{}`", t.name.text),
            t.span(),
        )
    })?;
    if !table.contains(resolved) {
        return Err(Diagnostic::new(
            Code::E101,
            format!("unknown type `{resolved}`"),
            t.span(),
        ));
    }
    let mut out = vec![resolved.to_string()];
    for iface in table.interfaces_of(resolved) {
        if !out.iter().any(|n| n == &iface.text) {
            out.push(iface.text.clone());
        }
    }
    Ok(out)
}

/// `t <= u`: reflexivity, or `u` among `t`'s supertypes.
pub fn is_subtype(table: &ClassTable, env: &TypeEnv, t: &TypeName, u: &TypeName) -> bool {
    if t == u {
        return true;
    }
    if u.kind != TypeKind::Class {
        return false;
    }
    match supertypes(table, env, t) {
        Ok(names) => names.iter().any(|n| n == &u.name.text),
        Err(_) => false,
    }
}

/// The supertypes of `t` as type names, including `t` itself first.
fn supertype_types(table: &ClassTable, env: &TypeEnv, t: &TypeName) -> Vec<TypeName> {
    let mut out = vec![t.clone()];
    if let Ok(names) = supertypes(table, env, t) {
        for n in names {
            let tn = TypeName::class(Ident::synthetic(&n));
            if !out.contains(&tn) {
                out.push(tn);
            }
        }
    }
    out
}

#[derive(PartialEq)]
enum GoalState {
    InProgress,
    Proved,
}

struct SubEffectSearch<'a> {
    table: &'a ClassTable,
    env: &'a TypeEnv,
    rhs: BTreeSet<Effect>,
    rhs_has_wildcard: bool,
    memo: HashMap<Effect, GoalState>,
}

impl<'a> SubEffectSearch<'a> {
    fn goal(&mut self, e: &Effect) -> bool {
        if self.rhs_has_wildcard {
            return true;
        }
        let Effect::Method { .. } = e else {
            // A wildcard on the left is only below a set containing `*`.
            return false;
        };
        match self.memo.get(e) {
            Some(GoalState::Proved) => return true,
            Some(GoalState::InProgress) => return false,
            None => {}
        }
        self.memo.insert(e.clone(), GoalState::InProgress);
        let ok = self.goal_method(e);
        if ok {
            self.memo.insert(e.clone(), GoalState::Proved);
        } else {
            // Failure may depend on the goals currently on the path.
            self.memo.remove(e);
        }
        ok
    }

    fn goal_method(&mut self, e: &Effect) -> bool {
        let Effect::Method { receiver, selector } = e else {
            unreachable!()
        };
        let supers = supertype_types(self.table, self.env, receiver);
        // Membership through covariance on the receiver.
        for s in &supers {
            let candidate = Effect::Method {
                receiver: s.clone(),
                selector: selector.clone(),
            };
            if self.rhs.contains(&candidate) {
                return true;
            }
        }
        // The annotation of any declaration of the method on a
        // supertype bounds the effect itself.
        for s in &supers {
            if s.kind != TypeKind::Class {
                continue;
            }
            let Ok(Some(entry)) = instantiate(self.table, &s.name.text, selector) else {
                continue;
            };
            let annotation = entry.sig.effects.clone();
            if annotation.iter().all(|a| self.goal(a)) {
                return true;
            }
        }
        false
    }
}

/// Decides the sub-effect judgement for effect lists. Every effect is
/// assumed well-formed under `env`.
pub fn is_subeffect(table: &ClassTable, env: &TypeEnv, lhs: &[Effect], rhs: &[Effect]) -> bool {
    let rhs_set: BTreeSet<Effect> = rhs.iter().cloned().collect();
    let mut search = SubEffectSearch {
        table,
        env,
        rhs_has_wildcard: rhs_set.contains(&Effect::Wildcard),
        rhs: rhs_set,
        memo: HashMap::new(),
    };
    lhs.iter().all(|e| search.goal(e))
}

/// Checks that an effect is well-formed: the receiver resolves to a
/// declaration, the method exists with matching type-argument arity,
/// and every type argument satisfies its declared bound.
pub fn effect_wf(table: &ClassTable, env: &TypeEnv, e: &Effect) -> Result<(), Diagnostic> {
    let Effect::Method { receiver, selector } = e else {
        return Ok(());
    };
    let owner = match env.resolve(receiver) {
        Some(name) if table.contains(name) => name.to_string(),
        _ => {
            return Err(Diagnostic::new(
                Code::E101,
                format!("unknown type `{}`", receiver.name.text),
                receiver.span(),
            ))
        }
    };
    let Some(entry) = crate::classtable::lookup_method(table, &owner, &selector.name.text) else {
        return Err(Diagnostic::new(
            Code::E104,
            format!("no method `{}` on `{owner}`", selector.name.text),
            selector.name.span,
        ));
    };
    if entry.sig.type_params.len() != selector.type_args.len() {
        return Err(Diagnostic::new(
            Code::E103,
            format!(
                "method `{}.{}` takes {} type argument(s), got {}",
                owner,
                selector.name.text,
                entry.sig.type_params.len(),
                selector.type_args.len()
            ),
            selector.name.span,
        ));
    }
    for arg in &selector.type_args {
        if env.resolve(arg).map(|n| table.contains(n)) != Some(true) {
            return Err(Diagnostic::new(
                Code::E101,
                format!("unknown type `{}`", arg.name.text),
                arg.span(),
            ));
        }
    }
    for (arg, tp) in selector.type_args.iter().zip(&entry.sig.type_params) {
        let bound = TypeName::class(tp.bound.clone());
        if !is_subtype(table, env, arg, &bound) {
            return Err(Diagnostic::new(
                Code::E105,
                format!(
                    "type argument `{}` does not satisfy bound `{}` of `{}.{}`",
                    arg.name.text, tp.bound.text, owner, selector.name.text
                ),
                arg.span(),
            ));
        }
    }
    Ok(())
}

/// A declared method in the effect graph.
#[derive(Debug, Clone)]
pub struct EffectNode {
    pub owner: String,
    pub name: String,
    pub type_params: Vec<TypeParam>,
    pub effects: EffectList,
}

impl EffectNode {
    pub fn label(&self) -> String {
        format!("{}.{}", self.owner, self.name)
    }
}

/// The graph of effect annotations: one node per declared method, one
/// edge per annotation element (the wildcard is a shared sink).
#[derive(Debug, Clone, Default)]
pub struct EffectGraph {
    pub nodes: Vec<EffectNode>,
    pub edges: Vec<(String, String)>,
}

/// Builds the annotation graph from signatures alone; bodies are never
/// consulted. Nodes are ordered by (owner, name).
pub fn effect_graph(table: &ClassTable) -> EffectGraph {
    let mut nodes = Vec::new();
    for decl in table.decls() {
        let (owner, sigs): (&str, Vec<&crate::syntax::Signature>) = match decl {
            Decl::Class(c) => (&c.name.text, c.methods.iter().map(|m| &m.sig).collect()),
            Decl::Interface(i) => (&i.name.text, i.sigs.iter().collect()),
        };
        for sig in sigs {
            nodes.push(EffectNode {
                owner: owner.to_string(),
                name: sig.name.text.clone(),
                type_params: sig.type_params.clone(),
                effects: sig.effects.clone(),
            });
        }
    }
    nodes.sort_by(|a, b| (&a.owner, &a.name).cmp(&(&b.owner, &b.name)));
    let mut edges = Vec::new();
    for node in &nodes {
        for eff in &node.effects {
            edges.push((node.label(), print_effect(eff)));
        }
    }
    EffectGraph { nodes, edges }
}

impl EffectGraph {
    /// One `Owner.name effect[...]` line per node.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        for node in &self.nodes {
            let _ = writeln!(
                out,
                "{} effect[{}]",
                node.label(),
                crate::syntax::print_effect_list(&node.effects)
            );
        }
        out
    }

    /// DOT rendering with quoted `Owner.name` nodes and deterministic
    /// edge order; the wildcard sink is declared only when referenced.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph effects {\n");
        for node in &self.nodes {
            let _ = writeln!(out, "    \"{}\";", node.label());
        }
        if self.edges.iter().any(|(_, to)| to == "*") {
            out.push_str("    \"*\";\n");
        }
        for (from, to) in &self.edges {
            let _ = writeln!(out, "    \"{from}\" -> \"{to}\";");
        }
        out.push_str("}\n");
        out
    }
}
