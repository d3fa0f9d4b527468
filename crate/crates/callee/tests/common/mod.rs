//! Shared helpers for the integration suites: corpus loading, an
//! independent bounded-depth derivation oracle for the sub-effect
//! relation, and the annotation closure used by the reduction suite.
#![allow(dead_code)]

use callee::classtable::{build_table, ClassTable};
use callee::syntax::{
    parse_program, Decl, Effect, Ident, MethodSelector, Program, Signature, TypeKind, TypeName,
};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub fn corpus_dir(kind: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/corpus")
        .join(kind)
}

pub fn corpus_files(kind: &str) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir(kind))
        .expect("corpus directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().map(|e| e == "cle").unwrap_or(false))
        .collect();
    files.sort();
    files
}

pub fn load(path: &Path) -> (String, Program, ClassTable) {
    let source = std::fs::read_to_string(path).expect("readable corpus file");
    let program = parse_program(&source).expect("parseable corpus file");
    let table = build_table(&program).expect("buildable corpus table");
    (source, program, table)
}

pub fn class(name: &str) -> TypeName {
    TypeName::class(Ident::synthetic(name))
}

pub fn var(name: &str) -> TypeName {
    TypeName::var(Ident::synthetic(name))
}

pub fn eff(recv: &TypeName, m: &str) -> Effect {
    Effect::method(recv.clone(), MethodSelector::plain(m))
}

// ---------------------------------------------------------------------------
// Independent derivation oracle
// ---------------------------------------------------------------------------

/// Brute-force enumeration of sub-effect derivations up to a depth
/// bound, written directly against the declarative rules and the raw
/// program declarations. It shares no code with the library's search:
/// its own subtyping, its own substitution, its own lookup.
///
/// Goals are canonicalized to sets (the reflexivity rule makes order
/// and duplication irrelevant) over a finite effect universe, encoded
/// as bitmasks. One depth level is one rule application:
/// reflexivity, the empty list, the wildcard, receiver covariance,
/// the annotation rule, recombination of two sub-derivations, and
/// transitivity through any intermediate set.
pub struct Oracle<'a> {
    program: &'a Program,
    bounds: BTreeMap<String, String>,
    universe: Vec<Effect>,
    /// Flat memo over (lhs mask, rhs mask, depth); 0 unknown, 1 false,
    /// 2 true.
    memo: Vec<u8>,
    max_depth: u8,
}

impl<'a> Oracle<'a> {
    pub fn new(program: &'a Program, bounds: BTreeMap<String, String>, seed: &[Effect]) -> Self {
        let mut oracle = Oracle {
            program,
            bounds,
            universe: vec![Effect::Wildcard],
            memo: Vec::new(),
            max_depth: 0,
        };
        for e in seed {
            oracle.add_to_universe(e.clone());
        }
        oracle.close_universe();
        assert!(
            oracle.universe.len() <= 8,
            "oracle universe too large: {:?}",
            oracle.universe
        );
        oracle
    }

    fn add_to_universe(&mut self, e: Effect) {
        if !self.universe.contains(&e) {
            self.universe.push(e);
        }
    }

    /// Closes the universe under receiver covariance and substituted
    /// annotations, so every derivation step stays representable.
    fn close_universe(&mut self) {
        loop {
            let mut added = Vec::new();
            for e in &self.universe {
                let Effect::Method { receiver, selector } = e else {
                    continue;
                };
                for sup in self.subtype_targets(receiver) {
                    let lifted = Effect::Method {
                        receiver: sup.clone(),
                        selector: selector.clone(),
                    };
                    if !self.universe.contains(&lifted) && !added.contains(&lifted) {
                        added.push(lifted);
                    }
                    if sup.kind == TypeKind::Class {
                        if let Some(ann) = self.substituted_annotation(&sup.name.text, selector) {
                            for a in ann {
                                if !self.universe.contains(&a) && !added.contains(&a) {
                                    added.push(a);
                                }
                            }
                        }
                    }
                }
            }
            if added.is_empty() {
                break;
            }
            self.universe.extend(added);
        }
    }

    fn find_decl(&self, name: &str) -> Option<&'a Decl> {
        self.program.decls.iter().find(|d| d.name().text == name)
    }

    fn resolve(&self, t: &TypeName) -> Option<String> {
        match t.kind {
            TypeKind::Class => Some(t.name.text.clone()),
            TypeKind::Var => self.bounds.get(&t.name.text).cloned(),
        }
    }

    /// `t` and every type it is a subtype of, per the subtyping rules:
    /// itself, what it resolves to, and the interfaces that resolvent
    /// implements.
    pub fn subtype_targets(&self, t: &TypeName) -> Vec<TypeName> {
        let mut out = vec![t.clone()];
        let Some(resolved) = self.resolve(t) else {
            return out;
        };
        let as_class = TypeName::class(Ident::synthetic(&resolved));
        if !out.contains(&as_class) {
            out.push(as_class);
        }
        if let Some(Decl::Class(c)) = self.find_decl(&resolved) {
            for i in &c.interfaces {
                let iface = TypeName::class(i.clone());
                if !out.contains(&iface) {
                    out.push(iface);
                }
            }
        }
        out
    }

    fn oracle_subtype(&self, t: &TypeName, u: &TypeName) -> bool {
        self.subtype_targets(t).contains(u)
    }

    fn signature_of(&self, owner: &str, method: &str) -> Option<&'a Signature> {
        match self.find_decl(owner)? {
            Decl::Class(c) => c
                .methods
                .iter()
                .find(|m| m.sig.name.text == method)
                .map(|m| &m.sig),
            Decl::Interface(i) => i.sigs.iter().find(|s| s.name.text == method),
        }
    }

    fn substituted_annotation(
        &self,
        owner: &str,
        selector: &MethodSelector,
    ) -> Option<Vec<Effect>> {
        let sig = self.signature_of(owner, &selector.name.text)?;
        if sig.type_params.len() != selector.type_args.len() {
            return None;
        }
        let map: BTreeMap<&str, &TypeName> = sig
            .type_params
            .iter()
            .zip(&selector.type_args)
            .map(|(tp, arg)| (tp.name.text.as_str(), arg))
            .collect();
        let subst_ty = |t: &TypeName| -> TypeName {
            match t.kind {
                TypeKind::Var => map
                    .get(t.name.text.as_str())
                    .cloned()
                    .cloned()
                    .unwrap_or_else(|| t.clone()),
                TypeKind::Class => t.clone(),
            }
        };
        Some(
            sig.effects
                .iter()
                .map(|e| match e {
                    Effect::Wildcard => Effect::Wildcard,
                    Effect::Method { receiver, selector } => Effect::Method {
                        receiver: subst_ty(receiver),
                        selector: MethodSelector {
                            name: selector.name.clone(),
                            type_args: selector.type_args.iter().map(&subst_ty).collect(),
                        },
                    },
                })
                .collect(),
        )
    }

    fn index_of(&self, e: &Effect) -> Option<usize> {
        self.universe.iter().position(|u| u == e)
    }

    fn mask_of(&self, effects: &[Effect]) -> Option<u32> {
        let mut mask = 0u32;
        for e in effects {
            mask |= 1 << self.index_of(e)?;
        }
        Some(mask)
    }

    fn memo_index(&self, a: u32, b: u32, depth: u8) -> usize {
        let n = self.universe.len();
        ((a as usize) << n | b as usize) * (self.max_depth as usize + 1) + depth as usize
    }

    /// Whether a derivation of `lhs` below `rhs` exists within `depth`
    /// rule applications. `None` when a queried effect escapes the
    /// universe (a fixture bug, not a judgement).
    pub fn derivable(&mut self, lhs: &[Effect], rhs: &[Effect], depth: u8) -> Option<bool> {
        let a = self.mask_of(lhs)?;
        let b = self.mask_of(rhs)?;
        if depth != self.max_depth {
            self.max_depth = depth;
            self.memo.clear();
        }
        let n = self.universe.len();
        let want = (1usize << (2 * n)) * (depth as usize + 1);
        if self.memo.len() != want {
            self.memo = vec![0u8; want];
        }
        Some(self.search(a, b, depth))
    }

    fn search(&mut self, a: u32, b: u32, depth: u8) -> bool {
        if depth == 0 {
            return false;
        }
        if a == b {
            return true; // reflexivity (with order/duplication free)
        }
        if a == 0 {
            return true; // the empty list is below everything
        }
        let star = 1u32
            << self
                .index_of(&Effect::Wildcard)
                .expect("wildcard in universe");
        if b == star {
            return true; // everything is below the wildcard
        }
        let idx = self.memo_index(a, b, depth);
        match self.memo[idx] {
            1 => return false,
            2 => return true,
            _ => {}
        }
        let result = self.search_rules(a, b, depth);
        self.memo[idx] = if result { 2 } else { 1 };
        result
    }

    fn search_rules(&mut self, a: u32, b: u32, depth: u8) -> bool {
        // Covariance: singleton to singleton on the same selector.
        if a.count_ones() == 1 && b.count_ones() == 1 {
            let ea = self.universe[a.trailing_zeros() as usize].clone();
            let eb = self.universe[b.trailing_zeros() as usize].clone();
            if let (
                Effect::Method {
                    receiver: ra,
                    selector: sa,
                },
                Effect::Method {
                    receiver: rb,
                    selector: sb,
                },
            ) = (&ea, &eb)
            {
                if sa == sb && self.oracle_subtype(ra, rb) {
                    return true;
                }
            }
        }
        // Annotation rule: a declared method is below exactly its
        // substituted annotation.
        if a.count_ones() == 1 {
            let ea = self.universe[a.trailing_zeros() as usize].clone();
            if let Effect::Method { receiver, selector } = &ea {
                if receiver.kind == TypeKind::Class {
                    if let Some(ann) = self.substituted_annotation(&receiver.name.text, selector) {
                        if let Some(ann_mask) = self.mask_of(&ann) {
                            if ann_mask == b {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        // Recombination: split both sides into covering pairs.
        if a.count_ones() + b.count_ones() <= 8 {
            let mut a1 = a;
            loop {
                let a2_base = a & !a1;
                let mut extra = a1;
                loop {
                    let a2 = a2_base | extra;
                    let mut b1 = b;
                    loop {
                        let b2_base = b & !b1;
                        let mut bextra = b1;
                        loop {
                            let b2 = b2_base | bextra;
                            let degenerate = (a1 == a && b1 == b && a2 == a && b2 == b)
                                || (a1 == a && b1 == b && a2 == 0 && b2 == 0)
                                || (a2 == a && b2 == b && a1 == 0 && b1 == 0);
                            if !degenerate
                                && self.search(a1, b1, depth - 1)
                                && self.search(a2, b2, depth - 1)
                            {
                                return true;
                            }
                            if bextra == 0 {
                                break;
                            }
                            bextra = (bextra - 1) & b1;
                        }
                        if b1 == 0 {
                            break;
                        }
                        b1 = (b1 - 1) & b;
                    }
                    if extra == 0 {
                        break;
                    }
                    extra = (extra - 1) & a1;
                }
                if a1 == 0 {
                    break;
                }
                a1 = (a1 - 1) & a;
            }
        }
        // Transitivity through any intermediate set.
        let n = self.universe.len();
        for m in 0..(1u32 << n) {
            if m == a || m == b {
                continue;
            }
            if self.search(a, m, depth - 1) && self.search(m, b, depth - 1) {
                return true;
            }
        }
        false
    }
}

// ---------------------------------------------------------------------------
// Annotation closure
// ---------------------------------------------------------------------------

/// The least effect set containing `seed` and, for every method effect
/// in it, the substituted annotations of that method's declarations on
/// the receiver and its supertypes. Everything an execution of an
/// expression with effects `seed` can call is a sub-effect of this set.
pub fn annotation_closure(table: &ClassTable, seed: &[Effect]) -> Vec<Effect> {
    let env = callee::classtable::TypeEnv::new();
    let mut closure: Vec<Effect> = Vec::new();
    let mut work: Vec<Effect> = seed.to_vec();
    while let Some(e) = work.pop() {
        if closure.contains(&e) {
            continue;
        }
        closure.push(e.clone());
        let Effect::Method { receiver, selector } = &e else {
            continue;
        };
        let Ok(names) = callee::relations::supertypes(table, &env, receiver) else {
            continue;
        };
        for owner in names {
            if let Ok(Some(entry)) = callee::classtable::instantiate(table, &owner, selector) {
                for a in entry.sig.effects {
                    if !closure.contains(&a) {
                        work.push(a);
                    }
                }
            }
        }
    }
    closure.sort();
    closure
}

// ---------------------------------------------------------------------------
// Oracle fixtures: small tables within the enumeration budget
// ---------------------------------------------------------------------------

pub struct OracleFixture {
    pub name: &'static str,
    pub source: &'static str,
    /// Type-variable bounds the queries run under.
    pub bounds: &'static [(&'static str, &'static str)],
    /// The effects queries draw from (the wildcard is implicit).
    pub universe: fn() -> Vec<Effect>,
}

pub const CONSOLE_SRC: &str = "class Unit() { }
class Console() {
    Unit print(Unit c) effect[Console.print] = c;
    Unit printStr(Unit s) effect[Console.print] = this.print(s);
    Unit printLine(Unit s) effect[Console.printStr] = this.printStr(s);
}";

pub const DISPATCH_SRC: &str = "class Unit() { }
class UI() {
    Unit setPixel(Unit p) effect[UI.setPixel] = p;
}
interface UIElement {
    Unit paint() effect[UI.setPixel];
    UIElement child() effect[];
}
class EmptyElement(): UIElement {
    Unit paint() effect[] = new Unit();
    UIElement child() effect[] = this;
}";

pub const GENERIC_SRC: &str = "class Int() { }
class Random() {
    Int generate() effect[Random.generate] = new Int();
}
interface Hashable {
    Int hash() effect[*];
}
class RandomHashable(): Hashable {
    Int hash() effect[Random.generate] = new Random().generate();
}";

pub const PERMISSION_SRC: &str = "class Unit() { }
interface Permission {
    Unit modify() effect[Permission.modify];
}
class AdPermission(): Permission {
    Unit modify() effect[Permission.modify] = new Unit();
}
class Sidebar() {
    Unit set(Unit w) effect[Permission.modify] = w;
}";

pub fn oracle_fixtures() -> Vec<OracleFixture> {
    vec![
        OracleFixture {
            name: "console",
            source: CONSOLE_SRC,
            bounds: &[],
            universe: || {
                vec![
                    eff(&class("Console"), "print"),
                    eff(&class("Console"), "printStr"),
                    eff(&class("Console"), "printLine"),
                    Effect::Wildcard,
                ]
            },
        },
        OracleFixture {
            name: "dispatch",
            source: DISPATCH_SRC,
            bounds: &[],
            universe: || {
                vec![
                    eff(&class("UI"), "setPixel"),
                    eff(&class("UIElement"), "paint"),
                    eff(&class("UIElement"), "child"),
                    eff(&class("EmptyElement"), "paint"),
                    eff(&class("EmptyElement"), "child"),
                    Effect::Wildcard,
                ]
            },
        },
        OracleFixture {
            name: "generic",
            source: GENERIC_SRC,
            bounds: &[("K", "RandomHashable")],
            universe: || {
                vec![
                    eff(&var("K"), "hash"),
                    eff(&class("RandomHashable"), "hash"),
                    eff(&class("Hashable"), "hash"),
                    eff(&class("Random"), "generate"),
                    Effect::Wildcard,
                ]
            },
        },
        OracleFixture {
            name: "permission",
            source: PERMISSION_SRC,
            bounds: &[],
            universe: || {
                vec![
                    eff(&class("Permission"), "modify"),
                    eff(&class("AdPermission"), "modify"),
                    eff(&class("Sidebar"), "set"),
                    Effect::Wildcard,
                ]
            },
        },
    ]
}

/// All lists over `universe` of length 0, 1, or 2 (unordered, no
/// repeats), used as query sides.
pub fn query_lists(universe: &[Effect]) -> Vec<Vec<Effect>> {
    let mut out = vec![Vec::new()];
    for (i, a) in universe.iter().enumerate() {
        out.push(vec![a.clone()]);
        for b in &universe[i + 1..] {
            out.push(vec![a.clone(), b.clone()]);
        }
    }
    out
}
