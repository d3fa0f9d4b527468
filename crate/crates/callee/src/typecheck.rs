//! Expression typing with effects, method-body checking, interface
//! refinement, and declaration well-formedness.
//!
//! Typing is algorithmic: every expression gets its minimal type, and
//! subsumption becomes explicit subtype checks at `new` arguments, call
//! arguments, and method returns. The recorded effect of a call names
//! the receiver's minimal static type, which keeps computed effect
//! lists least.

use crate::classtable::{instantiate, ClassTable, TypeEnv, VarEnv};
use crate::diag::{sort_diagnostics, Code, Diagnostic, Span};
use crate::relations::{effect_wf, is_subeffect, is_subtype};
use crate::syntax::{
    print_effect_list, print_type, ClassDecl, Decl, Effect, EffectList, Expr, ExprKind, Ident,
    Method, Program, Signature, TypeKind, TypeName,
};

/// The result of typing an expression: its minimal type and its
/// effects in evaluation order (one per call node).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedExpr {
    pub ty: TypeName,
    pub effects: EffectList,
}

/// Types an expression. Effects are the receiver's, then each
/// argument's left to right, then the called method itself.
pub fn type_of(
    table: &ClassTable,
    env: &TypeEnv,
    vars: &VarEnv,
    e: &Expr,
) -> Result<TypedExpr, Diagnostic> {
    match &e.kind {
        ExprKind::Var(name) => match vars.get(&name.text) {
            Some(ty) => Ok(TypedExpr {
                ty: ty.clone(),
                effects: Vec::new(),
            }),
            None => Err(Diagnostic::new(
                Code::E110,
                format!("unbound variable `{}`", name.text),
                e.span,
            )),
        },
        ExprKind::New { class, args } => {
            let decl = table.get(&class.text).ok_or_else(|| {
                Diagnostic::new(
                    Code::E101,
                    format!("unknown type `{}`", class.text),
                    class.span,
                )
            })?;
            let Decl::Class(c) = decl else {
                return Err(Diagnostic::new(
                    Code::E107,
                    format!("cannot instantiate interface `{}`", class.text),
                    class.span,
                ));
            };
            if c.fields.len() != args.len() {
                return Err(Diagnostic::new(
                    Code::E201,
                    format!(
                        "class `{}` has {} field(s), got {} argument(s)",
                        class.text,
                        c.fields.len(),
                        args.len()
                    ),
                    e.span,
                ));
            }
            let mut effects = Vec::new();
            for (arg, field) in args.iter().zip(&c.fields) {
                let typed = type_of(table, env, vars, arg)?;
                let field_ty = TypeName::class(field.ty.clone());
                if !is_subtype(table, env, &typed.ty, &field_ty) {
                    return Err(Diagnostic::new(
                        Code::E201,
                        format!(
                            "argument of type `{}` is not a subtype of field type `{}`",
                            print_type(&typed.ty),
                            field.ty.text
                        ),
                        arg.span,
                    ));
                }
                effects.extend(typed.effects);
            }
            Ok(TypedExpr {
                ty: TypeName::class(class.clone()),
                effects,
            })
        }
        ExprKind::Field { recv, field } => {
            let typed = type_of(table, env, vars, recv)?;
            let class = match (&typed.ty.kind, table.get(&typed.ty.name.text)) {
                (TypeKind::Class, Some(Decl::Class(c))) => c,
                _ => {
                    return Err(Diagnostic::new(
                        Code::E111,
                        format!("field access on non-class type `{}`", print_type(&typed.ty)),
                        field.span,
                    ))
                }
            };
            let Some(f) = class.fields.iter().find(|f| f.name.text == field.text) else {
                return Err(Diagnostic::new(
                    Code::E111,
                    format!(
                        "no field `{}` on class `{}`",
                        field.text, typed.ty.name.text
                    ),
                    field.span,
                ));
            };
            Ok(TypedExpr {
                ty: TypeName::class(f.ty.clone()),
                effects: typed.effects,
            })
        }
        ExprKind::Call {
            recv,
            selector,
            args,
        } => {
            let recv_typed = type_of(table, env, vars, recv)?;
            // Record the call at the receiver's minimal type, re-spanned
            // to the call site so diagnostics point here.
            let receiver_ty = TypeName {
                kind: recv_typed.ty.kind,
                name: Ident::new(recv_typed.ty.name.text.clone(), recv.span),
            };
            let call_effect = Effect::Method {
                receiver: receiver_ty.clone(),
                selector: selector.clone(),
            };
            effect_wf(table, env, &call_effect)?;
            let owner = env.resolve(&receiver_ty).expect("validated by effect_wf");
            let entry = instantiate(table, owner, selector)?.expect("validated by effect_wf");
            if entry.sig.params.len() != args.len() {
                return Err(Diagnostic::new(
                    Code::E201,
                    format!(
                        "method `{}.{}` takes {} argument(s), got {}",
                        owner,
                        selector.name.text,
                        entry.sig.params.len(),
                        args.len()
                    ),
                    e.span,
                ));
            }
            let mut effects = recv_typed.effects;
            for (arg, param) in args.iter().zip(&entry.sig.params) {
                let typed = type_of(table, env, vars, arg)?;
                if !is_subtype(table, env, &typed.ty, &param.ty) {
                    return Err(Diagnostic::new(
                        Code::E201,
                        format!(
                            "argument of type `{}` is not a subtype of parameter type `{}`",
                            print_type(&typed.ty),
                            print_type(&param.ty)
                        ),
                        arg.span,
                    ));
                }
                effects.extend(typed.effects);
            }
            effects.push(call_effect);
            Ok(TypedExpr {
                ty: entry.sig.return_type,
                effects,
            })
        }
        ExprKind::Restrict { bound, body } => {
            for b in bound {
                effect_wf(table, env, b)?;
            }
            let typed = type_of(table, env, vars, body)?;
            if !is_subeffect(table, env, &typed.effects, bound) {
                return Err(Diagnostic::new(
                    Code::E204,
                    format!(
                        "expression effects [{}] are not sub-effects of the restrict bound [{}]",
                        print_effect_list(&typed.effects),
                        print_effect_list(bound)
                    ),
                    e.span,
                ));
            }
            Ok(typed)
        }
    }
}

/// Signature well-formedness: bounds, return, parameter, and effect
/// types all resolve under the signature's own type environment.
fn check_signature_wf(table: &ClassTable, sig: &Signature) -> Vec<Diagnostic> {
    let env = TypeEnv::for_signature(sig);
    let mut diags = Vec::new();
    let check_type = |t: &TypeName, diags: &mut Vec<Diagnostic>| {
        if env.resolve(t).map(|n| table.contains(n)) != Some(true) {
            diags.push(Diagnostic::new(
                Code::E101,
                format!("unknown type `{}`", t.name.text),
                t.span(),
            ));
        }
    };
    for tp in &sig.type_params {
        if !table.contains(&tp.bound.text) {
            diags.push(Diagnostic::new(
                Code::E101,
                format!("unknown type `{}`", tp.bound.text),
                tp.bound.span,
            ));
        }
    }
    check_type(&sig.return_type, &mut diags);
    for p in &sig.params {
        check_type(&p.ty, &mut diags);
    }
    for e in &sig.effects {
        if let Err(d) = effect_wf(table, &env, e) {
            diags.push(d);
        }
    }
    diags
}

/// Checks one method implementation: signature well-formedness, then
/// the body under `this` and the parameters, then the return subtype
/// and the effect annotation.
pub fn check_method(
    table: &ClassTable,
    owner: &Ident,
    sig: &Signature,
    body: &Expr,
) -> Vec<Diagnostic> {
    let mut diags = check_signature_wf(table, sig);
    if !diags.is_empty() {
        return diags;
    }
    let env = TypeEnv::for_signature(sig);
    let mut vars = VarEnv::new();
    vars.insert("this".to_string(), TypeName::class(owner.clone()));
    for p in &sig.params {
        vars.insert(p.name.text.clone(), p.ty.clone());
    }
    let typed = match type_of(table, &env, &vars, body) {
        Ok(t) => t,
        Err(d) => {
            diags.push(d);
            return diags;
        }
    };
    if !is_subtype(table, &env, &typed.ty, &sig.return_type) {
        diags.push(Diagnostic::new(
            Code::E201,
            format!(
                "method body has type `{}`, expected a subtype of `{}`",
                print_type(&typed.ty),
                print_type(&sig.return_type)
            ),
            body.span,
        ));
    }
    if !is_subeffect(table, &env, &typed.effects, &sig.effects) {
        diags.push(Diagnostic::new(
            Code::E202,
            format!(
                "method body has effects [{}] exceeding its annotation [{}]",
                print_effect_list(&typed.effects),
                print_effect_list(&sig.effects)
            ),
            body.span,
        ));
    }
    diags
}

/// Checks that a class method refines an interface signature: covariant
/// return, contravariant parameter types and bounds, sub-effects — all
/// judged under the interface's type environment after aligning the
/// class method's type-parameter names with the interface's.
pub fn check_refinement(
    table: &ClassTable,
    class: &ClassDecl,
    iface_sig: &Signature,
    iface_name: &str,
) -> Vec<Diagnostic> {
    let missing = |span: Span| {
        vec![Diagnostic::new(
            Code::E205,
            format!(
                "class `{}` does not implement `{}.{}`",
                class.name.text, iface_name, iface_sig.name.text
            ),
            span,
        )]
    };
    let Some(method) = class
        .methods
        .iter()
        .find(|m| m.sig.name.text == iface_sig.name.text)
    else {
        return missing(class.name.span);
    };
    let class_sig = &method.sig;
    if class_sig.type_params.len() != iface_sig.type_params.len()
        || class_sig.params.len() != iface_sig.params.len()
    {
        return missing(method.sig.name.span);
    }
    // Align the class method's type-parameter names with the
    // interface's; bounds keep their declared, positional pairing.
    let mut rename = crate::classtable::Subst::new();
    for (ctp, itp) in class_sig.type_params.iter().zip(&iface_sig.type_params) {
        rename.insert(
            ctp.name.text.clone(),
            TypeName::var(Ident::new(itp.name.text.clone(), ctp.name.span)),
        );
    }
    let renamed = Signature {
        return_type: crate::classtable::Substitute::substitute(&class_sig.return_type, &rename),
        name: class_sig.name.clone(),
        type_params: iface_sig.type_params.clone(),
        params: class_sig
            .params
            .iter()
            .map(|p| crate::syntax::Param {
                ty: crate::classtable::Substitute::substitute(&p.ty, &rename),
                name: p.name.clone(),
            })
            .collect(),
        effects: class_sig
            .effects
            .iter()
            .map(|e| crate::classtable::Substitute::substitute(e, &rename))
            .collect(),
    };
    let env = TypeEnv::for_signature(iface_sig);
    let mut diags = Vec::new();
    let fail = |what: &str, span: Span, diags: &mut Vec<Diagnostic>| {
        diags.push(Diagnostic::new(
            Code::E203,
            format!(
                "{what} of `{}.{}` does not refine `{}.{}`",
                class.name.text, class_sig.name.text, iface_name, iface_sig.name.text
            ),
            span,
        ));
    };
    if !is_subtype(table, &env, &renamed.return_type, &iface_sig.return_type) {
        fail("return type", class_sig.return_type.span(), &mut diags);
    }
    for ((ipar, cpar), orig) in iface_sig
        .params
        .iter()
        .zip(&renamed.params)
        .zip(&class_sig.params)
    {
        if !is_subtype(table, &env, &ipar.ty, &cpar.ty) {
            fail("parameter type", orig.ty.span(), &mut diags);
        }
    }
    for (itp, ctp) in iface_sig.type_params.iter().zip(&class_sig.type_params) {
        let ibound = TypeName::class(itp.bound.clone());
        let cbound = TypeName::class(ctp.bound.clone());
        if !is_subtype(table, &env, &ibound, &cbound) {
            fail("type-parameter bound", ctp.bound.span, &mut diags);
        }
    }
    if !is_subeffect(table, &env, &renamed.effects, &iface_sig.effects) {
        fail("effect annotation", class_sig.name.span, &mut diags);
    }
    diags
}

/// Checks a whole declaration: field types, implemented interfaces,
/// every method, and refinement of every interface signature.
pub fn check_decl(table: &ClassTable, d: &Decl) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    match d {
        Decl::Class(c) => {
            for f in &c.fields {
                if !table.contains(&f.ty.text) {
                    diags.push(Diagnostic::new(
                        Code::E101,
                        format!("unknown type `{}`", f.ty.text),
                        f.ty.span,
                    ));
                }
            }
            for iface in &c.interfaces {
                match table.get(&iface.text) {
                    None => diags.push(Diagnostic::new(
                        Code::E101,
                        format!("unknown type `{}`", iface.text),
                        iface.span,
                    )),
                    Some(Decl::Class(_)) => diags.push(Diagnostic::new(
                        Code::E106,
                        format!("`{}` is not an interface", iface.text),
                        iface.span,
                    )),
                    Some(Decl::Interface(i)) => {
                        for sig in &i.sigs {
                            diags.extend(check_refinement(table, c, sig, &i.name.text));
                        }
                    }
                }
            }
            for Method { sig, body } in &c.methods {
                diags.extend(check_method(table, &c.name, sig, body));
            }
        }
        Decl::Interface(i) => {
            for sig in &i.sigs {
                diags.extend(check_signature_wf(table, sig));
            }
        }
    }
    diags
}

/// Checks every declaration and the main expression (whose type and
/// effects are unconstrained). Diagnostics come back ordered by source
/// position, then code.
pub fn check_program(table: &ClassTable, p: &Program) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for d in &p.decls {
        diags.extend(check_decl(table, d));
    }
    if let Some(main) = &p.main {
        if let Err(d) = type_of(table, &TypeEnv::new(), &VarEnv::new(), main) {
            diags.push(d);
        }
    }
    sort_diagnostics(&mut diags);
    diags
}
