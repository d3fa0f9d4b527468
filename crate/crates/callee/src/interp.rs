//! Small-step reduction and a monitored big-step evaluator.
//!
//! Reduction order is fixed left-to-right call-by-value: receiver, then
//! arguments, then the call itself. A restrict expression reduces away
//! as soon as it is reached, without first evaluating its body. The
//! monitor carries a stack of allowed effect bounds: the top bound on
//! entry, the dispatched method's substituted annotation inside a body,
//! and the declared bound inside a restrict. Violations are reported as
//! trace events; evaluation always continues.

use crate::classtable::{instantiate, ClassTable, TypeEnv, VarEnv};
use crate::syntax::{
    print_effect, print_effect_list, print_expr, print_selector, print_type, Effect, EffectList,
    Expr, ExprKind, Ident, MethodSelector, TypeName,
};
use crate::typecheck::type_of;
use std::collections::BTreeMap;
use std::fmt;

/// A runtime object: a class name applied to field values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Value {
    pub class: String,
    pub fields: Vec<Value>,
}

impl Value {
    pub fn to_expr(&self) -> Expr {
        Expr::new(
            ExprKind::New {
                class: Ident::synthetic(&self.class),
                args: self.fields.iter().map(Value::to_expr).collect(),
            },
            crate::diag::Span::default(),
        )
    }

    pub fn from_expr(e: &Expr) -> Option<Value> {
        match &e.kind {
            ExprKind::New { class, args } => Some(Value {
                class: class.text.clone(),
                fields: args.iter().map(Value::from_expr).collect::<Option<_>>()?,
            }),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_expr(&self.to_expr()))
    }
}

/// What a successful step did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reduction {
    /// A call reduced to its substituted body. Carries the dispatched
    /// method's substituted annotation and body for soundness probes.
    Call {
        dynamic_class: String,
        selector: MethodSelector,
        annotation: EffectList,
        substituted_body: Expr,
    },
    /// A field projection on a constructed value.
    Projection,
    /// `restrict[bound] e` reduced to `e`.
    RestrictErased { bound: EffectList },
}

/// Result of one reduction attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Step {
    Reduced { expr: Expr, reduction: Reduction },
    AlreadyValue,
    Stuck(String),
}

fn subst_vars(e: &Expr, map: &BTreeMap<String, Expr>) -> Expr {
    let kind = match &e.kind {
        ExprKind::Var(v) => match map.get(&v.text) {
            Some(replacement) => return replacement.clone(),
            None => ExprKind::Var(v.clone()),
        },
        ExprKind::New { class, args } => ExprKind::New {
            class: class.clone(),
            args: args.iter().map(|a| subst_vars(a, map)).collect(),
        },
        ExprKind::Field { recv, field } => ExprKind::Field {
            recv: Box::new(subst_vars(recv, map)),
            field: field.clone(),
        },
        ExprKind::Call {
            recv,
            selector,
            args,
        } => ExprKind::Call {
            recv: Box::new(subst_vars(recv, map)),
            selector: selector.clone(),
            args: args.iter().map(|a| subst_vars(a, map)).collect(),
        },
        ExprKind::Restrict { bound, body } => ExprKind::Restrict {
            bound: bound.clone(),
            body: Box::new(subst_vars(body, map)),
        },
    };
    Expr::new(kind, e.span)
}

/// Reduces the call redex `new C(v...).m<T...>(u...)`.
fn reduce_call(table: &ClassTable, recv: &Expr, selector: &MethodSelector, args: &[Expr]) -> Step {
    let ExprKind::New { class, .. } = &recv.kind else {
        return Step::Stuck("call receiver is not a constructed value".into());
    };
    let entry = match instantiate(table, &class.text, selector) {
        Ok(Some(entry)) => entry,
        Ok(None) => {
            return Step::Stuck(format!(
                "no method `{}` on class `{}`",
                selector.name.text, class.text
            ))
        }
        Err(d) => return Step::Stuck(d.message),
    };
    let Some(body) = entry.body else {
        return Step::Stuck(format!(
            "`{}.{}` has no body",
            class.text, selector.name.text
        ));
    };
    if entry.sig.params.len() != args.len() {
        return Step::Stuck(format!(
            "method `{}.{}` takes {} argument(s), got {}",
            class.text,
            selector.name.text,
            entry.sig.params.len(),
            args.len()
        ));
    }
    let mut map = BTreeMap::new();
    map.insert("this".to_string(), recv.clone());
    for (p, a) in entry.sig.params.iter().zip(args) {
        map.insert(p.name.text.clone(), a.clone());
    }
    let substituted = subst_vars(&body, &map);
    Step::Reduced {
        expr: substituted.clone(),
        reduction: Reduction::Call {
            dynamic_class: class.text.clone(),
            selector: selector.clone(),
            annotation: entry.sig.effects,
            substituted_body: substituted,
        },
    }
}

/// Performs one reduction at the leftmost redex, evaluating receivers
/// before arguments. Restrict reduces trivially the moment it is the
/// next thing to evaluate.
pub fn step(table: &ClassTable, e: &Expr) -> Step {
    match &e.kind {
        ExprKind::Var(v) => Step::Stuck(format!("free variable `{}`", v.text)),
        ExprKind::New { class, args } => {
            for (i, a) in args.iter().enumerate() {
                if !a.is_value() {
                    return step_in_arg(table, e, class, args, i, a);
                }
            }
            Step::AlreadyValue
        }
        ExprKind::Field { recv, field } => {
            if !recv.is_value() {
                return match step(table, recv) {
                    Step::Reduced { expr, reduction } => Step::Reduced {
                        expr: Expr::new(
                            ExprKind::Field {
                                recv: Box::new(expr),
                                field: field.clone(),
                            },
                            e.span,
                        ),
                        reduction,
                    },
                    other => other,
                };
            }
            let ExprKind::New { class, args } = &recv.kind else {
                return Step::Stuck("field access on a non-value".into());
            };
            let Some(crate::syntax::Decl::Class(c)) = table.get(&class.text) else {
                return Step::Stuck(format!("unknown class `{}`", class.text));
            };
            match c.fields.iter().position(|f| f.name.text == field.text) {
                Some(i) if i < args.len() => Step::Reduced {
                    expr: args[i].clone(),
                    reduction: Reduction::Projection,
                },
                _ => Step::Stuck(format!(
                    "no field `{}` on class `{}`",
                    field.text, class.text
                )),
            }
        }
        ExprKind::Call {
            recv,
            selector,
            args,
        } => {
            if !recv.is_value() {
                return match step(table, recv) {
                    Step::Reduced { expr, reduction } => Step::Reduced {
                        expr: Expr::new(
                            ExprKind::Call {
                                recv: Box::new(expr),
                                selector: selector.clone(),
                                args: args.clone(),
                            },
                            e.span,
                        ),
                        reduction,
                    },
                    other => other,
                };
            }
            for (i, a) in args.iter().enumerate() {
                if !a.is_value() {
                    return match step(table, a) {
                        Step::Reduced { expr, reduction } => {
                            let mut new_args = args.clone();
                            new_args[i] = expr;
                            Step::Reduced {
                                expr: Expr::new(
                                    ExprKind::Call {
                                        recv: recv.clone(),
                                        selector: selector.clone(),
                                        args: new_args,
                                    },
                                    e.span,
                                ),
                                reduction,
                            }
                        }
                        other => other,
                    };
                }
            }
            reduce_call(table, recv, selector, args)
        }
        ExprKind::Restrict { bound, body } => Step::Reduced {
            expr: (**body).clone(),
            reduction: Reduction::RestrictErased {
                bound: bound.clone(),
            },
        },
    }
}

fn step_in_arg(
    table: &ClassTable,
    whole: &Expr,
    class: &Ident,
    args: &[Expr],
    i: usize,
    arg: &Expr,
) -> Step {
    match step(table, arg) {
        Step::Reduced { expr, reduction } => {
            let mut new_args = args.to_vec();
            new_args[i] = expr;
            Step::Reduced {
                expr: Expr::new(
                    ExprKind::New {
                        class: class.clone(),
                        args: new_args,
                    },
                    whole.span,
                ),
                reduction,
            }
        }
        other => other,
    }
}

/// When the next reduction of `e` is a method call, reports whether the
/// substituted body's effects stay within the dispatched method's
/// substituted annotation. `None` when the next step is not a call.
pub fn direct_soundness_at(table: &ClassTable, e: &Expr) -> Option<bool> {
    match step(table, e) {
        Step::Reduced {
            reduction:
                Reduction::Call {
                    annotation,
                    substituted_body,
                    ..
                },
            ..
        } => {
            let typed = type_of(table, &TypeEnv::new(), &VarEnv::new(), &substituted_body).ok()?;
            Some(crate::relations::is_subeffect(
                table,
                &TypeEnv::new(),
                &typed.effects,
                &annotation,
            ))
        }
        _ => None,
    }
}

/// Events observable during evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Call {
        static_type: TypeName,
        dynamic_class: String,
        selector: MethodSelector,
        allowed: EffectList,
    },
    RestrictEnter {
        bound: EffectList,
    },
    Violation {
        kind: ViolationKind,
        effect: Effect,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// The dispatched method's annotation escapes the statically named
    /// method's annotation.
    Direct,
    /// The call is not within the current allowed bound.
    Frame,
}

impl TraceEvent {
    /// One-line rendering used by `--trace`.
    pub fn render(&self) -> String {
        match self {
            TraceEvent::Call {
                static_type,
                dynamic_class,
                selector,
                allowed,
            } => format!(
                "CALL {}.{} static={} allow=[{}]",
                dynamic_class,
                print_selector(selector),
                print_type(static_type),
                print_effect_list(allowed)
            ),
            TraceEvent::RestrictEnter { bound } => {
                format!("RESTRICT [{}]", print_effect_list(bound))
            }
            TraceEvent::Violation { kind, effect } => format!(
                "VIOLATION {} {}",
                match kind {
                    ViolationKind::Direct => "direct",
                    ViolationKind::Frame => "frame",
                },
                print_effect(effect)
            ),
        }
    }
}

/// Final state of an evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalOutcome {
    Value(Value),
    Stuck(String),
    OutOfFuel,
}

/// Iterates `step` at most `fuel` times, emitting a call event at each
/// call reduction. At a redex the receiver is already a value, so the
/// recorded static type coincides with the dynamic class.
pub fn eval(table: &ClassTable, e: &Expr, fuel: u64) -> (EvalOutcome, Vec<TraceEvent>) {
    let mut events = Vec::new();
    let mut current = e.clone();
    let mut steps = 0;
    loop {
        if current.is_value() {
            return (
                EvalOutcome::Value(Value::from_expr(&current).expect("value")),
                events,
            );
        }
        if steps == fuel {
            return (EvalOutcome::OutOfFuel, events);
        }
        match step(table, &current) {
            Step::Reduced { expr, reduction } => {
                match reduction {
                    Reduction::Call {
                        dynamic_class,
                        selector,
                        ..
                    } => events.push(TraceEvent::Call {
                        static_type: TypeName::class(Ident::synthetic(&dynamic_class)),
                        dynamic_class,
                        selector,
                        allowed: vec![Effect::Wildcard],
                    }),
                    Reduction::RestrictErased { bound } => {
                        events.push(TraceEvent::RestrictEnter { bound })
                    }
                    Reduction::Projection => {}
                }
                current = expr;
                steps += 1;
            }
            Step::AlreadyValue => unreachable!("handled above"),
            Step::Stuck(msg) => return (EvalOutcome::Stuck(msg), events),
        }
    }
}

struct Monitor<'a> {
    table: &'a ClassTable,
    fuel: u64,
    events: Vec<TraceEvent>,
}

enum Stop {
    Stuck(String),
    OutOfFuel,
}

/// One evaluation frame: values for the variables in scope, their
/// declared types (for recording static receiver types), and the
/// allowed effect bound.
struct Frame {
    values: BTreeMap<String, Value>,
    types: VarEnv,
    bound: EffectList,
}

impl<'a> Monitor<'a> {
    fn consume_fuel(&mut self) -> Result<(), Stop> {
        if self.fuel == 0 {
            return Err(Stop::OutOfFuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn eval_in(&mut self, e: &Expr, frame: &Frame) -> Result<Value, Stop> {
        match &e.kind {
            ExprKind::Var(v) => frame
                .values
                .get(&v.text)
                .cloned()
                .ok_or_else(|| Stop::Stuck(format!("free variable `{}`", v.text))),
            ExprKind::New { class, args } => {
                let mut fields = Vec::new();
                for a in args {
                    fields.push(self.eval_in(a, frame)?);
                }
                Ok(Value {
                    class: class.text.clone(),
                    fields,
                })
            }
            ExprKind::Field { recv, field } => {
                let v = self.eval_in(recv, frame)?;
                self.consume_fuel()?;
                let Some(crate::syntax::Decl::Class(c)) = self.table.get(&v.class) else {
                    return Err(Stop::Stuck(format!("unknown class `{}`", v.class)));
                };
                match c.fields.iter().position(|f| f.name.text == field.text) {
                    Some(i) if i < v.fields.len() => Ok(v.fields[i].clone()),
                    _ => Err(Stop::Stuck(format!(
                        "no field `{}` on class `{}`",
                        field.text, v.class
                    ))),
                }
            }
            ExprKind::Call {
                recv,
                selector,
                args,
            } => {
                // Static receiver type in this frame, before evaluation;
                // unavailable for programs that never checked.
                let static_type = type_of(self.table, &TypeEnv::new(), &frame.types, recv)
                    .ok()
                    .map(|t| t.ty);
                let recv_value = self.eval_in(recv, frame)?;
                let mut arg_values = Vec::new();
                for a in args {
                    arg_values.push(self.eval_in(a, frame)?);
                }
                self.consume_fuel()?;
                let entry = match instantiate(self.table, &recv_value.class, selector) {
                    Ok(Some(entry)) => entry,
                    Ok(None) => {
                        return Err(Stop::Stuck(format!(
                            "no method `{}` on class `{}`",
                            selector.name.text, recv_value.class
                        )))
                    }
                    Err(d) => return Err(Stop::Stuck(d.message)),
                };
                let Some(body) = entry.body.clone() else {
                    return Err(Stop::Stuck(format!(
                        "`{}.{}` has no body",
                        recv_value.class, selector.name.text
                    )));
                };
                if entry.sig.params.len() != args.len() {
                    return Err(Stop::Stuck(format!(
                        "method `{}.{}` takes {} argument(s), got {}",
                        recv_value.class,
                        selector.name.text,
                        entry.sig.params.len(),
                        args.len()
                    )));
                }
                let dynamic = TypeName::class(Ident::synthetic(&recv_value.class));
                let static_type = static_type.unwrap_or_else(|| dynamic.clone());
                let call_effect = Effect::Method {
                    receiver: dynamic.clone(),
                    selector: selector.clone(),
                };
                self.events.push(TraceEvent::Call {
                    static_type: static_type.clone(),
                    dynamic_class: recv_value.class.clone(),
                    selector: selector.clone(),
                    allowed: frame.bound.clone(),
                });
                // Direct check: the dispatched annotation refines the
                // statically named method's annotation.
                let env = TypeEnv::new();
                if let Some(static_owner) = env.resolve(&static_type) {
                    if let Ok(Some(static_entry)) = instantiate(self.table, static_owner, selector)
                    {
                        if !crate::relations::is_subeffect(
                            self.table,
                            &env,
                            &entry.sig.effects,
                            &static_entry.sig.effects,
                        ) {
                            self.events.push(TraceEvent::Violation {
                                kind: ViolationKind::Direct,
                                effect: call_effect.clone(),
                            });
                        }
                    }
                }
                // Frame check: the call itself is within the current bound.
                if !crate::relations::is_subeffect(
                    self.table,
                    &env,
                    std::slice::from_ref(&call_effect),
                    &frame.bound,
                ) {
                    self.events.push(TraceEvent::Violation {
                        kind: ViolationKind::Frame,
                        effect: call_effect,
                    });
                }
                let mut values = BTreeMap::new();
                let mut types = VarEnv::new();
                values.insert("this".to_string(), recv_value);
                types.insert("this".to_string(), dynamic);
                for (p, v) in entry.sig.params.iter().zip(arg_values) {
                    values.insert(p.name.text.clone(), v);
                    types.insert(p.name.text.clone(), p.ty.clone());
                }
                let callee_frame = Frame {
                    values,
                    types,
                    bound: entry.sig.effects.clone(),
                };
                self.eval_in(&body, &callee_frame)
            }
            ExprKind::Restrict {
                bound: narrow,
                body,
            } => {
                self.consume_fuel()?;
                self.events.push(TraceEvent::RestrictEnter {
                    bound: narrow.clone(),
                });
                let narrowed = Frame {
                    values: frame.values.clone(),
                    types: frame.types.clone(),
                    bound: narrow.clone(),
                };
                self.eval_in(body, &narrowed)
            }
        }
    }
}

/// Big-step evaluation with the soundness monitor. Every call is
/// checked against the statically recorded receiver type (direct) and
/// the current allowed bound (frame); failures emit violation events
/// but never halt evaluation.
pub fn monitored_eval(
    table: &ClassTable,
    e: &Expr,
    top_bound: &[Effect],
    fuel: u64,
) -> (EvalOutcome, Vec<TraceEvent>) {
    let mut monitor = Monitor {
        table,
        fuel,
        events: Vec::new(),
    };
    let frame = Frame {
        values: BTreeMap::new(),
        types: VarEnv::new(),
        bound: top_bound.to_vec(),
    };
    let outcome = match monitor.eval_in(e, &frame) {
        Ok(v) => EvalOutcome::Value(v),
        Err(Stop::Stuck(msg)) => EvalOutcome::Stuck(msg),
        Err(Stop::OutOfFuel) => EvalOutcome::OutOfFuel,
    };
    (outcome, monitor.events)
}

/// True when any violation was recorded.
pub fn has_violation(events: &[TraceEvent]) -> bool {
    events
        .iter()
        .any(|e| matches!(e, TraceEvent::Violation { .. }))
}
