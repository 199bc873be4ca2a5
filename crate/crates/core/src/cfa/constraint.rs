use std::fmt;

use indexmap::IndexSet;

use crate::ast::{Label, LabeledTerm, LambdaInfo, LambdaSet, TermKind};

/// What the analysis tracks flowing through the program: either "this value
/// may depend on a random draw" or a particular lambda.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AbstractValue {
    Stoch,
    Lambda(LambdaInfo),
}

impl fmt::Display for AbstractValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbstractValue::Stoch => write!(f, "stoch"),
            AbstractValue::Lambda(l) => write!(f, "lam@{}", l.label),
        }
    }
}

/// An unknown set: one per label and one per bound variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SetVar {
    Label(Label),
    Var(String),
}

impl fmt::Display for SetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetVar::Label(l) => write!(f, "S{l}"),
            SetVar::Var(x) => write!(f, "S{x}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// `{av} ⊆ into`
    Direct { value: AbstractValue, into: SetVar },
    /// `from ⊆ into`
    Flow { from: SetVar, into: SetVar },
    /// `{guard} ⊆ guard_set => from ⊆ into`
    Implication {
        guard: AbstractValue,
        guard_set: SetVar,
        from: SetVar,
        into: SetVar,
    },
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Direct { value, into } => write!(f, "{{{value}}} ⊆ {into}"),
            Constraint::Flow { from, into } => write!(f, "{from} ⊆ {into}"),
            Constraint::Implication {
                guard,
                guard_set,
                from,
                into,
            } => write!(f, "{{{guard}}} ⊆ {guard_set} => {from} ⊆ {into}"),
        }
    }
}

/// Generate the flow constraints of a labeled program.
///
/// Every application and every `fix` produces two implication constraints
/// per lambda of the program, most of them vacuous. A saturated arithmetic or
/// comparison builtin additionally lets its operands flow into its result, so
/// that `x + 1` is stochastic whenever `x` is. Distribution constructors do
/// not: a distribution with random parameters is not itself a random value.
pub fn generate_constraints(t: &LabeledTerm, lams: &LambdaSet) -> Vec<Constraint> {
    let mut out = IndexSet::new();
    gen(t, lams, &mut out);
    out.into_iter().collect()
}

fn l(t: &LabeledTerm) -> SetVar {
    SetVar::Label(t.label())
}

fn gen(t: &LabeledTerm, lams: &LambdaSet, out: &mut IndexSet<Constraint>) {
    let me = l(t);
    match &*t.kind {
        TermKind::Var(x) => {
            out.insert(Constraint::Flow {
                from: SetVar::Var(x.clone()),
                into: me,
            });
        }
        TermKind::Const(_) => {}
        TermKind::Lam(..) => {
            let info = lams
                .by_label(t.label())
                .expect("lambda set covers every lambda")
                .clone();
            out.insert(Constraint::Direct {
                value: AbstractValue::Lambda(info),
                into: me,
            });
        }
        TermKind::App(f, a) => {
            for lam in lams.iter() {
                let guard = AbstractValue::Lambda(lam.clone());
                out.insert(Constraint::Implication {
                    guard: guard.clone(),
                    guard_set: l(f),
                    from: l(a),
                    into: SetVar::Var(lam.binder.clone()),
                });
                out.insert(Constraint::Implication {
                    guard,
                    guard_set: l(f),
                    from: SetVar::Label(lam.body),
                    into: me.clone(),
                });
            }
            if let Some((op, args)) = t.builtin_spine() {
                if !op.is_distribution() && args.len() == op.arity() {
                    for arg in args {
                        out.insert(Constraint::Flow {
                            from: l(arg),
                            into: me.clone(),
                        });
                    }
                }
            }
        }
        TermKind::Fix(f) => {
            for lam in lams.iter() {
                let guard = AbstractValue::Lambda(lam.clone());
                out.insert(Constraint::Implication {
                    guard: guard.clone(),
                    guard_set: l(f),
                    from: SetVar::Label(lam.body),
                    into: SetVar::Var(lam.binder.clone()),
                });
                out.insert(Constraint::Implication {
                    guard,
                    guard_set: l(f),
                    from: SetVar::Label(lam.body),
                    into: me.clone(),
                });
            }
        }
        TermKind::If(_, x, y) => {
            out.insert(Constraint::Flow {
                from: l(x),
                into: me.clone(),
            });
            out.insert(Constraint::Flow { from: l(y), into: me });
        }
        TermKind::Sample(_) => {
            out.insert(Constraint::Direct {
                value: AbstractValue::Stoch,
                into: me,
            });
        }
        TermKind::Weight(_)
        | TermKind::DWeight(_)
        | TermKind::WeightCps(..)
        | TermKind::DWeightCps(..) => {}
    }
    for c in t.children() {
        gen(c, lams, out);
    }
}

/// Every set-variable of a program: one per label, one per binder.
pub fn universe(t: &LabeledTerm) -> Vec<SetVar> {
    let mut vars: Vec<SetVar> = t.labels().into_iter().map(SetVar::Label).collect();
    vars.extend(t.binders().into_iter().map(|x| SetVar::Var(x.to_string())));
    vars
}
