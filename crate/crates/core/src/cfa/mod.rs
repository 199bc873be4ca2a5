//! Context-insensitive control-flow analysis (0-CFA) and the discovery of
//! dynamic terms: those that may run inside an `if` whose condition is random.

mod constraint;
mod dynamic;
mod solver;

pub use constraint::{generate_constraints, universe, AbstractValue, Constraint, SetVar};
pub use dynamic::{
    mark_dynamic, mark_dynamic_with, DynamicLabelSet, MarkOptions, Marking, Traversal,
};
pub use solver::{solve_constraints, Solution};

use crate::ast::{
    assign_labels_with, collect_lambdas, CoreTerm, Label, LabelScheme, LabeledTerm, LambdaSet,
    Span, TermKind,
};

/// Everything the analysis computes for one program.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub labeled: LabeledTerm,
    pub lambdas: LambdaSet,
    pub constraints: Vec<Constraint>,
    pub solution: Solution,
    pub dynamic: DynamicLabelSet,
}

/// A `weight` call in the program and whether the analysis found it dynamic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSite {
    pub label: Label,
    pub span: Span,
    pub dynamic: bool,
}

pub fn analyze(t: &CoreTerm) -> Analysis {
    analyze_with(t, &LabelScheme::PreOrder).expect("pre-order labeling cannot fail")
}

pub fn analyze_with(
    t: &CoreTerm,
    scheme: &LabelScheme,
) -> Result<Analysis, crate::ast::LabelError> {
    let labeled = assign_labels_with(t, scheme)?;
    let lambdas = collect_lambdas(&labeled);
    let constraints = generate_constraints(&labeled, &lambdas);
    let solution = solve_constraints(&constraints, universe(&labeled));
    let dynamic = mark_dynamic(&labeled, &solution);
    Ok(Analysis {
        labeled,
        lambdas,
        constraints,
        solution,
        dynamic,
    })
}

impl Analysis {
    /// Every `weight` in source order.
    pub fn weight_sites(&self) -> Vec<WeightSite> {
        let mut out = Vec::new();
        self.labeled.visit(&mut |s| {
            if let TermKind::Weight(_) = &*s.kind {
                out.push(WeightSite {
                    label: s.label(),
                    span: s.ann.span,
                    dynamic: self.dynamic.contains(s.label()),
                });
            }
        });
        out.sort_by_key(|w| (w.span, w.label));
        out
    }

    /// One constraint per line.
    pub fn dump_constraints(&self) -> String {
        self.constraints.iter().map(|c| format!("{c}\n")).collect()
    }

    /// The labeled core term, every subterm tagged `^label` and dynamic
    /// ones `^label*`.
    pub fn annotated(&self) -> String {
        let mut out = String::new();
        annotate(&self.labeled, &self.dynamic, &mut out);
        out
    }

    /// Dynamic labels, ascending, one per line.
    pub fn dump_dynamic(&self) -> String {
        self.dynamic.iter().map(|l| format!("{l}\n")).collect()
    }
}

fn annotate(t: &LabeledTerm, dynamic: &DynamicLabelSet, out: &mut String) {
    let sub = |t: &LabeledTerm, out: &mut String| annotate(t, dynamic, out);
    match &*t.kind {
        TermKind::Var(x) => out.push_str(x),
        TermKind::Const(c) => out.push_str(&c.to_string()),
        TermKind::Lam(x, b) => {
            out.push_str(&format!("(λ{x}. "));
            sub(b, out);
            out.push(')');
        }
        TermKind::App(f, a) => {
            out.push('(');
            sub(f, out);
            out.push(' ');
            sub(a, out);
            out.push(')');
        }
        TermKind::Fix(f) => {
            out.push_str("(fix ");
            sub(f, out);
            out.push(')');
        }
        TermKind::If(c, a, b) => {
            out.push_str("(if ");
            sub(c, out);
            out.push_str(" then ");
            sub(a, out);
            out.push_str(" else ");
            sub(b, out);
            out.push(')');
        }
        TermKind::Sample(e) | TermKind::Weight(e) | TermKind::DWeight(e) => {
            let name = match &*t.kind {
                TermKind::Sample(_) => "sample",
                TermKind::Weight(_) => "weight",
                _ => "dweight",
            };
            out.push_str(&format!("({name} "));
            sub(e, out);
            out.push(')');
        }
        TermKind::WeightCps(k, e) | TermKind::DWeightCps(k, e) => {
            let name = match &*t.kind {
                TermKind::WeightCps(..) => "weight",
                _ => "dweight",
            };
            out.push_str(&format!("({name} "));
            sub(k, out);
            out.push(' ');
            sub(e, out);
            out.push(')');
        }
    }
    let l = t.label();
    out.push_str(&format!("^{l}"));
    if dynamic.contains(l) {
        out.push('*');
    }
}
