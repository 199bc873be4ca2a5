use crate::ast::{CoreTerm, LabeledTerm, Term, TermKind};
use crate::cfa::DynamicLabelSet;

/// Turn every `weight` whose label is dynamic into `dweight` and drop the
/// labels. Source spans are kept for error messages and traces.
pub fn align_weights(t: &LabeledTerm, dynamic: &DynamicLabelSet) -> CoreTerm {
    let go = |s: &LabeledTerm| align_weights(s, dynamic);
    let kind = match &*t.kind {
        TermKind::Var(x) => TermKind::Var(x.clone()),
        TermKind::Const(c) => TermKind::Const(c.clone()),
        TermKind::Lam(x, b) => TermKind::Lam(x.clone(), go(b)),
        TermKind::App(f, a) => TermKind::App(go(f), go(a)),
        TermKind::Fix(f) => TermKind::Fix(go(f)),
        TermKind::If(c, x, y) => TermKind::If(go(c), go(x), go(y)),
        TermKind::Sample(d) => TermKind::Sample(go(d)),
        TermKind::Weight(w) if dynamic.contains(t.label()) => TermKind::DWeight(go(w)),
        TermKind::Weight(w) => TermKind::Weight(go(w)),
        TermKind::DWeight(w) => TermKind::DWeight(go(w)),
        TermKind::WeightCps(k, w) => TermKind::WeightCps(go(k), go(w)),
        TermKind::DWeightCps(k, w) => TermKind::DWeightCps(go(k), go(w)),
    };
    Term::new(t.ann.span, kind)
}
