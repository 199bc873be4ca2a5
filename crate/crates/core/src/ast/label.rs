use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use super::{CoreTerm, Label, LabelInfo, LabeledTerm, Term, TermKind};

/// Order in which labels are handed out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelScheme {
    /// Parent before children, children left to right, starting at 1.
    PreOrder,
    /// Children left to right before parent, starting at 1.
    PostOrder,
    /// Labels listed in pre-order visiting sequence. Lets a caller reproduce a
    /// hand-assigned numbering exactly.
    Explicit(Vec<Label>),
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LabelError {
    #[error("label map has {given} entries but the program has {expected} subterms")]
    WrongLength { given: usize, expected: usize },
    #[error("label {0} appears more than once in the label map")]
    Duplicate(Label),
}

/// Label every subterm in pre-order and give every binder a unique name.
pub fn assign_labels(t: &CoreTerm) -> LabeledTerm {
    assign_labels_with(t, &LabelScheme::PreOrder).expect("pre-order labeling is total")
}

pub fn assign_labels_with(t: &CoreTerm, scheme: &LabelScheme) -> Result<LabeledTerm, LabelError> {
    let n = t.size();
    let order: Vec<Label> = match scheme {
        LabelScheme::PreOrder => (1..=n as Label).collect(),
        LabelScheme::PostOrder => {
            let mut post = vec![0; n];
            let mut pre_idx = 0;
            let mut next = 1;
            post_order(t, &mut pre_idx, &mut next, &mut post);
            post
        }
        LabelScheme::Explicit(map) => {
            if map.len() != n {
                return Err(LabelError::WrongLength {
                    given: map.len(),
                    expected: n,
                });
            }
            let mut seen = HashSet::new();
            for l in map {
                if !seen.insert(*l) {
                    return Err(LabelError::Duplicate(*l));
                }
            }
            map.clone()
        }
    };

    let mut names = Renamer::new(t);
    let mut idx = 0;
    Ok(relabel(t, &order, &mut idx, &mut names, &mut Vec::new()))
}

fn post_order(t: &CoreTerm, pre_idx: &mut usize, next: &mut Label, out: &mut [Label]) {
    let me = *pre_idx;
    *pre_idx += 1;
    for c in t.children() {
        post_order(c, pre_idx, next, out);
    }
    out[me] = *next;
    *next += 1;
}

struct Renamer {
    taken: HashSet<String>,
    claimed: HashSet<String>,
}

impl Renamer {
    fn new(t: &CoreTerm) -> Self {
        let mut taken: HashSet<String> = t.binders().into_iter().map(str::to_string).collect();
        taken.extend(t.free_vars());
        Renamer {
            taken,
            claimed: HashSet::new(),
        }
    }

    fn bind(&mut self, name: &str) -> String {
        if self.claimed.insert(name.to_string()) {
            return name.to_string();
        }
        let mut i = 1;
        loop {
            let candidate = format!("{name}_{i}");
            if !self.taken.contains(&candidate) && !self.claimed.contains(&candidate) {
                self.claimed.insert(candidate.clone());
                self.taken.insert(candidate.clone());
                return candidate;
            }
            i += 1;
        }
    }
}

fn relabel(
    t: &CoreTerm,
    order: &[Label],
    idx: &mut usize,
    names: &mut Renamer,
    scope: &mut Vec<(String, String)>,
) -> LabeledTerm {
    let ann = LabelInfo {
        label: order[*idx],
        span: t.ann,
    };
    *idx += 1;
    let mut go = |s: &CoreTerm, names: &mut Renamer, scope: &mut Vec<(String, String)>| {
        relabel(s, order, idx, names, scope)
    };
    let kind = match &*t.kind {
        TermKind::Var(x) => {
            let renamed = scope
                .iter()
                .rev()
                .find(|(old, _)| old == x)
                .map(|(_, new)| new.clone())
                .unwrap_or_else(|| x.clone());
            TermKind::Var(renamed)
        }
        TermKind::Const(c) => TermKind::Const(c.clone()),
        TermKind::Lam(x, b) => {
            let fresh = names.bind(x);
            scope.push((x.clone(), fresh.clone()));
            let body = go(b, names, scope);
            scope.pop();
            TermKind::Lam(fresh, body)
        }
        TermKind::App(a, b) => {
            let a = go(a, names, scope);
            TermKind::App(a, go(b, names, scope))
        }
        TermKind::Fix(b) => TermKind::Fix(go(b, names, scope)),
        TermKind::If(c, x, y) => {
            let c = go(c, names, scope);
            let x = go(x, names, scope);
            TermKind::If(c, x, go(y, names, scope))
        }
        TermKind::Sample(b) => TermKind::Sample(go(b, names, scope)),
        TermKind::Weight(b) => TermKind::Weight(go(b, names, scope)),
        TermKind::DWeight(b) => TermKind::DWeight(go(b, names, scope)),
        TermKind::WeightCps(k, b) => {
            let k = go(k, names, scope);
            TermKind::WeightCps(k, go(b, names, scope))
        }
        TermKind::DWeightCps(k, b) => {
            let k = go(k, names, scope);
            TermKind::DWeightCps(k, go(b, names, scope))
        }
    };
    Term::new(ann, kind)
}

/// One lambda of the program with its body elided: `(λbinder. ·^body)^label`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LambdaInfo {
    pub label: Label,
    pub binder: String,
    pub body: Label,
}

/// Every lambda term of a program, ordered by label.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LambdaSet {
    entries: Vec<LambdaInfo>,
    by_label: HashMap<Label, usize>,
}

impl LambdaSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LambdaInfo> {
        self.entries.iter()
    }

    pub fn get(&self, index: usize) -> &LambdaInfo {
        &self.entries[index]
    }

    /// Dense index of the lambda with this label.
    pub fn index_of(&self, label: Label) -> Option<usize> {
        self.by_label.get(&label).copied()
    }

    pub fn by_label(&self, label: Label) -> Option<&LambdaInfo> {
        self.index_of(label).map(|i| &self.entries[i])
    }
}

pub fn collect_lambdas(t: &LabeledTerm) -> LambdaSet {
    let mut entries = Vec::new();
    t.visit(&mut |s| {
        if let TermKind::Lam(x, b) = &*s.kind {
            entries.push(LambdaInfo {
                label: s.label(),
                binder: x.clone(),
                body: b.label(),
            });
        }
    });
    entries.sort();
    let by_label = entries
        .iter()
        .enumerate()
        .map(|(i, l)| (l.label, i))
        .collect();
    LambdaSet { entries, by_label }
}

/// One line per subterm, `label: head`, in label order.
pub fn dump_labels(t: &LabeledTerm) -> String {
    let mut rows = Vec::new();
    t.visit(&mut |s| {
        let head = match &*s.kind {
            TermKind::Var(x) => format!("var {x}"),
            TermKind::Const(c) => format!("const {c}"),
            TermKind::Lam(x, b) => format!("lam {x} -> {}", b.label()),
            TermKind::App(f, a) => format!("app {} {}", f.label(), a.label()),
            TermKind::Fix(b) => format!("fix {}", b.label()),
            TermKind::If(c, x, y) => format!("if {} {} {}", c.label(), x.label(), y.label()),
            TermKind::Sample(b) => format!("sample {}", b.label()),
            TermKind::Weight(b) => format!("weight {}", b.label()),
            TermKind::DWeight(b) => format!("dweight {}", b.label()),
            TermKind::WeightCps(k, b) => format!("weight {} {}", k.label(), b.label()),
            TermKind::DWeightCps(k, b) => format!("dweight {} {}", k.label(), b.label()),
        };
        rows.push((s.label(), head));
    });
    rows.sort_by_key(|(l, _)| *l);
    let mut out = String::new();
    for (l, h) in rows {
        let _ = writeln!(out, "{l}: {h}");
    }
    out
}
