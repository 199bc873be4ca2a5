use std::collections::{BTreeSet, HashMap};

use crate::ast::{Label, LabeledTerm, TermKind};

use super::constraint::AbstractValue;
use super::solver::Solution;

/// Labels of the terms that may execute inside a stochastic branch.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DynamicLabelSet {
    labels: BTreeSet<Label>,
}

impl DynamicLabelSet {
    pub fn contains(&self, l: Label) -> bool {
        self.labels.contains(&l)
    }
    pub fn len(&self) -> usize {
        self.labels.len()
    }
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
    pub fn iter(&self) -> impl Iterator<Item = Label> + '_ {
        self.labels.iter().copied()
    }
    pub fn as_set(&self) -> &BTreeSet<Label> {
        &self.labels
    }
}

impl FromIterator<Label> for DynamicLabelSet {
    fn from_iter<I: IntoIterator<Item = Label>>(iter: I) -> Self {
        DynamicLabelSet {
            labels: iter.into_iter().collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Traversal {
    #[default]
    LeftToRight,
    RightToLeft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MarkOptions {
    pub order: Traversal,
    /// Stop after this many traversals even if the marking is still
    /// changing. `None` iterates to the fixpoint.
    pub max_passes: Option<usize>,
}

impl Default for MarkOptions {
    fn default() -> Self {
        MarkOptions {
            order: Traversal::LeftToRight,
            max_passes: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marking {
    pub dynamic: DynamicLabelSet,
    /// Full traversals performed, including the final one that changed nothing.
    pub passes: usize,
}

/// Flag every term reachable from a stochastic branch, iterating whole-program
/// traversals until nothing changes.
pub fn mark_dynamic(t: &LabeledTerm, sol: &Solution) -> DynamicLabelSet {
    mark_dynamic_with(t, sol, MarkOptions::default()).dynamic
}

pub fn mark_dynamic_with(t: &LabeledTerm, sol: &Solution, opts: MarkOptions) -> Marking {
    let mut m = Marker {
        sol,
        dyn_: t.labels().into_iter().map(|l| (l, false)).collect(),
        modified: true,
        order: opts.order,
    };
    let mut passes = 0;
    while m.modified && opts.max_passes.is_none_or(|max| passes < max) {
        m.modified = false;
        m.recurse(false, t);
        passes += 1;
    }
    let dynamic = m
        .dyn_
        .into_iter()
        .filter_map(|(l, d)| d.then_some(l))
        .collect();
    Marking { dynamic, passes }
}

struct Marker<'a> {
    sol: &'a Solution,
    dyn_: HashMap<Label, bool>,
    modified: bool,
    order: Traversal,
}

impl Marker<'_> {
    fn is_dyn(&self, l: Label) -> bool {
        self.dyn_.get(&l).copied().unwrap_or(false)
    }

    fn flag(&mut self, l: Label) {
        let d = self.dyn_.entry(l).or_insert(false);
        if !*d {
            *d = true;
            self.modified = true;
        }
    }

    fn recurse(&mut self, flag: bool, t: &LabeledTerm) {
        let l = t.label();
        if flag || self.is_dyn(l) {
            self.flag(l);
            for av in self.sol.label(l) {
                if let AbstractValue::Lambda(lam) = av {
                    self.flag(lam.label);
                }
            }
        }
        match &*t.kind {
            TermKind::If(c, x, y) => {
                let branch_flag = flag || self.sol.is_stochastic(c.label());
                match self.order {
                    Traversal::LeftToRight => {
                        self.recurse(flag, c);
                        self.recurse(branch_flag, x);
                        self.recurse(branch_flag, y);
                    }
                    Traversal::RightToLeft => {
                        self.recurse(branch_flag, y);
                        self.recurse(branch_flag, x);
                        self.recurse(flag, c);
                    }
                }
            }
            TermKind::Lam(_, body) => {
                let f = self.is_dyn(l) || flag;
                self.recurse(f, body);
            }
            _ => {
                let mut children = t.children();
                if self.order == Traversal::RightToLeft {
                    children.reverse();
                }
                for c in children {
                    self.recurse(flag, c);
                }
            }
        }
    }
}
