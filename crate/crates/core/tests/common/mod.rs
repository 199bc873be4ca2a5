use std::collections::{BTreeMap, BTreeSet};

use ppl_align::cfa::{AbstractValue, Constraint, SetVar};

/// Reference solver: start from empty sets and re-apply every constraint
/// until a full scan changes nothing.
pub fn kleene(cs: &[Constraint], vars: &[SetVar]) -> BTreeMap<SetVar, BTreeSet<AbstractValue>> {
    let mut s: BTreeMap<SetVar, BTreeSet<AbstractValue>> =
        vars.iter().map(|v| (v.clone(), BTreeSet::new())).collect();
    loop {
        let mut changed = false;
        for c in cs {
            let (from, into): (BTreeSet<AbstractValue>, &SetVar) = match c {
                Constraint::Direct { value, into } => ([value.clone()].into(), into),
                Constraint::Flow { from, into } => (s.get(from).cloned().unwrap_or_default(), into),
                Constraint::Implication {
                    guard,
                    guard_set,
                    from,
                    into,
                } => {
                    if !s.get(guard_set).is_some_and(|g| g.contains(guard)) {
                        continue;
                    }
                    (s.get(from).cloned().unwrap_or_default(), into)
                }
            };
            let target = s.entry(into.clone()).or_default();
            for v in from {
                changed |= target.insert(v);
            }
        }
        if !changed {
            return s;
        }
    }
}
