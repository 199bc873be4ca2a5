use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::ast::Label;

use super::constraint::{AbstractValue, Constraint, SetVar};

/// Least assignment of abstract values to every set-variable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Solution {
    sets: BTreeMap<SetVar, BTreeSet<AbstractValue>>,
}

static EMPTY: BTreeSet<AbstractValue> = BTreeSet::new();

impl Solution {
    pub fn get(&self, v: &SetVar) -> &BTreeSet<AbstractValue> {
        self.sets.get(v).unwrap_or(&EMPTY)
    }

    pub fn label(&self, l: Label) -> &BTreeSet<AbstractValue> {
        self.get(&SetVar::Label(l))
    }

    pub fn var(&self, x: &str) -> &BTreeSet<AbstractValue> {
        self.get(&SetVar::Var(x.to_string()))
    }

    pub fn is_stochastic(&self, l: Label) -> bool {
        self.label(l).contains(&AbstractValue::Stoch)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SetVar, &BTreeSet<AbstractValue>)> {
        self.sets.iter()
    }

    pub fn holds(&self, c: &Constraint) -> bool {
        match c {
            Constraint::Direct { value, into } => self.get(into).contains(value),
            Constraint::Flow { from, into } => self.get(from).is_subset(self.get(into)),
            Constraint::Implication {
                guard,
                guard_set,
                from,
                into,
            } => !self.get(guard_set).contains(guard) || self.get(from).is_subset(self.get(into)),
        }
    }

    pub fn satisfies(&self, cs: &[Constraint]) -> bool {
        cs.iter().all(|c| self.holds(c))
    }

    /// Build a solution from explicit sets; variables of `universe` that are
    /// not mentioned map to the empty set.
    pub fn from_sets(
        universe: impl IntoIterator<Item = SetVar>,
        sets: impl IntoIterator<Item = (SetVar, BTreeSet<AbstractValue>)>,
    ) -> Self {
        let mut map: BTreeMap<_, _> = universe.into_iter().map(|v| (v, BTreeSet::new())).collect();
        map.extend(sets);
        Solution { sets: map }
    }
}

/// Fixed-width bitset over interned abstract values.
#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn has(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn set(&mut self, i: usize) -> bool {
        let before = self.0[i / 64];
        self.0[i / 64] |= 1 << (i % 64);
        before != self.0[i / 64]
    }
    fn union_with(&mut self, other: &Bits) -> bool {
        let mut changed = false;
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            let n = *a | *b;
            changed |= n != *a;
            *a = n;
        }
        changed
    }
}

enum Edge {
    Flow(usize),
    /// `{av} ⊆ guard => from ⊆ into`
    Cond {
        av: usize,
        guard: usize,
        from: usize,
        into: usize,
    },
}

/// Compute the least solution with the classic worklist algorithm: each
/// set-variable is a node, flow constraints are edges, and an implication is
/// attached to both its guard and its source so it is re-examined whenever
/// either grows.
pub fn solve_constraints(
    cs: &[Constraint],
    universe: impl IntoIterator<Item = SetVar>,
) -> Solution {
    let mut node_ids: HashMap<SetVar, usize> = HashMap::new();
    let mut nodes: Vec<SetVar> = Vec::new();
    let mut intern_node = |v: &SetVar, nodes: &mut Vec<SetVar>| {
        *node_ids.entry(v.clone()).or_insert_with(|| {
            nodes.push(v.clone());
            nodes.len() - 1
        })
    };
    for v in universe {
        intern_node(&v, &mut nodes);
    }
    let mut value_ids: HashMap<AbstractValue, usize> = HashMap::new();
    let mut values: Vec<AbstractValue> = Vec::new();
    let mut intern_value = |a: &AbstractValue| {
        *value_ids.entry(a.clone()).or_insert_with(|| {
            values.push(a.clone());
            values.len() - 1
        })
    };

    // Intern everything first so bitsets can be sized once.
    enum Pre {
        Direct(usize, usize),
        Flow(usize, usize),
        Cond(usize, usize, usize, usize),
    }
    let pre: Vec<Pre> = cs
        .iter()
        .map(|c| match c {
            Constraint::Direct { value, into } => {
                Pre::Direct(intern_value(value), intern_node(into, &mut nodes))
            }
            Constraint::Flow { from, into } => {
                Pre::Flow(intern_node(from, &mut nodes), intern_node(into, &mut nodes))
            }
            Constraint::Implication {
                guard,
                guard_set,
                from,
                into,
            } => Pre::Cond(
                intern_value(guard),
                intern_node(guard_set, &mut nodes),
                intern_node(from, &mut nodes),
                intern_node(into, &mut nodes),
            ),
        })
        .collect();

    let n = nodes.len();
    let mut data = vec![Bits::new(values.len()); n];
    let mut edges: Vec<Vec<Edge>> = (0..n).map(|_| Vec::new()).collect();
    let mut worklist = Vec::new();
    let mut queued = vec![false; n];

    for c in pre {
        match c {
            Pre::Direct(av, q) => {
                if data[q].set(av) && !queued[q] {
                    queued[q] = true;
                    worklist.push(q);
                }
            }
            Pre::Flow(p1, p2) => edges[p1].push(Edge::Flow(p2)),
            Pre::Cond(av, guard, from, into) => {
                edges[from].push(Edge::Cond {
                    av,
                    guard,
                    from,
                    into,
                });
                edges[guard].push(Edge::Cond {
                    av,
                    guard,
                    from,
                    into,
                });
            }
        }
    }

    while let Some(q) = worklist.pop() {
        queued[q] = false;
        for e in &edges[q] {
            let (from, into) = match *e {
                Edge::Flow(p) => (q, p),
                Edge::Cond {
                    av,
                    guard,
                    from,
                    into,
                } => {
                    if !data[guard].has(av) {
                        continue;
                    }
                    (from, into)
                }
            };
            if from == into {
                continue;
            }
            let src = data[from].clone();
            if data[into].union_with(&src) && !queued[into] {
                queued[into] = true;
                worklist.push(into);
            }
        }
    }

    let sets = nodes
        .into_iter()
        .zip(data)
        .map(|(v, bits)| {
            let set = (0..values.len())
                .filter(|&i| bits.has(i))
                .map(|i| values[i].clone())
                .collect();
            (v, set)
        })
        .collect();
    Solution { sets }
}
