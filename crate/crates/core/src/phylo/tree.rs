use std::fmt;

use super::PhyloError;

/// Tolerance, in Ma, for root-to-leaf path lengths to count as equal.
pub const ULTRAMETRIC_TOLERANCE: f64 = 1e-6;

fn snap(age: f64) -> f64 {
    (age * 1e9).round() / 1e9
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub name: Option<String>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Length of the edge above this node, in Ma.
    pub length: f64,
    /// Time before present, in Ma; zero for leaves.
    pub age: f64,
}

/// A rooted time tree stored as an arena; node 0 is the root.
#[derive(Clone, Debug, PartialEq)]
pub struct PhyloTree {
    pub nodes: Vec<Node>,
}

impl PhyloTree {
    pub const ROOT: usize = 0;

    pub fn root(&self) -> &Node {
        &self.nodes[Self::ROOT]
    }

    pub fn root_age(&self) -> f64 {
        self.root().age
    }

    pub fn is_leaf(&self, i: usize) -> bool {
        self.nodes[i].children.is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|i| self.is_leaf(*i))
    }

    pub fn internal(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|i| !self.is_leaf(*i))
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    pub fn is_binary(&self) -> bool {
        self.internal().all(|i| self.nodes[i].children.len() == 2)
    }

    pub fn name(&self, i: usize) -> String {
        self.nodes[i]
            .name
            .clone()
            .unwrap_or_else(|| format!("node {i}"))
    }

    /// Nodes in pre-order (parents before children, children in order).
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![Self::ROOT];
        while let Some(i) = stack.pop() {
            out.push(i);
            stack.extend(self.nodes[i].children.iter().rev());
        }
        out
    }

    /// Derive ages from edge lengths, checking that every leaf sits at the
    /// same distance from the root. Ages are rounded to a 1e-9 Ma grid so
    /// summation noise does not leak into generated programs.
    pub(crate) fn compute_ages(&mut self) -> Result<(), PhyloError> {
        let order = self.preorder();
        let mut depth = vec![0.0; self.nodes.len()];
        for &i in &order[1..] {
            let p = self.nodes[i].parent.expect("non-root has a parent");
            depth[i] = depth[p] + self.nodes[i].length;
        }
        let leaves: Vec<usize> = self.leaves().collect();
        let height = leaves.iter().map(|&l| depth[l]).fold(f64::NEG_INFINITY, f64::max);
        if let Some(&bad) = leaves
            .iter()
            .find(|&&l| (depth[l] - height).abs() > ULTRAMETRIC_TOLERANCE)
        {
            return Err(PhyloError::NotUltrametric {
                leaf: self.name(bad),
                depth: depth[bad],
                height,
            });
        }
        for &i in &order {
            self.nodes[i].age = if self.is_leaf(i) {
                0.0
            } else {
                snap(height - depth[i])
            };
        }
        Ok(())
    }

    /// Split each trichotomy into two binary nodes: the first child stays
    /// at the original node, the other two join a new node `stem_length`
    /// younger.
    pub fn resolve_polytomies(&self, stem_length: f64) -> Result<PhyloTree, PhyloError> {
        if stem_length.is_nan() || stem_length <= 0.0 {
            return Err(PhyloError::Stem(format!(
                "stem length must be positive, got {stem_length}"
            )));
        }
        let mut t = self.clone();
        for i in 0..self.nodes.len() {
            let children = t.nodes[i].children.clone();
            match children.len() {
                0..=2 => continue,
                3 => {}
                k => {
                    return Err(PhyloError::Stem(format!(
                        "{} has {k} children; only trichotomies can be resolved",
                        t.name(i)
                    )))
                }
            }
            let age = t.nodes[i].age - stem_length;
            let oldest = children[1..]
                .iter()
                .map(|&c| t.nodes[c].age)
                .fold(f64::NEG_INFINITY, f64::max);
            if age <= oldest {
                return Err(PhyloError::Stem(format!(
                    "stem length {stem_length} does not fit below {} (age {})",
                    t.name(i),
                    t.nodes[i].age
                )));
            }
            let new = t.nodes.len();
            t.nodes.push(Node {
                name: None,
                parent: Some(i),
                children: children[1..].to_vec(),
                length: stem_length,
                age,
            });
            for &c in &children[1..] {
                t.nodes[c].parent = Some(new);
                t.nodes[c].length = age - t.nodes[c].age;
            }
            t.nodes[i].children = vec![children[0], new];
        }
        Ok(t)
    }

    fn write(&self, i: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = &self.nodes[i];
        if !n.children.is_empty() {
            f.write_str("(")?;
            for (k, &c) in n.children.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                self.write(c, f)?;
            }
            f.write_str(")")?;
        }
        if let Some(name) = &n.name {
            f.write_str(name)?;
        }
        write!(f, ":{}", n.length)
    }
}

/// Newick text, with every edge length written in full precision.
impl fmt::Display for PhyloTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(Self::ROOT, f)?;
        f.write_str(";")
    }
}
