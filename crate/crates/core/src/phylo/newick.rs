use super::tree::{Node, PhyloTree};
use super::PhyloError;

/// Parse a Newick tree with branch lengths. A length on the root is
/// optional; every other node needs one. `[...]` comments are skipped.
pub fn parse_newick(text: &str) -> Result<PhyloTree, PhyloError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        nodes: Vec::new(),
    };
    let root = p.subtree(None)?;
    debug_assert_eq!(root, PhyloTree::ROOT);
    p.skip();
    p.expect(b';')?;
    p.skip();
    if p.pos != p.src.len() {
        return Err(p.error("text after the closing `;`"));
    }
    let mut t = PhyloTree { nodes: p.nodes };
    for i in 1..t.nodes.len() {
        if t.nodes[i].length.is_nan() {
            return Err(PhyloError::MissingLength { node: t.name(i) });
        }
    }
    if t.nodes[0].length.is_nan() {
        t.nodes[0].length = 0.0;
    }
    t.compute_ages()?;
    Ok(t)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nodes: Vec<Node>,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> PhyloError {
        PhyloError::Newick {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b'[' {
                while let Some(c) = self.peek() {
                    self.pos += 1;
                    if c == b']' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), PhyloError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", c as char)))
        }
    }

    fn subtree(&mut self, parent: Option<usize>) -> Result<usize, PhyloError> {
        let id = self.nodes.len();
        self.nodes.push(Node {
            name: None,
            parent,
            children: Vec::new(),
            length: f64::NAN,
            age: 0.0,
        });
        self.skip();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                let c = self.subtree(Some(id))?;
                self.nodes[id].children.push(c);
                self.skip();
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.error("expected `,` or `)`")),
                }
            }
        }
        self.skip();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if b"(),:;[".contains(&c) || c.is_ascii_whitespace() {
                break;
            }
            self.pos += 1;
        }
        if self.pos > start {
            let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ASCII delimiters");
            self.nodes[id].name = Some(name.to_string());
        } else if self.nodes[id].children.is_empty() {
            return Err(self.error("expected a leaf name or `(`"));
        }
        self.skip();
        if self.peek() == Some(b':') {
            self.pos += 1;
            self.skip();
            let start = self.pos;
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() || b"+-.eE".contains(&c) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ASCII digits");
            let len: f64 = text.parse().map_err(|_| PhyloError::Newick {
                offset: start,
                message: format!("bad branch length `{text}`"),
            })?;
            if !len.is_finite() || len < 0.0 {
                return Err(PhyloError::Newick {
                    offset: start,
                    message: format!("branch length must be finite and non-negative, got {text}"),
                });
            }
            self.nodes[id].length = len;
        }
        Ok(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_binary_tree() {
        let t = parse_newick("(A:1.0,B:1.0):0.0;").unwrap();
        assert_eq!(t.leaf_count(), 2);
        assert_eq!(t.root_age(), 1.0);
        assert!(t.is_binary());
    }

    #[test]
    fn single_leaf_parses() {
        let t = parse_newick("A:1.0;").unwrap();
        assert_eq!(t.leaf_count(), 1);
        assert_eq!(t.root_age(), 0.0);
    }

    #[test]
    fn malformed_input_is_reported() {
        for bad in ["(A:1,B:1)", "(A:1,B:1;", "(A:1,:1);", "(A:1,B:x);", "(A:1,B:1); x"] {
            assert!(
                matches!(parse_newick(bad), Err(PhyloError::Newick { .. })),
                "{bad}"
            );
        }
        assert_eq!(
            parse_newick("(A:1,B);").unwrap_err(),
            PhyloError::MissingLength { node: "B".into() }
        );
    }

    #[test]
    fn non_ultrametric_trees_name_a_leaf() {
        let e = parse_newick("((A:1,B:1):1,C:2.5);").unwrap_err();
        assert!(matches!(&e, PhyloError::NotUltrametric { leaf, .. } if leaf == "A"), "{e}");
        assert!(parse_newick("((A:1,B:1):1,C:2.0000000001);").is_ok());
    }

    #[test]
    fn comments_and_whitespace_are_ignored() {
        let t = parse_newick(" ( A : 1 [note], B:1 ) root ;\n").unwrap();
        assert_eq!(t.root().name.as_deref(), Some("root"));
    }
}
