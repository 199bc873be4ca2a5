//! Time trees and the constant-rate birth-death (CRBD) model: Newick
//! input, program generation and the closed-form likelihood.

mod crbd;
mod newick;
mod tree;

pub use crbd::{crbd_exact_log_likelihood, crbd_program, crbd_source, recorded_log_z, CrbdParams};
pub use newick::parse_newick;
pub use tree::{Node, PhyloTree, ULTRAMETRIC_TOLERANCE};

/// The bundled 28-leaf stand-in tree for Pitheciidae.
pub const PITHECIIDAE_28: &str = include_str!("../../models/pitheciidae_28.nwk");

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PhyloError {
    #[error("newick: at byte {offset}: {message}")]
    Newick { offset: usize, message: String },
    #[error("newick: {node} has no branch length")]
    MissingLength { node: String },
    #[error("tree is not ultrametric: leaf {leaf} is {depth} Ma from the root, tree height is {height} Ma")]
    NotUltrametric { leaf: String, depth: f64, height: f64 },
    #[error("cannot resolve polytomies: {0}")]
    Stem(String),
    #[error("invalid rates: {0}")]
    Params(String),
    #[error("unsupported tree: {0}")]
    Shape(String),
}

/// The bundled tree with its trichotomy resolved by a 0.2 Ma stem.
pub fn bundled_tree() -> PhyloTree {
    parse_newick(PITHECIIDAE_28)
        .and_then(|t| t.resolve_polytomies(0.2))
        .expect("bundled tree is valid")
}
