pub mod ast;
pub mod surface;
pub mod cfa;
pub mod cli;
pub mod inference;
pub mod models;
pub mod phylo;
pub mod runtime;
pub mod transform;
