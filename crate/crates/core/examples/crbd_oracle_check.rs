//! The closed-form CRBD likelihood against plain likelihood weighting on
//! the generated program, for a tree given on the command line or the
//! bundled one.
//!
//! `cargo run --release --example crbd_oracle_check -- '((a:1,b:1):2,c:3);'`

use ppl_align::inference::{lw_log_normalizer, run_likelihood_weighting};
use ppl_align::phylo::{bundled_tree, crbd_exact_log_likelihood, crbd_program, parse_newick, CrbdParams};

fn main() {
    let tree = match std::env::args().nth(1) {
        Some(text) => parse_newick(&text)
            .and_then(|t| t.resolve_polytomies(0.2))
            .unwrap_or_else(|e| panic!("{e}")),
        None => bundled_tree(),
    };
    println!("{tree}");
    for (birth, death) in [(0.2, 0.1), (0.1, 0.05), (0.05, 0.0)] {
        let p = CrbdParams::new(birth, death).unwrap();
        let exact = crbd_exact_log_likelihood(&tree, p).unwrap();
        let program = crbd_program(&tree, p).unwrap();
        let runs = run_likelihood_weighting(&program, 20_000, 3).unwrap();
        println!(
            "λ={birth} μ={death}: exact {exact:.4}, likelihood weighting {:.4}",
            lw_log_normalizer(&runs)
        );
    }
}
