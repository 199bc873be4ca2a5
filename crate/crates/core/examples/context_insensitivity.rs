//! Where a 0-CFA loses precision: `plus` is called once with a sampled
//! argument and once with constants. Its result set merges both calls, so
//! the second `if` looks stochastic and the weight inside it is marked
//! dynamic, although at run time that condition never depends on a draw.

use ppl_align::cfa::analyze;
use ppl_align::models;
use ppl_align::runtime::{Evaluator, Observer, RngStream};
use ppl_align::surface::parse_core;

fn main() {
    let src = models::PLUS.replace("then true", "then { weight(1)\ntrue }");
    print!("{src}");
    let a = analyze(&parse_core(&src).unwrap());
    println!();
    for site in a.weight_sites() {
        println!("weight at {} (label {}): dynamic = {}", site.span, site.label, site.dynamic);
    }

    let ev = Evaluator::new(&a.labeled).unwrap();
    let runs = 1000;
    let mut flagged = 0;
    for seed in 0..runs {
        let mut obs = Observer::instrumented();
        ev.eval_observed(0.0, &mut RngStream::new(seed, 0, 0).rng(), &mut obs)
            .unwrap();
        flagged += obs.stochastic_weights.len();
    }
    println!("weights reached inside a stochastic branch over {runs} runs: {flagged}");
}
