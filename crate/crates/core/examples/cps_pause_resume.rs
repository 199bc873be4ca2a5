//! Driving a CPS program by hand: every aligned weight hands back a
//! continuation, and resuming it with unit carries on to the next one.
//! `dweight` adds to the weight without stopping.

use ppl_align::models;
use ppl_align::runtime::{Evaluator, Outcome, RngStream};
use ppl_align::surface::{parse_core, pretty};
use ppl_align::transform::aligned_cps;

fn main() {
    let core = parse_core(models::SIM).unwrap();
    let (_, cps) = aligned_cps(&core);
    println!("{} nodes after CPS conversion", cps.size());
    if std::env::args().any(|a| a == "--print") {
        print!("{}", pretty(&cps));
    }

    let ev = Evaluator::new(&cps).unwrap();
    let mut rng = RngStream::new(42, 0, 0).rng();
    let mut step = ev.eval(0.0, &mut rng).unwrap();
    let mut pauses = 0;
    loop {
        match step {
            Outcome::Paused(k, w) => {
                pauses += 1;
                println!("pause {pauses}: log weight so far {w:.4}");
                step = ev.resume(&k, w, &mut rng).unwrap();
            }
            Outcome::Final(v, w) => {
                println!("finished with {v}, log weight {w:.4}");
                break;
            }
        }
    }
}
