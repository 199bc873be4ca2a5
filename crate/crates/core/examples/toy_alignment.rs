//! The two-branch toy model: one branch weighs far more at its first
//! weight, the other at its last. Resampling at every weight wipes out the
//! `false` branch; resampling only at the aligned weight keeps both.

use ppl_align::inference::{run_aligned_smc, run_unaligned_smc, SmcResult};
use ppl_align::models;
use ppl_align::surface::parse_core;
use ppl_align::transform::{aligned_cps, unaligned_cps};

fn share_false(r: &SmcResult) -> f64 {
    let n = r.samples.len() as f64;
    r.samples.iter().filter(|v| v.as_bool() == Some(false)).count() as f64 / n
}

fn main() {
    let core = parse_core(models::TOY).expect("bundled model parses");
    let (analysis, aligned) = aligned_cps(&core);
    for site in analysis.weight_sites() {
        let kind = if site.dynamic { "dynamic" } else { "aligned" };
        println!("weight at {}: {kind}", site.span);
    }

    let n = 10_000;
    for seed in 0..5 {
        let a = run_aligned_smc(&aligned, n, seed).unwrap();
        let u = run_unaligned_smc(&unaligned_cps(&core), n, seed).unwrap();
        println!(
            "seed {seed}: P(false) aligned {:.3} ({} resamplings), unaligned {:.3} ({} resamplings)",
            share_false(&a),
            a.resample_count,
            share_false(&u),
            u.resample_count
        );
    }
}
