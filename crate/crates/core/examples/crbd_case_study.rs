//! Constant-rate birth-death on a 28-tip primate tree: generate the model
//! program from the Newick data, then compare aligned and unaligned SMC
//! estimates of the marginal likelihood with the closed form.
//!
//! `cargo run --release --example crbd_case_study -- [particles] [replicates]`

use ppl_align::inference::{run_smc, Schedule};
use ppl_align::phylo::{bundled_tree, crbd_exact_log_likelihood, crbd_program, CrbdParams};
use ppl_align::runtime::Evaluator;
use ppl_align::transform::{aligned_cps, unaligned_cps};

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("a count"));
    let n = args.next().unwrap_or(1000);
    let reps = args.next().unwrap_or(10);

    let tree = bundled_tree();
    let params = CrbdParams::new(0.2, 0.1).unwrap();
    let exact = crbd_exact_log_likelihood(&tree, params).unwrap();
    println!("{} tips, crown age {} Ma", tree.leaf_count(), tree.root_age());
    println!("exact log likelihood {exact:.4}");

    let core = crbd_program(&tree, params).unwrap();
    let (analysis, aligned) = aligned_cps(&core);
    let sites = analysis.weight_sites();
    let dynamic = sites.iter().filter(|s| s.dynamic).count();
    println!("{} weight sites, {dynamic} dynamic", sites.len());

    for (name, program, schedule) in [
        ("aligned", aligned, Schedule::Aligned),
        ("unaligned", unaligned_cps(&core), Schedule::Unaligned),
    ] {
        let ev = Evaluator::new(&program).unwrap();
        let mut zs = Vec::new();
        let mut secs = 0.0;
        for seed in 0..reps as u64 {
            let r = run_smc(&ev, n, seed, schedule).unwrap();
            secs += r.wall_time.as_secs_f64();
            zs.push(r.log_normalizer);
        }
        let mean = zs.iter().sum::<f64>() / zs.len() as f64;
        let var = zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (zs.len() as f64 - 1.0);
        println!(
            "{name:>9}: mean {mean:.3}  variance {var:.4}  {:.1} ms per run",
            1e3 * secs / reps as f64
        );
    }
}
