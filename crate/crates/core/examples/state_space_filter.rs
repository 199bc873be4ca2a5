//! Aligned SMC on a linear-Gaussian state-space model, checked against a
//! Kalman filter on the same observations.

use ppl_align::models;
use ppl_align::surface::parse_core;
use ppl_align::inference::run_aligned_smc;
use ppl_align::transform::aligned_cps;

// Prior x1 ~ N(0, 2²), x(t+1) = x(t) + 4 + N(0, 1), y(t) = x(t) + N(0, 1);
// returns the filtered mean and variance of x4 and log p(y).
fn kalman(ys: &[f64]) -> (f64, f64, f64) {
    let (mut m, mut p, mut log_z) = (0.0f64, 4.0f64, 0.0f64);
    for &y in ys {
        let s = p + 1.0;
        log_z += -0.5 * (2.0 * std::f64::consts::PI * s).ln() - (y - m).powi(2) / (2.0 * s);
        let gain = p / s;
        m += gain * (y - m);
        p *= 1.0 - gain;
        m += 4.0;
        p += 1.0;
    }
    (m, p, log_z)
}

fn main() {
    print!("{}", models::SSM);
    let (_, program) = aligned_cps(&parse_core(models::SSM).unwrap());
    let (mean, var, log_z) = kalman(&[2.1, 6.3, 10.7]);

    let r = run_aligned_smc(&program, 10_000, 1).unwrap();
    let xs: Vec<f64> = r.samples.iter().filter_map(|v| v.as_real()).collect();
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);

    println!("\n          smc       kalman");
    println!("mean      {m:<9.4} {mean:.4}");
    println!("variance  {v:<9.4} {var:.4}");
    println!("log Z     {:<9.4} {log_z:.4}", r.log_normalizer);
    println!("{} resamplings in {:?}", r.resample_count, r.wall_time);
}
