use std::process::{Command, Output};

fn ppl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppl"))
        .args(args)
        .env("PPL_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn analyze_reports_aligned_and_dynamic_weights() {
    let o = ppl(&["analyze", "toy.ppl"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("weight at 1:1 (label 20): aligned"), "{s}");
    for line in [3, 4, 7] {
        assert!(s.contains(&format!("weight at {line}:3")), "{s}");
    }
    assert_eq!(s.matches("): dynamic").count(), 3);
}

#[test]
fn analyze_prints_the_worked_example_labels() {
    let o = ppl(&["analyze", "eq1.ppl", "--dump-constraints", "--dump-dynamic"]);
    let s = stdout(&o);
    assert!(s.contains("6 dynamic labels: {3, 4, 5, 6, 9, 10}"), "{s}");
    assert!(s.contains("15 constraints"));
    assert!(s.contains("{stoch} ⊆ S2"), "{s}");
}

#[test]
fn weight_free_model_has_no_dynamic_labels() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plain.ppl");
    std::fs::write(&path, "x = 1 + 2\nx * 3\n").unwrap();
    let s = stdout(&ppl(&["analyze", path.to_str().unwrap()]));
    assert!(s.contains("0 dynamic labels"), "{s}");
}

#[test]
fn analyze_can_dump_the_cps_program() {
    let s = stdout(&ppl(&["analyze", "sim.ppl", "--dump-cps"]));
    assert!(s.contains("aligned CPS program:"));
    assert!(s.contains("dweight("), "{s}");
}

#[test]
fn likelihood_weighting_with_one_particle() {
    let o = ppl(&["run", "--method", "lw", "-n", "1", "--seed", "7", "toy.ppl"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let rows: Vec<&str> = s.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "sample,value,log_weight");
    assert_eq!(rows.len(), 2);
    assert!(rows[1].ends_with(",100"), "{s}");
}

#[test]
fn ssm_summary_is_near_the_kalman_value() {
    // Kalman-filter marginal likelihood of the three observations.
    let (mut m, mut p, mut log_z) = (0.0f64, 4.0f64, 0.0f64);
    for y in [2.1, 6.3, 10.7] {
        let s = p + 1.0;
        log_z += -0.5 * (2.0 * std::f64::consts::PI * s).ln() - (y - m).powi(2) / (2.0 * s);
        m += p / s * (y - m) + 4.0;
        p = p * (1.0 - p / s) + 1.0;
    }
    let o = ppl(&["run", "--method", "aligned", "-n", "10000", "--seed", "1", "ssm.ppl", "--summary"]);
    assert_eq!(o.status.code(), Some(0));
    let err = stderr(&o);
    let z: f64 = err
        .lines()
        .find_map(|l| l.strip_prefix("log_normalizer: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((z - log_z).abs() < 0.05, "{z} vs {log_z}");
    assert!(err.contains("resample_count: 4"));
    assert!(err.contains("wall_time_ms: "));
}

#[test]
fn compare_writes_one_column_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.csv");
    let o = ppl(&[
        "compare", "--methods", "aligned,unaligned", "-n", "30", "--replicates", "100",
        "crbd.ppl", "--out", out.to_str().unwrap(), "--summary",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.contains("# exact_log_z=-72.2398706176821"), "{csv}");
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "replicate,aligned,unaligned");
    assert_eq!(rows.len(), 101);
    assert!(rows[1..].iter().all(|r| r.split(',').count() == 3));
    assert!(stderr(&o).contains("speedup_unaligned_over_aligned: "));
}

#[test]
fn trees_become_crbd_programs() {
    let o = ppl(&["run", "pitheciidae_28.nwk", "-n", "20", "--summary"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("# exact_log_z="));
    assert!(stderr(&o).contains("resample_count: 83"));
    let o = ppl(&["run", "pitheciidae_28.nwk", "--stem", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ppl(&["run", "pitheciidae_28.nwk", "--death", "0.2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn replicates_write_one_estimate_per_row() {
    let s = stdout(&ppl(&["run", "sim.ppl", "-n", "50", "--replicates", "5", "--seed", "3"]));
    let rows: Vec<&str> = s.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "replicate,seed,log_normalizer,resample_count");
    assert_eq!(rows.len(), 6);
    assert!(rows[1].starts_with("0,3,") && rows[1].ends_with(",2"));
    assert!(rows[5].starts_with("4,7,"));
}

#[test]
fn trace_lists_weight_events() {
    let o = ppl(&["run", "toy.ppl", "-n", "3", "--trace"]);
    let err = stderr(&o);
    assert!(err.starts_with("trace: 1:1 weight +5 -> 5\n"), "{err}");
    assert!(err.contains("dweight"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for method in ["aligned", "unaligned", "lw"] {
        let mut files = Vec::new();
        for k in 0..2 {
            let out = dir.path().join(format!("{method}{k}.csv"));
            let o = ppl(&["run", "sim.ppl", "--method", method, "-n", "500", "--seed", "9",
                          "--out", out.to_str().unwrap(), "--weighted"]);
            assert_eq!(o.status.code(), Some(0));
            files.push(std::fs::read(out).unwrap());
        }
        assert_eq!(files[0], files[1], "{method}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(ppl(&[]).status.code(), Some(1));
    assert_eq!(ppl(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ppl(&["run", "toy.ppl", "-n", "0"]).status.code(), Some(1));
    assert_eq!(ppl(&["run", "toy.ppl", "--method", "mcmc"]).status.code(), Some(1));
    assert_eq!(ppl(&["run", "/nonexistent/model.ppl"]).status.code(), Some(1));
    assert_eq!(ppl(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ppl");
    std::fs::write(&bad, "if then").unwrap();
    let o = ppl(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.ppl:1:4"), "{}", stderr(&o));

    let zero = dir.path().join("zero.ppl");
    std::fs::write(&zero, "weight(log(0))\n1").unwrap();
    let o = ppl(&["run", zero.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("all particles have zero likelihood"));

    let nan = dir.path().join("nan.ppl");
    std::fs::write(&nan, "weight(log(0) - log(0))\n1").unwrap();
    assert_eq!(ppl(&["run", nan.to_str().unwrap()]).status.code(), Some(3));
}
