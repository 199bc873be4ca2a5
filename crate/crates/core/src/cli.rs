//! The `ppl` command line: analyze a model, run inference on it, or compare
//! inference methods over replicates.
//!
//! Exit codes: 0 success, 1 usage error, 2 parse or analysis error,
//! 3 inference error.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ast::{CoreTerm, LabelScheme};
use crate::cfa::analyze_with;
use crate::inference::{
    lw_log_normalizer, run_likelihood_weighting_compiled, run_smc, Schedule,
};
use crate::phylo::{crbd_exact_log_likelihood, crbd_source, parse_newick, recorded_log_z, CrbdParams};
use crate::runtime::{Evaluator, Observer, RngStream, Value};
use crate::surface::{parse_core, pretty};
use crate::transform::{align_weights, cps_transform};

#[derive(Parser, Debug)]
#[command(name = "ppl", version, about = "Align and run SMC inference on probabilistic programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Label the program, solve its 0-CFA constraints and report which
    /// weights are aligned and which are dynamic.
    Analyze(AnalyzeArgs),
    /// Run one inference method and write samples (or, with replicates,
    /// one estimate per row) as CSV.
    Run(RunArgs),
    /// Run several methods over the same replicate seeds and write their
    /// normalizer estimates side by side.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    /// A `.ppl` program or a `.nwk` tree (which becomes a CRBD program).
    /// Names of bundled models such as `toy.ppl` work from anywhere.
    pub model: PathBuf,
    /// CRBD birth rate, for `.nwk` input.
    #[arg(long, default_value_t = 0.2)]
    pub birth: f64,
    /// CRBD death rate, for `.nwk` input.
    #[arg(long, default_value_t = 0.1)]
    pub death: f64,
    /// Stem length used to resolve trichotomies, for `.nwk` input.
    #[arg(long, default_value_t = 0.2)]
    pub stem: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Labels {
    /// Children before parents, as in the worked examples.
    Post,
    Pre,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = Labels::Post)]
    pub labels: Labels,
    /// Print every generated constraint.
    #[arg(long)]
    pub dump_constraints: bool,
    /// Print the dynamic labels, one per line.
    #[arg(long)]
    pub dump_dynamic: bool,
    /// Print the aligned, CPS-converted program.
    #[arg(long)]
    pub dump_cps: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Aligned,
    Unaligned,
    Lw,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Aligned => "aligned",
            Method::Unaligned => "unaligned",
            Method::Lw => "lw",
        }
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = Method::Aligned)]
    pub method: Method,
    #[arg(short = 'n', long = "particles", default_value_t = 1000,
          value_parser = clap::value_parser!(u32).range(1..))]
    pub particles: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent runs with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub replicates: u32,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print log_normalizer, resample_count and wall_time_ms to stderr.
    #[arg(long)]
    pub summary: bool,
    /// Print the weight events of one execution to stderr.
    #[arg(long)]
    pub trace: bool,
    /// For SMC, write the population before the final resampling with its
    /// weights instead of the resampled draws.
    #[arg(long)]
    pub weighted: bool,
    /// Print the program that is actually run to stderr.
    #[arg(long)]
    pub dump_cps: bool,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "aligned,unaligned")]
    pub methods: Vec<Method>,
    #[arg(short = 'n', long = "particles", default_value_t = 1000,
          value_parser = clap::value_parser!(u32).range(1..))]
    pub particles: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    pub replicates: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print per-method mean, variance and wall time to stderr.
    #[arg(long)]
    pub summary: bool,
}

/// A failure with its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Analysis(String),
    #[error("{0}")]
    Inference(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Analysis(_) => 2,
            CliError::Inference(_) => 3,
        }
    }
}

/// Parse `args` (program name first), run the command and return the exit
/// code. Normal output goes to `out`, diagnostics to `err`.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(&a, out),
        Command::Run(a) => cmd_run(&a, out, err),
        Command::Compare(a) => cmd_compare(&a, out, err),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Honor `PPL_THREADS` as a cap on worker threads.
fn configure_threads() {
    if let Some(n) = std::env::var("PPL_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n > 0)
    {
        // Fails only if the pool already exists, e.g. on a second call.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// A loaded program and what is known about its normalizing constant.
pub struct Model {
    pub name: String,
    pub source: String,
    pub program: CoreTerm,
    pub exact_log_z: Option<f64>,
}

pub fn load_model(args: &ModelArgs) -> Result<Model, CliError> {
    let path = &args.model;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => match bundled(path) {
            Some(t) => t.to_string(),
            None => return Err(CliError::Usage(format!("cannot read {}: {e}", path.display()))),
        },
    };
    let source = if path.extension().is_some_and(|e| e == "nwk") {
        let params = CrbdParams::new(args.birth, args.death)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let tree = parse_newick(&text)
            .and_then(|t| t.resolve_polytomies(args.stem))
            .map_err(|e| CliError::Analysis(format!("{name}: {e}")))?;
        crbd_exact_log_likelihood(&tree, params)
            .and_then(|_| crbd_source(&tree, params))
            .map_err(|e| CliError::Analysis(format!("{name}: {e}")))?
    } else {
        text
    };
    let program = parse_core(&source).map_err(|e| CliError::Analysis(format!("{name}:{e}")))?;
    Ok(Model {
        name,
        exact_log_z: recorded_log_z(&source),
        source,
        program,
    })
}

fn bundled(path: &Path) -> Option<&'static str> {
    let file = path.file_name()?.to_str()?;
    if file == "pitheciidae_28.nwk" {
        return Some(crate::phylo::PITHECIIDAE_28);
    }
    crate::models::all()
        .into_iter()
        .find(|(n, _)| *n == file)
        .map(|(_, src)| src)
}

fn write_to(path: &Option<PathBuf>, out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write output: {e}"))),
    }
}

pub fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let scheme = match args.labels {
        Labels::Post => LabelScheme::PostOrder,
        Labels::Pre => LabelScheme::PreOrder,
    };
    let a = analyze_with(&model.program, &scheme)
        .map_err(|e| CliError::Analysis(format!("{}: {e}", model.name)))?;
    let mut s = String::new();
    let _ = writeln!(s, "model: {}", model.name);
    let _ = writeln!(s, "labeled term (* marks dynamic terms):");
    let _ = writeln!(s, "{}", a.annotated());
    let _ = writeln!(s, "{} constraints", a.constraints.len());
    let dynamic: Vec<String> = a.dynamic.iter().map(|l| l.to_string()).collect();
    let _ = writeln!(s, "{} dynamic labels: {{{}}}", dynamic.len(), dynamic.join(", "));
    for w in a.weight_sites() {
        let kind = if w.dynamic { "dynamic" } else { "aligned" };
        let _ = writeln!(s, "weight at {} (label {}): {kind}", w.span, w.label);
    }
    if args.dump_constraints {
        let _ = writeln!(s, "\nconstraints:");
        s.push_str(&a.dump_constraints());
    }
    if args.dump_dynamic {
        let _ = writeln!(s, "\ndynamic labels:");
        s.push_str(&a.dump_dynamic());
    }
    if args.dump_cps {
        let cps = cps_transform(&align_weights(&a.labeled, &a.dynamic));
        let _ = writeln!(s, "\naligned CPS program:");
        s.push_str(&pretty(&cps));
    }
    write_to(&None, out, &s)
}

/// The program a method runs: aligned and CPS-converted, CPS-converted
/// only, or the direct program.
fn program_for(model: &Model, method: Method) -> CoreTerm {
    match method {
        Method::Aligned => {
            let a = crate::cfa::analyze(&model.program);
            cps_transform(&align_weights(&a.labeled, &a.dynamic))
        }
        Method::Unaligned => cps_transform(&model.program),
        Method::Lw => model.program.clone(),
    }
}

struct Estimate {
    log_normalizer: f64,
    resample_count: usize,
    wall_time: Duration,
    rows: Vec<(Value, f64)>,
}

fn estimate(
    ev: &Evaluator,
    method: Method,
    n: usize,
    seed: u64,
    weighted: bool,
) -> Result<Estimate, CliError> {
    let inference = |e: crate::inference::InferenceError| CliError::Inference(e.to_string());
    match method {
        Method::Lw => {
            let start = std::time::Instant::now();
            let rows = run_likelihood_weighting_compiled(ev, n, seed).map_err(inference)?;
            Ok(Estimate {
                log_normalizer: lw_log_normalizer(&rows),
                resample_count: 0,
                wall_time: start.elapsed(),
                rows,
            })
        }
        Method::Aligned | Method::Unaligned => {
            let schedule = if method == Method::Aligned {
                Schedule::Aligned
            } else {
                Schedule::Unaligned
            };
            let r = run_smc(ev, n, seed, schedule).map_err(inference)?;
            let rows = if weighted {
                r.weighted_final
            } else {
                r.samples.into_iter().map(|v| (v, 0.0)).collect()
            };
            Ok(Estimate {
                log_normalizer: r.log_normalizer,
                resample_count: r.resample_count,
                wall_time: r.wall_time,
                rows,
            })
        }
    }
}

fn header(model: &Model, fields: &[(&str, String)]) -> String {
    let mut s = format!("# model={}\n", model.name);
    for (k, v) in fields {
        let _ = writeln!(s, "# {k}={v}");
    }
    if let Some(z) = model.exact_log_z {
        let _ = writeln!(s, "# exact_log_z={z}");
    }
    s
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn compile(model: &Model, method: Method) -> Result<Evaluator, CliError> {
    Evaluator::new(&program_for(model, method))
        .map_err(|e| CliError::Analysis(format!("{}:{e}", model.name)))
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let program = program_for(&model, args.method);
    if args.dump_cps {
        let _ = write!(err, "{}", pretty(&program));
    }
    let ev = Evaluator::new(&program)
        .map_err(|e| CliError::Analysis(format!("{}:{e}", model.name)))?;
    if args.trace {
        trace_one(&model, args, err)?;
    }
    let n = args.particles as usize;
    let mut fields = vec![
        ("method", args.method.name().to_string()),
        ("particles", n.to_string()),
        ("seed", args.seed.to_string()),
    ];
    let mut csv;
    if args.replicates == 1 {
        let e = estimate(&ev, args.method, n, args.seed, args.weighted)?;
        fields.push(("log_normalizer", e.log_normalizer.to_string()));
        fields.push(("resample_count", e.resample_count.to_string()));
        csv = header(&model, &fields);
        csv.push_str("sample,value,log_weight\n");
        for (i, (v, w)) in e.rows.iter().enumerate() {
            let _ = writeln!(csv, "{i},{v},{w}");
        }
        if args.summary {
            let _ = writeln!(err, "log_normalizer: {}", e.log_normalizer);
            let _ = writeln!(err, "resample_count: {}", e.resample_count);
            let _ = writeln!(err, "wall_time_ms: {:.3}", ms(e.wall_time));
        }
    } else {
        fields.push(("replicates", args.replicates.to_string()));
        csv = header(&model, &fields);
        csv.push_str("replicate,seed,log_normalizer,resample_count\n");
        let mut zs = Vec::new();
        let mut wall = Duration::ZERO;
        for r in 0..args.replicates as u64 {
            let seed = args.seed + r;
            let e = estimate(&ev, args.method, n, seed, false)?;
            let _ = writeln!(csv, "{r},{seed},{},{}", e.log_normalizer, e.resample_count);
            zs.push(e.log_normalizer);
            wall += e.wall_time;
        }
        if args.summary {
            let (m, v) = mean_var(&zs);
            let _ = writeln!(err, "log_normalizer_mean: {m}");
            let _ = writeln!(err, "log_normalizer_variance: {v}");
            let _ = writeln!(err, "wall_time_ms: {:.3}", ms(wall));
        }
    }
    write_to(&args.out, out, &csv)
}

/// Trace one execution on stream `(seed, 0, 0)` of the direct-style
/// program behind the chosen method, so aligned runs show `dweight`s.
fn trace_one(model: &Model, args: &RunArgs, err: &mut dyn Write) -> Result<(), CliError> {
    let direct = match args.method {
        Method::Aligned => {
            let a = crate::cfa::analyze(&model.program);
            align_weights(&a.labeled, &a.dynamic)
        }
        _ => model.program.clone(),
    };
    let ev = Evaluator::new(&direct).map_err(|e| CliError::Analysis(e.to_string()))?;
    let mut obs = Observer::tracing();
    ev.eval_observed(0.0, &mut RngStream::new(args.seed, 0, 0).rng(), &mut obs)
        .map_err(|e| CliError::Inference(e.to_string()))?;
    for e in obs.trace.unwrap_or_default() {
        let _ = writeln!(err, "trace: {e}");
    }
    Ok(())
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    (m, v)
}

pub fn cmd_compare(
    args: &CompareArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    if args.methods.is_empty() {
        return Err(CliError::Usage("--methods needs at least one method".into()));
    }
    let n = args.particles as usize;
    let evs = args
        .methods
        .iter()
        .map(|m| compile(&model, *m))
        .collect::<Result<Vec<_>, _>>()?;
    let reps = args.replicates as usize;
    let mut table = vec![Vec::with_capacity(reps); args.methods.len()];
    let mut walls = vec![Duration::ZERO; args.methods.len()];
    for r in 0..reps as u64 {
        for (k, (m, ev)) in args.methods.iter().zip(&evs).enumerate() {
            let e = estimate(ev, *m, n, args.seed + r, false)?;
            table[k].push(e.log_normalizer);
            walls[k] += e.wall_time;
        }
    }
    let fields = [
        ("particles", n.to_string()),
        ("seed", args.seed.to_string()),
        ("replicates", reps.to_string()),
    ];
    let mut csv = header(&model, &fields);
    let names: Vec<&str> = args.methods.iter().map(|m| m.name()).collect();
    let _ = writeln!(csv, "replicate,{}", names.join(","));
    for r in 0..reps {
        let row: Vec<String> = table.iter().map(|col| col[r].to_string()).collect();
        let _ = writeln!(csv, "{r},{}", row.join(","));
    }
    if args.summary {
        for (k, name) in names.iter().enumerate() {
            let (m, v) = mean_var(&table[k]);
            let _ = writeln!(err, "{name}.log_normalizer_mean: {m}");
            let _ = writeln!(err, "{name}.log_normalizer_variance: {v}");
            let _ = writeln!(err, "{name}.wall_time_ms: {:.3}", ms(walls[k]) / reps as f64);
        }
        if let Some(z) = model.exact_log_z {
            let _ = writeln!(err, "exact_log_z: {z}");
        }
        let a = args.methods.iter().position(|m| *m == Method::Aligned);
        let u = args.methods.iter().position(|m| *m == Method::Unaligned);
        if let (Some(a), Some(u)) = (a, u) {
            let ratio = walls[u].as_secs_f64() / walls[a].as_secs_f64();
            let _ = writeln!(err, "speedup_unaligned_over_aligned: {ratio:.3}");
        }
    }
    write_to(&args.out, out, &csv)
}
