use ppl_align::ast::{build::*, Builtin, Constant, Distribution, Span, Term, TermKind};
use ppl_align::runtime::{
    draw, eval, Evaluator, Observer, Outcome, RngStream, RuntimeError, Value, WeightKind,
};
use ppl_align::surface::parse_core;

fn run(src: &str) -> Result<(Value, f64), RuntimeError> {
    let t = parse_core(src).unwrap();
    match eval(&t, 0.0, &mut RngStream::new(1, 0, 0).rng())? {
        Outcome::Final(v, w) => Ok((v, w)),
        Outcome::Paused(..) => panic!("direct programs never pause"),
    }
}

fn real_of(src: &str) -> f64 {
    run(src).unwrap().0.as_real().unwrap()
}

#[test]
fn if_true_takes_the_first_branch() {
    let (v, w) = run("if true then 1 else 2").unwrap();
    assert!(v.same(&Value::Real(1.0)));
    assert_eq!(w, 0.0);
}

#[test]
fn direct_weight_adds_to_the_initial_weight() {
    let t = core(weight(real(2.0)));
    let out = eval(&t, 1.0, &mut RngStream::new(0, 0, 0).rng()).unwrap();
    let Outcome::Final(v, w) = out else { panic!() };
    assert!(v.same(&Value::Unit));
    assert_eq!(w, 3.0);
}

#[test]
fn continuation_weights_follow_their_rules() {
    let k = lam("x", real(7.0));
    let d = core(Term::new((), TermKind::DWeightCps(k.clone(), real(2.0))));
    let Outcome::Final(v, w) = eval(&d, 0.0, &mut RngStream::new(0, 0, 0).rng()).unwrap() else {
        panic!("dweight continues")
    };
    assert!(v.same(&Value::Real(7.0)));
    assert_eq!(w, 2.0);
    let p = core(Term::new((), TermKind::WeightCps(k, real(2.0))));
    let out = eval(&p, 0.0, &mut RngStream::new(0, 0, 0).rng()).unwrap();
    assert!(out.is_paused());
    assert_eq!(out.log_weight(), 2.0);
}

#[test]
fn recursion_through_fix() {
    let src = "function fact(n) { if n <= 1 then 1 else n * fact(n - 1) }\nfact(10)";
    assert_eq!(real_of(src), 3628800.0);
    // deep recursion runs on the machine's own stack
    let src = "function count(n) { if n <= 0 then 0 else 1 + count(n - 1) }\ncount(200000)";
    assert_eq!(real_of(src), 200000.0);
}

#[test]
fn closures_capture_their_environment() {
    let src = "function adder(a) { function(b) { a + b } }\nadd2 = adder(2)\nadd3 = adder(3)\nadd2(10) * add3(100)";
    assert_eq!(real_of(src), 12.0 * 103.0);
}

#[test]
fn shadowing_is_lexical() {
    let src = "x = 1\nf = function(y) { x + y }\nx = 100\nf(x)";
    assert_eq!(real_of(src), 101.0);
}

#[test]
fn builtins_compute_ieee_results() {
    assert_eq!(real_of("2 + 3"), 5.0);
    assert!(run("1 <= 1").unwrap().0.same(&Value::Bool(true)));
    assert_eq!(real_of("1 / 0"), f64::INFINITY);
    assert_eq!(real_of("exp(log(2))"), 2f64.ln().exp());
}

#[test]
fn runtime_errors_carry_positions() {
    let e = run("x = 1\nif x then 2 else 3").unwrap_err();
    assert!(matches!(e, RuntimeError::Type { span, .. } if span == Span::new(2, 1)), "{e}");
    let e = run("weight(log(0) - log(0))").unwrap_err();
    assert!(matches!(e, RuntimeError::NanWeight { .. }));
    let e = run("sample(normal(0, 0 - 1))").unwrap_err();
    assert!(matches!(e, RuntimeError::InvalidDistribution { .. }), "{e}");
    let e = run("f = 3\nf(1)").unwrap_err();
    assert!(e.to_string().contains("cannot apply a real"), "{e}");
}

#[test]
fn negative_infinite_weight_is_allowed() {
    let (_, w) = run("weight(log(0))").unwrap();
    assert_eq!(w, f64::NEG_INFINITY);
}

#[test]
fn unbound_variables_are_rejected_before_running() {
    let t = core(var("nowhere"));
    assert!(matches!(Evaluator::new(&t), Err(RuntimeError::Unbound { .. })));
}

#[test]
fn evaluation_is_deterministic_per_stream() {
    let t = parse_core(ppl_align::models::SIM).unwrap();
    let ev = Evaluator::new(&t).unwrap();
    for seed in 0..20 {
        let a = ev.eval(0.0, &mut RngStream::new(seed, 3, 1).rng()).unwrap();
        let b = ev.eval(0.0, &mut RngStream::new(seed, 3, 1).rng()).unwrap();
        let (Outcome::Final(v1, w1), Outcome::Final(v2, w2)) = (a, b) else { panic!() };
        assert!(v1.same(&v2));
        assert_eq!(w1.to_bits(), w2.to_bits());
    }
}

#[test]
fn weight_events_are_traced() {
    let t = parse_core(ppl_align::models::TOY).unwrap();
    let mut obs = Observer::tracing();
    let ev = Evaluator::new(&t).unwrap();
    let out = ev
        .eval_observed(0.0, &mut RngStream::new(4, 0, 0).rng(), &mut obs)
        .unwrap();
    let trace = obs.trace.unwrap();
    assert!(trace.len() == 2 || trace.len() == 3);
    assert_eq!(trace[0].span.line, 1);
    assert_eq!(trace[0].kind, WeightKind::Weight);
    assert_eq!(trace.last().unwrap().cumulative, out.log_weight());
    assert_eq!(out.log_weight(), 100.0);
    let sum: f64 = trace.iter().map(|e| e.increment).sum();
    assert_eq!(sum, 100.0);
}

#[test]
fn degenerate_and_monte_carlo_draws() {
    let mut rng = RngStream::new(11, 0, 0).rng();
    assert!(draw(&Distribution::Bernoulli { p: 1.0 }, &mut rng)
        .unwrap()
        .same(&Value::Bool(true)));

    let n = 1_000_000;
    let exp = Distribution::Exponential { rate: 2.0 };
    let mean: f64 = (0..n)
        .map(|_| draw(&exp, &mut rng).unwrap().as_real().unwrap())
        .sum::<f64>()
        / n as f64;
    assert!((mean - 0.5).abs() < 0.005, "exponential mean {mean}");

    let normal = Distribution::Normal { mean: 0.0, sd: 1.0 };
    let xs: Vec<f64> = (0..n)
        .map(|_| draw(&normal, &mut rng).unwrap().as_real().unwrap())
        .collect();
    let m = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    assert!((var - 1.0).abs() < 0.01, "normal variance {var}");
}

/// Textbook small-step evaluation by substitution, for sample-free terms.
mod reference {
    use super::*;

    type T = Term<()>;

    fn subst(t: &T, x: &str, v: &T) -> T {
        let kind = match &*t.kind {
            TermKind::Var(y) if y == x => return v.clone(),
            TermKind::Lam(y, _) if y == x => return t.clone(),
            TermKind::Lam(y, b) => TermKind::Lam(y.clone(), subst(b, x, v)),
            TermKind::App(f, a) => TermKind::App(subst(f, x, v), subst(a, x, v)),
            TermKind::Fix(f) => TermKind::Fix(subst(f, x, v)),
            TermKind::If(c, a, b) => TermKind::If(subst(c, x, v), subst(a, x, v), subst(b, x, v)),
            TermKind::Weight(e) => TermKind::Weight(subst(e, x, v)),
            other => other.clone(),
        };
        Term::new((), kind)
    }

    fn is_value(t: &T) -> bool {
        matches!(&*t.kind, TermKind::Const(_) | TermKind::Lam(..))
            || t.builtin_spine().is_some_and(|(op, args)| {
                args.len() < op.arity() && args.iter().all(|a| is_value(a))
            })
    }

    /// One step; `None` when `t` is a value.
    fn step(t: &T, w: &mut f64) -> Option<T> {
        if is_value(t) {
            return None;
        }
        if let Some((op, args)) = t.builtin_spine() {
            if args.len() == op.arity() && args.iter().all(|a| is_value(a)) {
                let vals: Vec<Value> = args
                    .iter()
                    .map(|a| match &*a.kind {
                        TermKind::Const(Constant::Real(x)) => Value::Real(*x),
                        TermKind::Const(Constant::Bool(b)) => Value::Bool(*b),
                        _ => panic!("reference evaluator only handles reals and booleans"),
                    })
                    .collect();
                let out = ppl_align::runtime::apply_builtin(op, &vals).unwrap();
                return Some(match out {
                    Value::Real(x) => real(x),
                    Value::Bool(b) => boolean(b),
                    _ => unreachable!(),
                });
            }
        }
        Some(match &*t.kind {
            TermKind::App(f, a) if !is_value(f) => app(step(f, w)?, a.clone()),
            TermKind::App(f, a) if !is_value(a) => app(f.clone(), step(a, w)?),
            TermKind::App(f, a) => match &*f.kind {
                TermKind::Lam(x, body) => subst(body, x, a),
                _ => panic!("stuck application"),
            },
            // fix (λf. t) → t[f := λy. fix (λf. t) y]
            TermKind::Fix(f) if !is_value(f) => fix(step(f, w)?),
            TermKind::Fix(f) => match &*f.kind {
                TermKind::Lam(x, body) => {
                    let unrolled = lam("%y", app(t.clone(), var("%y")));
                    subst(body, x, &unrolled)
                }
                _ => panic!("stuck fix"),
            },
            TermKind::If(c, a, b) if !is_value(c) => ite(step(c, w)?, a.clone(), b.clone()),
            TermKind::If(c, a, b) => match &*c.kind {
                TermKind::Const(Constant::Bool(true)) => a.clone(),
                TermKind::Const(Constant::Bool(false)) => b.clone(),
                _ => panic!("stuck if"),
            },
            TermKind::Weight(e) if !is_value(e) => weight(step(e, w)?),
            TermKind::Weight(e) => match &*e.kind {
                TermKind::Const(Constant::Real(c)) => {
                    *w += c;
                    unit()
                }
                _ => panic!("stuck weight"),
            },
            _ => panic!("unexpected term"),
        })
    }

    pub fn eval(t: &T) -> (T, f64) {
        let mut t = t.clone();
        let mut w = 0.0;
        while let Some(next) = step(&t, &mut w) {
            t = next;
        }
        (t, w)
    }
}

#[test]
fn environment_machine_agrees_with_substitution() {
    let programs = [
        "1 + 2 * 3",
        "f = function(x) { function(y) { x - y } }\nf(10)(3)",
        "function fib(n) { if n < 2 then n else fib(n - 1) + fib(n - 2) }\nfib(12)",
        "x = 2\ng = function(x) { x * x }\ng(x + 1) + x",
        "compose = function(f, g) { function(x) { f(g(x)) } }\ninc = function(x) { x + 1 }\ncompose(inc, inc)(5)",
        "weight(1.5)\nh = function(a) { weight(a); a }\nh(2) + h(3)",
        "function loop(n, acc) { if n <= 0 then acc else { weight(0.25); loop(n - 1, acc * 2) } }\nloop(6, 1)",
        "if 3 < 2 then true else 1 <= 1",
    ];
    for src in programs {
        let core_term = parse_core(src).unwrap();
        let (v_ref, w_ref) = reference::eval(&core_term.erase());
        let (v, w) = run(src).unwrap();
        let expected = match &*v_ref.kind {
            TermKind::Const(Constant::Real(x)) => Value::Real(*x),
            TermKind::Const(Constant::Bool(b)) => Value::Bool(*b),
            _ => panic!("{src}: reference result is not data"),
        };
        assert!(v.same(&expected), "{src}: {v} vs {expected}");
        assert_eq!(w, w_ref, "{src}");
    }
    let _ = Builtin::Add;
}
