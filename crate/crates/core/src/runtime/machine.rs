use std::fmt;
use std::sync::Arc;

use crate::ast::{Annotation, Label, Span, Term};

use super::builtin::{apply_builtin, BuiltinError};
use super::compile::{compile, Code, Node, Program, VarRef};
use super::dist::draw;
use super::rng::Rng;
use super::value::{Closure, Value};
use super::RuntimeError;

/// Result of running a program until it finishes or pauses.
#[derive(Clone, Debug)]
pub enum Outcome {
    Final(Value, f64),
    /// Stopped at an aligned `weight`; resume by applying the continuation
    /// to unit.
    Paused(Value, f64),
}

impl Outcome {
    pub fn log_weight(&self) -> f64 {
        match self {
            Outcome::Final(_, w) | Outcome::Paused(_, w) => *w,
        }
    }

    pub fn is_paused(&self) -> bool {
        matches!(self, Outcome::Paused(..))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightKind {
    Weight,
    DWeight,
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightKind::Weight => "weight",
            WeightKind::DWeight => "dweight",
        })
    }
}

/// One weight-class event, as logged by `--trace`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceEvent {
    pub span: Span,
    pub label: Option<Label>,
    pub kind: WeightKind,
    pub increment: f64,
    pub cumulative: f64,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.span, self.kind)?;
        if let Some(l) = self.label {
            write!(f, " (label {l})")?;
        }
        write!(f, " {:+} -> {}", self.increment, self.cumulative)
    }
}

/// Optional instrumentation for a run.
#[derive(Clone, Debug, Default)]
pub struct Observer {
    /// Collect every weight event when `Some`.
    pub trace: Option<Vec<TraceEvent>>,
    /// Track which values depend on random draws and whether evaluation is
    /// currently inside a branch chosen by such a value.
    pub instrument: bool,
    /// With `instrument`: every weight evaluated inside a stochastic branch.
    pub stochastic_weights: Vec<(Option<Label>, Span)>,
}

impl Observer {
    pub fn tracing() -> Self {
        Observer {
            trace: Some(Vec::new()),
            ..Default::default()
        }
    }

    pub fn instrumented() -> Self {
        Observer {
            instrument: true,
            ..Default::default()
        }
    }
}

/// A compiled program, ready to run any number of times.
#[derive(Clone, Debug)]
pub struct Evaluator {
    prog: Arc<Program>,
}

#[derive(Clone)]
struct Env {
    param: Value,
    captured: Arc<[Value]>,
}

impl Env {
    fn get(&self, r: VarRef) -> Value {
        match r {
            VarRef::Param => self.param.clone(),
            VarRef::Captured(i) => self.captured[i as usize].clone(),
        }
    }
}

enum Frame<'p> {
    /// Function evaluated; evaluate the argument of this application next.
    AppArg(&'p Node, Env),
    /// Argument evaluated; apply this function to it.
    Call(Value, &'p Node),
    /// The returned value is a function; apply it to this argument.
    ApplyTo(Value, &'p Node),
    /// First operand of a builtin evaluated; builtins take one or two.
    PrimFirst(&'p Node, Env),
    PrimSecond(&'p Node, Value),
    If(&'p Node, Env),
    Fix(&'p Node),
    Sample(&'p Node),
    Weight(&'p Node, WeightKind),
    CpsCont(&'p Node, Env, WeightKind),
    CpsArg(&'p Node, Value, WeightKind),
    RestoreFlag(bool),
}

enum State<'p> {
    Eval(&'p Node, Env),
    Ret(Value),
    Apply(Value, Value, &'p Node),
}

fn type_error(span: Span, message: impl Into<String>) -> RuntimeError {
    RuntimeError::Type {
        span,
        message: message.into(),
    }
}

fn builtin_error(span: Span, e: BuiltinError) -> RuntimeError {
    match e {
        BuiltinError::Type(message) => RuntimeError::Type { span, message },
        BuiltinError::InvalidDistribution(d) => RuntimeError::InvalidDistribution {
            span,
            dist: d.to_string(),
        },
    }
}

impl Evaluator {
    pub fn new<A: Annotation>(t: &Term<A>) -> Result<Self, RuntimeError> {
        Ok(Evaluator { prog: compile(t)? })
    }

    /// Run the program from the start with initial log-weight `w0`.
    pub fn eval(&self, w0: f64, rng: &mut Rng) -> Result<Outcome, RuntimeError> {
        self.eval_observed(w0, rng, &mut Observer::default())
    }

    pub fn eval_observed(
        &self,
        w0: f64,
        rng: &mut Rng,
        obs: &mut Observer,
    ) -> Result<Outcome, RuntimeError> {
        let env = Env {
            param: Value::Unit,
            captured: Arc::from(Vec::new()),
        };
        self.run(State::Eval(&self.prog.main, env), w0, rng, obs)
    }

    /// Continue a paused run by applying its continuation to unit.
    pub fn resume(&self, k: &Value, w0: f64, rng: &mut Rng) -> Result<Outcome, RuntimeError> {
        self.resume_observed(k, w0, rng, &mut Observer::default())
    }

    pub fn resume_observed(
        &self,
        k: &Value,
        w0: f64,
        rng: &mut Rng,
        obs: &mut Observer,
    ) -> Result<Outcome, RuntimeError> {
        self.run(
            State::Apply(k.clone(), Value::Unit, &self.prog.main),
            w0,
            rng,
            obs,
        )
    }

    /// Run a paused-and-resumed program to completion, resuming every pause
    /// immediately.
    pub fn run_to_end(&self, w0: f64, rng: &mut Rng) -> Result<(Value, f64), RuntimeError> {
        let mut out = self.eval(w0, rng)?;
        loop {
            match out {
                Outcome::Final(v, w) => return Ok((v, w)),
                Outcome::Paused(k, w) => out = self.resume(&k, w, rng)?,
            }
        }
    }

    fn closure(&self, id: u32, env: &Env) -> Value {
        let code = &self.prog.lams[id as usize];
        let captured: Arc<[Value]> = code.captures.iter().map(|r| env.get(*r)).collect();
        Value::Closure(Arc::new(Closure { lam: id, captured }))
    }

    fn run<'p>(
        &'p self,
        mut state: State<'p>,
        mut w: f64,
        rng: &mut Rng,
        obs: &mut Observer,
    ) -> Result<Outcome, RuntimeError> {
        let prog: &'p Program = &self.prog;
        let mut stack: Vec<Frame<'p>> = Vec::new();
        let mut in_stochastic_branch = false;

        loop {
            state = match state {
                State::Eval(n, env) => match &n.code {
                    Code::Var(r) => State::Ret(env.get(*r)),
                    Code::Const(v) => State::Ret(v.clone()),
                    Code::Lam(id) => State::Ret(self.closure(*id, &env)),
                    Code::App(f, _) => {
                        stack.push(Frame::AppArg(n, env.clone()));
                        State::Eval(f, env)
                    }
                    Code::Prim(_, args) => {
                        if args.len() > 1 {
                            stack.push(Frame::PrimFirst(n, env.clone()));
                        } else {
                            stack.push(Frame::PrimSecond(n, Value::Unit));
                        }
                        State::Eval(&args[0], env)
                    }
                    Code::Fix(f) => {
                        stack.push(Frame::Fix(n));
                        State::Eval(f, env)
                    }
                    Code::If(c, _, _) => {
                        stack.push(Frame::If(n, env.clone()));
                        State::Eval(c, env)
                    }
                    Code::Sample(d) => {
                        stack.push(Frame::Sample(n));
                        State::Eval(d, env)
                    }
                    Code::Weight(e) => {
                        stack.push(Frame::Weight(n, WeightKind::Weight));
                        State::Eval(e, env)
                    }
                    Code::DWeight(e) => {
                        stack.push(Frame::Weight(n, WeightKind::DWeight));
                        State::Eval(e, env)
                    }
                    Code::WeightCps(k, _) => {
                        stack.push(Frame::CpsCont(n, env.clone(), WeightKind::Weight));
                        State::Eval(k, env)
                    }
                    Code::DWeightCps(k, _) => {
                        stack.push(Frame::CpsCont(n, env.clone(), WeightKind::DWeight));
                        State::Eval(k, env)
                    }
                },

                State::Ret(v) => {
                    let Some(frame) = stack.pop() else {
                        return Ok(Outcome::Final(v, w));
                    };
                    match frame {
                        Frame::AppArg(n, env) => {
                            let Code::App(_, a) = &n.code else { unreachable!() };
                            stack.push(Frame::Call(v, n));
                            State::Eval(a, env)
                        }
                        Frame::Call(f, n) => State::Apply(f, v, n),
                        Frame::ApplyTo(arg, n) => State::Apply(v, arg, n),
                        Frame::PrimFirst(n, env) => {
                            let Code::Prim(_, args) = &n.code else { unreachable!() };
                            stack.push(Frame::PrimSecond(n, v));
                            State::Eval(&args[1], env)
                        }
                        Frame::PrimSecond(n, first) => {
                            let Code::Prim(op, args) = &n.code else { unreachable!() };
                            let out = if args.len() == 1 {
                                apply_builtin(*op, std::slice::from_ref(&v))
                            } else {
                                apply_builtin(*op, &[first, v])
                            };
                            State::Ret(out.map_err(|e| builtin_error(n.span, e))?)
                        }
                        Frame::If(n, env) => {
                            let Code::If(_, x, y) = &n.code else { unreachable!() };
                            let b = v.as_bool().ok_or_else(|| {
                                type_error(
                                    n.span,
                                    format!("if condition must be a boolean, found {}", v.type_name()),
                                )
                            })?;
                            if obs.instrument && v.is_tainted() && !in_stochastic_branch {
                                stack.push(Frame::RestoreFlag(false));
                                in_stochastic_branch = true;
                            }
                            State::Eval(if b { x } else { y }, env)
                        }
                        Frame::Fix(n) => match v.plain() {
                            Value::Closure(c) => State::Ret(Value::Fix(c.clone())),
                            other => {
                                return Err(type_error(
                                    n.span,
                                    format!("fix expects a function, found {}", other.type_name()),
                                ))
                            }
                        },
                        Frame::Sample(n) => {
                            let Value::Dist(d) = v.plain() else {
                                return Err(type_error(
                                    n.span,
                                    format!("sample expects a distribution, found {}", v.type_name()),
                                ));
                            };
                            let x = draw(d, rng).map_err(|e| RuntimeError::InvalidDistribution {
                                span: n.span,
                                dist: e.0.to_string(),
                            })?;
                            State::Ret(if obs.instrument {
                                Value::Tainted(Box::new(x))
                            } else {
                                x
                            })
                        }
                        Frame::Weight(n, kind) => {
                            w = self.add_weight(n, kind, &v, w, obs, in_stochastic_branch)?;
                            State::Ret(Value::Unit)
                        }
                        Frame::CpsCont(n, env, kind) => {
                            let (Code::WeightCps(_, e) | Code::DWeightCps(_, e)) = &n.code else {
                                unreachable!()
                            };
                            stack.push(Frame::CpsArg(n, v, kind));
                            State::Eval(e, env)
                        }
                        Frame::CpsArg(n, k, kind) => {
                            w = self.add_weight(n, kind, &v, w, obs, in_stochastic_branch)?;
                            match kind {
                                WeightKind::DWeight => State::Apply(k, Value::Unit, n),
                                WeightKind::Weight => {
                                    if stack.iter().any(|f| !matches!(f, Frame::RestoreFlag(_))) {
                                        return Err(RuntimeError::PauseNotInTailPosition {
                                            span: n.span,
                                        });
                                    }
                                    return Ok(Outcome::Paused(k, w));
                                }
                            }
                        }
                        Frame::RestoreFlag(flag) => {
                            in_stochastic_branch = flag;
                            State::Ret(v)
                        }
                    }
                }

                State::Apply(f, arg, n) => match f.plain() {
                    Value::Closure(c) => State::Eval(
                        &prog.lams[c.lam as usize].body,
                        Env {
                            param: arg,
                            captured: c.captured.clone(),
                        },
                    ),
                    Value::Fix(c) => {
                        stack.push(Frame::ApplyTo(arg, n));
                        State::Apply(Value::Closure(c.clone()), Value::Fix(c.clone()), n)
                    }
                    Value::Partial(op, args) => {
                        let mut args = args.as_ref().clone();
                        args.push(arg);
                        if args.len() == op.arity() {
                            State::Ret(apply_builtin(*op, &args).map_err(|e| builtin_error(n.span, e))?)
                        } else {
                            State::Ret(Value::Partial(*op, Arc::new(args)))
                        }
                    }
                    other => {
                        return Err(type_error(
                            n.span,
                            format!("cannot apply a {}", other.type_name()),
                        ))
                    }
                },
            };
        }
    }

    fn add_weight(
        &self,
        n: &Node,
        kind: WeightKind,
        v: &Value,
        w: f64,
        obs: &mut Observer,
        in_stochastic_branch: bool,
    ) -> Result<f64, RuntimeError> {
        let c = v.as_real().ok_or_else(|| {
            type_error(n.span, format!("{kind} expects a real, found {}", v.type_name()))
        })?;
        if c.is_nan() {
            return Err(RuntimeError::NanWeight { span: n.span });
        }
        let total = w + c;
        if let Some(trace) = &mut obs.trace {
            trace.push(TraceEvent {
                span: n.span,
                label: n.label,
                kind,
                increment: c,
                cumulative: total,
            });
        }
        if obs.instrument && in_stochastic_branch {
            obs.stochastic_weights.push((n.label, n.span));
        }
        Ok(total)
    }
}
