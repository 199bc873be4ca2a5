use std::collections::HashSet;

use crate::ast::{Builtin, Constant, CoreTerm, Span, Term, TermKind};

/// Convert a program to continuation-passing style.
///
/// Call-by-value, left to right, in the one-pass higher-order style:
/// continuations known at transformation time are Rust closures and only
/// become object-level lambdas when they must be passed to a function, so
/// the output has few administrative redexes. Functions take their argument
/// and then their continuation. `weight e` becomes `weight k e` and pauses;
/// `dweight e` becomes `dweight k e` and continues into `k`. Samples are
/// bound to a variable so that draws happen in the same order as in the
/// direct program. The program's own result is returned unchanged, so a
/// CPS program that never pauses evaluates to the same value as the
/// original.
pub fn cps_transform(t: &CoreTerm) -> CoreTerm {
    let mut taken: HashSet<String> = t.binders().into_iter().map(str::to_string).collect();
    taken.extend(t.free_vars());
    let mut cx = Cps { taken, next: 0 };
    cx.meta(t, Box::new(|_, v| v))
}

type Meta<'a> = Box<dyn FnOnce(&mut Cps, CoreTerm) -> CoreTerm + 'a>;
type ListCont<'a> = Box<dyn FnOnce(&mut Cps, Vec<CoreTerm>) -> CoreTerm + 'a>;

struct Cps {
    taken: HashSet<String>,
    next: usize,
}

fn mk(span: Span, kind: TermKind<Span>) -> CoreTerm {
    Term::new(span, kind)
}

fn var(span: Span, x: &str) -> CoreTerm {
    mk(span, TermKind::Var(x.to_string()))
}

fn lam(span: Span, x: &str, body: CoreTerm) -> CoreTerm {
    mk(span, TermKind::Lam(x.to_string(), body))
}

fn app(span: Span, f: CoreTerm, a: CoreTerm) -> CoreTerm {
    mk(span, TermKind::App(f, a))
}

fn call(span: Span, f: CoreTerm, a: CoreTerm, k: CoreTerm) -> CoreTerm {
    app(span, app(span, f, a), k)
}

impl Cps {
    fn fresh(&mut self, base: &str) -> String {
        loop {
            self.next += 1;
            let name = format!("{base}_{}", self.next);
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }

    /// Turn a meta-continuation into a lambda term.
    fn reify(&mut self, span: Span, k: Meta<'_>) -> CoreTerm {
        let v = self.fresh("v");
        let body = k(self, var(span, &v));
        lam(span, &v, body)
    }

    fn is_trivial(t: &CoreTerm) -> bool {
        match &*t.kind {
            TermKind::Var(_) | TermKind::Const(_) | TermKind::Lam(..) => true,
            TermKind::Fix(f) => matches!(&*f.kind, TermKind::Lam(..)),
            _ => false,
        }
    }

    /// CPS image of a term that is already a value.
    fn value(&mut self, t: &CoreTerm) -> CoreTerm {
        let span = t.ann;
        match &*t.kind {
            TermKind::Var(_) => t.clone(),
            TermKind::Const(Constant::Builtin(op)) => self.builtin_value(span, *op, Vec::new()),
            TermKind::Const(_) => t.clone(),
            TermKind::Lam(x, body) => {
                let k = self.fresh("k");
                let b = self.object(body, var(span, &k));
                lam(span, x, lam(span, &k, b))
            }
            TermKind::Fix(f) => {
                let TermKind::Lam(self_name, inner) = &*f.kind else {
                    unreachable!("checked by is_trivial")
                };
                let inner = if Self::is_trivial(inner) && matches!(&*inner.kind, TermKind::Lam(..)) {
                    self.value(inner)
                } else {
                    // λx k. (inner) x k, re-evaluating `inner` on each call as
                    // the direct semantics does.
                    let x = self.fresh("x");
                    let k = self.fresh("k");
                    let (xv, kv) = (var(span, &x), var(span, &k));
                    let body = self.meta(inner, Box::new(move |_, g| call(span, g, xv, kv)));
                    lam(span, &x, lam(span, &k, body))
                };
                mk(
                    span,
                    TermKind::Fix(mk(f.ann, TermKind::Lam(self_name.clone(), inner))),
                )
            }
            _ => unreachable!("not a value"),
        }
    }

    /// A builtin used as a first-class function: `λa k. k (op ... a)`,
    /// curried up to its arity.
    fn builtin_value(&mut self, span: Span, op: Builtin, have: Vec<CoreTerm>) -> CoreTerm {
        let a = self.fresh("a");
        let k = self.fresh("k");
        let mut args = have;
        args.push(var(span, &a));
        let result = if args.len() == op.arity() {
            prim(span, op, args)
        } else {
            self.builtin_value(span, op, args)
        };
        lam(span, &a, lam(span, &k, app(span, var(span, &k), result)))
    }

    /// Transform `t`, handing its value to the meta-continuation `k`.
    fn meta<'a>(&mut self, t: &'a CoreTerm, k: Meta<'a>) -> CoreTerm {
        let span = t.ann;
        if Self::is_trivial(t) {
            let v = self.value(t);
            return k(self, v);
        }
        if let Some((op, args)) = t.builtin_spine() {
            if args.len() == op.arity() {
                return self.meta_list(
                    args,
                    Vec::new(),
                    Box::new(move |s, vs| k(s, prim(span, op, vs))),
                );
            }
        }
        match &*t.kind {
            TermKind::App(f, a) => self.meta(
                f,
                Box::new(move |s, vf| {
                    s.meta(
                        a,
                        Box::new(move |s, va| {
                            let kk = s.reify(span, k);
                            call(span, vf, va, kk)
                        }),
                    )
                }),
            ),
            TermKind::If(c, x, y) => self.meta(
                c,
                Box::new(move |s, vc| {
                    let kname = s.fresh("k");
                    let kv = var(span, &kname);
                    let then_ = s.object(x, kv.clone());
                    let else_ = s.object(y, kv);
                    let branch = mk(span, TermKind::If(vc, then_, else_));
                    let kk = s.reify(span, k);
                    app(span, lam(span, &kname, branch), kk)
                }),
            ),
            TermKind::Sample(d) => self.meta(
                d,
                Box::new(move |s, vd| {
                    let x = s.fresh("s");
                    let rest = k(s, var(span, &x));
                    app(span, lam(span, &x, rest), mk(span, TermKind::Sample(vd)))
                }),
            ),
            TermKind::Weight(e) => self.meta(
                e,
                Box::new(move |s, ve| {
                    let kk = s.reify(span, k);
                    mk(span, TermKind::WeightCps(kk, ve))
                }),
            ),
            TermKind::DWeight(e) => self.meta(
                e,
                Box::new(move |s, ve| {
                    let kk = s.reify(span, k);
                    mk(span, TermKind::DWeightCps(kk, ve))
                }),
            ),
            TermKind::WeightCps(kt, e) | TermKind::DWeightCps(kt, e) => {
                // Already-converted forms: `weight k e` behaves like `k (weight e)`.
                let w = if matches!(&*t.kind, TermKind::WeightCps(..)) {
                    TermKind::Weight(e.clone())
                } else {
                    TermKind::DWeight(e.clone())
                };
                let as_app = app(span, kt.clone(), mk(span, w));
                let kk = self.reify(span, k);
                self.object(&as_app, kk)
            }
            TermKind::Fix(f) => self.meta(
                f,
                Box::new(move |s, vf| {
                    // general fixpoint of a computed function
                    let fname = s.fresh("f");
                    let x = s.fresh("x");
                    let kn = s.fresh("k");
                    let g = s.fresh("g");
                    let inner = call(
                        span,
                        vf,
                        var(span, &fname),
                        lam(
                            span,
                            &g,
                            call(span, var(span, &g), var(span, &x), var(span, &kn)),
                        ),
                    );
                    let fixed = mk(
                        span,
                        TermKind::Fix(lam(span, &fname, lam(span, &x, lam(span, &kn, inner)))),
                    );
                    k(s, fixed)
                }),
            ),
            TermKind::Var(_) | TermKind::Const(_) | TermKind::Lam(..) => unreachable!("trivial"),
        }
    }

    fn meta_list<'a>(
        &mut self,
        rest: Vec<&'a CoreTerm>,
        mut done: Vec<CoreTerm>,
        k: ListCont<'a>,
    ) -> CoreTerm {
        let mut it = rest.into_iter();
        match it.next() {
            None => k(self, done),
            Some(first) => {
                let remaining: Vec<&'a CoreTerm> = it.collect();
                self.meta(
                    first,
                    Box::new(move |s, v| {
                        done.push(v);
                        s.meta_list(remaining, done, k)
                    }),
                )
            }
        }
    }

    /// Transform `t` with an object-level continuation `k`.
    fn object(&mut self, t: &CoreTerm, k: CoreTerm) -> CoreTerm {
        let span = t.ann;
        if Self::is_trivial(t) {
            let v = self.value(t);
            return app(span, k, v);
        }
        if t.builtin_spine().is_some_and(|(op, args)| args.len() == op.arity()) {
            return self.meta(t, Box::new(move |_, v| app(span, k, v)));
        }
        match &*t.kind {
            TermKind::App(f, a) => self.meta(
                f,
                Box::new(move |s, vf| s.meta(a, Box::new(move |_, va| call(span, vf, va, k)))),
            ),
            TermKind::If(c, x, y) => {
                if let TermKind::Var(_) = &*k.kind {
                    self.meta(
                        c,
                        Box::new(move |s, vc| {
                            let then_ = s.object(x, k.clone());
                            let else_ = s.object(y, k);
                            mk(span, TermKind::If(vc, then_, else_))
                        }),
                    )
                } else {
                    let kname = self.fresh("k");
                    let body = self.object(t, var(span, &kname));
                    app(span, lam(span, &kname, body), k)
                }
            }
            TermKind::Weight(e) => {
                self.meta(e, Box::new(move |_, ve| mk(span, TermKind::WeightCps(k, ve))))
            }
            TermKind::DWeight(e) => {
                self.meta(e, Box::new(move |_, ve| mk(span, TermKind::DWeightCps(k, ve))))
            }
            _ => self.meta(t, Box::new(move |_, v| app(span, k, v))),
        }
    }
}

fn prim(span: Span, op: Builtin, args: Vec<CoreTerm>) -> CoreTerm {
    args.into_iter().fold(
        mk(span, TermKind::Const(Constant::Builtin(op))),
        |f, a| app(span, f, a),
    )
}
