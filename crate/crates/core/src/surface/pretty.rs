use crate::ast::{Builtin, Constant, Term, TermKind};

/// Render a term in concrete syntax.
///
/// Let-shaped applications print as block items and `fix` bound to its own
/// name prints as a named function, so desugared programs read much like
/// their source. Output for terms without continuation-carrying weights
/// parses back to an alpha-equivalent term.
pub fn pretty<A>(t: &Term<A>) -> String {
    let mut out = String::new();
    items(t, 0, &mut out);
    out.push('\n');
    out
}

// Precedence levels, loosest first.
const EXPR: u8 = 0;
const CMP: u8 = 1;
const ADD: u8 = 2;
const MUL: u8 = 3;
const UNARY: u8 = 4;
const ATOM: u8 = 5;

fn indent(n: usize) -> String {
    "  ".repeat(n)
}

fn is_let<A>(t: &Term<A>) -> bool {
    matches!(&*t.kind, TermKind::App(f, _) if matches!(&*f.kind, TermKind::Lam(..)))
}

/// A `fix` whose function is `λname. λparams. body`.
fn named_fix<'a, A>(t: &'a Term<A>, name: &str) -> Option<(Vec<&'a str>, &'a Term<A>)> {
    let TermKind::Fix(f) = &*t.kind else {
        return None;
    };
    let TermKind::Lam(self_name, inner) = &*f.kind else {
        return None;
    };
    if self_name != name || !matches!(&*inner.kind, TermKind::Lam(..)) {
        return None;
    }
    Some(lambda_chain(inner))
}

/// Parameters of a chain of lambdas and the innermost body.
fn lambda_chain<A>(t: &Term<A>) -> (Vec<&str>, &Term<A>) {
    let mut params = Vec::new();
    let mut cur = t;
    if let TermKind::Lam(x, b) = &*cur.kind {
        if x.starts_with('%') && !b.has_free(x) {
            return (params, b);
        }
    }
    while let TermKind::Lam(x, b) = &*cur.kind {
        if x.starts_with('%') && !b.has_free(x) {
            break;
        }
        params.push(x.as_str());
        cur = b;
    }
    (params, cur)
}

/// Print `t` as the items of a block at indentation `depth`.
fn items<A>(t: &Term<A>, depth: usize, out: &mut String) {
    let mut cur = t;
    loop {
        out.push_str(&indent(depth));
        let TermKind::App(f, value) = &*cur.kind else {
            out.push_str(&expr(cur, EXPR, depth));
            return;
        };
        let TermKind::Lam(x, rest) = &*f.kind else {
            out.push_str(&expr(cur, EXPR, depth));
            return;
        };
        if let Some((params, body)) = named_fix(value, x) {
            out.push_str(&format!(
                "function {x}({}) {}",
                params.join(", "),
                braced(body, depth)
            ));
        } else if x.starts_with('%') || !rest.has_free(x) {
            out.push_str(&expr(value, EXPR, depth));
        } else {
            out.push_str(&format!("{x} = {}", expr(value, EXPR, depth)));
        }
        out.push('\n');
        cur = rest;
    }
}

fn braced<A>(t: &Term<A>, depth: usize) -> String {
    let mut s = String::from("{\n");
    items(t, depth + 1, &mut s);
    s.push('\n');
    s.push_str(&indent(depth));
    s.push('}');
    s
}

fn paren(s: String, own: u8, need: u8) -> String {
    if own < need {
        format!("({s})")
    } else {
        s
    }
}

fn infix_level(op: Builtin) -> u8 {
    match op {
        Builtin::Le | Builtin::Lt => CMP,
        Builtin::Add | Builtin::Sub => ADD,
        _ => MUL,
    }
}

/// Render `t` so that it parses correctly in a context requiring at least
/// precedence `need`.
fn expr<A>(t: &Term<A>, need: u8, depth: usize) -> String {
    if is_let(t) {
        return braced(t, depth);
    }
    if let Some((op, args)) = t.builtin_spine() {
        return builtin(op, &args, need, depth);
    }
    match &*t.kind {
        TermKind::Var(x) => x.clone(),
        TermKind::Const(Constant::Real(x)) => {
            let s = crate::ast::fmt_real(*x);
            let own = if s.starts_with('-') { UNARY } else { ATOM };
            paren(s, own, need)
        }
        TermKind::Const(c) => paren(c.to_string(), ATOM, need),
        TermKind::Lam(..) => {
            let (params, body) = lambda_chain(t);
            format!("function({}) {}", params.join(", "), braced(body, depth))
        }
        TermKind::App(..) => {
            let mut args = Vec::new();
            let mut head = t;
            while let TermKind::App(f, a) = &*head.kind {
                args.push(a);
                head = f;
            }
            args.reverse();
            let rendered: Vec<String> = if args.len() == 1
                && matches!(&*args[0].kind, TermKind::Const(Constant::Unit))
            {
                Vec::new()
            } else {
                args.iter().map(|a| expr(a, EXPR, depth)).collect()
            };
            format!("{}({})", expr(head, ATOM, depth), rendered.join(", "))
        }
        TermKind::Fix(f) => format!("fix({})", fix_arg(f, depth)),
        TermKind::If(c, x, y) => paren(
            format!(
                "if {} then {} else {}",
                expr(c, EXPR, depth),
                expr(x, EXPR, depth),
                expr(y, EXPR, depth)
            ),
            EXPR,
            need,
        ),
        TermKind::Sample(d) => format!("sample({})", expr(d, EXPR, depth)),
        TermKind::Weight(w) => format!("weight({})", expr(w, EXPR, depth)),
        TermKind::DWeight(w) => format!("dweight({})", expr(w, EXPR, depth)),
        TermKind::WeightCps(k, w) => {
            format!("weight({}, {})", expr(k, EXPR, depth), expr(w, EXPR, depth))
        }
        TermKind::DWeightCps(k, w) => {
            format!("dweight({}, {})", expr(k, EXPR, depth), expr(w, EXPR, depth))
        }
    }
}

/// `fix(function(self, x, ...) {...})` when the shape allows, otherwise the
/// raw argument.
fn fix_arg<A>(f: &Term<A>, depth: usize) -> String {
    if let TermKind::Lam(s, inner) = &*f.kind {
        if matches!(&*inner.kind, TermKind::Lam(..)) {
            let (params, body) = lambda_chain(inner);
            if !params.is_empty() {
                let mut all = vec![s.as_str()];
                all.extend(params);
                return format!("function({}) {}", all.join(", "), braced(body, depth));
            }
        }
    }
    expr(f, EXPR, depth)
}

fn builtin<A>(op: Builtin, args: &[&Term<A>], need: u8, depth: usize) -> String {
    let arity = op.arity();
    if args.len() < arity {
        // Partial application has no surface syntax; print it as a call so
        // dumps stay readable.
        let rendered: Vec<String> = args.iter().map(|a| expr(a, EXPR, depth)).collect();
        return format!("{}({})", op.name(), rendered.join(", "));
    }
    let (sat, extra) = args.split_at(arity);
    let (s, own) = if op.is_infix() {
        let level = infix_level(op);
        let (l, r) = if level == CMP {
            (ADD, ADD)
        } else {
            (level, level + 1)
        };
        (
            format!(
                "{} {} {}",
                expr(sat[0], l, depth),
                op.name(),
                expr(sat[1], r, depth)
            ),
            level,
        )
    } else {
        let rendered: Vec<String> = sat.iter().map(|a| expr(a, EXPR, depth)).collect();
        (format!("{}({})", op.name(), rendered.join(", ")), ATOM)
    };
    if extra.is_empty() {
        return paren(s, own, need);
    }
    let rendered: Vec<String> = extra.iter().map(|a| expr(a, EXPR, depth)).collect();
    format!("{}({})", paren(s, own, ATOM), rendered.join(", "))
}
