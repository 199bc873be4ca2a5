use crate::ast::{Builtin, Constant, CoreTerm, Distribution, Span, Term, TermKind};

use super::syntax::*;
use super::SurfaceError;

/// Binder for a zero-parameter function; never referenced.
pub(crate) const UNIT_BINDER: &str = "%unit";
/// Binder for an expression statement whose value is discarded.
pub(crate) const SEQ_BINDER: &str = "%seq";

/// Translate a parsed program into a closed core term.
///
/// Blocks become nested lets (`x = e; rest` is `(λx. rest) e`), named
/// functions become a let of a `fix`, and multi-argument functions and calls
/// are curried.
pub fn desugar(ast: &SurfaceAst) -> Result<CoreTerm, SurfaceError> {
    let mut scope = Vec::new();
    block(&ast.body, &mut scope)
}

fn mk(span: Span, kind: TermKind<Span>) -> CoreTerm {
    Term::new(span, kind)
}

fn constant(span: Span, c: Constant) -> CoreTerm {
    mk(span, TermKind::Const(c))
}

fn block(b: &Block, scope: &mut Vec<String>) -> Result<CoreTerm, SurfaceError> {
    match b.items.last() {
        Some(Item::Expr(_)) => {}
        Some(other) => {
            return Err(SurfaceError::Invalid {
                span: other.span(),
                message: "a block must end with an expression".into(),
            })
        }
        None => {
            return Err(SurfaceError::Invalid {
                span: b.span,
                message: "empty block".into(),
            })
        }
    }
    items(&b.items, scope)
}

fn items(its: &[Item], scope: &mut Vec<String>) -> Result<CoreTerm, SurfaceError> {
    let (first, rest) = its.split_first().expect("non-empty block");
    if rest.is_empty() {
        let Item::Expr(e) = first else {
            unreachable!("checked by block")
        };
        return expr(e, scope);
    }
    let (name, value, span) = match first {
        Item::Function {
            name,
            params,
            body,
            span,
        } => {
            scope.push(name.clone());
            let inner = function(params, body, *span, scope);
            scope.pop();
            let f = mk(*span, TermKind::Lam(name.clone(), inner?));
            (name.as_str(), mk(*span, TermKind::Fix(f)), *span)
        }
        Item::Let { name, value, span } => (name.as_str(), expr(value, scope)?, *span),
        Item::Expr(e) => (SEQ_BINDER, expr(e, scope)?, e.span),
    };
    scope.push(name.to_string());
    let body = items(rest, scope);
    scope.pop();
    let lam = mk(span, TermKind::Lam(name.to_string(), body?));
    Ok(mk(span, TermKind::App(lam, value)))
}

fn function(
    params: &[String],
    body: &Block,
    span: Span,
    scope: &mut Vec<String>,
) -> Result<CoreTerm, SurfaceError> {
    if params.is_empty() {
        let b = block(body, scope)?;
        return Ok(mk(span, TermKind::Lam(UNIT_BINDER.into(), b)));
    }
    let depth = scope.len();
    scope.extend(params.iter().cloned());
    let b = block(body, scope);
    scope.truncate(depth);
    let mut t = b?;
    for p in params.iter().rev() {
        t = mk(span, TermKind::Lam(p.clone(), t));
    }
    Ok(t)
}

fn literal(e: &Expr) -> Option<f64> {
    match &e.kind {
        ExprKind::Number(x) => Some(*x),
        ExprKind::Neg(inner) => literal(inner).map(|x| -x),
        _ => None,
    }
}

fn fold_distribution(op: Builtin, args: &[Expr]) -> Option<Distribution> {
    let v: Vec<f64> = args.iter().map(literal).collect::<Option<_>>()?;
    Some(match op {
        Builtin::Bernoulli => Distribution::Bernoulli { p: v[0] },
        Builtin::Normal => Distribution::Normal {
            mean: v[0],
            sd: v[1],
        },
        Builtin::Gamma => Distribution::Gamma {
            shape: v[0],
            scale: v[1],
        },
        Builtin::Exponential => Distribution::Exponential { rate: v[0] },
        _ => return None,
    })
}

fn expr(e: &Expr, scope: &mut Vec<String>) -> Result<CoreTerm, SurfaceError> {
    let span = e.span;
    let one = |x: &Expr, scope: &mut Vec<String>| expr(x, scope);
    Ok(match &e.kind {
        ExprKind::Number(x) => constant(span, Constant::Real(*x)),
        ExprKind::Bool(b) => constant(span, Constant::Bool(*b)),
        ExprKind::Unit => constant(span, Constant::Unit),
        ExprKind::Var(x) => {
            if !scope.iter().any(|s| s == x) {
                return Err(SurfaceError::Unbound {
                    span,
                    name: x.clone(),
                });
            }
            mk(span, TermKind::Var(x.clone()))
        }
        ExprKind::Call { callee, args } => {
            let mut t = one(callee, scope)?;
            if args.is_empty() {
                return Ok(mk(
                    span,
                    TermKind::App(t, constant(span, Constant::Unit)),
                ));
            }
            for a in args {
                t = mk(span, TermKind::App(t, one(a, scope)?));
            }
            t
        }
        ExprKind::Builtin { op, args } => {
            if op.is_distribution() {
                if let Some(d) = fold_distribution(*op, args) {
                    return Ok(constant(span, Constant::Dist(d)));
                }
            }
            let mut t = constant(span, Constant::Builtin(*op));
            for a in args {
                t = mk(span, TermKind::App(t, one(a, scope)?));
            }
            t
        }
        ExprKind::Neg(inner) => match literal(inner) {
            Some(x) => constant(span, Constant::Real(-x)),
            None => {
                let op = constant(span, Constant::Builtin(Builtin::Sub));
                let zero = constant(span, Constant::Real(0.0));
                let partial = mk(span, TermKind::App(op, zero));
                mk(span, TermKind::App(partial, one(inner, scope)?))
            }
        },
        ExprKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            let c = one(cond, scope)?;
            let t = one(then_branch, scope)?;
            mk(span, TermKind::If(c, t, one(else_branch, scope)?))
        }
        ExprKind::Block(b) => block(b, scope)?,
        ExprKind::Lambda { params, body } => function(params, body, span, scope)?,
        ExprKind::Sample(d) => mk(span, TermKind::Sample(one(d, scope)?)),
        ExprKind::Weight(w) => mk(span, TermKind::Weight(one(w, scope)?)),
        ExprKind::DWeight(w) => mk(span, TermKind::DWeight(one(w, scope)?)),
        ExprKind::Flip => mk(
            span,
            TermKind::Sample(constant(
                span,
                Constant::Dist(Distribution::Bernoulli { p: 0.5 }),
            )),
        ),
        ExprKind::Fix(f) => {
            let ExprKind::Lambda { params, body } = &f.kind else {
                return Err(SurfaceError::Invalid {
                    span: f.span,
                    message: "fix expects `function(self, x, ...) { ... }`".into(),
                });
            };
            if params.len() < 2 {
                return Err(SurfaceError::Invalid {
                    span: f.span,
                    message: "the function given to fix needs a self parameter and at least one argument".into(),
                });
            }
            scope.push(params[0].clone());
            let inner = function(&params[1..], body, f.span, scope);
            scope.pop();
            let lam = mk(f.span, TermKind::Lam(params[0].clone(), inner?));
            mk(span, TermKind::Fix(lam))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{alpha_eq, build::*};
    use crate::surface::parse_core;

    #[test]
    fn lets_become_applied_lambdas() {
        let t = parse_core("x = 1\ny = x + 2\ny").unwrap();
        let expected = app(
            lam("x", app(lam("y", var("y")), prim(Builtin::Add, vec![var("x"), real(2.0)]))),
            real(1.0),
        );
        assert!(alpha_eq(&t, &expected));
    }

    #[test]
    fn functions_are_curried_fixpoints() {
        let t = parse_core("function f(a, b) { f(a, b) }\nf(1, 2)").unwrap();
        let expected = app(
            lam("f", app(app(var("f"), real(1.0)), real(2.0))),
            fix(lam("f", lam("a", lam("b", app(app(var("f"), var("a")), var("b")))))),
        );
        assert!(alpha_eq(&t, &expected));
    }

    #[test]
    fn literal_distributions_fold_to_constants() {
        let t = parse_core("sample(normal(-1, 2))").unwrap();
        assert!(alpha_eq(
            &t,
            &sample(dist(Distribution::Normal { mean: -1.0, sd: 2.0 }))
        ));
        let t = parse_core("m = 1\nsample(normal(m, 2))").unwrap();
        let TermKind::App(_, _) = &*t.kind else { panic!() };
    }

    #[test]
    fn nullary_functions_take_unit() {
        let t = parse_core("g = function() { 3 }\ng()").unwrap();
        let expected = app(lam("g", app(var("g"), unit())), lam("u", real(3.0)));
        assert!(alpha_eq(&t, &expected));
    }

    #[test]
    fn statements_are_sequenced() {
        let t = parse_core("weight(1)\n2").unwrap();
        let expected = app(lam("_", real(2.0)), weight(real(1.0)));
        assert!(alpha_eq(&t, &expected));
    }

    #[test]
    fn unbound_variables_are_reported_with_position() {
        let err = parse_core("x = 1\ny + x").unwrap_err();
        assert_eq!(
            err,
            SurfaceError::Unbound {
                span: Span::new(2, 1),
                name: "y".into()
            }
        );
    }

    #[test]
    fn a_let_does_not_see_itself() {
        assert!(parse_core("x = x\nx").is_err());
    }

    #[test]
    fn block_must_end_in_expression() {
        let err = parse_core("x = 1").unwrap_err();
        assert!(matches!(err, SurfaceError::Invalid { .. }));
    }

    #[test]
    fn fix_requires_a_two_parameter_function() {
        assert!(parse_core("fix(function(f) { f })").is_err());
        assert!(parse_core("fix(3)").is_err());
        assert!(parse_core("fix(function(f, n) { f(n) })").is_ok());
    }

    #[test]
    fn negating_a_variable_subtracts_from_zero() {
        let t = parse_core("x = 1\n-x").unwrap();
        let TermKind::App(_, arg) = &*t.kind else { panic!() };
        assert!(alpha_eq(arg, &real(1.0)));
        let TermKind::App(body, _) = &*t.kind else { panic!() };
        let TermKind::Lam(_, neg) = &*body.kind else { panic!() };
        assert!(alpha_eq(neg, &prim(Builtin::Sub, vec![real(0.0), var("x")])));
    }
}
