use crate::ast::{Builtin, Distribution};

use super::dist::{log_density, InvalidParameters};
use super::value::Value;

#[derive(Clone, Debug, PartialEq)]
pub enum BuiltinError {
    Type(String),
    InvalidDistribution(Distribution),
}

impl From<InvalidParameters> for BuiltinError {
    fn from(e: InvalidParameters) -> Self {
        BuiltinError::InvalidDistribution(e.0)
    }
}

fn real(op: Builtin, v: &Value, pos: usize) -> Result<f64, BuiltinError> {
    v.as_real().ok_or_else(|| {
        BuiltinError::Type(format!(
            "argument {} of `{}` must be a real, found {}",
            pos + 1,
            op.name(),
            v.type_name()
        ))
    })
}

/// Apply a saturated builtin. Arithmetic is plain IEEE double arithmetic, so
/// division by zero gives an infinity. The result is tainted when any
/// argument is.
pub fn apply_builtin(op: Builtin, args: &[Value]) -> Result<Value, BuiltinError> {
    debug_assert_eq!(args.len(), op.arity());
    let r = |i: usize| real(op, &args[i], i);
    let out = match op {
        Builtin::Add => Value::Real(r(0)? + r(1)?),
        Builtin::Sub => Value::Real(r(0)? - r(1)?),
        Builtin::Mul => Value::Real(r(0)? * r(1)?),
        Builtin::Div => Value::Real(r(0)? / r(1)?),
        Builtin::Le => Value::Bool(r(0)? <= r(1)?),
        Builtin::Lt => Value::Bool(r(0)? < r(1)?),
        Builtin::Log => Value::Real(r(0)?.ln()),
        Builtin::Exp => Value::Real(r(0)?.exp()),
        Builtin::LogPdf => {
            let Value::Dist(d) = args[0].plain() else {
                return Err(BuiltinError::Type(format!(
                    "argument 1 of `logpdf` must be a distribution, found {}",
                    args[0].type_name()
                )));
            };
            let lp = log_density(d, &args[1])?.ok_or_else(|| {
                BuiltinError::Type(format!(
                    "`logpdf` of {d} is not defined for a {}",
                    args[1].type_name()
                ))
            })?;
            Value::Real(lp)
        }
        Builtin::Bernoulli => Value::Dist(Distribution::Bernoulli { p: r(0)? }),
        Builtin::Normal => Value::Dist(Distribution::Normal {
            mean: r(0)?,
            sd: r(1)?,
        }),
        Builtin::Gamma => Value::Dist(Distribution::Gamma {
            shape: r(0)?,
            scale: r(1)?,
        }),
        Builtin::Exponential => Value::Dist(Distribution::Exponential { rate: r(0)? }),
    };
    if args.iter().any(Value::is_tainted) {
        Ok(Value::Tainted(Box::new(out)))
    } else {
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ap(op: Builtin, a: f64, b: f64) -> Value {
        apply_builtin(op, &[Value::Real(a), Value::Real(b)]).unwrap()
    }

    #[test]
    fn arithmetic_and_comparison() {
        assert!(ap(Builtin::Add, 2.0, 3.0).same(&Value::Real(5.0)));
        assert!(ap(Builtin::Le, 1.0, 1.0).same(&Value::Bool(true)));
        assert!(ap(Builtin::Lt, 1.0, 1.0).same(&Value::Bool(false)));
        assert_eq!(ap(Builtin::Div, 1.0, 0.0).as_real(), Some(f64::INFINITY));
    }

    #[test]
    fn type_errors_name_the_argument() {
        let e = apply_builtin(Builtin::Add, &[Value::Real(1.0), Value::Bool(true)]).unwrap_err();
        assert_eq!(
            e,
            BuiltinError::Type("argument 2 of `+` must be a real, found boolean".into())
        );
    }

    #[test]
    fn taint_propagates() {
        let t = Value::Tainted(Box::new(Value::Real(1.0)));
        let v = apply_builtin(Builtin::Mul, &[t, Value::Real(2.0)]).unwrap();
        assert!(v.is_tainted());
        assert_eq!(v.as_real(), Some(2.0));
    }
}
