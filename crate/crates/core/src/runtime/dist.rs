use std::f64::consts::PI;

use rand_distr::{Bernoulli, Distribution as _, Exp, Gamma, Normal};

use crate::ast::Distribution;

use super::rng::Rng;
use super::value::Value;

/// Parameters outside the support of the distribution family.
#[derive(Clone, Debug, PartialEq)]
pub struct InvalidParameters(pub Distribution);

pub fn validate(d: &Distribution) -> Result<(), InvalidParameters> {
    let ok = match *d {
        Distribution::Bernoulli { p } => (0.0..=1.0).contains(&p),
        Distribution::Normal { mean, sd } => mean.is_finite() && sd > 0.0 && sd.is_finite(),
        Distribution::Gamma { shape, scale } => {
            shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()
        }
        Distribution::Exponential { rate } => rate > 0.0 && rate.is_finite(),
    };
    if ok {
        Ok(())
    } else {
        Err(InvalidParameters(*d))
    }
}

/// Draw one value from `d`.
pub fn draw(d: &Distribution, rng: &mut Rng) -> Result<Value, InvalidParameters> {
    validate(d)?;
    Ok(match *d {
        Distribution::Bernoulli { p } => Value::Bool(Bernoulli::new(p).map_err(|_| InvalidParameters(*d))?.sample(rng)),
        Distribution::Normal { mean, sd } => {
            Value::Real(Normal::new(mean, sd).map_err(|_| InvalidParameters(*d))?.sample(rng))
        }
        Distribution::Gamma { shape, scale } => {
            Value::Real(Gamma::new(shape, scale).map_err(|_| InvalidParameters(*d))?.sample(rng))
        }
        Distribution::Exponential { rate } => Value::Real(Exp::new(rate).map_err(|_| InvalidParameters(*d))?.sample(rng)),
    })
}

/// Log density (or log mass) of `x` under `d`; `-inf` outside the support.
/// Returns `None` when `x` has the wrong type for the family.
pub fn log_density(d: &Distribution, x: &Value) -> Result<Option<f64>, InvalidParameters> {
    validate(d)?;
    Ok(match (*d, x.plain()) {
        (Distribution::Bernoulli { p }, Value::Bool(b)) => Some(if *b { p.ln() } else { (1.0 - p).ln() }),
        (Distribution::Normal { mean, sd }, Value::Real(x)) => {
            let z = (x - mean) / sd;
            Some(-0.5 * z * z - sd.ln() - 0.5 * (2.0 * PI).ln())
        }
        (Distribution::Gamma { shape, scale }, Value::Real(x)) => Some(if *x <= 0.0 {
            f64::NEG_INFINITY
        } else {
            (shape - 1.0) * x.ln() - x / scale - libm::lgamma(shape) - shape * scale.ln()
        }),
        (Distribution::Exponential { rate }, Value::Real(x)) => Some(if *x < 0.0 {
            f64::NEG_INFINITY
        } else {
            rate.ln() - rate * x
        }),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::RngStream;

    #[test]
    fn degenerate_bernoulli() {
        let mut rng = RngStream::new(0, 0, 0).rng();
        for _ in 0..100 {
            assert!(matches!(
                draw(&Distribution::Bernoulli { p: 1.0 }, &mut rng),
                Ok(Value::Bool(true))
            ));
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let mut rng = RngStream::new(0, 0, 0).rng();
        for d in [
            Distribution::Bernoulli { p: 1.5 },
            Distribution::Normal { mean: 0.0, sd: 0.0 },
            Distribution::Gamma { shape: -1.0, scale: 1.0 },
            Distribution::Exponential { rate: 0.0 },
        ] {
            assert!(draw(&d, &mut rng).is_err(), "{d}");
        }
    }

    #[test]
    fn densities_match_closed_forms() {
        let n = log_density(&Distribution::Normal { mean: 1.0, sd: 2.0 }, &Value::Real(1.0))
            .unwrap()
            .unwrap();
        assert!((n - (-(2.0f64).ln() - 0.5 * (2.0 * PI).ln())).abs() < 1e-12);
        // gamma(1, θ) is exponential with rate 1/θ
        let g = log_density(&Distribution::Gamma { shape: 1.0, scale: 2.0 }, &Value::Real(3.0))
            .unwrap()
            .unwrap();
        let e = log_density(&Distribution::Exponential { rate: 0.5 }, &Value::Real(3.0))
            .unwrap()
            .unwrap();
        assert!((g - e).abs() < 1e-12);
        let b = log_density(&Distribution::Bernoulli { p: 0.25 }, &Value::Bool(false))
            .unwrap()
            .unwrap();
        assert!((b - 0.75f64.ln()).abs() < 1e-15);
        assert_eq!(
            log_density(&Distribution::Exponential { rate: 1.0 }, &Value::Bool(true)).unwrap(),
            None
        );
    }
}
