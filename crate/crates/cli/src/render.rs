//! Deterministic text forms for report values.

use bergcheck::multiindex::MultiIndex;
use bergcheck::series::{BiKey, BiSeries, CPoly, Monomial};
use bergcheck::Rational;
use serde_json::{json, Value};

/// Always `p/q`, integers included.
pub fn rational(v: &Rational) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

pub fn index(i: &MultiIndex) -> Value {
    json!(i.entries())
}

/// `(2,0)` style label for CSV cells.
pub fn index_label(i: &MultiIndex) -> String {
    i.to_string()
}

pub fn monomial(m: &Monomial, names: &[String]) -> String {
    m.render(names)
}

/// `[{monomial, value}]` in the polynomial's own term order.
pub fn poly(p: &CPoly<Rational>, names: &[String]) -> Value {
    Value::Array(
        p.terms().map(|(m, v)| json!({ "monomial": monomial(m, names), "value": rational(v) })).collect(),
    )
}

pub fn key(k: &BiKey) -> (Value, Value) {
    (index(&k.s), index(&k.t))
}

/// `[{s, t, value}]` for a series with plain rational coefficients.
pub fn scalar_series(series: &BiSeries<Rational>) -> Value {
    Value::Array(
        series
            .iter()
            .map(|(k, v)| {
                let (s, t) = key(k);
                json!({ "s": s, "t": t, "value": rational(v) })
            })
            .collect(),
    )
}

/// Fixed notation for floats so repeated runs print the same bytes.
pub fn float(v: f64) -> String {
    format!("{v:.12e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use bergcheck::scalar::Scalar;

    #[test]
    fn rationals_always_have_a_denominator() {
        assert_eq!(rational(&Rational::from_ratio(-3, 6)), "-1/2");
        assert_eq!(rational(&Rational::from_int(4)), "4/1");
        assert_eq!(rational(&Rational::from_int(0)), "0/1");
    }

    #[test]
    fn floats_are_fixed_width() {
        assert_eq!(float(0.5), "5.000000000000e-1");
    }
}
