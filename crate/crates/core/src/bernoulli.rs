//! Bernoulli numbers and polynomials with exact rational coefficients.
//!
//! Coefficients are generated once from the Bernoulli numbers (convention
//! `B_1 = -1/2`) and cached; evaluation converts them to `f64` and runs
//! Horner's scheme.

use std::sync::OnceLock;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Largest supported polynomial degree. `B_12` is what the L² Gram entries
/// need at smoothness 3.
pub const MAX_DEGREE: usize = 12;

pub type Rational = Ratio<i64>;

/// Bernoulli polynomial `B_k(x)` with exact coefficients in descending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliPoly {
    degree: usize,
    coefficients: Vec<Rational>,
    float_coefficients: Vec<f64>,
}

impl BernoulliPoly {
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficients of `x^k, x^(k-1), ..., x^0`.
    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    /// Horner evaluation; no range check on `x`.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.float_coefficients
            .iter()
            .fold(0.0, |acc, &c| acc.mul_add(x, c))
    }
}

fn binomial(n: i64, k: i64) -> i64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `B_0 ..= B_MAX_DEGREE` from `sum_{j=0}^{n} C(n+1, j) B_j = 0`.
fn bernoulli_numbers() -> Vec<Rational> {
    let mut numbers: Vec<Rational> = Vec::with_capacity(MAX_DEGREE + 1);
    numbers.push(Rational::from_integer(1));
    for n in 1..=MAX_DEGREE as i64 {
        let partial = (0..n).fold(Rational::from_integer(0), |acc, j| {
            acc + numbers[j as usize] * binomial(n + 1, j)
        });
        numbers.push(-partial / (n + 1));
    }
    numbers
}

fn build_table() -> Vec<BernoulliPoly> {
    let numbers = bernoulli_numbers();
    (0..=MAX_DEGREE)
        .map(|k| {
            let coefficients: Vec<Rational> = (0..=k)
                .map(|j| numbers[j] * binomial(k as i64, j as i64))
                .collect();
            let float_coefficients = coefficients
                .iter()
                .map(|c| *c.numer() as f64 / *c.denom() as f64)
                .collect();
            BernoulliPoly {
                degree: k,
                coefficients,
                float_coefficients,
            }
        })
        .collect()
}

fn table() -> &'static [BernoulliPoly] {
    static TABLE: OnceLock<Vec<BernoulliPoly>> = OnceLock::new();
    TABLE.get_or_init(build_table)
}

/// Exact Bernoulli number `B_k` for `k <= MAX_DEGREE`.
pub fn bernoulli_number(k: usize) -> Result<Rational> {
    Ok(*poly(k)?.coefficients.last().expect("degree >= 0"))
}

/// Cached polynomial of degree `k`.
pub fn poly(k: usize) -> Result<&'static BernoulliPoly> {
    table().get(k).ok_or(Error::UnsupportedOrder {
        what: "Bernoulli degree",
        value: k,
        max: MAX_DEGREE,
    })
}

/// `B_k(x)` for `x` in `[0, 1]`.
pub fn bernoulli_polynomial(k: usize, x: f64) -> Result<f64> {
    let p = poly(k)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            index: 0,
            value: x,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(p.eval(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn known_numbers() {
        assert_eq!(bernoulli_number(1).unwrap(), r(-1, 2));
        assert_eq!(bernoulli_number(2).unwrap(), r(1, 6));
        assert_eq!(bernoulli_number(4).unwrap(), r(-1, 30));
        assert_eq!(bernoulli_number(6).unwrap(), r(1, 42));
        assert_eq!(bernoulli_number(8).unwrap(), r(-1, 30));
        assert_eq!(bernoulli_number(10).unwrap(), r(5, 66));
        assert_eq!(bernoulli_number(12).unwrap(), r(-691, 2730));
        for k in [3, 5, 7, 9, 11] {
            assert_eq!(bernoulli_number(k).unwrap(), r(0, 1));
        }
    }

    #[test]
    fn b4_coefficients() {
        // x^4 - 2x^3 + x^2 - 1/30
        let p = poly(4).unwrap();
        assert_eq!(
            p.coefficients(),
            &[r(1, 1), r(-2, 1), r(1, 1), r(0, 1), r(-1, 30)]
        );
    }

    #[test]
    fn small_values() {
        assert!((bernoulli_polynomial(2, 0.0).unwrap() - 1.0 / 6.0).abs() < 1e-16);
        assert!((bernoulli_polynomial(2, 1.0).unwrap() - 1.0 / 6.0).abs() < 1e-16);
        assert!((bernoulli_polynomial(4, 0.5).unwrap() - 7.0 / 240.0).abs() < 1e-16);
    }

    #[test]
    fn periodic_for_even_degrees() {
        for k in (2..=MAX_DEGREE).step_by(2) {
            let lo = bernoulli_polynomial(k, 0.0).unwrap();
            let hi = bernoulli_polynomial(k, 1.0).unwrap();
            assert!((lo - hi).abs() <= 1e-14 * lo.abs().max(1e-3), "k={k}");
        }
    }

    #[test]
    fn zero_mean_on_unit_interval() {
        // Exact: integrate the rational coefficients term by term.
        for k in 1..=MAX_DEGREE {
            let p = poly(k).unwrap();
            let integral = p
                .coefficients()
                .iter()
                .enumerate()
                .fold(r(0, 1), |acc, (j, c)| acc + *c / ((k - j) as i64 + 1));
            assert_eq!(integral, r(0, 1), "k={k}");
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(
            bernoulli_polynomial(13, 0.5),
            Err(Error::UnsupportedOrder { .. })
        ));
        assert!(matches!(
            bernoulli_polynomial(2, 1.5),
            Err(Error::Domain { .. })
        ));
    }
}
