//! Power-basis coefficients of Legendre polynomials, built by the Bonnet
//! recurrence in exact rational arithmetic.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{NsbfError, Result};

/// Largest `n` accepted by [`legendre_even_coeffs`], i.e. `P_60`.
pub const MAX_EVEN_INDEX: usize = 30;
const MAX_ORDER: usize = 2 * MAX_EVEN_INDEX;

/// Coefficients `l_{k,n}` of `x^k` in `P_n`, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreCoeffRow {
    pub n: usize,
    pub coeffs: Vec<f64>,
    exact: Vec<BigRational>,
}

impl LegendreCoeffRow {
    pub fn exact(&self) -> &[BigRational] {
        &self.exact
    }

    /// Horner evaluation in floating point.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Exact sum of the coefficients, i.e. `P_n(1)`.
    pub fn exact_sum(&self) -> BigRational {
        self.exact.iter().fold(BigRational::zero(), |acc, c| acc + c)
    }
}

fn table() -> &'static [Vec<BigRational>] {
    static TABLE: OnceLock<Vec<Vec<BigRational>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let int = |v: usize| BigRational::from_integer(BigInt::from(v));
        let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(MAX_ORDER + 1);
        rows.push(vec![int(1)]);
        rows.push(vec![int(0), int(1)]);
        for k in 1..MAX_ORDER {
            // (k+1) P_{k+1} = (2k+1) x P_k − k P_{k−1}
            let mut next = vec![BigRational::zero(); k + 2];
            for (i, c) in rows[k].iter().enumerate() {
                next[i + 1] += c * int(2 * k + 1);
            }
            for (i, c) in rows[k - 1].iter().enumerate() {
                next[i] -= c * int(k);
            }
            let d = int(k + 1);
            for c in next.iter_mut() {
                *c /= d.clone();
            }
            rows.push(next);
        }
        rows
    })
}

/// Coefficients of `P_order` for `order <= 60`.
pub fn legendre_coeffs(order: usize) -> Result<LegendreCoeffRow> {
    if order > MAX_ORDER {
        return Err(NsbfError::Range(format!(
            "Legendre order {order} exceeds {MAX_ORDER}; use the recurrent coefficient path"
        )));
    }
    let exact = table()[order].clone();
    let coeffs = exact.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    Ok(LegendreCoeffRow { n: order, coeffs, exact })
}

/// Coefficients of `P_{2n}`.
pub fn legendre_even_coeffs(n: usize) -> Result<LegendreCoeffRow> {
    if n > MAX_EVEN_INDEX {
        return Err(NsbfError::Range(format!(
            "direct Legendre sum limited to n <= {MAX_EVEN_INDEX} (got {n}); use the recurrent coefficient path"
        )));
    }
    legendre_coeffs(2 * n)
}
