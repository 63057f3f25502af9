//! Gamma-function ratios. Every ratio is assembled from log-gamma
//! differences so that no gamma value is formed on its own.

use std::f64::consts::PI;

/// `(ln|Γ(x)|, sign Γ(x))`. At the poles (non-positive integers) the sign
/// is reported as 0.
pub fn ln_gamma_signed(x: f64) -> (f64, i32) {
    if is_gamma_pole(x) {
        return (f64::INFINITY, 0);
    }
    let (v, s) = libm::lgamma_r(x);
    (v, s)
}

pub fn ln_gamma(x: f64) -> f64 {
    ln_gamma_signed(x).0
}

/// `1/Γ(x)`, exactly zero at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    let (v, s) = ln_gamma_signed(x);
    if s == 0 {
        0.0
    } else {
        s as f64 * (-v).exp()
    }
}

#[inline]
pub fn is_gamma_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Below this `k` the ratio product is used instead of log-gamma.
const C_KL_PRODUCT_MAX_K: usize = 512;

/// `c_{k,l} = Γ(l+3/2) Γ(k+1/2) / (√π Γ(k+l+3/2))`.
///
/// For moderate `k` this is the product `Π_{j<k} (j+1/2)/(j+l+3/2)` carried
/// in double-double, good to about one ulp. The log-gamma form loses
/// `|ln c| · ε`, which the direct coefficient formulas amplify by their
/// large alternating Legendre weights.
pub fn c_kl(k: usize, l: f64) -> f64 {
    if k <= C_KL_PRODUCT_MAX_K {
        let (mut hi, mut lo) = (1.0f64, 0.0f64);
        for j in 0..k {
            let j = j as f64;
            (hi, lo) = dd_mul(hi, lo, j + 0.5);
            (hi, lo) = dd_div(hi, lo, j + l + 1.5);
        }
        return hi + lo;
    }
    let k = k as f64;
    (ln_gamma(l + 1.5) + ln_gamma(k + 0.5) - 0.5 * PI.ln() - ln_gamma(k + l + 1.5)).exp()
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn dd_mul(hi: f64, lo: f64, a: f64) -> (f64, f64) {
    let p = hi * a;
    let e = hi.mul_add(a, -p);
    quick_two_sum(p, e + lo * a)
}

#[inline]
fn dd_div(hi: f64, lo: f64, d: f64) -> (f64, f64) {
    let q1 = hi / d;
    let r = (-q1).mul_add(d, hi) + lo;
    quick_two_sum(q1, r / d)
}

/// The source coefficient of the n-th recurrence step,
///
/// `B_n = (4n−1) Γ(l+2) Γ(l+3/2) Γ(n−1/2) / (2√π Γ(l−n+2) Γ(n+1) Γ(n+l+3/2))`.
///
/// The factor `1/Γ(l−n+2)` vanishes for integer `l` once `n ≥ l + 2`.
pub fn gamma_ratio_bn(n: usize, l: f64) -> f64 {
    assert!(n >= 1, "B_n is defined for n >= 1");
    let nf = n as f64;
    let (ln_den, sign) = ln_gamma_signed(l - nf + 2.0);
    if sign == 0 {
        return 0.0;
    }
    let ln_abs = (4.0 * nf - 1.0).ln() + ln_gamma(l + 2.0) + ln_gamma(l + 1.5) + ln_gamma(nf - 0.5)
        - std::f64::consts::LN_2
        - 0.5 * PI.ln()
        - ln_den
        - ln_gamma(nf + 1.0)
        - ln_gamma(nf + l + 1.5);
    sign as f64 * ln_abs.exp()
}

/// Source coefficient of the derivative recurrence, `C_n = B_n / 2`.
pub fn gamma_ratio_cn(n: usize, l: f64) -> f64 {
    0.5 * gamma_ratio_bn(n, l)
}
