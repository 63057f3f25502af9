//! Bessel functions of half-integer and real order for real arguments.

use crate::error::{NsbfError, Result};
use crate::special::gamma::ln_gamma;

const RESCALE_AT: f64 = 1e100;
const RESCALE_BY: f64 = 1e-100;

/// Miller start order for a backward sweep that must resolve orders up to `n`.
pub fn miller_start(n: usize) -> usize {
    let n = n.max(1);
    n + (1.5 * (40.0 * n as f64).sqrt()).ceil() as usize + 20
}

/// `0F1(; nu+1; -z^2/4)` by its ascending series.
fn lambda_series(nu: f64, z: f64) -> f64 {
    let w = -0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        term *= w / ((k + 1.0) * (nu + k + 1.0));
        sum += term;
        k += 1.0;
        if term.abs() <= 1e-17 * sum.abs() || k > 500.0 {
            return sum;
        }
    }
}

/// Normalized Bessel functions `Λ_ν(z) = Γ(ν+1)(2/z)^ν J_ν(z)` and
/// `Λ_{ν+1}(z)`, for `ν ≥ 0`, `z ≥ 0`. `Λ_ν(0) = 1`.
///
/// Small arguments use the power series. Otherwise a backward sweep over
/// `J_{ν+j}` is normalized with `(z/2)^ν = Σ_k (ν+2k) Γ(ν+k)/k! J_{ν+2k}(z)`.
pub fn normalized_bessel_pair(nu: f64, z: f64) -> (f64, f64) {
    debug_assert!(nu >= 0.0 && z >= 0.0);
    if z * z <= 2.0 * (nu + 1.0) {
        return (lambda_series(nu, z), lambda_series(nu + 1.0, z));
    }
    let m = miller_start(z.ceil() as usize);
    let kmax = m / 2;
    // a_0 = 1, a_k = (ν+2k) r_k, r_1 = 1, r_{k+1} = r_k (ν+k)/(k+1)
    let mut a = Vec::with_capacity(kmax + 1);
    a.push(1.0);
    let mut r = 1.0;
    for k in 1..=kmax {
        if k > 1 {
            r *= (nu + (k - 1) as f64) / k as f64;
        }
        a.push((nu + 2.0 * k as f64) * r);
    }
    let mut f_next = 0.0; // f_{j+1}
    let mut f = 1e-30; // f_j
    let mut sum = 0.0;
    let mut j = m;
    loop {
        if j % 2 == 0 {
            sum += a[j / 2] * f;
        }
        if j == 0 {
            break;
        }
        let f_prev = 2.0 * (nu + j as f64) / z * f - f_next;
        f_next = f;
        f = f_prev;
        j -= 1;
        if f.abs() > RESCALE_AT {
            f *= RESCALE_BY;
            f_next *= RESCALE_BY;
            sum *= RESCALE_BY;
        }
    }
    let lam0 = f / sum;
    let lam1 = 2.0 * (nu + 1.0) / z * f_next / sum;
    (lam0, lam1)
}

/// `j_0(z), …, j_{n_max}(z)`.
pub fn spherical_j_sequence(n_max: usize, z: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; n_max + 1];
    spherical_j_into(z, &mut out)?;
    Ok(out)
}

/// Fills `out[n] = j_n(z)` for `n < out.len()`.
pub fn spherical_j_into(z: f64, out: &mut [f64]) -> Result<()> {
    if !z.is_finite() {
        return Err(NsbfError::Domain(format!("spherical Bessel argument {z} is not finite")));
    }
    if out.is_empty() {
        return Ok(());
    }
    let az = z.abs();
    let n_max = out.len() - 1;
    if az == 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
    } else if az <= 1.0 {
        // j_n(z) = z^n/(2n+1)!! · Λ_{n+1/2}(z)
        let mut p = 1.0;
        for (n, o) in out.iter_mut().enumerate() {
            if n > 0 {
                p *= az / (2 * n + 1) as f64;
            }
            *o = if p == 0.0 { 0.0 } else { p * lambda_series(n as f64 + 0.5, az) };
        }
    } else if az >= n_max as f64 {
        let (s, c) = az.sin_cos();
        out[0] = s / az;
        if n_max >= 1 {
            out[1] = s / (az * az) - c / az;
        }
        for n in 1..n_max {
            out[n + 1] = (2 * n + 1) as f64 / az * out[n] - out[n - 1];
        }
    } else {
        miller_spherical(az, out);
    }
    if z < 0.0 {
        for v in out.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
    Ok(())
}

fn miller_spherical(z: f64, out: &mut [f64]) {
    let n_max = out.len() - 1;
    let m = miller_start(n_max);
    let mut f = vec![0.0; m + 2];
    f[m] = 1e-30;
    for k in (1..=m).rev() {
        f[k - 1] = (2 * k + 1) as f64 / z * f[k] - f[k + 1];
        if f[k - 1].abs() > RESCALE_AT {
            for v in f[k - 1..].iter_mut() {
                *v *= RESCALE_BY;
            }
        }
    }
    // Σ (2k+1) j_k² = 1
    let norm: f64 = f.iter().enumerate().map(|(k, v)| (2 * k + 1) as f64 * v * v).sum();
    let mut scale = 1.0 / norm.sqrt();
    let (s, c) = z.sin_cos();
    let j0 = s / z;
    let j1 = s / (z * z) - c / z;
    let flip = if j0.abs() >= j1.abs() { j0 * f[0] < 0.0 } else { j1 * f[1] < 0.0 };
    if flip {
        scale = -scale;
    }
    for (o, v) in out.iter_mut().zip(f.iter()) {
        *o = v * scale;
    }
}

fn check_args(l: f64, z: f64) -> Result<()> {
    if !(l >= -0.5) || !l.is_finite() {
        return Err(NsbfError::Domain(format!("angular parameter l = {l} must be >= -1/2")));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(NsbfError::Domain(format!("argument z = {z} must be finite and >= 0")));
    }
    Ok(())
}

/// `b_l(z) = √z J_{l+1/2}(z)`.
pub fn b_l(l: f64, z: f64) -> Result<f64> {
    check_args(l, z)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    let nu = l + 0.5;
    let (lam, _) = normalized_bessel_pair(nu, z);
    let pre = ((l + 1.0) * z.ln() - nu * std::f64::consts::LN_2 - ln_gamma(nu + 1.0)).exp();
    Ok(pre * lam)
}

/// `d/dz b_l(z)`.
pub fn b_l_prime(l: f64, z: f64) -> Result<f64> {
    check_args(l, z)?;
    let nu = l + 0.5;
    if z == 0.0 {
        return Ok(if l > 0.0 {
            0.0
        } else if l == 0.0 {
            (2.0 / std::f64::consts::PI).sqrt()
        } else {
            f64::INFINITY
        });
    }
    let (lam0, lam1) = normalized_bessel_pair(nu, z);
    let pre = (l * z.ln() - nu * std::f64::consts::LN_2 - ln_gamma(nu + 1.0)).exp();
    Ok(pre * ((l + 1.0) * lam0 - z * z / (2.0 * (nu + 1.0)) * lam1))
}
