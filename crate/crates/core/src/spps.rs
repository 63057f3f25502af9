//! The non-vanishing particular solution `u₀` of the zero-frequency
//! equation and the recursive integrals built on it.

use crate::error::{NsbfError, Result};
use crate::mesh::{
    integrate_cumulative, integrate_cumulative_power, integrate_cumulative_power_guarded, GridFunction,
    UniformMesh, DEFAULT_CUTOFF_SLACK,
};
use crate::potential::Potential;

pub const DEFAULT_PICARD_TOL: f64 = 1e-14;
pub const DEFAULT_PICARD_MAX_ITER: usize = 100;

/// Mesh points skipped at the origin by the ODE-defect check. The 5-point
/// stencil does not resolve `x^{l+1}` within a few steps of `x = 0`.
const DEFECT_ORIGIN_MARGIN: usize = 50;

/// `u₀` with `u₀ ~ x^{l+1}` at the origin, and its derivative.
#[derive(Debug, Clone)]
pub struct ParticularSolution {
    pub u0: GridFunction,
    /// `u₀′`. For `l < 0` the origin sample is a placeholder 0 (the true
    /// value is infinite); use [`ParticularSolution::scaled_derivative`].
    pub u0_prime: GridFunction,
    /// `u₀ / x^{l+1}`, 1 at the origin.
    pub scaled: GridFunction,
    /// `u₀′ / x^l`, `l+1` at the origin.
    pub scaled_derivative: GridFunction,
    pub l: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl ParticularSolution {
    pub fn mesh(&self) -> &UniformMesh {
        self.u0.mesh()
    }
}

/// `sign(t)·|t|·x^{-p}` without forming `x^{-p}` on its own.
#[inline]
fn div_pow(t: f64, x: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * (t.abs().ln() - p * x.ln()).exp()
    }
}

/// Leading power `a` of `t^a g(t) = t^{2l} A(t)` at the origin.
fn b_power(p: &Potential) -> f64 {
    if p.singular_origin() {
        2.0 * p.l() + 1.0
    } else {
        2.0 * p.l() + 2.0
    }
}

/// Picard iteration for `v = u₀/x^{l+1}`:
///
/// `v = 1 + x^{−k} ∫₀ˣ t^{k−1} A(t) dt`, `A = ∫₀ᵗ s q v`, `k = 2l+1`.
/// This is the kernel `(1 − (s/x)^k)/k` integrated by parts. It has no
/// `1/k` cancellation near `l = −1/2` and turns into the logarithmic
/// kernel at `k = 0` without special casing.
fn picard(p: &Potential, tol: f64, max_iter: usize, mut observe: impl FnMut(&[f64])) -> Result<Picard> {
    let mesh = *p.mesh();
    let m = mesh.len();
    let h = mesh.step();
    let k = 2.0 * p.l() + 1.0;
    let wa: Vec<f64> = (0..m).map(|i| p.q_times_pow(i, 1.0)).collect();
    let tk: Vec<f64> = (0..m).map(|i| if i == 0 { 0.0 } else { mesh.x(i).powf(k - 1.0) }).collect();
    let mut v = vec![1.0; m];
    let mut buf = vec![0.0; m];
    for iter in 1..=max_iter {
        buf.iter_mut().zip(wa.iter().zip(&v)).for_each(|(o, (w, vi))| *o = w * vi);
        let a = integrate_cumulative(&buf, h)?;
        // f(0) is never read by the power rule
        buf.iter_mut().zip(a.iter().zip(&tk)).for_each(|(o, (ai, t))| *o = ai * t);
        let c = integrate_cumulative_power(&buf, h, b_power(p))?;
        let mut diff = 0.0f64;
        let mut vmax = 0.0f64;
        let mut next = vec![1.0; m];
        for i in 1..m {
            next[i] = 1.0 + div_pow(c[i], mesh.x(i), k);
            if !next[i].is_finite() {
                return Err(NsbfError::NonFinite { index: i, context: format!("Picard sweep {iter}") });
            }
            diff = diff.max((next[i] - v[i]).abs());
            vmax = vmax.max(next[i].abs());
        }
        v = next;
        observe(&v);
        if diff <= tol * vmax.max(1.0) {
            return Ok(Picard { v, a, iterations: iter });
        }
        if iter == max_iter {
            return Err(NsbfError::Convergence { iterations: iter, last_update: diff });
        }
    }
    Err(NsbfError::Convergence { iterations: 0, last_update: f64::NAN })
}

struct Picard {
    v: Vec<f64>,
    /// `A = ∫₀ˣ s q v` for the returned `v`.
    a: Vec<f64>,
    iterations: usize,
}

/// Builds `u₀` by Picard iteration on its Volterra integral equation.
/// Stops when successive sweeps of `u₀/x^{l+1}` differ by at most
/// `tol · max(1, sup |u₀/x^{l+1}|)`.
pub fn build_u0(p: &Potential, tol: f64, max_iter: usize) -> Result<ParticularSolution> {
    build_u0_observed(p, tol, max_iter, |_| {})
}

/// As [`build_u0`], calling `observe` with each Picard iterate of `u₀/x^{l+1}`.
pub fn build_u0_observed(p: &Potential, tol: f64, max_iter: usize, observe: impl FnMut(&[f64])) -> Result<ParticularSolution> {
    if !(tol > 0.0) {
        return Err(NsbfError::Domain(format!("Picard tolerance must be positive (got {tol})")));
    }
    let mesh = *p.mesh();
    let m = mesh.len();
    let l = p.l();
    let Picard { v, a, iterations } = picard(p, tol, max_iter, observe)?;

    // u₀′/x^l = (l+1)v + x v′ with x v′ = A − k(v − 1)
    let k = 2.0 * l + 1.0;
    let w: Vec<f64> = v.iter().zip(&a).map(|(vi, ai)| (l + 1.0) * vi - k * (vi - 1.0) + ai).collect();

    let mut u0 = vec![0.0; m];
    let mut up = vec![0.0; m];
    for i in 1..m {
        let x = mesh.x(i);
        u0[i] = x.powf(l + 1.0) * v[i];
        up[i] = x.powf(l) * w[i];
        if !(u0[i] > 0.0) {
            return Err(NsbfError::NonVanishing { x, value: u0[i] });
        }
    }
    up[0] = if l == 0.0 { w[0] } else { 0.0 };
    let residual = ode_defect(p, &u0);
    Ok(ParticularSolution {
        u0: GridFunction::new(mesh, u0)?,
        u0_prime: GridFunction::new(mesh, up)?,
        scaled: GridFunction::new(mesh, v)?,
        scaled_derivative: GridFunction::new(mesh, w)?,
        l,
        iterations,
        residual,
    })
}

/// `max |u″ − (l(l+1)/x² + q) u| / (1 + |u″|)` with a 5-point second
/// difference, over interior points away from the origin.
pub fn ode_defect(p: &Potential, u: &[f64]) -> f64 {
    ode_defect_shifted(p, u, 0.0)
}

/// As [`ode_defect`] for `−u″ + (l(l+1)/x² + q)u = ω²u`.
pub fn ode_defect_shifted(p: &Potential, u: &[f64], omega_sq: f64) -> f64 {
    let mesh = p.mesh();
    let m = mesh.len();
    let h2 = mesh.step() * mesh.step();
    let l = p.l();
    let start = DEFECT_ORIGIN_MARGIN.min(m / 10).max(2);
    let mut worst = 0.0f64;
    for i in start..m.saturating_sub(2) {
        let x = mesh.x(i);
        let d2 = (-u[i - 2] + 16.0 * u[i - 1] - 30.0 * u[i] + 16.0 * u[i + 1] - u[i + 2]) / (12.0 * h2);
        let rhs = (l * (l + 1.0) / (x * x) + p.q_times_pow(i, 0.0) - omega_sq) * u[i];
        worst = worst.max((d2 - rhs).abs() / (1.0 + d2.abs()));
    }
    worst
}

/// Recursive integrals `X̃⁽⁰⁾..X̃⁽²ᴺ⁾` and `φ₀..φ_N`.
#[derive(Debug, Clone)]
pub struct PhiFamily {
    pub xtilde: Vec<GridFunction>,
    pub phi: Vec<GridFunction>,
    u0: GridFunction,
    u0_prime: GridFunction,
    l: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

impl PhiFamily {
    pub fn n(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn mesh(&self) -> &UniformMesh {
        self.u0.mesh()
    }

    /// `φ_k′ = (−1)^k (2k)! (u₀′ X̃⁽²ᵏ⁾ − X̃⁽²ᵏ⁻¹⁾/u₀)` on the mesh.
    pub fn phi_prime(&self, k: usize) -> GridFunction {
        let u = self.u0.values();
        let up = self.u0_prime.values();
        if k == 0 {
            return self.u0_prime.clone();
        }
        let c = if k % 2 == 0 { 1.0 } else { -1.0 } * factorial(2 * k);
        let even = self.xtilde[2 * k].values();
        let odd = self.xtilde[2 * k - 1].values();
        let vals = (0..u.len())
            .map(|i| if i == 0 { 0.0 } else { c * (up[i] * even[i] - odd[i] / u[i]) })
            .collect();
        GridFunction::new(*self.mesh(), vals).expect("finite φ′ samples")
    }
}

/// Alternating recursive integrals: odd `n` integrates `u₀² X̃⁽ⁿ⁻¹⁾`, even
/// `n` integrates `−X̃⁽ⁿ⁻¹⁾/u₀²` with the cut-off guard.
pub fn build_phi_family(u0: &ParticularSolution, n: usize) -> Result<PhiFamily> {
    let mesh = *u0.mesh();
    let m = mesh.len();
    let h = mesh.step();
    let u = u0.u0.values();
    let two_l2 = 2.0 * u0.l + 2.0;
    let mut xt: Vec<Vec<f64>> = vec![vec![1.0; m]];
    // X̃⁽ᵏ⁾ ~ x^{p_k} at the origin, with p_k taken from the unperturbed case
    let mut power = 0.0;
    for k in 1..=2 * n {
        let prev = &xt[k - 1];
        let next = if k % 2 == 1 {
            let f: Vec<f64> = (0..m).map(|i| u[i] * u[i] * prev[i]).collect();
            power += two_l2;
            integrate_cumulative_power(&f, h, power)?
        } else {
            let f: Vec<f64> = (0..m).map(|i| if i == 0 { 0.0 } else { -prev[i] / (u[i] * u[i]) }).collect();
            power -= two_l2;
            integrate_cumulative_power_guarded(&f, h, power, DEFAULT_CUTOFF_SLACK)?
        };
        power += 1.0;
        xt.push(next);
    }
    let phi = (0..=n)
        .map(|k| {
            if k == 0 {
                return Ok(u0.u0.clone());
            }
            let c = if k % 2 == 0 { 1.0 } else { -1.0 } * factorial(2 * k);
            GridFunction::new(mesh, (0..m).map(|i| c * u[i] * xt[2 * k][i]).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let xtilde = xt.into_iter().map(|v| GridFunction::new(mesh, v)).collect::<Result<Vec<_>>>()?;
    Ok(PhiFamily { xtilde, phi, u0: u0.u0.clone(), u0_prime: u0.u0_prime.clone(), l: u0.l })
}
