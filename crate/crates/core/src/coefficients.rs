//! Coefficients `β_n`, `γ_n` of the Neumann series for the solution and its
//! derivative. The recurrent scheme is the production path; the direct
//! Legendre sums are kept as a cross-check for small `n`.

use crate::error::{NsbfError, Result};
use crate::mesh::{integrate_cumulative, integrate_cumulative_guarded, GridFunction, UniformMesh, DEFAULT_CUTOFF_SLACK};
use crate::potential::Potential;
use crate::special::{c_kl, gamma_ratio_bn, gamma_ratio_cn, legendre_even_coeffs};
use crate::spps::{ParticularSolution, PhiFamily};

/// Largest `n` for the direct formulas; beyond it cancellation takes over.
pub const DIRECT_FORMULA_MAX_N: usize = 12;

/// Below this value of `x^{2n}` the coefficient is set to 0 instead of
/// dividing: the integrals have lost their relative precision there and
/// `|β_n(x)|` is of the same order.
const POWER_FLOOR: f64 = 1e-250;

/// Window length of the plateau test in [`select_truncation`].
pub const PLATEAU_WINDOW: usize = 10;

/// Residuals are clamped to this value before taking logarithms.
const RESIDUAL_CLAMP: f64 = 1e-300;
/// Drop of `log10 r` over the last window (about 25%) that means the
/// residual is still converging at `N`.
const STILL_FALLING: f64 = 0.1;

/// Auxiliary integrals of step `n` (`η_n`, `κ_n`, `θ_n`, `μ_n`).
#[derive(Debug, Clone)]
pub struct StepIntegrals {
    pub eta: Vec<f64>,
    pub kappa: Vec<f64>,
    pub theta: Vec<f64>,
    pub mu: Vec<f64>,
}

/// Auxiliary integrals for `n = 1..=N`; entry `n − 1` holds step `n`.
#[derive(Debug, Clone, Default)]
pub struct Auxiliaries {
    pub steps: Vec<StepIntegrals>,
}

/// Plateau-selected truncation order and the residual floors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub n_opt: usize,
    pub n_opt_beta: usize,
    pub n_opt_gamma: usize,
    pub beta_floor: f64,
    pub gamma_floor: f64,
    /// False when no plateau was found; `n_opt` is then `N`.
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct CoefficientTables {
    pub beta: Vec<GridFunction>,
    pub gamma: Vec<GridFunction>,
    pub n: usize,
    /// `|Σ_{n≤K} β_n(b)/b|` for `K = 0..=N`.
    pub beta_residual: Vec<f64>,
    pub gamma_residual: Vec<f64>,
    pub truncation: Truncation,
}

impl CoefficientTables {
    pub fn n_opt(&self) -> usize {
        self.truncation.n_opt
    }

    pub fn mesh(&self) -> &UniformMesh {
        self.beta[0].mesh()
    }

    /// `|Σ_{n≤K} c_n(x)/x|` at an arbitrary `x ∈ (0, b]`.
    pub fn diagonal_residual(&self, k: usize, x: f64) -> (f64, f64) {
        let mesh = self.mesh();
        let k = k.min(self.n);
        let sb: f64 = self.beta[..=k].iter().map(|c| mesh.interpolate(c.values(), x)).sum();
        let sg: f64 = self.gamma[..=k].iter().map(|c| mesh.interpolate(c.values(), x)).sum();
        ((sb / x).abs(), (sg / x).abs())
    }
}

/// Mesh-wise quantities shared by all recurrence steps.
struct Stepper<'a> {
    mesh: UniformMesh,
    l: f64,
    p: &'a Potential,
    x: Vec<f64>,
    u: &'a [f64],
    up: &'a [f64],
}

impl<'a> Stepper<'a> {
    fn new(u0: &'a ParticularSolution, p: &'a Potential) -> Self {
        let mesh = *u0.mesh();
        Stepper { mesh, l: u0.l, p, x: mesh.nodes(), u: u0.u0.values(), up: u0.u0_prime.values() }
    }

    fn m(&self) -> usize {
        self.x.len()
    }

    fn beta0(&self, s: &ParticularSolution) -> Vec<f64> {
        let v = s.scaled.values();
        (0..self.m()).map(|i| if i == 0 { 0.0 } else { self.x[i].powf(self.l + 1.0) * (v[i] - 1.0) }).collect()
    }

    fn gamma0(&self, s: &ParticularSolution) -> Vec<f64> {
        let w = s.scaled_derivative.values();
        let q = self.p.big_q().values();
        let l = self.l;
        (0..self.m())
            .map(|i| {
                if i == 0 {
                    return 0.0;
                }
                let x = self.x[i];
                x.powf(l) * (w[i] - (l + 1.0)) - 0.5 * x.powf(l + 1.0) * q[i]
            })
            .collect()
    }

    fn integrals(&self, n: usize, beta_prev: &[f64]) -> Result<StepIntegrals> {
        let m = self.m();
        let h = self.mesh.step();
        let (x, u, up) = (&self.x, self.u, self.up);
        let nf = n as f64;
        let (eta, kappa) = rayon::join(
            || {
                let f: Vec<f64> = (0..m)
                    .map(|i| if i == 0 { 0.0 } else { (x[i] * up[i] + (2.0 * nf - 1.0) * u[i]) * x[i].powi(2 * n as i32 - 2) * beta_prev[i] })
                    .collect();
                integrate_cumulative(&f, h)
            },
            || {
                let f: Vec<f64> = (0..m).map(|i| if i == 0 { 0.0 } else { u[i] * self.p.q_times_pow(i, 2.0 * nf + self.l + 1.0) }).collect();
                integrate_cumulative(&f, h)
            },
        );
        let (eta, kappa) = (eta?, kappa?);
        let (theta, mu) = rayon::join(
            || {
                let f: Vec<f64> = (0..m)
                    .map(|i| if i == 0 { 0.0 } else { (eta[i] - x[i].powi(2 * n as i32 - 1) * beta_prev[i] * u[i]) / (u[i] * u[i]) })
                    .collect();
                integrate_cumulative_guarded(&f, h, DEFAULT_CUTOFF_SLACK)
            },
            || {
                let f: Vec<f64> = (0..m).map(|i| if i == 0 { 0.0 } else { kappa[i] / (u[i] * u[i]) }).collect();
                integrate_cumulative_guarded(&f, h, DEFAULT_CUTOFF_SLACK)
            },
        );
        Ok(StepIntegrals { eta, kappa, theta: theta?, mu: mu? })
    }

    fn beta(&self, n: usize, beta_prev: &[f64], s: &StepIntegrals) -> Result<Vec<f64>> {
        let nf = n as f64;
        let k1 = (4.0 * nf + 1.0) / (4.0 * nf - 3.0);
        let bn = gamma_ratio_bn(n, self.l);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let mut out = vec![0.0; self.m()];
        for i in 1..self.m() {
            let x2n = self.x[i].powi(2 * n as i32);
            if x2n < POWER_FLOOR {
                continue;
            }
            let t = 2.0 * (4.0 * nf - 1.0) * s.theta[i] + sign * (4.0 * nf - 3.0) * bn * s.mu[i];
            let v = k1 * (beta_prev[i] + self.u[i] * t / x2n);
            if !v.is_finite() {
                return Err(NsbfError::NumericalBreakdown { n, what: format!("beta_n at x = {}", self.x[i]) });
            }
            out[i] = v;
        }
        Ok(out)
    }

    fn gamma(&self, n: usize, gamma_prev: &[f64], beta_prev: &[f64], s: &StepIntegrals) -> Result<Vec<f64>> {
        let nf = n as f64;
        let k1 = (4.0 * nf + 1.0) / (4.0 * nf - 3.0);
        let bn = gamma_ratio_bn(n, self.l);
        let cn = gamma_ratio_cn(n, self.l);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let q = self.p.big_q().values();
        let (u, up) = (self.u, self.up);
        let mut out = vec![0.0; self.m()];
        for i in 1..self.m() {
            let x = self.x[i];
            let x2n = x.powi(2 * n as i32);
            if x2n < POWER_FLOOR {
                continue;
            }
            let inner = 2.0 * up[i] * s.theta[i] / x2n + 2.0 * s.eta[i] / (u[i] * x2n) - beta_prev[i] / x;
            let src = bn / x2n * (s.mu[i] * up[i] + s.kappa[i] / u[i]) - cn * q[i] * x.powf(self.l + 1.0);
            let v = k1 * (gamma_prev[i] + (4.0 * nf - 1.0) * inner) + sign * (4.0 * nf + 1.0) * src;
            if !v.is_finite() {
                return Err(NsbfError::NumericalBreakdown { n, what: format!("gamma_n at x = {}", x) });
            }
            out[i] = v;
        }
        Ok(out)
    }
}

fn to_grid(mesh: UniformMesh, rows: Vec<Vec<f64>>) -> Result<Vec<GridFunction>> {
    rows.into_iter().map(|v| GridFunction::new(mesh, v)).collect()
}

/// `β₀..β_N` by the recurrent scheme, with the auxiliary integrals.
pub fn beta_recurrent(u0: &ParticularSolution, p: &Potential, n: usize) -> Result<(Vec<GridFunction>, Auxiliaries)> {
    let st = Stepper::new(u0, p);
    let mut beta = vec![st.beta0(u0)];
    let mut aux = Auxiliaries::default();
    for k in 1..=n {
        let s = st.integrals(k, &beta[k - 1])?;
        beta.push(st.beta(k, &beta[k - 1], &s)?);
        aux.steps.push(s);
    }
    Ok((to_grid(st.mesh, beta)?, aux))
}

/// `γ₀..γ_N` from the `β` and auxiliary integrals of [`beta_recurrent`].
pub fn gamma_recurrent(u0: &ParticularSolution, p: &Potential, beta: &[GridFunction], aux: &Auxiliaries, n: usize) -> Result<Vec<GridFunction>> {
    if beta.len() <= n || aux.steps.len() < n {
        return Err(NsbfError::Domain(format!("need beta and auxiliary integrals up to n = {n}")));
    }
    let st = Stepper::new(u0, p);
    let mut gamma = vec![st.gamma0(u0)];
    for k in 1..=n {
        let g = st.gamma(k, &gamma[k - 1], beta[k - 1].values(), &aux.steps[k - 1])?;
        gamma.push(g);
    }
    to_grid(st.mesh, gamma)
}

/// Single pass over `n` producing both families, residuals and the
/// truncation choice. Auxiliary integrals are dropped after each step.
pub fn compute_tables(u0: &ParticularSolution, p: &Potential, n: usize) -> Result<CoefficientTables> {
    let st = Stepper::new(u0, p);
    let mut beta = vec![st.beta0(u0)];
    let mut gamma = vec![st.gamma0(u0)];
    for k in 1..=n {
        let s = st.integrals(k, &beta[k - 1])?;
        let g = st.gamma(k, &gamma[k - 1], &beta[k - 1], &s)?;
        beta.push(st.beta(k, &beta[k - 1], &s)?);
        gamma.push(g);
    }
    let beta = to_grid(st.mesh, beta)?;
    let gamma = to_grid(st.mesh, gamma)?;
    Ok(assemble_tables(beta, gamma))
}

pub fn assemble_tables(beta: Vec<GridFunction>, gamma: Vec<GridFunction>) -> CoefficientTables {
    let n = beta.len() - 1;
    let b = beta[0].mesh().b();
    let partial = |c: &[GridFunction]| {
        let mut acc = 0.0;
        c.iter()
            .map(|g| {
                acc += g.last();
                (acc / b).abs()
            })
            .collect::<Vec<f64>>()
    };
    let beta_residual = partial(&beta);
    let gamma_residual = partial(&gamma);
    let truncation = select_truncation(&beta_residual, &gamma_residual);
    CoefficientTables { beta, gamma, n, beta_residual, gamma_residual, truncation }
}

/// Smallest `K` whose residual is within 10× of the global minimum and
/// whose window `[K, K+10]` is flat: the spread of `log10 r` over the
/// window is below 10% of `|log10(floor)|`. Returns `(K, floor, found)`.
///
/// A sequence whose minimum sits in the last window and which is still
/// falling there has not reached a floor yet; that counts as no plateau.
pub fn plateau_index(r: &[f64]) -> (usize, f64, bool) {
    assert!(!r.is_empty());
    let n = r.len() - 1;
    let lg: Vec<f64> = r.iter().map(|v| if v.is_nan() { f64::INFINITY } else { v.max(RESIDUAL_CLAMP).log10() }).collect();
    let (argmin, floor_log) = lg.iter().cloned().enumerate().fold((0, f64::INFINITY), |a, (i, v)| if v < a.1 { (i, v) } else { a });
    let floor = 10f64.powf(floor_log);
    if n >= PLATEAU_WINDOW && argmin > n - PLATEAU_WINDOW && lg[n - PLATEAU_WINDOW] - lg[n] > STILL_FALLING {
        return (n, floor, false);
    }
    let tol = 0.1 * floor_log.abs();
    let last_start = n.saturating_sub(PLATEAU_WINDOW);
    for k in 0..=last_start {
        if lg[k] > floor_log + 1.0 {
            continue;
        }
        let w = &lg[k..=(k + PLATEAU_WINDOW).min(n)];
        let hi = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = w.iter().cloned().fold(f64::INFINITY, f64::min);
        if hi - lo < tol {
            return (k, floor, true);
        }
    }
    (n, floor, false)
}

/// Truncation from both residual sequences. Each family gets its own
/// order; `n_opt` is the larger one, or `N` without a plateau.
pub fn select_truncation(beta_residual: &[f64], gamma_residual: &[f64]) -> Truncation {
    let (kb, fb, okb) = plateau_index(beta_residual);
    let (kg, fg, okg) = plateau_index(gamma_residual);
    let converged = okb && okg;
    let n = beta_residual.len() - 1;
    Truncation {
        n_opt: if converged { kb.max(kg) } else { n },
        n_opt_beta: kb,
        n_opt_gamma: kg,
        beta_floor: fb,
        gamma_floor: fg,
        converged,
    }
}

fn check_direct(phi: &PhiFamily, n: usize, x: f64) -> Result<()> {
    if n > DIRECT_FORMULA_MAX_N {
        return Err(NsbfError::Range(format!(
            "direct formula limited to n <= {DIRECT_FORMULA_MAX_N} (got {n}); use the recurrent path"
        )));
    }
    if n > phi.n() {
        return Err(NsbfError::Range(format!("phi family only built up to n = {}", phi.n())));
    }
    if !(x >= 0.0 && x <= phi.mesh().b()) {
        return Err(NsbfError::Domain(format!("x = {x} outside [0, {}]", phi.mesh().b())));
    }
    Ok(())
}

/// `β_n(x) = (4n+1) Σ_k l_{2k,2n} x^{−2k} (φ_k(x) − c_{k,l} x^{2k+l+1})`.
pub fn beta_direct(phi: &PhiFamily, n: usize, x: f64) -> Result<f64> {
    check_direct(phi, n, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let l = phi.l();
    let row = legendre_even_coeffs(n)?;
    let mesh = phi.mesh();
    let mut sum = 0.0;
    for k in 0..=n {
        let lk = row.coeffs[2 * k];
        let phik = mesh.interpolate(phi.phi[k].values(), x);
        sum += lk * (phik / x.powi(2 * k as i32) - c_kl(k, l) * x.powf(l + 1.0));
    }
    Ok((4 * n + 1) as f64 * sum)
}

/// `γ_n(x) = (4n+1) Σ_k l_{2k,2n} x^{−2k} (φ_k′ − c_{k,l}((2k+l+1)x^{2k+l} + Q x^{2k+l+1}/2))`.
pub fn gamma_direct(phi: &PhiFamily, p: &Potential, n: usize, x: f64) -> Result<f64> {
    check_direct(phi, n, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let l = phi.l();
    let row = legendre_even_coeffs(n)?;
    let mesh = phi.mesh();
    let q = mesh.interpolate(p.big_q().values(), x);
    let mut sum = 0.0;
    for k in 0..=n {
        let kf = k as f64;
        let lk = row.coeffs[2 * k];
        let dphi = mesh.interpolate(phi.phi_prime(k).values(), x);
        let free = (2.0 * kf + l + 1.0) * x.powf(l) + 0.5 * q * x.powf(l + 1.0);
        sum += lk * (dphi / x.powi(2 * k as i32) - c_kl(k, l) * free);
    }
    Ok((4 * n + 1) as f64 * sum)
}
