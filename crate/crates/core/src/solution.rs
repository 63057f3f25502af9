//! Evaluation of the truncated series `u_{l;N}(ω, x)` and its derivative.

use crate::coefficients::{compute_tables, CoefficientTables};
use crate::error::{NsbfError, Result};
use crate::potential::Potential;
use crate::special::{normalized_bessel_pair, spherical_j_into};
use crate::spps::{build_u0, ParticularSolution, DEFAULT_PICARD_MAX_ITER, DEFAULT_PICARD_TOL};

/// Immutable solution object; all evaluations are pure.
#[derive(Debug, Clone)]
pub struct NsbfSolution {
    tables: CoefficientTables,
    potential: Potential,
    u0: ParticularSolution,
    n_beta: usize,
    n_gamma: usize,
}

/// Mesh position of an evaluation point: a node index or an off-mesh `x`.
#[derive(Clone, Copy)]
enum At {
    Node(usize),
    Off(f64),
}

impl NsbfSolution {
    /// Same truncation `n_used` for the `β` and `γ` series.
    pub fn new(potential: Potential, u0: ParticularSolution, tables: CoefficientTables, n_used: usize) -> Result<Self> {
        Self::with_orders(potential, u0, tables, n_used, n_used)
    }

    pub fn with_orders(potential: Potential, u0: ParticularSolution, tables: CoefficientTables, n_beta: usize, n_gamma: usize) -> Result<Self> {
        let k = n_beta.max(n_gamma);
        if k > tables.n {
            return Err(NsbfError::Range(format!("truncation {k} exceeds the {} computed coefficients", tables.n)));
        }
        Ok(NsbfSolution { tables, potential, u0, n_beta, n_gamma })
    }

    /// Full pipeline with `N` coefficients. `u` sums `β_n` up to the `β`
    /// plateau and `u′` sums `γ_n` up to the `γ` plateau.
    pub fn build(potential: Potential, n: usize) -> Result<Self> {
        let u0 = build_u0(&potential, DEFAULT_PICARD_TOL, DEFAULT_PICARD_MAX_ITER)?;
        let tables = compute_tables(&u0, &potential, n)?;
        let t = tables.truncation;
        Self::with_orders(potential, u0, tables, t.n_opt_beta, t.n_opt_gamma)
    }

    pub fn with_truncation(&self, n_used: usize) -> Result<Self> {
        Self::new(self.potential.clone(), self.u0.clone(), self.tables.clone(), n_used)
    }

    pub fn tables(&self) -> &CoefficientTables {
        &self.tables
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn particular(&self) -> &ParticularSolution {
        &self.u0
    }

    /// Largest order used by either series.
    pub fn n_used(&self) -> usize {
        self.n_beta.max(self.n_gamma)
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.n_beta, self.n_gamma)
    }

    pub fn l(&self) -> f64 {
        self.potential.l()
    }

    pub fn b(&self) -> f64 {
        self.potential.mesh().b()
    }

    fn locate(&self, omega: f64, x: f64) -> Result<At> {
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(NsbfError::Domain(format!("omega = {omega} must be finite and >= 0")));
        }
        let mesh = self.potential.mesh();
        if !(x >= 0.0 && x <= mesh.b()) {
            return Err(NsbfError::Domain(format!("x = {x} outside [0, {}]", mesh.b())));
        }
        Ok(match mesh.node_index(x) {
            Some(i) => At::Node(i),
            None => At::Off(x),
        })
    }

    fn sample(&self, values: &[f64], at: At) -> f64 {
        match at {
            At::Node(i) => values[i],
            At::Off(x) => self.potential.mesh().interpolate(values, x),
        }
    }

    /// `(u, u′)` sharing one Bessel evaluation.
    pub fn eval_pair(&self, omega: f64, x: f64) -> Result<(f64, f64)> {
        let at = self.locate(omega, x)?;
        let l = self.l();
        let nu = l + 0.5;
        let z = omega * x;
        // d(ω) b_l(ωx) = x^{l+1} Λ_ν(ωx)
        let (lam0, lam1) = normalized_bessel_pair(nu, z);
        let xl1 = x.powf(l + 1.0);
        let big_q = if x == 0.0 { 0.0 } else { self.sample(self.potential.big_q().values(), at) };
        let mut u = xl1 * lam0;
        let lead_d = if x == 0.0 {
            if l == 0.0 { 1.0 } else { (l + 1.0) * x.powf(l) }
        } else {
            x.powf(l) * ((l + 1.0) * lam0 - z * z / (2.0 * (nu + 1.0)) * lam1)
        };
        let mut up = lead_d + 0.5 * big_q * xl1 * lam0;
        let n = self.n_used();
        let mut j = vec![0.0; 2 * n + 1];
        spherical_j_into(z, &mut j)?;
        for k in 0..=n {
            let s = if k % 2 == 0 { j[2 * k] } else { -j[2 * k] };
            if s == 0.0 {
                continue;
            }
            if k <= self.n_beta {
                u += s * self.sample(self.tables.beta[k].values(), at);
            }
            if k <= self.n_gamma {
                up += s * self.sample(self.tables.gamma[k].values(), at);
            }
        }
        if !(u.is_finite() && up.is_finite()) {
            return Err(NsbfError::Evaluation { omega });
        }
        Ok((u, up))
    }

    pub fn eval_u(&self, omega: f64, x: f64) -> Result<f64> {
        self.eval_pair(omega, x).map(|p| p.0)
    }

    pub fn eval_u_prime(&self, omega: f64, x: f64) -> Result<f64> {
        self.eval_pair(omega, x).map(|p| p.1)
    }

    /// `(|Σ_{n≤N} β_n(x)/x|, |Σ_{n≤N} γ_n(x)/x|)` at the applied truncation.
    pub fn error_indicator(&self, x: f64) -> (f64, f64) {
        if !(x > 0.0 && x <= self.b()) {
            return (0.0, 0.0);
        }
        let (eb, _) = self.tables.diagonal_residual(self.n_beta, x);
        let (_, eg) = self.tables.diagonal_residual(self.n_gamma, x);
        (eb, eg)
    }
}
