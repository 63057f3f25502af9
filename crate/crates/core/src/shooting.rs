//! Reference solutions by adaptive high-order shooting from a point near
//! the origin. Independent of the series machinery; used to check it.

use ode_solvers::dop_shared::OutputType;
use ode_solvers::{Dop853, System, Vector3};

use crate::error::{NsbfError, Result};
use crate::potential::PotentialSpec;
use crate::spectral::Boundary;

#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    /// Starting point; `u = x₀^{l+1}`, `u′ = (l+1)x₀^l` there.
    pub x0: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: u32,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions { x0: 1e-6, rtol: 1e-13, atol: 1e-30, max_steps: 2_000_000 }
    }
}

/// `u″ = (l(l+1)/x² + q − ω²) u`, with `x` carried as a third state
/// component: ode_solvers 0.4.0 has `c₁₂ = c₁₃ = 0` in its DOP853 tableau,
/// which breaks step control for right-hand sides that depend on `x`.
struct Radial<'a> {
    spec: &'a PotentialSpec,
    l: f64,
    omega_sq: f64,
}

impl System<f64, Vector3<f64>> for Radial<'_> {
    fn system(&self, _: f64, y: &Vector3<f64>, dy: &mut Vector3<f64>) {
        let x = y[2];
        let q = self.spec.eval(x).unwrap_or(f64::NAN);
        dy[0] = y[1];
        dy[1] = (self.l * (self.l + 1.0) / (x * x) + q - self.omega_sq) * y[0];
        dy[2] = 1.0;
    }
}

fn breakpoints(spec: &PotentialSpec) -> Vec<f64> {
    match spec {
        PotentialSpec::Decay1(_) | PotentialSpec::Decay2(_) => vec![0.5 * std::f64::consts::PI],
        _ => Vec::new(),
    }
}

/// `(u(ω, x), u′(ω, x))` of the regular solution normalized by `u ~ x^{l+1}`.
pub fn shoot(spec: &PotentialSpec, l: f64, omega: f64, x: f64, opts: &ShootingOptions) -> Result<(f64, f64)> {
    if matches!(spec, PotentialSpec::Csv(_)) {
        return Err(NsbfError::Config("the shooting reference needs an analytic potential".into()));
    }
    if !(x > opts.x0) {
        return Err(NsbfError::Domain(format!("shooting target x = {x} must exceed x0 = {}", opts.x0)));
    }
    let sys = || Radial { spec, l, omega_sq: omega * omega };
    // The system is linear, so it is integrated in units of x0^{l+1}.
    let mut y = Vector3::new(1.0, (l + 1.0) / opts.x0, opts.x0);
    let mut start = opts.x0;
    let mut stops: Vec<f64> = breakpoints(spec).into_iter().filter(|&b| b > start && b < x).collect();
    stops.push(x);
    for end in stops {
        let mut solver = Dop853::from_param(
            sys(),
            start,
            end,
            end - start,
            y,
            opts.rtol,
            opts.atol,
            0.9,
            0.0,
            0.333,
            6.0,
            end - start,
            0.0,
            opts.max_steps,
            // the l(l+1)/x² term near x0 trips the stiffness heuristic; it is harmless here
            u32::MAX,
            OutputType::Sparse,
        );
        solver
            .integrate()
            .map_err(|e| NsbfError::NumericalBreakdown { n: 0, what: format!("shooting integrator: {e:?}") })?;
        let (_, ys) = solver.results().get();
        y = *ys.last().ok_or(NsbfError::Evaluation { omega })?;
        y[2] = end;
        start = end;
    }
    let scale = opts.x0.powf(l + 1.0);
    let (u, up) = (scale * y[0], scale * y[1]);
    if !(u.is_finite() && up.is_finite()) {
        return Err(NsbfError::Evaluation { omega });
    }
    Ok((u, up))
}

/// Boundary expression at `x = b` from the shooting solution.
pub fn shoot_boundary(spec: &PotentialSpec, l: f64, b: f64, boundary: Boundary, omega: f64, opts: &ShootingOptions) -> Result<f64> {
    let (u, up) = shoot(spec, l, omega, b, opts)?;
    Ok(match boundary {
        Boundary::Dirichlet => u,
        Boundary::Neumann => up,
        Boundary::Robin(h) => up + h * u,
    })
}

/// Eigenvalues in `[lo, hi]` from the shooting solution: a uniform scan
/// followed by Illinois regula falsi on each sign change.
pub fn shooting_eigenvalues(
    spec: &PotentialSpec,
    l: f64,
    b: f64,
    boundary: Boundary,
    lo: f64,
    hi: f64,
    samples_per_unit: f64,
    opts: &ShootingOptions,
) -> Result<Vec<f64>> {
    let f = |w: f64| shoot_boundary(spec, l, b, boundary, w, opts);
    let n = ((hi - lo) * samples_per_unit).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).map(|w| w.max(1e-8)).collect();
    let vals = grid.iter().map(|&w| f(w)).collect::<Result<Vec<_>>>()?;
    let mut roots = Vec::new();
    for i in 0..n {
        let (mut a, mut b_) = (grid[i], grid[i + 1]);
        let (mut fa, mut fb) = (vals[i], vals[i + 1]);
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb > 0.0 {
            continue;
        }
        for _ in 0..200 {
            if (b_ - a).abs() <= 1e-14 * b_.abs() {
                break;
            }
            let c = (a * fb - b_ * fa) / (fb - fa);
            let fc = f(c)?;
            if fc == 0.0 {
                a = c;
                b_ = c;
                break;
            }
            if fc * fb < 0.0 {
                a = b_;
                fa = fb;
            } else {
                fa *= 0.5;
            }
            b_ = c;
            fb = fc;
        }
        roots.push(0.5 * (a + b_));
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_solution_closed_form() {
        // l = 0, q = 0: u = sin(ωx)/ω; the start at x₀ costs O(ω² x₀²) in u′
        let opts = ShootingOptions::default();
        for &w in &[0.5, 2.0, 7.5] {
            let (u, up) = shoot(&PotentialSpec::Zero, 0.0, w, 2.0, &opts).unwrap();
            assert!((u - (2.0 * w).sin() / w).abs() < 1e-11);
            assert!((up - (2.0 * w).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn free_dirichlet_spectrum() {
        let opts = ShootingOptions::default();
        let r = shooting_eigenvalues(&PotentialSpec::Zero, 0.0, PI, Boundary::Dirichlet, 0.5, 4.5, 10.0, &opts).unwrap();
        assert_eq!(r.len(), 4);
        for (k, w) in r.iter().enumerate() {
            assert!((w - (k + 1) as f64).abs() < 1e-10, "{w}");
        }
    }

    #[test]
    fn first_eigenvalue_of_square_potential() {
        let opts = ShootingOptions::default();
        let r = shooting_eigenvalues(&PotentialSpec::Square, 1.5, PI, Boundary::Dirichlet, 2.0, 3.0, 20.0, &opts).unwrap();
        assert!((r[0] - 2.46294997397397).abs() < 1e-10, "{}", r[0]);
    }

    #[test]
    fn rejects_tabulated_potential() {
        let spec = PotentialSpec::Csv("q.csv".into());
        assert!(shoot(&spec, 0.0, 1.0, 1.0, &ShootingOptions::default()).is_err());
    }
}
