//! Eigenvalues of the boundary-value problem at `x = b` via sign changes of
//! a regularized characteristic function, and power-law decay fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NsbfError, Result};
use crate::solution::NsbfSolution;

/// Default scan density in samples per unit `ω`.
pub const DEFAULT_SCAN_DENSITY: f64 = 20.0;

const REFINE_REL_WIDTH: f64 = 1e-13;
const MERGE_DISTANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "h", rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet,
    Neumann,
    /// `u′(b) + H u(b) = 0`.
    Robin(f64),
}

impl Boundary {
    pub fn apply(self, u: f64, up: f64) -> f64 {
        match self {
            Boundary::Dirichlet => u,
            Boundary::Neumann => up,
            Boundary::Robin(h) => up + h * u,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralProblem {
    pub boundary: Boundary,
    pub omega_lo: f64,
    pub omega_hi: f64,
    pub scan_points: usize,
}

impl SpectralProblem {
    /// Window with the default scan density.
    pub fn new(boundary: Boundary, omega_lo: f64, omega_hi: f64) -> Result<Self> {
        let n = ((omega_hi - omega_lo) * DEFAULT_SCAN_DENSITY).ceil().max(2.0) as usize + 1;
        Self::with_scan_points(boundary, omega_lo, omega_hi, n)
    }

    pub fn with_scan_points(boundary: Boundary, omega_lo: f64, omega_hi: f64, scan_points: usize) -> Result<Self> {
        if !(omega_lo >= 0.0 && omega_hi > omega_lo && omega_hi.is_finite()) {
            return Err(NsbfError::Domain(format!("bad omega window [{omega_lo}, {omega_hi}]")));
        }
        if scan_points < 2 {
            return Err(NsbfError::Domain("need at least 2 scan points".into()));
        }
        if let Boundary::Robin(h) = boundary {
            if !h.is_finite() {
                return Err(NsbfError::Domain(format!("Robin coefficient {h} is not finite")));
            }
        }
        Ok(SpectralProblem { boundary, omega_lo, omega_hi, scan_points })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenpair {
    pub index: usize,
    pub omega: f64,
    pub char_residual: f64,
    pub refinement_width: f64,
}

/// `Φ(ω) = ω^{l+1} · BC(ω)`.
pub fn characteristic(s: &NsbfSolution, boundary: Boundary, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(NsbfError::Domain(format!("characteristic function needs omega > 0, got {omega}")));
    }
    let (u, up) = s.eval_pair(omega, s.b())?;
    let v = omega.powf(s.l() + 1.0) * boundary.apply(u, up);
    if !v.is_finite() {
        return Err(NsbfError::Evaluation { omega });
    }
    Ok(v)
}

/// Bisection to relative width `1e-13`, then one secant step inside the
/// final bracket. Returns `(ω, |Φ(ω)|, width)`.
fn refine(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> Result<(f64, f64, f64)> {
    for _ in 0..200 {
        if b - a <= REFINE_REL_WIDTH * b.abs().max(1e-300) {
            break;
        }
        let c = 0.5 * (a + b);
        if c <= a || c >= b {
            break;
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok((c, 0.0, b - a));
        }
        if (fc < 0.0) == (fa < 0.0) {
            a = c;
            fa = fc;
        } else {
            b = c;
            fb = fc;
        }
    }
    let mut w = if fb != fa { (a * fb - b * fa) / (fb - fa) } else { 0.5 * (a + b) };
    if !(w >= a && w <= b) {
        w = 0.5 * (a + b);
    }
    let fw = f(w)?;
    let best = [(w, fw.abs()), (a, fa.abs()), (b, fb.abs())]
        .into_iter()
        .fold((w, fw.abs()), |acc, t| if t.1 < acc.1 { t } else { acc });
    Ok((best.0, best.1, b - a))
}

/// Scans `Φ` on the window, refines every sign change and returns the
/// sorted, deduplicated roots.
pub fn find_eigenvalues(s: &NsbfSolution, prob: &SpectralProblem) -> Result<Vec<Eigenpair>> {
    let f = |w: f64| characteristic(s, prob.boundary, w);
    let n = prob.scan_points - 1;
    let span = prob.omega_hi - prob.omega_lo;
    // ω = 0 is excluded; the window's left end is nudged inward.
    let grid: Vec<f64> = (0..=n)
        .map(|i| prob.omega_lo + span * i as f64 / n as f64)
        .map(|w| if w == 0.0 { 1e-3 * span / n as f64 } else { w })
        .collect();
    let vals: Vec<f64> = grid.par_iter().map(|&w| f(w)).collect::<Result<_>>()?;
    let brackets: Vec<usize> = (0..n)
        .filter(|&i| vals[i] != 0.0 && ((vals[i] < 0.0) != (vals[i + 1] < 0.0) || vals[i + 1] == 0.0))
        .collect();
    let mut roots: Vec<(f64, f64, f64)> = brackets
        .par_iter()
        .map(|&i| {
            if vals[i + 1] == 0.0 {
                return Ok((grid[i + 1], 0.0, 0.0));
            }
            refine(&f, grid[i], grid[i + 1], vals[i], vals[i + 1])
        })
        .collect::<Result<_>>()?;
    if vals[0] == 0.0 {
        roots.push((grid[0], 0.0, 0.0));
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<Eigenpair> = Vec::with_capacity(roots.len());
    for (omega, res, width) in roots {
        if let Some(last) = out.last() {
            if (omega - last.omega).abs() < MERGE_DISTANCE {
                continue;
            }
        }
        out.push(Eigenpair { index: out.len() + 1, omega, char_residual: res, refinement_width: width });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Slope of `log|c_n|` against `log n`.
    pub exponent: f64,
    pub intercept: f64,
    pub floor: f64,
    pub used_points: usize,
    pub excluded_points: usize,
}

pub const MIN_FIT_POINTS: usize = 10;

/// Level below which the tail of `a` is treated as noise: the median of
/// its last quarter when the tail has flattened out, otherwise 0.
fn detect_floor(a: &[f64]) -> f64 {
    let k = (a.len() / 4).max(3).min(a.len());
    let mut tail: Vec<f64> = a[a.len() - k..].to_vec();
    tail.sort_by(|x, y| x.total_cmp(y));
    let median = tail[k / 2];
    if median <= 0.0 {
        return 0.0;
    }
    // A genuine power law still drops over the tail; a floor does not.
    let n0 = (a.len() - k) as f64;
    let n1 = a.len() as f64;
    let first = a[a.len() - k];
    let last = a[a.len() - 1];
    let slope = if first > 0.0 && last > 0.0 { (last.ln() - first.ln()) / (n1.ln() - (n0 + 1.0).ln()).max(1e-300) } else { 0.0 };
    let head_max = a.iter().cloned().fold(0.0, f64::max);
    if slope.abs() < 1.0 && median < 1e-3 * head_max {
        median
    } else {
        0.0
    }
}

/// Least-squares fit of `log|c_n| ≈ r log n + c` over `n ∈ [n_lo, n_hi]`,
/// `values[i] = c_{n_lo+i}`. Entries below 10× the detected floor are
/// dropped.
pub fn decay_fit(values: &[f64], n_lo: usize) -> Result<DecayFit> {
    if n_lo == 0 {
        return Err(NsbfError::Domain("decay fit needs n >= 1 (log n)".into()));
    }
    let a: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let floor = detect_floor(&a);
    let pts: Vec<(f64, f64)> = a
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0 && v.is_finite() && v > 10.0 * floor)
        .map(|(i, &v)| (((n_lo + i) as f64).ln(), v.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(NsbfError::InsufficientData { usable: pts.len(), required: MIN_FIT_POINTS });
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let exponent = sxy / sxx;
    Ok(DecayFit { exponent, intercept: my - exponent * mx, floor, used_points: pts.len(), excluded_points: a.len() - pts.len() })
}
