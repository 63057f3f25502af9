//! Uniform sample grids and the cumulative quadrature used by every
//! recursive-integral formula in the crate.
//!
//! Integration works panel by panel: six consecutive samples are
//! interpolated by a quintic and the exact antiderivative of that quintic
//! supplies the five increments inside the panel. Panels share their end
//! points, so the mesh size must satisfy `m ≡ 1 (mod 5)`.

use crate::error::{NsbfError, Result};

/// Default slack factor `T` of the fifth-difference cut-off rule.
pub const DEFAULT_CUTOFF_SLACK: f64 = 100.0;

/// Default number of mesh points.
pub const DEFAULT_MESH_POINTS: usize = 20001;

/// Panel weights: `CUMULATIVE_WEIGHTS[j]` integrates the interpolating
/// quintic through nodes 0..=5 (unit spacing) from 0 to `j + 1`. Each row is
/// `(numerators, denominator)`.
const CUMULATIVE_WEIGHTS: [([f64; 6], f64); 5] = [
    ([475.0, 1427.0, -798.0, 482.0, -173.0, 27.0], 1440.0),
    ([28.0, 129.0, 14.0, 14.0, -6.0, 1.0], 90.0),
    ([51.0, 219.0, 114.0, 114.0, -21.0, 3.0], 160.0),
    ([14.0, 64.0, 24.0, 64.0, 14.0, 0.0], 45.0),
    ([95.0, 375.0, 250.0, 250.0, 375.0, 95.0], 288.0),
];

/// Equispaced grid `x_i = i·h`, `i = 0..m`, on `[0, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformMesh {
    b: f64,
    m: usize,
    h: f64,
}

impl UniformMesh {
    /// Builds a mesh with exactly `m` points. `m` must be at least 6 and
    /// congruent to 1 modulo 5.
    pub fn new(b: f64, m: usize) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(NsbfError::InvalidMesh(format!("right endpoint must be positive and finite, got {b}")));
        }
        check_point_count(m)?;
        let h = b / (m - 1) as f64;
        if !(h.is_finite() && h > 0.0) {
            return Err(NsbfError::InvalidMesh(format!("step {h} is not a positive finite number")));
        }
        Ok(Self { b, m, h })
    }

    /// Builds a mesh with at least `requested` points, rounding up to the
    /// next admissible count.
    pub fn with_min_points(b: f64, requested: usize) -> Result<Self> {
        Self::new(b, admissible_point_count(requested))
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    /// The i-th node. The last node is `b` exactly.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.m {
            self.b
        } else {
            i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.x(i)).collect()
    }

    /// Index of the node closest to `x` (clamped to the mesh).
    pub fn nearest_index(&self, x: f64) -> usize {
        let r = (x / self.h).round();
        if r <= 0.0 {
            0
        } else {
            (r as usize).min(self.m - 1)
        }
    }

    /// Returns `Some(i)` when `x` coincides with node `i` up to a few ulps.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let i = self.nearest_index(x);
        let xi = self.x(i);
        if (xi - x).abs() <= 4.0 * f64::EPSILON * self.b.max(1.0) {
            Some(i)
        } else {
            None
        }
    }

    /// Quintic Lagrange interpolation of mesh samples at an arbitrary
    /// `x ∈ [0, b]`, using the six nodes around `x`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        debug_assert_eq!(values.len(), self.m);
        if let Some(i) = self.node_index(x) {
            return values[i];
        }
        let s = x / self.h;
        let start = ((s.floor() as isize) - 2).clamp(0, self.m as isize - 6) as usize;
        let t = s - start as f64;
        let mut acc = 0.0;
        for i in 0..6 {
            let mut w = 1.0;
            for k in 0..6 {
                if k != i {
                    w *= (t - k as f64) / (i as f64 - k as f64);
                }
            }
            acc += w * values[start + i];
        }
        acc
    }
}

fn check_point_count(m: usize) -> Result<()> {
    if m < 6 {
        return Err(NsbfError::InvalidMesh(format!("need at least 6 points, got {m}")));
    }
    if m % 5 != 1 {
        return Err(NsbfError::InvalidMesh(format!(
            "point count {m} does not tile into 6-point panels (m mod 5 must be 1)"
        )));
    }
    Ok(())
}

/// Smallest admissible point count (`≥ 6`, `≡ 1 mod 5`) not below `requested`.
pub fn admissible_point_count(requested: usize) -> usize {
    let m = requested.max(6);
    let r = m % 5;
    if r == 1 {
        m
    } else {
        m + (6 - r) % 5
    }
}

/// Real samples on a [`UniformMesh`]. All samples are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    mesh: UniformMesh,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(mesh: UniformMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(NsbfError::InvalidMesh(format!(
                "grid function has {} samples, mesh has {} points",
                values.len(),
                mesh.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(NsbfError::NonFinite { index, context: "grid function sample".into() });
        }
        Ok(Self { mesh, values })
    }

    pub fn from_fn(mesh: UniformMesh, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(mesh, (0..mesh.len()).map(|i| f(mesh.x(i))).collect())
    }

    pub fn zeros(mesh: UniformMesh) -> Self {
        Self { mesh, values: vec![0.0; mesh.len()] }
    }

    pub fn mesh(&self) -> &UniformMesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at the right endpoint `b`.
    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Value at an arbitrary point of `[0, b]` (quintic interpolation off the mesh).
    pub fn at(&self, x: f64) -> f64 {
        self.mesh.interpolate(&self.values, x)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Cumulative integral of raw samples with step `h`: `F[0] = 0` and
/// `F[i] ≈ ∫₀^{x_i} f`. Non-finite samples propagate into the output.
pub fn integrate_cumulative(values: &[f64], h: f64) -> Result<Vec<f64>> {
    check_point_count(values.len())?;
    let m = values.len();
    let mut out = vec![0.0; m];
    // Panel totals are accumulated with Neumaier compensation; the running
    // sum otherwise loses about m/5 ulps by the end of the mesh.
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut p = 0;
    while p + 5 < m {
        let y = &values[p..p + 6];
        let base = sum + comp;
        for (j, (num, den)) in CUMULATIVE_WEIGHTS.iter().enumerate() {
            let s: f64 = num.iter().zip(y).map(|(w, v)| w * v).sum();
            out[p + j + 1] = base + h * s / den;
        }
        let inc = {
            let (num, den) = &CUMULATIVE_WEIGHTS[4];
            h * num.iter().zip(y).map(|(w, v)| w * v).sum::<f64>() / den
        };
        let t = sum + inc;
        comp += if sum.abs() >= inc.abs() { (sum - t) + inc } else { (inc - t) + sum };
        sum = t;
        p += 5;
    }
    Ok(out)
}

/// Fifth difference `y₀ − 5y₁ + 10y₂ − 10y₃ + 5y₄ − y₅`.
#[inline]
fn fifth_difference(y: &[f64]) -> f64 {
    y[0] - 5.0 * y[1] + 10.0 * y[2] - 10.0 * y[3] + 5.0 * y[4] - y[5]
}

#[inline]
fn second_smallest_abs(y: &[f64]) -> f64 {
    let (mut a, mut b) = (f64::INFINITY, f64::INFINITY);
    for v in y {
        let v = v.abs();
        if v < a {
            b = a;
            a = v;
        } else if v < b {
            b = v;
        }
    }
    b
}

/// Index of the first 6-tuple whose fifth difference is at most `slack`
/// times the second-smallest absolute value in the tuple. Tuples containing
/// non-finite values never pass. Returns `m − 6` when nothing passes.
pub fn cutoff_start_index_raw(values: &[f64], slack: f64) -> usize {
    if values.len() < 6 {
        return 0;
    }
    let last = values.len() - 6;
    for i in 0..=last {
        let y = &values[i..i + 6];
        let d = fifth_difference(y).abs();
        // NaN compares false and is rejected here.
        if d <= slack * second_smallest_abs(y) {
            return i;
        }
    }
    last
}

/// Zeroes the samples before the cut-off index and integrates the rest.
pub fn integrate_cumulative_guarded(values: &[f64], h: f64, slack: f64) -> Result<Vec<f64>> {
    check_point_count(values.len())?;
    let start = cutoff_start_index_raw(values, slack);
    if start == 0 {
        return integrate_cumulative(values, h);
    }
    let mut trimmed = values.to_vec();
    trimmed[..start].iter_mut().for_each(|v| *v = 0.0);
    integrate_cumulative(&trimmed, h)
}

/// Cumulative integral of `f(t) = t^a g(t)` with `g` smooth and `a > −1`.
/// The first panel uses product weights, exact when `g` is a quintic
/// (interpolated on nodes 1..=6, so `f(0)` is never read); the remaining
/// panels use the ordinary rule. Polynomial weights alone leave an
/// `O(h^{a+1})` error there that later divisions by `u₀²` amplify.
pub fn integrate_cumulative_power(values: &[f64], h: f64, a: f64) -> Result<Vec<f64>> {
    check_point_count(values.len())?;
    if !(a > -1.0) {
        return Err(NsbfError::Domain(format!("leading power {a} must exceed -1")));
    }
    let m = values.len();
    let mut out = integrate_cumulative(values, h)?;
    if m < 7 {
        return Ok(out);
    }
    // Samples scaled by i^a, so g carries the factor h^a.
    let g = |i: usize| values[i] / (i as f64).powf(a);
    let first = first_panel_power(&[g(1), g(2), g(3), g(4), g(5), g(6)], a);
    let mut fixed = vec![0.0; m];
    for (j, v) in first.iter().enumerate() {
        fixed[j + 1] = h * v;
    }
    // The plain rule's relative error on a panel at node p is about
    // (a/p)^6 · 1e-3; past p ≈ 150a it is below rounding.
    let p_max = ((150.0 * a.max(0.0)).ceil() as usize).min(m - 1);
    let mut p = 5;
    while p + 5 < m && p < p_max {
        let gp = [g(p), g(p + 1), g(p + 2), g(p + 3), g(p + 4), g(p + 5)];
        for j in 0..5 {
            let mut acc = 0.0;
            for (t, w) in gauss_legendre_10() {
                let sigma = j as f64 + 0.5 * (t + 1.0);
                acc += 0.5 * w * (p as f64 + sigma).powf(a) * lagrange5(&gp, sigma);
            }
            fixed[p + j + 1] = fixed[p + j] + h * acc;
        }
        p += 5;
    }
    let shift = fixed[p] - out[p];
    out[..=p].copy_from_slice(&fixed[..=p]);
    out[p + 1..].iter_mut().for_each(|v| *v += shift);
    Ok(out)
}

/// Quintic through `(k, y[k])`, `k = 0..=5`, evaluated at `s`.
fn lagrange5(y: &[f64; 6], s: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..6 {
        let mut w = 1.0;
        for k in 0..6 {
            if k != i {
                w *= (s - k as f64) / (i as f64 - k as f64);
            }
        }
        acc += w * y[i];
    }
    acc
}

/// 10-point Gauss–Legendre nodes and weights on `[−1, 1]`.
fn gauss_legendre_10() -> &'static [(f64, f64); 10] {
    static RULE: std::sync::OnceLock<[(f64, f64); 10]> = std::sync::OnceLock::new();
    RULE.get_or_init(|| {
        let n = 10;
        let mut rule = [(0.0, 0.0); 10];
        for (i, r) in rule.iter_mut().enumerate() {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *r = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule
    })
}

/// `∫₀^j s^a L(s) ds` for `j = 1..=5`, `L` the quintic through `(k, g[k−1])`,
/// `k = 1..=6`.
fn first_panel_power(g: &[f64], a: f64) -> [f64; 5] {
    let mut poly = [0.0; 6];
    for i in 0..6 {
        // ℓ_i(s) = Π_{k≠i} (s − k)/(i − k), nodes at 1..=6
        let mut c = [0.0; 6];
        c[0] = 1.0;
        let mut deg = 0;
        let mut den = 1.0;
        for k in 0..6 {
            if k == i {
                continue;
            }
            let node = (k + 1) as f64;
            for d in (0..=deg).rev() {
                c[d + 1] += c[d];
                c[d] *= -node;
            }
            deg += 1;
            den *= (i as f64) - (k as f64);
        }
        for d in 0..6 {
            poly[d] += g[i] * c[d] / den;
        }
    }
    let mut out = [0.0; 5];
    for (j, o) in out.iter_mut().enumerate() {
        let x = (j + 1) as f64;
        *o = poly.iter().enumerate().map(|(d, c)| c * x.powf(a + d as f64 + 1.0) / (a + d as f64 + 1.0)).sum();
    }
    out
}

/// [`integrate_cumulative_power`] behind the fifth-difference guard, the
/// screening applied to the scaled samples `f/t^a`. When the guard moves
/// the start past the origin the plain guarded rule is used.
pub fn integrate_cumulative_power_guarded(values: &[f64], h: f64, a: f64, slack: f64) -> Result<Vec<f64>> {
    check_point_count(values.len())?;
    let mut scaled: Vec<f64> = values.iter().enumerate().map(|(i, v)| if i == 0 { 0.0 } else { v / (i as f64).powf(a) }).collect();
    if scaled.len() >= 7 {
        // quintic extrapolation to the origin from nodes 1..=6
        scaled[0] = 6.0 * scaled[1] - 15.0 * scaled[2] + 20.0 * scaled[3] - 15.0 * scaled[4] + 6.0 * scaled[5] - scaled[6];
    }
    if cutoff_start_index_raw(&scaled, slack) == 0 {
        integrate_cumulative_power(values, h, a)
    } else {
        integrate_cumulative_guarded(values, h, slack)
    }
}

/// `F(x_i) ≈ ∫₀^{x_i} f`, exact for polynomials of degree ≤ 5.
pub fn cumulative_integral(f: &GridFunction) -> Result<GridFunction> {
    let values = integrate_cumulative(f.values(), f.mesh().step())?;
    Ok(GridFunction { mesh: *f.mesh(), values })
}

/// First index from which the fifth-difference screening accepts the data.
pub fn cutoff_start_index(f: &GridFunction, slack: f64) -> usize {
    cutoff_start_index_raw(f.values(), slack)
}

/// Cumulative integral that ignores samples before the cut-off index. Used
/// for integrands that carry a `1/u₀²` factor.
pub fn cumulative_integral_guarded(f: &GridFunction, slack: f64) -> Result<GridFunction> {
    let values = integrate_cumulative_guarded(f.values(), f.mesh().step(), slack)?;
    Ok(GridFunction { mesh: *f.mesh(), values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_rule_first_panel() {
        let m = 2001;
        let h = 1.0 / (m - 1) as f64;
        for &(a, deg) in &[(7.0, 3), (2.5, 5), (13.0, 0), (0.0, 2)] {
            let f: Vec<f64> = (0..m).map(|i| { let t = i as f64 * h; t.powf(a) * (1.0 + t).powi(deg) }).collect();
            let out = integrate_cumulative_power(&f, h, a).unwrap();
            for i in [1usize, 3, 5, 7, 100, m - 1] {
                let t = i as f64 * h;
                // ∫ t^a (1+t)^deg by the binomial expansion
                let exact: f64 = (0..=deg).map(|k| binom(deg, k) * t.powf(a + k as f64 + 1.0) / (a + k as f64 + 1.0)).sum();
                assert!((out[i] - exact).abs() <= 1e-12 * exact.abs(), "a={a} i={i}: {} vs {exact}", out[i]);
            }
        }
        assert!(integrate_cumulative_power(&[0.0; 11], 0.1, -1.0).is_err());
    }

    fn binom(n: i32, k: i32) -> f64 {
        (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
    }

    #[test]
    fn power_rule_beats_plain_rule_near_origin() {
        let m = 1001;
        let h = 1.0 / (m - 1) as f64;
        let f: Vec<f64> = (0..m).map(|i| (i as f64 * h).powi(9)).collect();
        let plain = integrate_cumulative(&f, h).unwrap();
        let power = integrate_cumulative_power_guarded(&f, h, 9.0, DEFAULT_CUTOFF_SLACK).unwrap();
        let exact = |t: f64| t.powi(10) / 10.0;
        let e_plain = (plain[2] - exact(2.0 * h)).abs() / exact(2.0 * h);
        let e_power = (power[2] - exact(2.0 * h)).abs() / exact(2.0 * h);
        assert!(e_plain > 1e-3 && e_power < 1e-12, "{e_plain} {e_power}");
    }
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn admissible_counts_round_up() {
        assert_eq!(admissible_point_count(0), 6);
        assert_eq!(admissible_point_count(6), 6);
        assert_eq!(admissible_point_count(7), 11);
        assert_eq!(admissible_point_count(20000), 20001);
        assert_eq!(admissible_point_count(20001), 20001);
        for m in 6..200 {
            let a = admissible_point_count(m);
            assert!(a >= m && a % 5 == 1 && a - m < 5);
        }
    }

    #[test]
    fn mesh_rejects_bad_sizes() {
        assert!(matches!(UniformMesh::new(1.0, 5), Err(NsbfError::InvalidMesh(_))));
        assert!(matches!(UniformMesh::new(1.0, 12), Err(NsbfError::InvalidMesh(_))));
        assert!(matches!(UniformMesh::new(-1.0, 11), Err(NsbfError::InvalidMesh(_))));
        assert!(matches!(UniformMesh::new(f64::NAN, 11), Err(NsbfError::InvalidMesh(_))));
        assert!(matches!(integrate_cumulative(&[0.0; 7], 0.1), Err(NsbfError::InvalidMesh(_))));
    }

    #[test]
    fn mesh_nodes() {
        let mesh = UniformMesh::new(PI, 5001).unwrap();
        assert_eq!(mesh.x(0), 0.0);
        assert_eq!(mesh.x(5000), PI);
        assert!((mesh.x(4999) + mesh.step() - PI).abs() < 1e-15);
    }

    #[test]
    fn grid_function_rejects_non_finite() {
        let mesh = UniformMesh::new(1.0, 6).unwrap();
        let err = GridFunction::new(mesh, vec![0.0, 1.0, f64::NAN, 0.0, 0.0, 0.0]).unwrap_err();
        assert_eq!(err, NsbfError::NonFinite { index: 2, context: "grid function sample".into() });
        assert!(GridFunction::new(mesh, vec![0.0; 5]).is_err());
    }

    #[test]
    fn zero_integrand() {
        let mesh = UniformMesh::new(PI, 101).unwrap();
        let f = GridFunction::zeros(mesh);
        assert!(cumulative_integral(&f).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(cumulative_integral_guarded(&f, DEFAULT_CUTOFF_SLACK).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn quartic_is_exact() {
        let mesh = UniformMesh::new(1.0, 5001).unwrap();
        let f = GridFunction::from_fn(mesh, |x| 5.0 * x.powi(4)).unwrap();
        let big_f = cumulative_integral(&f).unwrap();
        assert_relative_eq!(big_f.last(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn sine_on_half_period() {
        let mesh = UniformMesh::new(PI, 5001).unwrap();
        let f = GridFunction::from_fn(mesh, f64::sin).unwrap();
        let big_f = cumulative_integral(&f).unwrap();
        assert!((big_f.last() - 2.0).abs() < 1e-12);
        for i in (0..mesh.len()).step_by(37) {
            assert!((big_f.values()[i] - (1.0 - mesh.x(i).cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn sixth_order_on_coarse_meshes() {
        // fine meshes hit round-off before the h^6 term shows
        let err = |m: usize| {
            let mesh = UniformMesh::new(PI, m).unwrap();
            let f: Vec<f64> = mesh.nodes().iter().map(|x| x.cos()).collect();
            let i = integrate_cumulative(&f, mesh.step()).unwrap();
            mesh.nodes().iter().zip(&i).map(|(x, v)| (v - x.sin()).abs()).fold(0.0, f64::max)
        };
        for (a, b) in [(11, 21), (21, 41), (41, 81)] {
            let r = err(a) / err(b);
            assert!(r > 50.0 && r < 80.0, "m = {a} -> {b}: ratio {r}");
        }
    }

    #[test]
    fn monomials_exact_to_rounding() {
        let eps = f64::EPSILON;
        for m in [6, 11, 101, 1001] {
            let mesh = UniformMesh::new(1.7, m).unwrap();
            for k in 0..=5 {
                let f = GridFunction::from_fn(mesh, |x| x.powi(k)).unwrap();
                let big_f = cumulative_integral(&f).unwrap();
                for i in 0..m {
                    let x = mesh.x(i);
                    let exact = x.powi(k + 1) / (k + 1) as f64;
                    let err = (big_f.values()[i] - exact).abs();
                    assert!(err <= 50.0 * eps * x.powi(k + 1) + 50.0 * eps, "k={k} m={m} i={i} err={err:e}");
                }
            }
        }
    }

    #[test]
    fn constant_and_polynomial_cutoff_is_zero() {
        let mesh = UniformMesh::new(2.0, 101).unwrap();
        let c = GridFunction::from_fn(mesh, |_| 1.0).unwrap();
        assert_eq!(cutoff_start_index(&c, DEFAULT_CUTOFF_SLACK), 0);
        let p = GridFunction::from_fn(mesh, |x| 1.0 + 2.0 * x - x.powi(3) + 0.5 * x.powi(5)).unwrap();
        assert_eq!(cutoff_start_index(&p, DEFAULT_CUTOFF_SLACK), 0);
    }

    #[test]
    fn all_zero_tuple_passes() {
        assert_eq!(cutoff_start_index_raw(&[0.0; 11], DEFAULT_CUTOFF_SLACK), 0);
    }

    #[test]
    fn nothing_passes_returns_last_tuple() {
        let v: Vec<f64> = (0..11).map(|i| if i % 2 == 0 { 1.0e6 } else { -1.0e6 }).collect();
        assert_eq!(cutoff_start_index_raw(&v, 1.0), 5);
    }

    /// Inverse square root with the first ten samples replaced by
    /// pseudo-random noise of size up to 1e6 (deterministic LCG). Magnitudes
    /// are spread over six decades with random signs, like rounding blow-up.
    fn corrupted_inverse_sqrt(mesh: &UniformMesh) -> (Vec<f64>, Vec<f64>) {
        let clean: Vec<f64> = (0..mesh.len()).map(|i| if i == 0 { 0.0 } else { mesh.x(i).powf(-0.5) }).collect();
        let mut corrupted = clean.clone();
        let mut state: u64 = 0x2545_f491_4f6c_dd1d;
        for v in corrupted.iter_mut().take(10) {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            let sign = if state & 1 == 0 { 1.0 } else { -1.0 };
            *v = 1.0e6 * sign * 10f64.powf(-6.0 * u);
        }
        (clean, corrupted)
    }

    #[test]
    fn cutoff_skips_corrupted_prefix() {
        let mesh = UniformMesh::new(1.0, 1001).unwrap();
        let (_, corrupted) = corrupted_inverse_sqrt(&mesh);
        let idx = cutoff_start_index_raw(&corrupted, DEFAULT_CUTOFF_SLACK);
        assert!(idx >= 10, "cut-off index {idx}");
    }

    #[test]
    fn guarded_integral_suppresses_corruption() {
        let mesh = UniformMesh::new(1.0, 1001).unwrap();
        let (clean, corrupted) = corrupted_inverse_sqrt(&mesh);
        let h = mesh.step();
        let idx = cutoff_start_index_raw(&corrupted, DEFAULT_CUTOFF_SLACK);
        let guarded = integrate_cumulative_guarded(&corrupted, h, DEFAULT_CUTOFF_SLACK).unwrap();
        let reference = integrate_cumulative(&clean, h).unwrap();
        assert!(guarded.iter().all(|v| v.is_finite()));
        // The only discrepancy is the dropped integral over [0, x_idx] plus
        // the panel straddling the cut, bounded by ∫₀^{x_{idx+5}} t^{-1/2}.
        let bound = 2.0 * mesh.x(idx + 5).sqrt();
        for (g, r) in guarded.iter().zip(&reference) {
            assert!((g - r).abs() <= bound, "{g} vs {r}");
        }
        // Monotone: the clean tail is positive.
        for w in guarded[idx + 5..].windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn guarded_equals_plain_for_smooth_data() {
        let mesh = UniformMesh::new(PI, 501).unwrap();
        let f = GridFunction::from_fn(mesh, |x| (2.0 * x).cos() + x * x).unwrap();
        let a = cumulative_integral(&f).unwrap();
        let b = cumulative_integral_guarded(&f, DEFAULT_CUTOFF_SLACK).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn interpolation_reproduces_quintics() {
        let mesh = UniformMesh::new(2.0, 51).unwrap();
        let p = |x: f64| 0.3 - x + 2.0 * x * x - 0.7 * x.powi(4) + 0.1 * x.powi(5);
        let v: Vec<f64> = mesh.nodes().into_iter().map(p).collect();
        for &x in &[0.0, 0.013, 0.5, 1.2345, 1.99, 2.0] {
            assert_relative_eq!(mesh.interpolate(&v, x), p(x), epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn integral_is_linear(a in -5.0..5.0f64, c in -5.0..5.0f64, seed in 0u64..1000) {
            let mesh = UniformMesh::new(1.3, 51).unwrap();
            let mut s = seed.wrapping_add(17);
            let mut next = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5 };
            let f: Vec<f64> = (0..51).map(|_| next()).collect();
            let g: Vec<f64> = (0..51).map(|_| next()).collect();
            let comb: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + c * y).collect();
            let h = mesh.step();
            let ff = integrate_cumulative(&f, h).unwrap();
            let gg = integrate_cumulative(&g, h).unwrap();
            let cc = integrate_cumulative(&comb, h).unwrap();
            for i in 0..51 {
                prop_assert!((cc[i] - (a * ff[i] + c * gg[i])).abs() <= 1e-13);
            }
        }

        #[test]
        fn integral_of_nonnegative_is_monotone(seed in 0u64..1000) {
            // Non-negative data that is smooth within each panel; the quintic
            // rule can produce negative increments for rough data.
            let mesh = UniformMesh::new(2.0, 101).unwrap();
            let shift = (seed as f64) * 0.01;
            let f = GridFunction::from_fn(mesh, |x| (x * 3.0 + shift).sin().powi(2) + 0.01 * x).unwrap();
            let big_f = cumulative_integral(&f).unwrap();
            for w in big_f.values().windows(2) {
                prop_assert!(w[1] >= w[0]);
            }
        }
    }
}
