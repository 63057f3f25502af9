//! Potentials sampled on the mesh, and the named built-ins.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{NsbfError, Result};
use crate::mesh::{integrate_cumulative, integrate_cumulative_guarded, GridFunction, UniformMesh, DEFAULT_CUTOFF_SLACK};

/// Quintic extrapolation to node 0 from nodes 1..=6.
const EXTRAPOLATE_TO_ORIGIN: [f64; 6] = [6.0, -15.0, 20.0, -15.0, 6.0, -1.0];

fn extrapolate_origin(v: &[f64]) -> f64 {
    EXTRAPOLATE_TO_ORIGIN.iter().zip(&v[1..7]).map(|(w, y)| w * y).sum()
}

/// Potential `q` on a uniform mesh together with the angular parameter `l`.
///
/// A non-finite sample at `x = 0` marks a singular origin. In that case the
/// limit of `x q(x)` is extrapolated from the next six samples and `q` is
/// only ever used in products with a positive power of `x`. If that limit
/// is nonzero, `Q` is the regularized antiderivative
/// `c ln x + ∫₀ˣ (q(t) − c/t) dt` with `c = lim x q(x)`.
#[derive(Debug, Clone)]
pub struct Potential {
    l: f64,
    q: GridFunction,
    xq: GridFunction,
    big_q: GridFunction,
    singular_origin: bool,
    log_singular: bool,
}

impl Potential {
    /// `samples.len()` must equal the mesh size. Only `samples[0]` may be
    /// non-finite.
    pub fn from_samples(mesh: UniformMesh, l: f64, mut samples: Vec<f64>) -> Result<Self> {
        if !(l >= -0.5) || !l.is_finite() {
            return Err(NsbfError::Domain(format!("l = {l} must be finite and >= -1/2")));
        }
        if samples.len() != mesh.len() {
            return Err(NsbfError::InvalidMesh(format!(
                "{} potential samples for a mesh of {} points",
                samples.len(),
                mesh.len()
            )));
        }
        if let Some(i) = samples.iter().skip(1).position(|v| !v.is_finite()) {
            return Err(NsbfError::NonFinite { index: i + 1, context: "potential sample away from the origin".into() });
        }
        let singular_origin = !samples[0].is_finite();
        let mut xq: Vec<f64> = samples.iter().enumerate().map(|(i, q)| mesh.x(i) * q).collect();
        if singular_origin {
            xq[0] = extrapolate_origin(&xq);
            samples[0] = 0.0;
        } else {
            xq[0] = 0.0;
        }
        let c = xq[0];
        let log_singular = singular_origin && c.abs() > 1e-12 * xq[1..7].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let h = mesh.step();
        let big_q = if log_singular {
            let mut g: Vec<f64> = (0..mesh.len())
                .map(|i| if i == 0 { 0.0 } else { (xq[i] - c) / mesh.x(i) })
                .collect();
            g[0] = extrapolate_origin(&g);
            let gi = integrate_cumulative(&g, h)?;
            let mut out: Vec<f64> = gi.iter().enumerate().map(|(i, v)| if i == 0 { 0.0 } else { v + c * mesh.x(i).ln() }).collect();
            out[0] = 0.0;
            out
        } else {
            let mut qs = samples.clone();
            if singular_origin {
                // q ~ o(1/x): the origin sample only affects the first panel
                qs[0] = 0.0;
            }
            integrate_cumulative_guarded(&qs, h, DEFAULT_CUTOFF_SLACK)?
        };
        Ok(Potential {
            l,
            q: GridFunction::new(mesh, samples)?,
            xq: GridFunction::new(mesh, xq)?,
            big_q: GridFunction::new(mesh, big_q)?,
            singular_origin,
            log_singular,
        })
    }

    pub fn from_fn(mesh: UniformMesh, l: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = mesh.nodes().into_iter().map(f).collect();
        Self::from_samples(mesh, l, samples)
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn mesh(&self) -> &UniformMesh {
        self.q.mesh()
    }

    /// Samples of `q`. At a singular origin the first entry is a
    /// placeholder 0.
    pub fn q(&self) -> &GridFunction {
        &self.q
    }

    /// Samples of `x q(x)`, with the origin limit in the first entry.
    pub fn xq(&self) -> &GridFunction {
        &self.xq
    }

    /// `Q(x) = ∫₀ˣ q`, or its regularized form for a `1/x` singularity
    /// (first entry then a placeholder 0, only used multiplied by `x^{l+1}`).
    pub fn big_q(&self) -> &GridFunction {
        &self.big_q
    }

    pub fn singular_origin(&self) -> bool {
        self.singular_origin
    }

    pub fn log_singular(&self) -> bool {
        self.log_singular
    }

    pub fn is_identically_zero(&self) -> bool {
        self.xq.values().iter().all(|&v| v == 0.0) && self.q.values().iter().all(|&v| v == 0.0)
    }

    /// `x_i^p · q(x_i)` written as `x^{p−1}·(x q)`, with `0^0 = 1`.
    #[inline]
    pub fn q_times_pow(&self, i: usize, p: f64) -> f64 {
        let x = self.mesh().x(i);
        let xq = self.xq.values()[i];
        if i == 0 {
            return match (self.singular_origin, p) {
                (false, p) if p == 0.0 => self.q.values()[0],
                (false, _) => 0.0,
                (true, p) if p == 1.0 => xq,
                (true, p) if p > 1.0 => 0.0,
                _ => f64::NAN,
            };
        }
        if self.singular_origin || p != 0.0 {
            xq * x.powf(p - 1.0)
        } else {
            self.q.values()[i]
        }
    }
}

/// Named potentials and tabulated input.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Zero,
    Constant(f64),
    /// `x^2`
    Square,
    /// `sqrt(pi^2 - x^2)`
    QuarterCircle,
    /// `1/x`
    Coulomb,
    /// 0 on `[0, π/2]`, `(x − π/2)^{k−4}` beyond, `k ∈ {4,5,6}`
    Decay1(u32),
    /// 1 on `[0, π/2]`, `1 + (x − π/2)^k` beyond, `k ∈ 0..=5`
    Decay2(u32),
    /// `(x, q)` rows on the mesh nodes.
    Csv(PathBuf),
}

impl PotentialSpec {
    /// Pointwise value for the analytic built-ins.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let half = 0.5 * PI;
        Some(match *self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::Constant(c) => c,
            PotentialSpec::Square => x * x,
            PotentialSpec::QuarterCircle => (PI * PI - x * x).max(0.0).sqrt(),
            PotentialSpec::Coulomb => 1.0 / x,
            PotentialSpec::Decay1(k) => {
                if x <= half {
                    0.0
                } else {
                    (x - half).powi(k as i32 - 4)
                }
            }
            PotentialSpec::Decay2(k) => {
                if x <= half {
                    1.0
                } else {
                    1.0 + (x - half).powi(k as i32)
                }
            }
            PotentialSpec::Csv(_) => return None,
        })
    }

    /// Samples the potential on `mesh`.
    pub fn sample(&self, mesh: &UniformMesh) -> Result<Vec<f64>> {
        match self {
            PotentialSpec::Csv(path) => read_csv_samples(path, mesh),
            PotentialSpec::QuarterCircle if mesh.b() > PI * (1.0 + 1e-14) => Err(NsbfError::Config(format!(
                "sqrt(pi^2-x^2) is not real beyond pi (b = {})",
                mesh.b()
            ))),
            spec => Ok(mesh.nodes().into_iter().map(|x| spec.eval(x).unwrap()).collect()),
        }
    }

    pub fn build(&self, mesh: UniformMesh, l: f64) -> Result<Potential> {
        Potential::from_samples(mesh, l, self.sample(&mesh)?)
    }

    /// True if the potential is nonnegative, which guarantees a
    /// non-vanishing particular solution.
    pub fn is_nonnegative(&self) -> Option<bool> {
        match self {
            PotentialSpec::Constant(c) => Some(*c >= 0.0),
            PotentialSpec::Csv(_) => None,
            _ => Some(true),
        }
    }
}

fn read_csv_samples(path: &Path, mesh: &UniformMesh) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| NsbfError::Config(format!("cannot read potential file {}: {e}", path.display())))?;
    let mut out = Vec::with_capacity(mesh.len());
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| NsbfError::Config(format!("{}: {e}", path.display())))?;
        if rec.len() != 2 {
            return Err(NsbfError::Config(format!("{}: row {} needs two columns x,q", path.display(), row + 1)));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| NsbfError::Config(format!("{}: row {}: cannot parse '{s}'", path.display(), row + 1)))
        };
        let (x, q) = (parse(&rec[0])?, parse(&rec[1])?);
        if out.len() >= mesh.len() {
            return Err(NsbfError::Config(format!(
                "{}: more than {} rows for the configured mesh",
                path.display(),
                mesh.len()
            )));
        }
        let expected = mesh.x(out.len());
        if (x - expected).abs() > 1e-9 * mesh.b() {
            return Err(NsbfError::Config(format!(
                "{}: row {} has x = {x}, expected mesh node {expected}",
                path.display(),
                row + 1
            )));
        }
        out.push(q);
    }
    if out.len() != mesh.len() {
        return Err(NsbfError::Config(format!(
            "{}: {} rows, the mesh has {} points",
            path.display(),
            out.len(),
            mesh.len()
        )));
    }
    Ok(out)
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialSpec::Zero => write!(f, "zero"),
            PotentialSpec::Constant(c) => write!(f, "const:{c}"),
            PotentialSpec::Square => write!(f, "x^2"),
            PotentialSpec::QuarterCircle => write!(f, "sqrt(pi^2-x^2)"),
            PotentialSpec::Coulomb => write!(f, "1/x"),
            PotentialSpec::Decay1(k) => write!(f, "decay1:{k}"),
            PotentialSpec::Decay2(k) => write!(f, "decay2:{k}"),
            PotentialSpec::Csv(p) => write!(f, "csv:{}", p.display()),
        }
    }
}

impl FromStr for PotentialSpec {
    type Err = NsbfError;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.trim().chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || NsbfError::Config(format!("unknown potential '{s}'"));
        let int_arg = |a: &str| a.parse::<u32>().map_err(|_| bad());
        Ok(match t.as_str() {
            "zero" | "0" => PotentialSpec::Zero,
            "x^2" | "x**2" => PotentialSpec::Square,
            "sqrt(pi^2-x^2)" => PotentialSpec::QuarterCircle,
            "1/x" => PotentialSpec::Coulomb,
            _ => {
                if let Some(a) = t.strip_prefix("const:") {
                    PotentialSpec::Constant(a.parse().map_err(|_| bad())?)
                } else if let Some(a) = t.strip_prefix("decay1:") {
                    let k = int_arg(a)?;
                    if !(4..=6).contains(&k) {
                        return Err(NsbfError::Config(format!("decay1 index must be 4, 5 or 6 (got {k})")));
                    }
                    PotentialSpec::Decay1(k)
                } else if let Some(a) = t.strip_prefix("decay2:") {
                    let k = int_arg(a)?;
                    if k > 5 {
                        return Err(NsbfError::Config(format!("decay2 index must be 0..=5 (got {k})")));
                    }
                    PotentialSpec::Decay2(k)
                } else if s.trim().starts_with("csv:") {
                    PotentialSpec::Csv(PathBuf::from(s.trim()["csv:".len()..].trim()))
                } else {
                    return Err(bad());
                }
            }
        })
    }
}
