//! Run configuration: a TOML file with fixed sections. Unknown keys are
//! rejected so that a misspelt `l` or `n` fails loudly.
//!
//! ```toml
//! [problem]
//! potential = "x^2"
//! l = 1.5
//! b = 3.141592653589793
//!
//! [numerics]
//! mesh = 20001
//! n = 100
//!
//! [spectrum]
//! boundary = "dirichlet"
//! omega_lo = 2.0
//! omega_hi = 11.0
//!
//! [output]
//! dir = "out"
//! oracle = false
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{NsbfError, Result};
use crate::mesh::UniformMesh;
use crate::potential::PotentialSpec;
use crate::spectral::{Boundary, SpectralProblem};

/// Largest accepted `N`; the tables hold `N+1` mesh functions.
pub const MAX_N: usize = 2000;

/// Number of `x` samples written per coefficient in the coefficient CSV.
pub const DEFAULT_COEFF_POINTS: usize = 101;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(serialize_with = "ser_display", deserialize_with = "de_from_str")]
    pub potential: PotentialSpec,
    pub l: f64,
    #[serde(default = "default_b")]
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    #[serde(default = "default_mesh")]
    pub mesh: usize,
    #[serde(default = "default_n")]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
    Robin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub boundary: BoundaryKind,
    /// Robin coefficient in `u′(b) + H u(b) = 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    pub omega_lo: f64,
    pub omega_hi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub omegas: Vec<f64>,
    pub xs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub ls: Vec<f64>,
    /// Fit range `[n_lo, n_hi]` for the decay exponent.
    #[serde(default = "default_fit_lo")]
    pub fit_lo: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_hi: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    #[serde(default)]
    pub oracle: bool,
    #[serde(default = "default_coeff_points")]
    pub coeff_points: usize,
}

fn default_b() -> f64 {
    std::f64::consts::PI
}
fn default_mesh() -> usize {
    20001
}
fn default_n() -> usize {
    100
}
fn default_fit_lo() -> usize {
    10
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_coeff_points() -> usize {
    DEFAULT_COEFF_POINTS
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig { mesh: default_mesh(), n: default_n() }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_out(), oracle: false, coeff_points: DEFAULT_COEFF_POINTS }
    }
}

fn ser_display<T: fmt::Display, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn de_from_str<'de, T, D>(d: D) -> std::result::Result<T, D::Error>
where
    T: FromStr,
    T::Err: fmt::Display,
    D: Deserializer<'de>,
{
    let s = String::deserialize(d)?;
    s.parse().map_err(de::Error::custom)
}

fn bad(msg: impl Into<String>) -> NsbfError {
    NsbfError::Config(msg.into())
}

impl SpectrumConfig {
    pub fn boundary(&self) -> Result<Boundary> {
        match (self.boundary, self.h) {
            (BoundaryKind::Dirichlet, None) => Ok(Boundary::Dirichlet),
            (BoundaryKind::Neumann, None) => Ok(Boundary::Neumann),
            (BoundaryKind::Robin, Some(h)) => Ok(Boundary::Robin(h)),
            (BoundaryKind::Robin, None) => Err(bad("robin boundary needs spectrum.h")),
            (_, Some(_)) => Err(bad("spectrum.h is only meaningful for a robin boundary")),
        }
    }

    pub fn problem(&self) -> Result<SpectralProblem> {
        let b = self.boundary()?;
        match self.scan_points {
            Some(n) => SpectralProblem::with_scan_points(b, self.omega_lo, self.omega_hi, n),
            None => SpectralProblem::new(b, self.omega_lo, self.omega_hi),
        }
    }
}

impl RunConfig {
    /// Minimal configuration for a potential and `l`, everything else default.
    pub fn new(potential: PotentialSpec, l: f64) -> Self {
        RunConfig {
            problem: ProblemConfig { potential, l, b: default_b() },
            numerics: NumericsConfig::default(),
            spectrum: None,
            solve: None,
            sweep: None,
            output: OutputConfig::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let c: RunConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical TOML text; `parse(emit(c)) == c`.
    pub fn emit(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    pub fn mesh(&self) -> Result<UniformMesh> {
        UniformMesh::new(self.problem.b, self.numerics.mesh).map_err(|e| bad(e.to_string()))
    }

    /// Checks every field against the preconditions of the modules it
    /// feeds. Runs before any computation.
    pub fn validate(&self) -> Result<()> {
        let p = &self.problem;
        if !(p.l.is_finite() && p.l >= -0.5) {
            return Err(bad(format!("problem.l = {} must be finite and >= -0.5", p.l)));
        }
        if !(p.b.is_finite() && p.b > 0.0) {
            return Err(bad(format!("problem.b = {} must be positive", p.b)));
        }
        if p.potential == PotentialSpec::QuarterCircle && p.b > std::f64::consts::PI * (1.0 + 1e-14) {
            return Err(bad("sqrt(pi^2-x^2) needs b <= pi"));
        }
        if let PotentialSpec::Constant(c) = p.potential {
            if !c.is_finite() {
                return Err(bad(format!("constant potential {c} is not finite")));
            }
        }
        self.mesh()?;
        let n = self.numerics.n;
        if n == 0 || n > MAX_N {
            return Err(bad(format!("numerics.n = {n} must lie in 1..={MAX_N}")));
        }
        if let Some(s) = &self.spectrum {
            s.problem().map_err(|e| bad(format!("spectrum: {e}")))?;
        }
        if let Some(s) = &self.solve {
            if s.omegas.is_empty() || s.xs.is_empty() {
                return Err(bad("solve.omegas and solve.xs must be non-empty"));
            }
            if let Some(w) = s.omegas.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
                return Err(bad(format!("solve.omegas: {w} must be finite and >= 0")));
            }
            if let Some(x) = s.xs.iter().find(|x| !(**x >= 0.0 && **x <= p.b)) {
                return Err(bad(format!("solve.xs: {x} outside [0, {}]", p.b)));
            }
        }
        if let Some(s) = &self.sweep {
            if s.ls.is_empty() {
                return Err(bad("sweep.ls must be non-empty"));
            }
            if let Some(l) = s.ls.iter().find(|l| !(l.is_finite() && **l >= -0.5)) {
                return Err(bad(format!("sweep.ls: {l} must be finite and >= -0.5")));
            }
            let hi = s.fit_hi.unwrap_or(n);
            if s.fit_lo == 0 || hi > n || hi < s.fit_lo + 10 {
                return Err(bad(format!("sweep fit range [{}, {hi}] must satisfy 1 <= lo, lo + 10 <= hi <= n = {n}", s.fit_lo)));
            }
        }
        if self.output.coeff_points < 2 {
            return Err(bad("output.coeff_points must be at least 2"));
        }
        Ok(())
    }
}
