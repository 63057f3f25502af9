//! The `nsbf` command line: `coeffs`, `eigen`, `solve` and `decay-sweep`.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{NsbfError, Result};
use crate::report::{fmt_f, write_csv, write_json, write_plot, Provenance};
use crate::shooting::{shoot, shooting_eigenvalues, ShootingOptions};
use crate::solution::NsbfSolution;
use crate::spectral::{decay_fit, find_eigenvalues, DEFAULT_SCAN_DENSITY};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BREAKDOWN: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;

/// Lowest `n` in the default decay-fit range.
const DEFAULT_FIT_LO: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "nsbf", version, about = "Neumann series of Bessel functions solver for perturbed Bessel equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Mesh point count (overrides numerics.mesh)
    #[arg(long, global = true, value_name = "M")]
    mesh: Option<usize>,
    /// Number of coefficients (overrides numerics.n)
    #[arg(long = "N", global = true, value_name = "K")]
    n: Option<usize>,
    /// Also run the shooting reference and write comparison columns
    #[arg(long, global = true)]
    oracle: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coefficient tables, residuals, decay fits and plot data
    Coeffs,
    /// Eigenvalues in the configured window
    Eigen,
    /// Evaluate u and u' on an (omega, x) grid
    Solve {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        omega: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        x: Vec<f64>,
    },
    /// |beta_n(b)| data files and fitted exponents for several l
    DecaySweep {
        #[arg(long = "l", value_delimiter = ',', allow_hyphen_values = true)]
        ls: Vec<f64>,
    },
}

pub fn exit_code(e: &NsbfError) -> i32 {
    match e {
        NsbfError::Config(_) | NsbfError::Domain(_) | NsbfError::Range(_) | NsbfError::InvalidMesh(_) => EXIT_CONFIG,
        NsbfError::NonFinite { .. }
        | NsbfError::NonVanishing { .. }
        | NsbfError::NumericalBreakdown { .. }
        | NsbfError::Evaluation { .. }
        | NsbfError::InsufficientData { .. } => EXIT_BREAKDOWN,
        NsbfError::Convergence { .. } => EXIT_CONVERGENCE,
        NsbfError::Io(_) => EXIT_IO,
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("nsbf: {e}");
            exit_code(&e)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let path = cli.config.as_ref().ok_or_else(|| NsbfError::Config("--config PATH is required".into()))?;
    let mut c = RunConfig::load(path)?;
    // relative CSV potentials are resolved against the config file
    if let crate::PotentialSpec::Csv(p) = &c.problem.potential {
        if p.is_relative() {
            if let Some(dir) = path.parent() {
                c.problem.potential = crate::PotentialSpec::Csv(dir.join(p));
            }
        }
    }
    if let Some(d) = &cli.out {
        c.output.dir = d.clone();
    }
    if let Some(m) = cli.mesh {
        c.numerics.mesh = m;
    }
    if let Some(n) = cli.n {
        c.numerics.n = n;
    }
    if cli.oracle {
        c.output.oracle = true;
    }
    match &cli.command {
        Command::Solve { omega, x } => {
            if !omega.is_empty() || !x.is_empty() {
                let prev = c.solve.take();
                let omegas = if omega.is_empty() { prev.as_ref().map(|s| s.omegas.clone()).unwrap_or_default() } else { omega.clone() };
                let xs = if x.is_empty() { prev.as_ref().map(|s| s.xs.clone()).unwrap_or_default() } else { x.clone() };
                c.solve = Some(crate::config::SolveConfig { omegas, xs });
            }
        }
        Command::DecaySweep { ls } if !ls.is_empty() => {
            let mut s = c.sweep.take().unwrap_or(crate::config::SweepConfig { ls: Vec::new(), fit_lo: DEFAULT_FIT_LO, fit_hi: None });
            s.ls = ls.clone();
            c.sweep = Some(s);
        }
        _ => {}
    }
    c.validate()?;
    Ok(c)
}

fn dispatch(cli: Cli) -> Result<Vec<PathBuf>> {
    let c = load_config(&cli)?;
    std::fs::create_dir_all(&c.output.dir).map_err(|e| NsbfError::Io(format!("{}: {e}", c.output.dir.display())))?;
    match cli.command {
        Command::Coeffs => cmd_coeffs(&c),
        Command::Eigen => cmd_eigen(&c),
        Command::Solve { .. } => cmd_solve(&c),
        Command::DecaySweep { .. } => cmd_decay_sweep(&c),
    }
}

/// `u₀ → β/γ → solution` for the configured problem at angular parameter `l`.
pub fn build_solution(c: &RunConfig, l: f64) -> Result<NsbfSolution> {
    let mesh = c.mesh()?;
    let p = c.problem.potential.build(mesh, l)?;
    NsbfSolution::build(p, c.numerics.n)
}

fn fit_json(values: &[f64], lo: usize) -> serde_json::Value {
    match decay_fit(values, lo) {
        Ok(f) => json!({
            "exponent": f.exponent,
            "intercept": f.intercept,
            "floor": f.floor,
            "used_points": f.used_points,
            "excluded_points": f.excluded_points,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// Default fit range `[10, N]`, or `[1, N]` when `N` is small.
fn fit_range(n: usize) -> (usize, usize) {
    if n >= DEFAULT_FIT_LO + 10 {
        (DEFAULT_FIT_LO, n)
    } else {
        (1, n)
    }
}

fn at_b(s: &NsbfSolution, beta: bool) -> Vec<f64> {
    let t = s.tables();
    let v = if beta { &t.beta } else { &t.gamma };
    v.iter().map(|c| c.last()).collect()
}

pub fn cmd_coeffs(c: &RunConfig) -> Result<Vec<PathBuf>> {
    let s = build_solution(c, c.problem.l)?;
    let t = s.tables();
    let prov = Provenance::new("coeffs", c, t);
    let dir = &c.output.dir;
    let mesh = t.mesh();
    let m = mesh.len();
    let pts = c.output.coeff_points.min(m);
    let mut idx: Vec<usize> = (0..pts).map(|j| ((j as f64) * (m - 1) as f64 / (pts - 1) as f64).round() as usize).collect();
    idx.dedup();
    let mut rows = Vec::with_capacity((t.n + 1) * idx.len());
    for n in 0..=t.n {
        for &i in &idx {
            rows.push(vec![n.to_string(), fmt_f(mesh.x(i)), fmt_f(t.beta[n].values()[i]), fmt_f(t.gamma[n].values()[i])]);
        }
    }
    let coeffs = dir.join("coefficients.csv");
    write_csv(&coeffs, &prov, &[format!("{} of {m} mesh points per coefficient", idx.len())], &["n", "x", "beta_n", "gamma_n"], &rows)?;

    let residuals = dir.join("residuals.csv");
    let rows: Vec<Vec<String>> =
        (0..=t.n).map(|k| vec![k.to_string(), fmt_f(t.beta_residual[k]), fmt_f(t.gamma_residual[k])]).collect();
    write_csv(&residuals, &prov, &[], &["K", "beta_residual", "gamma_residual"], &rows)?;

    let beta = at_b(&s, true);
    let gamma = at_b(&s, false);
    let (lo, hi) = fit_range(t.n);
    let decay = dir.join("decay.json");
    write_json(
        &decay,
        &prov,
        &json!({
            "l": c.problem.l,
            "b": c.problem.b,
            "potential": c.problem.potential.to_string(),
            "fit_range": [lo, hi],
            "n_opt_beta": t.truncation.n_opt_beta,
            "n_opt_gamma": t.truncation.n_opt_gamma,
            "beta_fit": fit_json(&beta[lo..=hi], lo),
            "gamma_fit": fit_json(&gamma[lo..=hi], lo),
        }),
    )?;

    let bplot = dir.join("beta_abs.dat");
    let gplot = dir.join("gamma_abs.dat");
    let pts = |v: &[f64]| -> Vec<(f64, f64)> { v.iter().enumerate().skip(1).map(|(n, c)| (n as f64, c.abs())).collect() };
    write_plot(&bplot, &prov, ("n", "|beta_n(b)|"), &pts(&beta))?;
    write_plot(&gplot, &prov, ("n", "|gamma_n(b)|"), &pts(&gamma))?;
    Ok(vec![coeffs, residuals, decay, bplot, gplot])
}

pub fn cmd_eigen(c: &RunConfig) -> Result<Vec<PathBuf>> {
    let spec = c.spectrum.as_ref().ok_or_else(|| NsbfError::Config("eigen needs a [spectrum] section".into()))?;
    let prob = spec.problem()?;
    let s = build_solution(c, c.problem.l)?;
    let prov = Provenance::new("eigen", c, s.tables());
    let eig = find_eigenvalues(&s, &prob)?;
    let rows: Vec<Vec<String>> = eig
        .iter()
        .map(|e| vec![e.index.to_string(), fmt_f(e.omega), fmt_f(e.char_residual), fmt_f(e.refinement_width)])
        .collect();
    let path = c.output.dir.join("eigenvalues.csv");
    write_csv(&path, &prov, &[], &["index", "omega", "residual", "bracket_width"], &rows)?;
    let mut out = vec![path];
    if c.output.oracle {
        let opts = ShootingOptions::default();
        let refs = shooting_eigenvalues(
            &c.problem.potential,
            c.problem.l,
            c.problem.b,
            prob.boundary,
            prob.omega_lo,
            prob.omega_hi,
            DEFAULT_SCAN_DENSITY,
            &opts,
        )?;
        let mut notes = vec![format!("reference: shooting from x0 = {:e}, rtol = {:e}", opts.x0, opts.rtol)];
        if refs.len() != eig.len() {
            notes.push(format!("count mismatch: {} series roots, {} reference roots", eig.len(), refs.len()));
        }
        let rows: Vec<Vec<String>> = eig
            .iter()
            .zip(&refs)
            .map(|(e, r)| vec![e.index.to_string(), fmt_f(e.omega), fmt_f(*r), fmt_f((e.omega - r).abs())])
            .collect();
        let path = c.output.dir.join("eigen_comparison.csv");
        write_csv(&path, &prov, &notes, &["index", "omega", "omega_reference", "abs_error"], &rows)?;
        out.push(path);
    }
    Ok(out)
}

pub fn cmd_solve(c: &RunConfig) -> Result<Vec<PathBuf>> {
    let grid = c.solve.as_ref().ok_or_else(|| NsbfError::Config("solve needs --omega and --x or a [solve] section".into()))?;
    let s = build_solution(c, c.problem.l)?;
    let prov = Provenance::new("solve", c, s.tables());
    let opts = ShootingOptions::default();
    let mut columns = vec!["omega", "x", "u", "u_prime", "eps_beta", "eps_gamma"];
    if c.output.oracle {
        columns.extend(["u_reference", "u_prime_reference"]);
    }
    let mut rows = Vec::new();
    for &w in &grid.omegas {
        for &x in &grid.xs {
            let (u, up) = s.eval_pair(w, x)?;
            let (eb, eg) = s.error_indicator(x);
            let mut r = vec![fmt_f(w), fmt_f(x), fmt_f(u), fmt_f(up), fmt_f(eb), fmt_f(eg)];
            if c.output.oracle {
                let (ur, upr) = if x > opts.x0 { shoot(&c.problem.potential, c.problem.l, w, x, &opts)? } else { (f64::NAN, f64::NAN) };
                r.extend([fmt_f(ur), fmt_f(upr)]);
            }
            rows.push(r);
        }
    }
    let path = c.output.dir.join("solution.csv");
    write_csv(&path, &prov, &[], &columns, &rows)?;
    Ok(vec![path])
}

fn l_tag(l: f64) -> String {
    format!("{l}")
}

pub fn cmd_decay_sweep(c: &RunConfig) -> Result<Vec<PathBuf>> {
    let sweep = c.sweep.as_ref().ok_or_else(|| NsbfError::Config("decay-sweep needs --l or a [sweep] section".into()))?;
    let hi = sweep.fit_hi.unwrap_or(c.numerics.n);
    let lo = sweep.fit_lo;
    let mut out = Vec::new();
    let mut summary = Vec::new();
    let mut last_prov = None;
    for &l in &sweep.ls {
        let s = build_solution(c, l)?;
        let prov = Provenance::new(&format!("decay-sweep l={}", l_tag(l)), c, s.tables());
        let beta = at_b(&s, true);
        let gamma = at_b(&s, false);
        let pts = |v: &[f64]| -> Vec<(f64, f64)> { v.iter().enumerate().skip(1).map(|(n, c)| (n as f64, c.abs())).collect() };
        let bp = c.output.dir.join(format!("beta_abs_l{}.dat", l_tag(l)));
        let gp = c.output.dir.join(format!("gamma_abs_l{}.dat", l_tag(l)));
        write_plot(&bp, &prov, ("n", "|beta_n(b)|"), &pts(&beta))?;
        write_plot(&gp, &prov, ("n", "|gamma_n(b)|"), &pts(&gamma))?;
        out.extend([bp, gp]);
        summary.push(json!({
            "l": l,
            "n_opt": s.n_used(),
            "n_opt_beta": s.orders().0,
            "n_opt_gamma": s.orders().1,
            "beta_fit": fit_json(&beta[lo..=hi], lo),
            "gamma_fit": fit_json(&gamma[lo..=hi], lo),
        }));
        last_prov = Some(prov);
    }
    let mut prov = last_prov.expect("sweep.ls is validated non-empty");
    prov.command = "decay-sweep".into();
    let path = c.output.dir.join("sweep.json");
    write_json(&path, &prov, &json!({ "potential": c.problem.potential.to_string(), "fit_range": [lo, hi], "runs": summary }))?;
    out.push(path);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&NsbfError::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&NsbfError::Domain("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&NsbfError::NumericalBreakdown { n: 3, what: "beta".into() }), EXIT_BREAKDOWN);
        assert_eq!(exit_code(&NsbfError::NonVanishing { x: 1.0, value: -1.0 }), EXIT_BREAKDOWN);
        assert_eq!(exit_code(&NsbfError::Convergence { iterations: 100, last_update: 1.0 }), EXIT_CONVERGENCE);
    }

    #[test]
    fn flags_parse() {
        let c = Cli::try_parse_from(["nsbf", "solve", "--config", "a.toml", "--omega", "0,5", "--x", "1,3", "--N", "40", "--oracle"]).unwrap();
        assert_eq!(c.n, Some(40));
        assert!(c.oracle);
        match c.command {
            Command::Solve { omega, x } => {
                assert_eq!(omega, [0.0, 5.0]);
                assert_eq!(x, [1.0, 3.0]);
            }
            _ => panic!("wrong subcommand"),
        }
        assert!(Cli::try_parse_from(["nsbf", "frobnicate"]).is_err());
    }

    #[test]
    fn missing_config_is_a_config_error() {
        assert_eq!(run(["nsbf", "coeffs"]), EXIT_CONFIG);
        assert_eq!(run(["nsbf", "coeffs", "--config", "/nonexistent/x.toml"]), EXIT_CONFIG);
        assert_eq!(run(["nsbf", "bogus"]), EXIT_CONFIG);
    }
}
