use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SQUARE: &str = r#"
[problem]
potential = "x^2"
l = 1.5

[numerics]
mesh = 2001
n = 30

[spectrum]
boundary = "dirichlet"
omega_lo = 2.0
omega_hi = 5.0

[solve]
omegas = [0.0, 3.0]
xs = [0.0, 1.0, 3.141592653589793]
"#;

fn nsbf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsbf")).args(args).output().expect("spawn nsbf")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run_ok(args: &[&str]) -> String {
    let o = nsbf(args);
    assert!(o.status.success(), "nsbf {args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn coeffs_writes_all_files_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", SQUARE);
    let out = dir.path().join("out");
    let listed = run_ok(&["coeffs", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    for f in ["coefficients.csv", "residuals.csv", "decay.json", "beta_abs.dat", "gamma_abs.dat"] {
        assert!(listed.contains(f), "{f} not listed");
        assert!(out.join(f).exists(), "{f} not written");
    }
    let csv = std::fs::read_to_string(out.join("coefficients.csv")).unwrap();
    assert!(csv.starts_with("# nsbf "));
    assert!(csv.lines().any(|l| l.starts_with("# config_sha256: ")));
    assert!(csv.lines().any(|l| l == "# N: 30"));
    let rows = body(&csv);
    assert_eq!(rows[0], "n,x,beta_n,gamma_n");
    assert_eq!(rows.len(), 1 + 31 * 101);
    let decay: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("decay.json")).unwrap()).unwrap();
    assert_eq!(decay["provenance"]["n"], 30);
    assert_eq!(decay["fit_range"], serde_json::json!([10, 30]));
    assert!(decay["beta_fit"]["exponent"].as_f64().unwrap() < -3.0);
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", SQUARE);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        run_ok(&["coeffs", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap()]);
        run_ok(&["eigen", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap()]);
    }
    for f in ["coefficients.csv", "residuals.csv", "decay.json", "beta_abs.dat", "eigenvalues.csv"] {
        let same = std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap();
        assert!(same, "{f} differs");
    }
}

#[test]
fn overrides_change_the_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", SQUARE);
    let hash = |n: &str, out: &str| {
        let d = dir.path().join(out);
        run_ok(&["coeffs", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap(), "--N", n]);
        let text = std::fs::read_to_string(d.join("residuals.csv")).unwrap();
        text.lines().find(|l| l.starts_with("# config_sha256: ")).unwrap().to_string()
    };
    assert_ne!(hash("20", "x"), hash("25", "y"));
}

#[test]
fn eigen_with_oracle_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", SQUARE);
    let out = dir.path().join("out");
    run_ok(&["eigen", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--oracle"]);
    let text = std::fs::read_to_string(out.join("eigen_comparison.csv")).unwrap();
    let rows = body(&text);
    assert_eq!(rows[0], "index,omega,omega_reference,abs_error");
    assert!(rows.len() >= 3);
    for r in &rows[1..] {
        let err: f64 = r.split(',').nth(3).unwrap().parse().unwrap();
        assert!(err < 1e-7, "{r}");
    }
}

#[test]
fn solve_at_zero_frequency_gives_particular_solution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", SQUARE);
    let out = dir.path().join("out");
    run_ok(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--omega", "0", "--x", "1"]);
    let text = std::fs::read_to_string(out.join("solution.csv")).unwrap();
    let rows = body(&text);
    assert_eq!(rows[0], "omega,x,u,u_prime,eps_beta,eps_gamma");
    assert_eq!(rows.len(), 2);
    let u: f64 = rows[1].split(',').nth(2).unwrap().parse().unwrap();
    // u0 for q = x², l = 3/2 starts like x^{5/2}(1 + x^4/36 + ...)
    assert!((u - 1.0).abs() < 0.05, "u0(1) = {u}");
}

#[test]
fn decay_sweep_writes_one_pair_per_l() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", SQUARE);
    let out = dir.path().join("out");
    run_ok(&["decay-sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--l", "0.5,1.5"]);
    for f in ["beta_abs_l0.5.dat", "gamma_abs_l1.5.dat", "sweep.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(v["runs"].as_array().unwrap().len(), 2);
}

#[test]
fn zero_potential_reports_failed_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", &SQUARE.replace("\"x^2\"", "\"zero\""));
    let out = dir.path().join("out");
    run_ok(&["coeffs", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("decay.json")).unwrap()).unwrap();
    assert!(v["beta_fit"]["error"].as_str().unwrap().contains("insufficient data"));
    assert_eq!(v["provenance"]["n_opt"], 0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| nsbf(args).status.code().unwrap();
    assert_eq!(code(&["coeffs"]), 2);
    assert_eq!(code(&["nonsense"]), 2);
    let bad = write_config(dir.path(), "bad.toml", &SQUARE.replace("mesh = 2001", "mesh = 2000"));
    assert_eq!(code(&["coeffs", "--config", bad.to_str().unwrap()]), 2);
    let typo = write_config(dir.path(), "typo.toml", &SQUARE.replace("n = 30", "n = 30\nsteps = 4"));
    assert_eq!(code(&["coeffs", "--config", typo.to_str().unwrap()]), 2);
    let ok = write_config(dir.path(), "ok.toml", SQUARE);
    assert_eq!(code(&["solve", "--config", ok.to_str().unwrap(), "--x", "4"]), 2);
    // output directory blocked by a regular file
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    assert_eq!(code(&["coeffs", "--config", ok.to_str().unwrap(), "--out", blocker.to_str().unwrap()]), 1);
    // negative q pushes u0 through zero
    let neg = write_config(dir.path(), "neg.toml", &SQUARE.replace("\"x^2\"", "\"const:-4\""));
    assert_eq!(code(&["coeffs", "--config", neg.to_str().unwrap()]), 3);
}

#[test]
fn help_and_version_exit_zero() {
    assert!(nsbf(&["--help"]).status.success());
    let v = nsbf(&["--version"]);
    assert!(v.status.success());
    assert!(String::from_utf8_lossy(&v.stdout).contains(env!("CARGO_PKG_VERSION")));
}
