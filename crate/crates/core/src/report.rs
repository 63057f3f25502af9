//! Output files. Every file starts with a `#` block carrying the config
//! hash and the truncation data, floats are written with 17 significant
//! digits, and row order is fixed, so identical runs give identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::coefficients::CoefficientTables;
use crate::config::RunConfig;
use crate::error::{NsbfError, Result};

/// `{:.16e}`: 17 significant digits, independent of locale.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// SHA-256 of the canonical TOML form of `c`, without the output
/// directory, which does not affect any result.
pub fn config_hash(c: &RunConfig) -> String {
    let mut c = c.clone();
    c.output.dir = Default::default();
    let digest = Sha256::digest(c.emit().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub command: String,
    pub config_hash: String,
    pub mesh: usize,
    pub n: usize,
    pub n_opt: usize,
    pub beta_floor: f64,
    pub gamma_floor: f64,
    pub converged: bool,
}

impl Provenance {
    pub fn new(command: &str, config: &RunConfig, tables: &CoefficientTables) -> Self {
        let t = &tables.truncation;
        Provenance {
            command: command.to_string(),
            config_hash: config_hash(config),
            mesh: tables.mesh().len(),
            n: tables.n,
            n_opt: t.n_opt,
            beta_floor: t.beta_floor,
            gamma_floor: t.gamma_floor,
            converged: t.converged,
        }
    }

    pub fn header(&self) -> String {
        format!(
            "# nsbf {}\n# command: {}\n# config_sha256: {}\n# mesh: {}\n# N: {}\n# N_opt: {}\n# beta_floor: {}\n# gamma_floor: {}\n# plateau_found: {}\n",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.config_hash,
            self.mesh,
            self.n,
            self.n_opt,
            fmt_f(self.beta_floor),
            fmt_f(self.gamma_floor),
            self.converged
        )
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).map_err(|e| NsbfError::Io(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> NsbfError + '_ {
    move |e| NsbfError::Io(format!("{}: {e}", path.display()))
}

/// Comma-separated file: provenance block, optional extra comment lines,
/// header row, then the rows as given.
pub fn write_csv(path: &Path, prov: &Provenance, notes: &[String], columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    w.write_all(prov.header().as_bytes()).map_err(&err)?;
    for n in notes {
        writeln!(w, "# {n}").map_err(&err)?;
    }
    {
        let mut cw = csv::WriterBuilder::new().from_writer(&mut w);
        cw.write_record(columns).map_err(|e| NsbfError::Io(format!("{}: {e}", path.display())))?;
        for r in rows {
            cw.write_record(r).map_err(|e| NsbfError::Io(format!("{}: {e}", path.display())))?;
        }
        cw.flush().map_err(&err)?;
    }
    w.flush().map_err(&err)
}

/// Whitespace-separated two-column data for gnuplot.
pub fn write_plot(path: &Path, prov: &Provenance, labels: (&str, &str), points: &[(f64, f64)]) -> Result<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    w.write_all(prov.header().as_bytes()).map_err(&err)?;
    writeln!(w, "# {} {}", labels.0, labels.1).map_err(&err)?;
    for (x, y) in points {
        writeln!(w, "{} {}", fmt_f(*x), fmt_f(*y)).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

/// Pretty JSON with the provenance under `"provenance"`.
pub fn write_json<T: Serialize>(path: &Path, prov: &Provenance, body: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        provenance: &'a Provenance,
        #[serde(flatten)]
        body: &'a T,
    }
    let text = serde_json::to_string_pretty(&Doc { provenance: prov, body }).map_err(|e| NsbfError::Io(e.to_string()))?;
    let mut w = create(path)?;
    let err = io_err(path);
    w.write_all(text.as_bytes()).map_err(&err)?;
    w.write_all(b"\n").map_err(&err)?;
    w.flush().map_err(&err)
}
