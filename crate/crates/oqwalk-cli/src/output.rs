//! File emission: CSV writers, the summary record, and the run manifest.
//!
//! Every float is printed with a fixed `{:.11e}` format so identical runs
//! produce byte-identical files; the manifest lists each emitted file with
//! its SHA-256 digest and carries no timestamps.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use oqwalk::dynamics::Trajectory;
use oqwalk::hitting::HittingResult;
use oqwalk::scenarios::SweepPoint;

/// One run's worth of emitted files, hashed as they are written.
pub struct Emitter {
    out_dir: PathBuf,
    files: Vec<FileDigest>,
}

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Where the model came from: exactly one of the two is set.
#[derive(Debug, Serialize)]
pub struct SourceDesc {
    pub config: Option<String>,
    pub preset: Option<String>,
}

/// Command-line overrides applied on top of the source.
#[derive(Debug, Serialize)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub q32: Option<f64>,
}

/// Tolerances and caps the run used (only those meaningful per command).
#[derive(Debug, Serialize, Default)]
pub struct Tolerances {
    pub tail_bound: Option<f64>,
    pub max_steps: Option<u64>,
    pub eta: Option<f64>,
    pub trials: Option<usize>,
}

/// The run manifest: inputs that fully determine the outputs, plus the
/// emitted files with their digests.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub argv: Vec<String>,
    pub source: SourceDesc,
    pub out_dir: String,
    pub seed: u64,
    pub overrides: Overrides,
    pub tolerances: Tolerances,
    pub files: Vec<FileDigest>,
}

/// The per-run summary record for hitting statistics.
#[derive(Debug, Serialize)]
pub struct Summary {
    pub n41: Option<f64>,
    pub t41_s: Option<f64>,
    pub n_mp: Option<u64>,
    pub tail_mass: Option<f64>,
    pub dt_s: f64,
    pub mu32: Option<f64>,
}

/// The crossing-time record.
#[derive(Debug, Serialize)]
pub struct CrossingSummary {
    pub eta: f64,
    pub t_c_s: f64,
    pub step_before: u64,
    pub step_after: u64,
    pub dt_s: f64,
    pub mu32: Option<f64>,
}

impl Emitter {
    pub fn new(out_dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(out_dir)?;
        Ok(Emitter {
            out_dir: out_dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn record(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
        let path = self.out_dir.join(name);
        fs::write(&path, bytes)?;
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        let digest = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        self.files.push(FileDigest {
            path: name.to_string(),
            sha256: digest,
        });
        Ok(path)
    }

    /// Write a trajectory CSV: time column, one occupation column per
    /// node, then real/imaginary/modulus columns per recorded coherence.
    pub fn trajectory_csv(&mut self, name: &str, traj: &Trajectory) -> std::io::Result<PathBuf> {
        let n_nodes = traj.populations.len();
        let mut buf = Vec::new();
        write!(buf, "t")?;
        for node in 1..=n_nodes {
            write!(buf, ",rho{node}{node}")?;
        }
        for series in &traj.coherences {
            let (j, k) = (series.j + 1, series.k + 1);
            write!(buf, ",re_rho{j}{k},im_rho{j}{k},abs_rho{j}{k}")?;
        }
        writeln!(buf)?;
        for (s, &step) in traj.steps.iter().enumerate() {
            write!(buf, "{:.11e}", step as f64 * traj.dt)?;
            for node in 0..n_nodes {
                write!(buf, ",{:.11e}", traj.populations[node][s])?;
            }
            for series in &traj.coherences {
                let c = series.values[s];
                write!(buf, ",{:.11e},{:.11e},{:.11e}", c.re, c.im, c.norm())?;
            }
            writeln!(buf)?;
        }
        self.record(name, &buf)
    }

    /// Write a hitting-distribution CSV (`n, f41`).
    pub fn distribution_csv(&mut self, name: &str, d: &HittingResult) -> std::io::Result<PathBuf> {
        let mut buf = Vec::new();
        writeln!(buf, "n,f41")?;
        for (n, &p) in d.f.iter().enumerate() {
            writeln!(buf, "{n},{p:.11e}")?;
        }
        self.record(name, &buf)
    }

    /// Write a sweep CSV; unrecorded observables leave their cells empty.
    pub fn sweep_csv(&mut self, name: &str, rows: &[SweepPoint]) -> std::io::Result<PathBuf> {
        let mut buf = Vec::new();
        writeln!(buf, "param_name,param_value,t41_s,n41,tc_s,tail_mass")?;
        for row in rows {
            let cell = |v: Option<f64>| v.map(|x| format!("{x:.11e}")).unwrap_or_default();
            writeln!(
                buf,
                "{},{:.11e},{},{},{},{}",
                row.parameter.name(),
                row.value,
                cell(row.t41),
                cell(row.n41),
                cell(row.t_c),
                cell(row.tail_mass),
            )?;
        }
        self.record(name, &buf)
    }

    /// Write any serialisable record as pretty JSON.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<PathBuf> {
        let mut buf = serde_json::to_vec_pretty(value)?;
        buf.push(b'\n');
        self.record(name, &buf)
    }

    /// Write the manifest itself (not listed in its own file table).
    pub fn finish(self, mut manifest: Manifest) -> std::io::Result<PathBuf> {
        manifest.files = self.files;
        let path = self.out_dir.join("manifest.json");
        let mut buf = serde_json::to_vec_pretty(&manifest)?;
        buf.push(b'\n');
        fs::write(&path, buf)?;
        Ok(path)
    }
}

/// Filename-safe rendering of a grid value (`1.00e-7`, `0e0`, `-2.50e3`).
pub fn value_slug(v: f64) -> String {
    if v == 0.0 {
        "0e0".to_string()
    } else {
        format!("{v:.2e}")
    }
}
