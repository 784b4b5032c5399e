//! Files written by a run. Every CSV ends with `# config_hash=<sha256>`.

use std::fs;
use std::path::{Path, PathBuf};

use gxr_transform::io::write_pgm;
use gxr_transform::{GridSpec, ScalarGrid, SinogramGrid};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// A CSV body: header line plus rows, without the trailer.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: String,
    pub rows: Vec<String>,
}

impl Table {
    pub fn new(file: impl Into<String>, header: impl Into<String>) -> Self {
        Self { file: file.into(), header: header.into(), rows: Vec::new() }
    }

    /// Split a `header\nrow\n...` string.
    pub fn from_text(file: impl Into<String>, text: &str) -> Self {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default().to_string();
        Self { file: file.into(), header, rows: lines.map(str::to_string).collect() }
    }

    pub fn push(&mut self, row: String) {
        self.rows.push(row);
    }
}

pub struct Artifacts {
    pub dir: PathBuf,
    pub hash: String,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

impl Artifacts {
    pub fn create(dir: &Path, hash: &str) -> Result<Self> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Self { dir: dir.to_path_buf(), hash: hash.to_string() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn trailer(&self) -> String {
        format!("config_hash={}", self.hash)
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let p = self.path(name);
        fs::write(&p, bytes).map_err(io_err(&p))?;
        Ok(p)
    }

    pub fn table(&self, t: &Table) -> Result<PathBuf> {
        let mut s = String::with_capacity(64 * (t.rows.len() + 2));
        s.push_str(&t.header);
        s.push('\n');
        for r in &t.rows {
            s.push_str(r);
            s.push('\n');
        }
        s.push_str(&format!("# {}\n", self.trailer()));
        self.write(&t.file, s.as_bytes())
    }

    pub fn grid_csv(&self, name: &str, g: &ScalarGrid) -> Result<PathBuf> {
        let mut buf = Vec::new();
        gxr_transform::io::write_grid_csv(&mut buf, g, Some(&self.trailer())).map_err(io_err(&self.path(name)))?;
        self.write(name, &buf)
    }

    pub fn sinogram_csv(&self, name: &str, s: &SinogramGrid) -> Result<PathBuf> {
        let mut buf = Vec::new();
        gxr_transform::io::write_sinogram_csv(&mut buf, s, Some(&self.trailer())).map_err(io_err(&self.path(name)))?;
        self.write(name, &buf)
    }

    pub fn grid_pgm(&self, name: &str, g: &ScalarGrid) -> Result<PathBuf> {
        let p = self.path(name);
        gxr_transform::io::save_pgm(&p, g).map_err(io_err(&p))?;
        Ok(p)
    }

    /// θ down the rows, α across.
    pub fn sinogram_pgm(&self, name: &str, s: &SinogramGrid) -> Result<PathBuf> {
        let spec = GridSpec { origin: Default::default(), h: 1.0, nx: s.fan.n_alpha, ny: s.fan.n_theta };
        let g = ScalarGrid { spec, values: s.values.clone(), mask: None };
        let mut buf = Vec::new();
        write_pgm(&mut buf, &g).map_err(io_err(&self.path(name)))?;
        self.write(name, &buf)
    }
}

pub const CALIBRATION_FILE: &str = "calibration.txt";

/// Contents of `calibration.txt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationRecord {
    pub constant: f64,
    pub spread: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    pub chi_inner: f64,
    pub chi_outer: f64,
}

impl CalibrationRecord {
    pub fn to_text(&self, trailer: &str) -> String {
        format!(
            "# dimensional constant C: plateau of |xi| FT(2 chi(|z|)/|z|) over the band\n{}# {trailer}\n",
            toml::to_string(self).expect("scalar fields")
        )
    }

    pub fn save(&self, out: &Artifacts) -> Result<PathBuf> {
        out.write(CALIBRATION_FILE, self.to_text(&out.trailer()).as_bytes())
    }

    /// Read `calibration.txt` from `dir`, checking it was made for this χ.
    pub fn load(dir: &Path, chi: (f64, f64)) -> Result<Self> {
        let path = dir.join(CALIBRATION_FILE);
        if !path.exists() {
            return Err(HarnessError::MissingCalibration(path));
        }
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let bad = |reason: String| HarnessError::Calibration { path: path.clone(), reason };
        let rec: Self = toml::from_str(&text).map_err(|e| bad(e.message().trim().to_string()))?;
        if !(rec.constant.is_finite() && rec.constant > 0.0) {
            return Err(bad(format!("constant {} is not positive", rec.constant)));
        }
        if rec.chi_inner != chi.0 || rec.chi_outer != chi.1 {
            return Err(bad(format!(
                "made for chi radii ({}, {}) but the config has ({}, {}); rerun calibrate",
                rec.chi_inner, rec.chi_outer, chi.0, chi.1
            )));
        }
        Ok(rec)
    }
}
