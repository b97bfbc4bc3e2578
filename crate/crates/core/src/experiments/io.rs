//! Output artifacts: `series.csv`, checkpoints and the run manifest.
//!
//! Checkpoint layout (`state_tXXXX.bin`, `XXXX` the zero-padded step count): a
//! UTF-8 header of `key value` lines terminated by a line `END`, followed by raw
//! little-endian `f64` blocks for `u` (interleaved re, im), `v` and `vt`. Within a
//! block coefficient `(k, l)` sits at index `(l-1)·nx + (k-1)`, so `k` varies fastest.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use crate::dynamics::{Diagnostics, State};
use crate::error::{Error, Result};
use crate::functionals::{DataNorms, EnvelopeConstants};
use crate::spectral::{Field, Grid2D};
use crate::Complex64;

pub const SERIES_COLUMNS: [&str; 13] = [
    "t",
    "charge",
    "energy_eps",
    "modified_energy",
    "h1_u",
    "h2_u",
    "l2_v",
    "h1_v",
    "l2_vt",
    "hm_half_vt",
    "gn_quotient",
    "envelope_h1",
    "envelope_small",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Streaming writer for `series.csv`.
pub struct SeriesWriter {
    out: BufWriter<fs::File>,
}

impl SeriesWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = BufWriter::new(fs::File::create(path)?);
        writeln!(out, "{}", SERIES_COLUMNS.join(","))?;
        Ok(Self { out })
    }

    pub fn row(&mut self, d: &Diagnostics) -> Result<()> {
        writeln!(
            self.out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            d.t,
            d.charge,
            d.energy_eps,
            d.modified_energy,
            d.h1_u,
            d.h2_u,
            d.l2_v,
            d.h1_v,
            d.l2_vt,
            d.hm_half_vt,
            opt(d.gn_quotient),
            d.envelope_h1,
            opt(d.envelope_small)
        )?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Write `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn checkpoint_name(step: usize) -> String {
    format!("state_t{step:04}.bin")
}

pub fn write_checkpoint(path: &Path, state: &State) -> Result<()> {
    let g = state.grid();
    let (nx, ny) = g.shape();
    let mut header = String::new();
    let _ = writeln!(header, "SIB-CHECKPOINT 1");
    let _ = writeln!(header, "lx {}", g.lx());
    let _ = writeln!(header, "ly {}", g.ly());
    let _ = writeln!(header, "nx {nx}");
    let _ = writeln!(header, "ny {ny}");
    let _ = writeln!(header, "t {}", state.t);
    let _ = writeln!(header, "endianness little");
    let _ = writeln!(header, "order k-fastest");
    let _ = writeln!(header, "blocks u:complex v:real vt:real");
    let _ = writeln!(header, "END");
    let mut bytes = header.into_bytes();
    let u = state.u.complex_coeffs();
    let v = state.v.re();
    let vt = state.vt.re();
    let (v, vt) = (v.real_coeffs().expect("real"), vt.real_coeffs().expect("real"));
    for l in 0..ny {
        for k in 0..nx {
            bytes.extend_from_slice(&u[[k, l]].re.to_le_bytes());
            bytes.extend_from_slice(&u[[k, l]].im.to_le_bytes());
        }
    }
    for block in [v, vt] {
        for l in 0..ny {
            for k in 0..nx {
                bytes.extend_from_slice(&block[[k, l]].to_le_bytes());
            }
        }
    }
    write_atomic(path, &bytes)
}

pub fn read_checkpoint(path: &Path) -> Result<State> {
    let bytes = fs::read(path)?;
    let bad = |m: &str| Error::InvalidArgument(format!("{}: {m}", path.display()));
    let end = bytes
        .windows(4)
        .position(|w| w == b"END\n")
        .ok_or_else(|| bad("missing END line"))?;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("header is not UTF-8"))?;
    let mut lines = header.lines();
    if lines.next() != Some("SIB-CHECKPOINT 1") {
        return Err(bad("unknown format"));
    }
    let mut get = std::collections::HashMap::new();
    for line in lines {
        if let Some((k, v)) = line.split_once(' ') {
            get.insert(k, v);
        }
    }
    let num = |k: &str| -> Result<f64> {
        get.get(k)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(&format!("bad or missing {k}")))
    };
    if get.get("endianness") != Some(&"little") || get.get("order") != Some(&"k-fastest") {
        return Err(bad("unsupported layout"));
    }
    let (nx, ny) = (num("nx")? as usize, num("ny")? as usize);
    let grid = Grid2D::new(num("lx")?, num("ly")?, nx, ny)?;
    let data = &bytes[end + 4..];
    if data.len() != 8 * 4 * nx * ny {
        return Err(bad("payload size does not match the grid"));
    }
    let mut vals = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")));
    let mut u = Array2::<Complex64>::zeros((nx, ny));
    let mut v = Array2::<f64>::zeros((nx, ny));
    let mut vt = Array2::<f64>::zeros((nx, ny));
    for l in 0..ny {
        for k in 0..nx {
            let re = vals.next().expect("sized");
            let im = vals.next().expect("sized");
            u[[k, l]] = Complex64::new(re, im);
        }
    }
    for block in [&mut v, &mut vt] {
        for l in 0..ny {
            for k in 0..nx {
                block[[k, l]] = vals.next().expect("sized");
            }
        }
    }
    State::new(
        num("t")?,
        Field::from_complex(&grid, u)?,
        Field::from_real(&grid, v)?,
        Field::from_real(&grid, vt)?,
    )
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    #[serde(deserialize_with = "crate::serde_nan::f64_or_nan")]
    pub measured: f64,
    #[serde(deserialize_with = "crate::serde_nan::f64_or_nan")]
    pub limit: f64,
    /// Distance to the limit on the passing side; negative when failed.
    #[serde(deserialize_with = "crate::serde_nan::f64_or_nan")]
    pub margin: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Assertion {
    /// `measured ≤ limit`.
    pub fn at_most(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured <= limit,
            measured,
            limit,
            margin: limit - measured,
            detail: String::new(),
        }
    }

    /// `measured ≥ limit`.
    pub fn at_least(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured >= limit,
            measured,
            limit,
            margin: measured - limit,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub sib_core: String,
    pub manifest_format: u32,
    pub checkpoint_format: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Self {
            sib_core: env!("CARGO_PKG_VERSION").to_owned(),
            manifest_format: 1,
            checkpoint_format: 1,
        }
    }
}

/// Record of one command invocation, written last and atomically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub exit_code: i32,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub config: RunConfig,
    pub versions: Versions,
    pub data_norms: Option<DataNorms>,
    pub constants: Option<EnvelopeConstants>,
    pub assertions: Vec<Assertion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_finite_t: Option<f64>,
    pub results: serde_json::Value,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            command: command.to_owned(),
            exit_code: 0,
            status: "pass".into(),
            message: None,
            config: config.clone(),
            versions: Versions::default(),
            data_norms: None,
            constants: None,
            assertions: Vec::new(),
            last_finite_t: None,
            results: serde_json::Value::Null,
            files: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    /// Inventory every file under `dir` (except manifests) and write `manifest.json`.
    pub fn write(&mut self, dir: &Path) -> Result<()> {
        self.files = inventory(dir)?;
        let text = serde_json::to_string_pretty(self)?;
        write_atomic(&dir.join("manifest.json"), text.as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn inventory(dir: &Path) -> Result<Vec<FileEntry>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let rel = path.strip_prefix(dir).unwrap_or(&path);
            if path == dir.join("manifest.json") || path.extension().is_some_and(|e| e == "tmp") {
                continue;
            }
            let bytes = fs::read(&path)?;
            out.push(FileEntry {
                path: rel.to_string_lossy().replace('\\', "/"),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(&bytes),
            });
        }
    }
    out.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(out)
}
