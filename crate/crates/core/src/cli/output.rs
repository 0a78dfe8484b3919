//! Artifact directory: CSV, JSON and PNG writers plus the run manifest.
//!
//! Every file goes through [`Artifacts`], which records its SHA-256. A
//! `FAILED` marker sits in the directory from the start of a run until the
//! manifest has been written.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::geometry::Point;
use crate::{Error, Result};

pub const MANIFEST: &str = "manifest.json";
pub const FAILED_MARKER: &str = "FAILED";
pub const MANIFEST_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Only field expected to differ between identical runs.
    pub created_unix: u64,
    pub config: Value,
    pub seeds: Value,
    pub reports: Value,
    pub definitions: Value,
    pub calibration_targets: Value,
    pub files: Vec<FileEntry>,
}

pub struct Artifacts {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl Artifacts {
    /// Prepares `root`: removes a stale manifest and drops the FAILED marker.
    pub fn open(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        let manifest = root.join(MANIFEST);
        if manifest.exists() {
            fs::remove_file(&manifest)?;
        }
        fs::write(root.join(FAILED_MARKER), b"run started; no manifest written yet\n")?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        let entry = FileEntry {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        };
        match self.files.iter_mut().find(|f| f.path == name) {
            Some(f) => *f = entry,
            None => self.files.push(entry),
        }
        Ok(())
    }

    pub fn write_csv<R: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = R>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    pub fn write_png(&mut self, name: &str, raster: &Raster) -> Result<()> {
        let bytes = raster.encode()?;
        self.write_bytes(name, &bytes)
    }

    /// Writes the manifest and clears the FAILED marker.
    pub fn finish(self, mut manifest: Manifest) -> Result<PathBuf> {
        manifest.files = self.files;
        manifest.created_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let path = self.root.join(MANIFEST);
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        fs::write(&path, bytes)?;
        let marker = self.root.join(FAILED_MARKER);
        if marker.exists() {
            fs::remove_file(marker)?;
        }
        Ok(path)
    }
}

/// 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

/// Floor intensity of an empty atom, so the lattice stays visible.
const EMPTY_LEVEL: u8 = 40;

impl Raster {
    /// One square marker per atom, brightness `sqrt(p / p_max)`.
    pub fn populations(positions: &[Point], populations: &[f64], size: u32) -> Self {
        let size = size.max(16);
        let mut pixels = vec![0u8; (size * size) as usize];
        if positions.is_empty() {
            return Self {
                width: size,
                height: size,
                pixels,
            };
        }
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in positions {
            x0 = x0.min(p[0]);
            x1 = x1.max(p[0]);
            y0 = y0.min(p[1]);
            y1 = y1.max(p[1]);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-12);
        let margin = 0.06 * size as f64;
        let scale = (size as f64 - 2.0 * margin) / span;
        let pmax = populations.iter().copied().fold(0.0, f64::max);
        let half = ((size as f64 / positions.len().max(1) as f64).sqrt().round() as i64).clamp(1, 4);
        for (p, &pop) in positions.iter().zip(populations) {
            let level = if pmax > 0.0 {
                let v = (pop.max(0.0) / pmax).sqrt();
                (EMPTY_LEVEL as f64 + v * (255.0 - EMPTY_LEVEL as f64)).round() as u8
            } else {
                EMPTY_LEVEL
            };
            // image rows run top to bottom
            let cx = (margin + (p[0] - x0) * scale).round() as i64;
            let cy = (size as f64 - margin - (p[1] - y0) * scale).round() as i64;
            for dy in -half..=half {
                for dx in -half..=half {
                    let (x, y) = (cx + dx, cy + dy);
                    if x >= 0 && y >= 0 && x < size as i64 && y < size as i64 {
                        let px = &mut pixels[(y as u32 * size + x as u32) as usize];
                        *px = (*px).max(level);
                    }
                }
            }
        }
        Self {
            width: size,
            height: size,
            pixels,
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width, self.height);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Eight);
            let mut w = enc.write_header().map_err(|e| Error::Png(e.to_string()))?;
            w.write_image_data(&self.pixels).map_err(|e| Error::Png(e.to_string()))?;
        }
        Ok(out)
    }
}
