//! Directory archive: `manifest.json` plus one binary matrix file per member.
//!
//! Matrix file layout (little-endian): magic `PDMD`, u32 version = 1,
//! u8 dtype (0 = real64, 1 = complex128 interleaved re,im), 3 reserved zero
//! bytes, u64 m, u64 N, then `m * N` values in column-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array2, ShapeBuilder};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ParameterPoint, ParametricSnapshotSet, SnapshotMatrix, StoreError, TimeAxis};
use crate::C64;

pub(crate) const MAGIC: [u8; 4] = *b"PDMD";
pub(crate) const VERSION: u32 = 1;
const DTYPE_REAL64: u8 = 0;
const DTYPE_COMPLEX128: u8 = 1;

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("i/o failure on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    InvalidSet(#[from] StoreError),
    #[error("{path}: bad magic bytes, not a PDMD matrix file")]
    BadMagic { path: PathBuf },
    #[error("{path}: unsupported format version {found} (supported: {VERSION})")]
    UnsupportedVersion { path: PathBuf, found: u32 },
    #[error("{path}: unknown dtype code {found}")]
    UnknownDtype { path: PathBuf, found: u8 },
    #[error("{path}: dimension mismatch, {detail}")]
    DimensionMismatch { path: PathBuf, detail: String },
    #[error("{path}: non-finite value at row {row}, column {col}")]
    NonFinite { path: PathBuf, row: usize, col: usize },
    #[error("manifest {path}: {detail}")]
    BadManifest { path: PathBuf, detail: String },
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    field_name: String,
    t0: f64,
    dt: f64,
    count: usize,
    label_origin: i64,
    parameter_dim: usize,
    members: Vec<ManifestMember>,
}

#[derive(Serialize, Deserialize)]
struct ManifestMember {
    file: String,
    parameter: Vec<f64>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ArchiveError + '_ {
    move |source| ArchiveError::Io { path: path.to_path_buf(), source }
}

/// Writes `set` as a directory archive, creating `destination` if needed.
///
/// Invariant violations are reported before anything is written. Matrices
/// whose imaginary parts are all exactly zero (bit pattern) are stored with
/// the compact real encoding; round-tripping is bit-exact either way.
pub fn write_archive(set: &ParametricSnapshotSet, destination: &Path) -> Result<(), ArchiveError> {
    let violations = set.validate();
    if !violations.is_empty() {
        return Err(StoreError::InvalidSet { violations }.into());
    }
    std::fs::create_dir_all(destination).map_err(io_err(destination))?;

    let mut members = Vec::with_capacity(set.member_count());
    for (i, member) in set.members().iter().enumerate() {
        let file = format!("member_{i:04}.bin");
        write_matrix(&destination.join(&file), member.values())?;
        members.push(ManifestMember {
            file,
            parameter: member.parameter().coords().to_vec(),
        });
    }

    let manifest = Manifest {
        field_name: set.field_name().to_string(),
        t0: set.time_axis().t0(),
        dt: set.time_axis().dt(),
        count: set.time_axis().count(),
        label_origin: set.time_axis().label_origin(),
        parameter_dim: set.parameter_dim(),
        members,
    };
    let manifest_path = destination.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest)
        .expect("manifest serialization cannot fail");
    std::fs::write(&manifest_path, json).map_err(io_err(&manifest_path))?;
    Ok(())
}

/// Reads a directory archive written by [`write_archive`].
pub fn read_archive(source: &Path) -> Result<ParametricSnapshotSet, ArchiveError> {
    let manifest_path = source.join("manifest.json");
    let json = std::fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
    let manifest: Manifest = serde_json::from_str(&json).map_err(|e| ArchiveError::BadManifest {
        path: manifest_path.clone(),
        detail: e.to_string(),
    })?;

    let axis = TimeAxis::new(manifest.t0, manifest.dt, manifest.count, manifest.label_origin)?;
    let mut members = Vec::with_capacity(manifest.members.len());
    let mut space_dim = None;
    for entry in &manifest.members {
        let path = source.join(&entry.file);
        let values = read_matrix(&path)?;
        if values.ncols() != manifest.count {
            return Err(ArchiveError::DimensionMismatch {
                path,
                detail: format!(
                    "{} columns in payload, manifest count is {}",
                    values.ncols(),
                    manifest.count
                ),
            });
        }
        match space_dim {
            None => space_dim = Some(values.nrows()),
            Some(m) if m != values.nrows() => {
                return Err(ArchiveError::DimensionMismatch {
                    path,
                    detail: format!("{} rows, other members have {m}", values.nrows()),
                });
            }
            _ => {}
        }
        if entry.parameter.len() != manifest.parameter_dim {
            return Err(ArchiveError::BadManifest {
                path: manifest_path.clone(),
                detail: format!(
                    "member {} has parameter dimension {}, manifest declares {}",
                    entry.file,
                    entry.parameter.len(),
                    manifest.parameter_dim
                ),
            });
        }
        members.push(SnapshotMatrix::new(
            ParameterPoint::new(entry.parameter.clone())?,
            values,
        ));
    }

    Ok(ParametricSnapshotSet::new(axis, manifest.field_name, members)?)
}

/// Writes one matrix in the binary layout. Shared with the model file, which
/// stores POD and DMD mode matrices in the same format.
pub(crate) fn write_matrix(path: &Path, values: &Array2<C64>) -> Result<(), ArchiveError> {
    let all_real = values.iter().all(|v| v.im.to_bits() == 0);
    let dtype = if all_real { DTYPE_REAL64 } else { DTYPE_COMPLEX128 };

    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut header = Vec::with_capacity(28);
    header.extend_from_slice(&MAGIC);
    header.extend_from_slice(&VERSION.to_le_bytes());
    header.push(dtype);
    header.extend_from_slice(&[0u8; 3]);
    header.extend_from_slice(&(values.nrows() as u64).to_le_bytes());
    header.extend_from_slice(&(values.ncols() as u64).to_le_bytes());
    w.write_all(&header).map_err(io_err(path))?;

    for col in values.columns() {
        for v in col {
            w.write_all(&v.re.to_le_bytes()).map_err(io_err(path))?;
            if dtype == DTYPE_COMPLEX128 {
                w.write_all(&v.im.to_le_bytes()).map_err(io_err(path))?;
            }
        }
    }
    w.flush().map_err(io_err(path))
}

/// Reads one matrix in the binary layout, checking header and payload size.
pub(crate) fn read_matrix(path: &Path) -> Result<Array2<C64>, ArchiveError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut r = BufReader::new(file);

    let mut header = [0u8; 28];
    r.read_exact(&mut header).map_err(|_| ArchiveError::DimensionMismatch {
        path: path.to_path_buf(),
        detail: "file shorter than the 28-byte header".into(),
    })?;
    if header[0..4] != MAGIC {
        return Err(ArchiveError::BadMagic { path: path.to_path_buf() });
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(ArchiveError::UnsupportedVersion { path: path.to_path_buf(), found: version });
    }
    let dtype = header[8];
    if dtype != DTYPE_REAL64 && dtype != DTYPE_COMPLEX128 {
        return Err(ArchiveError::UnknownDtype { path: path.to_path_buf(), found: dtype });
    }
    let m = u64::from_le_bytes(header[12..20].try_into().unwrap()) as usize;
    let n = u64::from_le_bytes(header[20..28].try_into().unwrap()) as usize;

    let scalars_per_value = if dtype == DTYPE_COMPLEX128 { 2 } else { 1 };
    let expected = m
        .checked_mul(n)
        .and_then(|v| v.checked_mul(scalars_per_value * 8))
        .ok_or_else(|| ArchiveError::DimensionMismatch {
            path: path.to_path_buf(),
            detail: format!("header dimensions {m} x {n} overflow"),
        })?;
    let mut payload = vec![0u8; expected];
    r.read_exact(&mut payload).map_err(|_| ArchiveError::DimensionMismatch {
        path: path.to_path_buf(),
        detail: format!("payload shorter than the {expected} bytes implied by the header"),
    })?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing).map_err(io_err(path))? != 0 {
        return Err(ArchiveError::DimensionMismatch {
            path: path.to_path_buf(),
            detail: "payload longer than implied by the header".into(),
        });
    }

    let mut data = Vec::with_capacity(m * n);
    for chunk in payload.chunks_exact(scalars_per_value * 8) {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = if dtype == DTYPE_COMPLEX128 {
            f64::from_le_bytes(chunk[8..16].try_into().unwrap())
        } else {
            0.0
        };
        data.push(C64::new(re, im));
    }
    // payload was written column by column
    let values = Array2::from_shape_vec((m, n).f(), data)
        .expect("shape matches payload length by construction");
    if let Some(((row, col), _)) = values
        .indexed_iter()
        .find(|(_, v)| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(ArchiveError::NonFinite { path: path.to_path_buf(), row, col });
    }
    Ok(values)
}
