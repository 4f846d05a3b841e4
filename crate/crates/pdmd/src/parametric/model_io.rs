//! Model directory: `model.json` with the metadata, spectra and amplitudes,
//! plus one binary matrix file per mode set in the snapshot-store layout.

use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ParametricDmdModel, Variant};
use crate::dmd::{AmplitudeStrategy, Disposition, DmdConfig, StabilizationEntry};
use crate::pod::PodError;
use crate::regression::RegressorSpec;
use crate::store::{ArchiveError, ParameterPoint, StoreError, TimeAxis};
use crate::{C64, DmdModel, PodBasis};

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("i/o failure on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("model.json at {path}: {detail}")]
    BadModelFile { path: PathBuf, detail: String },
    #[error("unsupported model format version {found} (supported: {FORMAT_VERSION})")]
    UnsupportedVersion { found: u32 },
    #[error("{0}")]
    Matrix(#[from] ArchiveError),
    #[error("{0}")]
    Store(#[from] StoreError),
    #[error("stored POD block rejected: {0}")]
    Pod(#[from] PodError),
    #[error("inconsistent model: {0}")]
    Inconsistent(String),
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    variant: Variant,
    field_name: String,
    pod_rank: usize,
    dmd_config: DmdConfig,
    parameters: Vec<Vec<f64>>,
    time_axis: TimeAxis,
    online_defaults: RegressorSpec,
    pod: PodBlock,
    dmd: Vec<DmdBlock>,
}

#[derive(Serialize, Deserialize)]
struct PodBlock {
    n: usize,
    singular_values: Vec<f64>,
    modes_file: String,
}

#[derive(Serialize, Deserialize)]
struct DmdBlock {
    d: usize,
    label_origin: i64,
    amplitude_strategy: AmplitudeStrategy,
    eigenvalues: Vec<[f64; 2]>,
    amplitudes: Vec<[f64; 2]>,
    stabilization_record: Vec<StabilizationRecordEntry>,
    one_step_residual: f64,
    one_step_residual_rel: f64,
    modes_file: String,
}

#[derive(Serialize, Deserialize)]
struct StabilizationRecordEntry {
    disposition: Disposition,
    eigenvalue: [f64; 2],
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ModelIoError + '_ {
    move |source| ModelIoError::Io { path: path.to_path_buf(), source }
}

fn pairs(values: &Array1<C64>) -> Vec<[f64; 2]> {
    values.iter().map(|v| [v.re, v.im]).collect()
}

fn unpairs(values: &[[f64; 2]]) -> Array1<C64> {
    values.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

/// Writes the model as a directory with `model.json` and the mode matrices.
pub fn write_model(model: &ParametricDmdModel, destination: &Path) -> Result<(), ModelIoError> {
    std::fs::create_dir_all(destination).map_err(io_err(destination))?;

    let pod_file = "pod_modes.bin".to_string();
    crate::store::archive_write_matrix(
        &destination.join(&pod_file),
        &model.pod().modes().to_owned(),
    )?;

    let mut dmd_blocks = Vec::with_capacity(model.operators().len());
    for (i, operator) in model.operators().iter().enumerate() {
        let modes_file = format!("dmd_modes_{i:04}.bin");
        crate::store::archive_write_matrix(
            &destination.join(&modes_file),
            &operator.modes().to_owned(),
        )?;
        dmd_blocks.push(DmdBlock {
            d: operator.depth(),
            label_origin: operator.label_origin(),
            amplitude_strategy: operator.amplitude_strategy(),
            eigenvalues: pairs(operator.eigenvalues()),
            amplitudes: pairs(operator.amplitudes()),
            stabilization_record: operator
                .stabilization_record()
                .iter()
                .map(|e| StabilizationRecordEntry {
                    disposition: e.disposition,
                    eigenvalue: [e.original.re, e.original.im],
                })
                .collect(),
            one_step_residual: operator.one_step_residual(),
            one_step_residual_rel: operator.one_step_residual_rel(),
            modes_file,
        });
    }

    let file = ModelFile {
        format_version: FORMAT_VERSION,
        variant: model.variant(),
        field_name: model.field_name().to_string(),
        pod_rank: model.pod().rank(),
        dmd_config: *model.dmd_config(),
        parameters: model.parameters().iter().map(|p| p.coords().to_vec()).collect(),
        time_axis: *model.time_axis(),
        online_defaults: *model.online_defaults(),
        pod: PodBlock {
            n: model.pod().rank(),
            singular_values: model.pod().singular_values().to_vec(),
            modes_file: pod_file,
        },
        dmd: dmd_blocks,
    };
    let path = destination.join("model.json");
    let json = serde_json::to_string_pretty(&file).expect("model serialization cannot fail");
    std::fs::write(&path, json).map_err(io_err(&path))
}

/// Reads a model directory written by [`write_model`].
///
/// The returned model forecasts and reports as usual; re-stabilization is not
/// available because training data is not part of the serialized form.
pub fn read_model(source: &Path) -> Result<ParametricDmdModel, ModelIoError> {
    let path = source.join("model.json");
    let json = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    let file: ModelFile = serde_json::from_str(&json).map_err(|e| ModelIoError::BadModelFile {
        path: path.clone(),
        detail: e.to_string(),
    })?;
    if file.format_version != FORMAT_VERSION {
        return Err(ModelIoError::UnsupportedVersion { found: file.format_version });
    }

    let pod_modes = crate::store::archive_read_matrix(&source.join(&file.pod.modes_file))?;
    if pod_modes.ncols() != file.pod.n {
        return Err(ModelIoError::Inconsistent(format!(
            "pod block declares rank {}, modes file has {} columns",
            file.pod.n,
            pod_modes.ncols()
        )));
    }
    let pod = PodBasis::from_parts(pod_modes, file.pod.singular_values.clone())?;

    let expected_operators = match file.variant {
        Variant::Monolithic => 1,
        Variant::Partitioned => file.parameters.len(),
    };
    if file.dmd.len() != expected_operators {
        return Err(ModelIoError::Inconsistent(format!(
            "{} operators stored, variant {} needs {expected_operators}",
            file.dmd.len(),
            file.variant
        )));
    }

    let mut operators = Vec::with_capacity(file.dmd.len());
    for block in &file.dmd {
        let modes: Array2<C64> =
            crate::store::archive_read_matrix(&source.join(&block.modes_file))?;
        if modes.ncols() != block.eigenvalues.len()
            || block.amplitudes.len() != block.eigenvalues.len()
        {
            return Err(ModelIoError::Inconsistent(format!(
                "dmd block {}: {} modes, {} eigenvalues, {} amplitudes",
                block.modes_file,
                modes.ncols(),
                block.eigenvalues.len(),
                block.amplitudes.len()
            )));
        }
        let stabilization = block
            .stabilization_record
            .iter()
            .map(|e| StabilizationEntry {
                original: C64::new(e.eigenvalue[0], e.eigenvalue[1]),
                disposition: e.disposition,
            })
            .collect();
        operators.push(DmdModel::from_parts(
            modes,
            unpairs(&block.eigenvalues),
            unpairs(&block.amplitudes),
            block.d,
            block.label_origin,
            block.amplitude_strategy,
            stabilization,
            block.one_step_residual,
            block.one_step_residual_rel,
        ));
    }

    let parameters = file
        .parameters
        .iter()
        .map(|coords| ParameterPoint::new(coords.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    if parameters.is_empty() {
        return Err(ModelIoError::Inconsistent("model has no parameters".into()));
    }

    Ok(ParametricDmdModel::from_parts(
        file.variant,
        pod,
        operators,
        parameters,
        file.time_axis,
        file.dmd_config,
        file.online_defaults,
        file.field_name,
    ))
}
