//! Checkpoint directory format: `config.json` (configuration snapshot and
//! counters), `params.bin` (model parameters plus optimizer moments), and a
//! copy of the vocabulary file. Reloading reproduces bit-identical greedy
//! generations.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::adam::Adam;
use crate::config::{ModelConfig, TrainConfig};
use crate::error::ModelError;
use crate::scalar::Scalar;
use crate::transformer::{ParamSet, Transformer};

const MAGIC: u32 = 0x4154_4B50; // "ATKP"
const VERSION: u32 = 1;

/// Everything in `config.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub model_name: String,
    pub task: automata_pipeline::Task,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub scalar: String,
    pub global_step: u64,
    pub epoch: u64,
    /// Basename of the vocabulary copy inside the checkpoint directory.
    pub vocab_file: String,
    /// Basename of the training log next to the checkpoint directory.
    pub train_log: String,
}

pub struct Checkpoint<F: Scalar> {
    pub meta: CheckpointMeta,
    pub model: Transformer<F>,
    pub optimizer: Adam<F>,
}

/// Writes the checkpoint directory, creating it if needed.
pub fn save_checkpoint<F: Scalar>(
    dir: &Path,
    meta: &CheckpointMeta,
    model: &Transformer<F>,
    optimizer: &Adam<F>,
) -> Result<(), ModelError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(
        dir.join("config.json"),
        serde_json::to_string_pretty(meta)? + "\n",
    )?;

    let mut out = BufWriter::new(std::fs::File::create(dir.join("params.bin"))?);
    out.write_u32::<LittleEndian>(MAGIC)?;
    out.write_u32::<LittleEndian>(VERSION)?;
    out.write_u64::<LittleEndian>(optimizer.step)?;

    write_set(&mut out, &model.params, "param")?;
    write_set(&mut out, &optimizer.m, "adam_m")?;
    write_set(&mut out, &optimizer.v, "adam_v")?;
    out.flush()?;
    Ok(())
}

/// Reads `config.json` alone; callers that only need metadata avoid the
/// payload cost.
pub fn load_meta(dir: &Path) -> Result<CheckpointMeta, ModelError> {
    let text = std::fs::read_to_string(dir.join("config.json"))?;
    Ok(serde_json::from_str(&text)?)
}

/// Reconstructs the model and optimizer from a checkpoint directory. The
/// scalar width must match what was saved.
pub fn load_checkpoint<F: Scalar>(dir: &Path) -> Result<Checkpoint<F>, ModelError> {
    let meta = load_meta(dir)?;
    if meta.scalar != F::DTYPE {
        return Err(ModelError::CheckpointFormat(format!(
            "checkpoint holds {} parameters but {} was requested",
            meta.scalar,
            F::DTYPE
        )));
    }
    let mut input = BufReader::new(std::fs::File::open(dir.join("params.bin"))?);
    let magic = input.read_u32::<LittleEndian>()?;
    if magic != MAGIC {
        return Err(ModelError::CheckpointFormat(format!(
            "bad magic 0x{magic:08X}"
        )));
    }
    let version = input.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(ModelError::CheckpointFormat(format!(
            "unsupported payload version {version}"
        )));
    }
    let opt_step = input.read_u64::<LittleEndian>()?;

    let params = read_set::<F, _>(&mut input, &meta.model, "param")?;
    let m = read_set::<F, _>(&mut input, &meta.model, "adam_m")?;
    let v = read_set::<F, _>(&mut input, &meta.model, "adam_v")?;

    let model = Transformer::from_parts(meta.model.clone(), params)?;
    let mut optimizer = Adam::new(&meta.model);
    optimizer.m = m;
    optimizer.v = v;
    optimizer.step = opt_step;
    Ok(Checkpoint {
        meta,
        model,
        optimizer,
    })
}

/// Path of the params payload, used to check checkpoint presence.
pub fn checkpoint_payload(dir: &Path) -> PathBuf {
    dir.join("params.bin")
}

fn write_set<F: Scalar, W: Write>(
    out: &mut W,
    set: &ParamSet<F>,
    section: &str,
) -> Result<(), ModelError> {
    let tensors = set.tensors();
    out.write_u32::<LittleEndian>(tensors.len() as u32)?;
    for (name, tensor) in tensors {
        let full = format!("{section}.{name}");
        let bytes = full.as_bytes();
        out.write_u16::<LittleEndian>(bytes.len() as u16)?;
        out.write_all(bytes)?;
        out.write_u64::<LittleEndian>(tensor.nrows() as u64)?;
        out.write_u64::<LittleEndian>(tensor.ncols() as u64)?;
        for &v in tensor.iter() {
            match F::DTYPE {
                "f32" => out.write_f32::<LittleEndian>(v.to_f32().expect("f32 fits"))?,
                _ => out.write_f64::<LittleEndian>(v.to_f64().expect("f64 fits"))?,
            }
        }
    }
    Ok(())
}

fn read_set<F: Scalar, R: Read>(
    input: &mut R,
    cfg: &ModelConfig,
    section: &str,
) -> Result<ParamSet<F>, ModelError> {
    let mut set = ParamSet::<F>::zeros(cfg);
    let expected = set.tensors().len() as u32;
    let count = input.read_u32::<LittleEndian>()?;
    if count != expected {
        return Err(ModelError::CheckpointShape {
            stored: format!("{count} tensors in section {section}"),
            expected: format!("{expected} tensors"),
        });
    }
    for (name, tensor) in set.tensors_mut() {
        let full = format!("{section}.{name}");
        let len = input.read_u16::<LittleEndian>()? as usize;
        let mut buf = vec![0u8; len];
        input.read_exact(&mut buf)?;
        let stored_name = String::from_utf8(buf)
            .map_err(|e| ModelError::CheckpointFormat(format!("bad tensor name: {e}")))?;
        if stored_name != full {
            return Err(ModelError::CheckpointShape {
                stored: stored_name,
                expected: full,
            });
        }
        let rows = input.read_u64::<LittleEndian>()? as usize;
        let cols = input.read_u64::<LittleEndian>()? as usize;
        if rows != tensor.nrows() || cols != tensor.ncols() {
            return Err(ModelError::CheckpointShape {
                stored: format!("{full}: {rows}x{cols}"),
                expected: format!("{full}: {}x{}", tensor.nrows(), tensor.ncols()),
            });
        }
        let mut flat = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            let v: F = match F::DTYPE {
                "f32" => F::from_f32(input.read_f32::<LittleEndian>()?)
                    .expect("f32 converts to scalar"),
                _ => F::from_f64(input.read_f64::<LittleEndian>()?)
                    .expect("f64 converts to scalar"),
            };
            flat.push(v);
        }
        *tensor = Array2::from_shape_vec((rows, cols), flat)
            .map_err(|e| ModelError::CheckpointFormat(format!("tensor {full}: {e}")))?;
    }
    Ok(set)
}
