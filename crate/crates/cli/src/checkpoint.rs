//! Line-delimited, schema-versioned checkpoint records. The first line
//! binds the checkpoint to a config hash; each further line stores one
//! completed sweep point. A torn trailing line (from a killed process) is
//! ignored on load, so resumption only ever sees fully committed rows.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub const CHECKPOINT_SCHEMA: u32 = 1;

/// One sweep point's results; `None` measures mean the point failed or the
/// mechanism was not requested.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ResultRow {
    pub index: usize,
    pub omega_q_ghz: f64,
    pub n_r: f64,
    pub t_total_w: Option<f64>,
    pub t_photons_per_s: Option<f64>,
    pub t_rad_w: Option<f64>,
    pub t_diel_w: Option<f64>,
    pub t_qpg_w: Option<f64>,
    pub kappa_pred_mhz: Option<f64>,
    pub n_ch: Option<usize>,
    pub d_active: Option<usize>,
    pub status: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Record {
    Header { schema: u32, config_hash: String },
    Point { row: ResultRow },
}

/// Append-only checkpoint writer.
pub struct CheckpointWriter {
    file: File,
}

impl CheckpointWriter {
    /// Create a fresh checkpoint (truncating any previous one).
    pub fn create(path: &Path, config_hash: &str) -> anyhow::Result<Self> {
        let mut file = File::create(path)
            .with_context(|| format!("creating checkpoint {}", path.display()))?;
        let header = Record::Header {
            schema: CHECKPOINT_SCHEMA,
            config_hash: config_hash.to_string(),
        };
        writeln!(file, "{}", serde_json::to_string(&header)?)?;
        file.flush()?;
        Ok(CheckpointWriter { file })
    }

    /// Open an existing checkpoint for appending.
    pub fn append(path: &Path) -> anyhow::Result<Self> {
        let file = OpenOptions::new()
            .append(true)
            .open(path)
            .with_context(|| format!("opening checkpoint {}", path.display()))?;
        Ok(CheckpointWriter { file })
    }

    pub fn commit(&mut self, row: &ResultRow) -> anyhow::Result<()> {
        let record = Record::Point { row: row.clone() };
        writeln!(self.file, "{}", serde_json::to_string(&record)?)?;
        self.file.flush()?;
        Ok(())
    }
}

/// Completed rows from a checkpoint file, validated against the config
/// hash. Malformed trailing data is tolerated; a malformed header or a
/// hash mismatch is not.
pub fn load_checkpoint(
    path: &Path,
    expected_hash: &str,
) -> anyhow::Result<BTreeMap<usize, ResultRow>> {
    let file =
        File::open(path).with_context(|| format!("opening checkpoint {}", path.display()))?;
    let mut lines = BufReader::new(file).lines();
    let header_line = match lines.next() {
        Some(l) => l?,
        None => bail!("checkpoint {} is empty", path.display()),
    };
    match serde_json::from_str::<Record>(&header_line) {
        Ok(Record::Header {
            schema,
            config_hash,
        }) => {
            if schema != CHECKPOINT_SCHEMA {
                bail!("checkpoint schema {schema} unsupported (expected {CHECKPOINT_SCHEMA})");
            }
            if config_hash != expected_hash {
                bail!(
                    "checkpoint was produced by a different config \
                     (hash {config_hash} != {expected_hash}); refusing to resume"
                );
            }
        }
        _ => bail!("checkpoint {} has no valid header", path.display()),
    }
    let mut rows = BTreeMap::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Record>(&line) {
            Ok(Record::Point { row }) => {
                rows.insert(row.index, row);
            }
            Ok(Record::Header { .. }) => bail!("unexpected second header in checkpoint"),
            // torn trailing line from a killed writer
            Err(_) => break,
        }
    }
    Ok(rows)
}
