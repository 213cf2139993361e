//! Network checkpoints.
//!
//! JSON object holding the hyperparameter config, the init seed, optional
//! provenance metadata, and every parameter block as `{shape, row-major
//! data}`. Floats serialize in shortest round-trip form, so a loaded
//! checkpoint reproduces forward outputs bitwise.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{HybridNetParams, NetConfig};
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockJson {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub config: NetConfig,
    pub seed: u64,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
    pub blocks: BTreeMap<String, BlockJson>,
}

impl Checkpoint {
    pub fn from_net(net: &HybridNetParams, seed: u64, meta: BTreeMap<String, String>) -> Self {
        let blocks = net
            .all_blocks()
            .into_iter()
            .map(|(name, shape, data)| (name, BlockJson { shape, data }))
            .collect();
        Checkpoint {
            config: net.config.clone(),
            seed,
            meta,
            blocks,
        }
    }

    pub fn into_net(&self) -> Result<HybridNetParams> {
        let mut net = HybridNetParams::init(&self.config, self.seed)?;
        let expected: Vec<String> = net.all_blocks().into_iter().map(|(n, _, _)| n).collect();
        for name in &expected {
            let block = self.blocks.get(name).ok_or_else(|| {
                CoreError::Format(format!("checkpoint missing block {name}"))
            })?;
            net.set_block(name, &block.data)?;
        }
        Ok(net)
    }
}

pub fn save_checkpoint(
    net: &HybridNetParams,
    seed: u64,
    meta: BTreeMap<String, String>,
    path: &Path,
) -> Result<()> {
    let ckpt = Checkpoint::from_net(net, seed, meta);
    let text = serde_json::to_string_pretty(&ckpt).map_err(|e| CoreError::Format(e.to_string()))?;
    fs::write(path, text).map_err(|e| CoreError::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<(HybridNetParams, Checkpoint)> {
    let text = fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    let ckpt: Checkpoint =
        serde_json::from_str(&text).map_err(|e| CoreError::Format(format!("checkpoint: {e}")))?;
    let net = ckpt.into_net()?;
    Ok((net, ckpt))
}
