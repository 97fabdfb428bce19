//! JSON checkpoints. Weight arrays are row-major and stored as base64 of the
//! raw little-endian `f64` bytes, so a save / load round trip is bit-exact.

use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use svcdep_core::encoder::Dense;
use svcdep_core::{Activation, Matrix, ModelDims, ModelParams, StandardizationStats};

use crate::error::RunError;

pub const FORMAT_VERSION: u32 = 1;

/// Trained parameters plus the standardization they were trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub stats: Option<StandardizationStats>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    format_version: u32,
    dims: ModelDims,
    activation: Activation,
    embed: Vec<DenseFile>,
    gcn: Vec<MatrixFile>,
    stats: Option<StatsFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    data: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DenseFile {
    weight: MatrixFile,
    bias: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StatsFile {
    mean: String,
    std: String,
    clamped: Vec<bool>,
}

fn encode(values: &[f64]) -> String {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    STANDARD.encode(bytes)
}

fn decode(text: &str, expected: usize, what: &str) -> Result<Vec<f64>, RunError> {
    let bytes = STANDARD.decode(text).map_err(|e| RunError::Config(format!("checkpoint {what}: {e}")))?;
    if bytes.len() != expected * 8 {
        return Err(RunError::Config(format!("checkpoint {what}: {} bytes, expected {}", bytes.len(), expected * 8)));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

impl MatrixFile {
    fn from_matrix(m: &Matrix) -> Self {
        Self { rows: m.rows(), cols: m.cols(), data: encode(m.as_slice()) }
    }

    fn to_matrix(&self, what: &str) -> Result<Matrix, RunError> {
        Ok(Matrix::from_vec(self.rows, self.cols, decode(&self.data, self.rows * self.cols, what)?))
    }
}

impl Checkpoint {
    pub fn to_json(&self) -> String {
        let file = CheckpointFile {
            format_version: FORMAT_VERSION,
            dims: self.params.dims,
            activation: self.params.activation,
            embed: self.params.embed.iter().map(|l| DenseFile { weight: MatrixFile::from_matrix(&l.weight), bias: encode(&l.bias) }).collect(),
            gcn: self.params.gcn.iter().map(MatrixFile::from_matrix).collect(),
            stats: self.stats.as_ref().map(|s| StatsFile { mean: encode(&s.mean), std: encode(&s.std), clamped: s.clamped.clone() }),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("checkpoint serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, RunError> {
        let file: CheckpointFile = serde_json::from_str(text)?;
        if file.format_version != FORMAT_VERSION {
            return Err(RunError::Config(format!("unsupported checkpoint format_version {}", file.format_version)));
        }
        let embed = file
            .embed
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let weight = l.weight.to_matrix(&format!("embed[{k}].weight"))?;
                let bias = decode(&l.bias, weight.cols(), &format!("embed[{k}].bias"))?;
                Ok(Dense { weight, bias })
            })
            .collect::<Result<Vec<_>, RunError>>()?;
        let gcn = file.gcn.iter().enumerate().map(|(k, m)| m.to_matrix(&format!("gcn[{k}].weight"))).collect::<Result<Vec<_>, _>>()?;
        let params = ModelParams { dims: file.dims, activation: file.activation, embed, gcn };
        params.validate()?;
        let stats = match file.stats {
            Some(s) => {
                let d = s.clamped.len();
                Some(StandardizationStats { mean: decode(&s.mean, d, "stats.mean")?, std: decode(&s.std, d, "stats.std")?, clamped: s.clamped })
            }
            None => None,
        };
        Ok(Self { params, stats })
    }

    pub fn save(&self, path: &Path) -> Result<(), RunError> {
        crate::io::write_text(path, &self.to_json())
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("cannot read checkpoint {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use svcdep_core::encoder::init_params;

    #[test]
    fn round_trip_is_bit_exact() {
        let dims = ModelDims { d_in: 7, d_hid: 5, d_emb: 4, gcn_layers: 2 };
        let mut params = init_params(dims, Activation::Relu, 3).unwrap();
        params.embed[0].bias[1] = f64::MIN_POSITIVE / 3.0;
        params.gcn[1].as_mut_slice()[0] = -0.1 - f64::EPSILON;
        let stats = StandardizationStats { mean: vec![0.1; 7], std: vec![1.0 / 3.0; 7], clamped: vec![false; 7] };
        let ck = Checkpoint { params, stats: Some(stats) };
        let back = Checkpoint::from_json(&ck.to_json()).unwrap();
        assert_eq!(back, ck);
        for ((_, a), (_, b)) in ck.params.blocks().iter().zip(back.params.blocks().iter()) {
            assert!(a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn rejects_other_versions_and_bad_shapes() {
        let dims = ModelDims { d_in: 2, d_hid: 2, d_emb: 2, gcn_layers: 0 };
        let ck = Checkpoint { params: init_params(dims, Activation::Relu, 0).unwrap(), stats: None };
        let text = ck.to_json();
        assert!(Checkpoint::from_json(&text.replace("\"format_version\": 1", "\"format_version\": 9")).is_err());
        assert!(Checkpoint::from_json(&text.replace("\"gcn_layers\": 0", "\"gcn_layers\": 1")).is_err());
    }
}
