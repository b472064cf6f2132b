//! JSON channel files.
//!
//! ```json
//! { "dim": 2,
//!   "states": [ [[[1,0],[0,0]], [[0,0],[0,0]]], ... ],
//!   "costs": [0, 1] }
//! ```
//!
//! Each state is an `m x m` row-major matrix of `[re, im]` pairs. `costs` is
//! optional and defaults to all zeros.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::CqChannel;
use crate::error::{Error, Result};
use crate::hermitian::{ComplexMatrix, DensityMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub dim: usize,
    pub states: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<Vec<f64>>,
}

impl ChannelFile {
    pub fn from_channel(ch: &CqChannel, include_costs: bool) -> Self {
        let m = ch.m();
        let states = ch
            .states()
            .iter()
            .map(|s| {
                let mat = s.matrix().as_matrix();
                (0..m)
                    .map(|i| (0..m).map(|j| [mat[(i, j)].re, mat[(i, j)].im]).collect())
                    .collect()
            })
            .collect();
        Self {
            dim: m,
            states,
            costs: include_costs.then(|| ch.costs().to_vec()),
        }
    }

    /// Validates every state and builds the channel.
    pub fn into_channel(self) -> Result<CqChannel> {
        let m = self.dim;
        if m == 0 {
            return Err(Error::Parse("dim must be positive".into()));
        }
        let mut states = Vec::with_capacity(self.states.len());
        for (x, rows) in self.states.iter().enumerate() {
            if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                return Err(Error::Parse(format!("state {x} is not {m}x{m}")));
            }
            let rows: Vec<Vec<Complex64>> = rows
                .iter()
                .map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
                .collect();
            let raw = ComplexMatrix::from_rows(&rows)?;
            let state =
                DensityMatrix::new(raw).map_err(|e| Error::Parse(format!("state {x}: {e}")))?;
            states.push(state);
        }
        let n = states.len();
        CqChannel::new(states, self.costs.unwrap_or_else(|| vec![0.0; n]))
    }
}

pub fn parse_channel(json: &str) -> Result<CqChannel> {
    let file: ChannelFile = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_channel()
}

pub fn channel_to_json(ch: &CqChannel, include_costs: bool) -> String {
    serde_json::to_string_pretty(&ChannelFile::from_channel(ch, include_costs))
        .expect("channel file serializes")
}
