//! JSON interchange formats for states and channels.
//!
//! Matrices are row-major lists of rows, each entry a `[re, im]` pair:
//!
//! ```json
//! {"dims": [2], "matrix": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::{ChannelTag, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::state::DensityMatrix;

pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_rows(m: &CMatrix) -> MatrixRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &MatrixRows) -> Result<CMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Parse("matrix rows must be nonempty and equal length".into()));
    }
    Ok(CMatrix::from_fn(r, c, |i, j| {
        C64::new(rows[i][j][0], rows[i][j][1])
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub matrix: MatrixRows,
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        Self {
            dims: rho.dims().to_vec(),
            matrix: matrix_to_rows(rho.matrix()),
        }
    }

    pub fn into_state(self) -> Result<DensityMatrix> {
        DensityMatrix::validate(rows_to_matrix(&self.matrix)?, self.dims)
    }
}

pub fn state_to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string(&StateFile::from_state(rho)).expect("state serializes")
}

pub fn state_from_json(text: &str) -> Result<DensityMatrix> {
    serde_json::from_str::<StateFile>(text)?.into_state()
}

pub fn load_state(path: impl AsRef<Path>) -> Result<DensityMatrix> {
    state_from_json(&std::fs::read_to_string(path)?)
}

pub fn save_state(path: impl AsRef<Path>, rho: &DensityMatrix) -> Result<()> {
    std::fs::write(path, state_to_json(rho))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dims: Vec<usize>,
    pub tag: ChannelTag,
    pub kraus: Vec<MatrixRows>,
    /// Per-Kraus-operator list of per-site factors (`local_product` only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Vec<MatrixRows>>>,
}

impl ChannelFile {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        Self {
            dims: ch.dims().to_vec(),
            tag: ch.tag(),
            kraus: ch.kraus().iter().map(matrix_to_rows).collect(),
            factors: ch.factors().map(|fs| {
                fs.iter()
                    .map(|sites| sites.iter().map(matrix_to_rows).collect())
                    .collect()
            }),
        }
    }

    pub fn into_channel(self) -> Result<KrausChannel> {
        let kraus = self
            .kraus
            .iter()
            .map(rows_to_matrix)
            .collect::<Result<Vec<_>>>()?;
        let factors = self
            .factors
            .map(|fs| {
                fs.iter()
                    .map(|sites| sites.iter().map(rows_to_matrix).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        KrausChannel::with_tag(kraus, self.dims, self.tag, factors)
    }
}

pub fn channel_to_json(ch: &KrausChannel) -> String {
    serde_json::to_string(&ChannelFile::from_channel(ch)).expect("channel serializes")
}

pub fn channel_from_json(text: &str) -> Result<KrausChannel> {
    serde_json::from_str::<ChannelFile>(text)?.into_channel()
}

pub fn load_channel(path: impl AsRef<Path>) -> Result<KrausChannel> {
    channel_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_mixed;
    use proptest::prelude::*;

    #[test]
    fn rejects_invalid_matrix_file() {
        let text = r#"{"dims":[2],"matrix":[[[0.5,0],[0.6,0]],[[0.6,0],[0.5,0]]]}"#;
        assert!(matches!(state_from_json(text), Err(Error::NotPsd(_))));
        let ragged = r#"{"dims":[2],"matrix":[[[1,0]],[[0,0],[0,0]]]}"#;
        assert!(matches!(state_from_json(ragged), Err(Error::Parse(_))));
    }

    #[test]
    fn channel_round_trip() {
        let ch = KrausChannel::dephasing(3);
        let back = channel_from_json(&channel_to_json(&ch)).unwrap();
        assert_eq!(back.kraus(), ch.kraus());
        assert_eq!(back.tag(), ch.tag());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn state_round_trip_is_bitwise(seed in any::<u64>(), d in 2usize..6, rank in 1usize..6) {
            let rank = rank.min(d);
            let rho = random_mixed(&[d], rank, seed).unwrap();
            let back = state_from_json(&state_to_json(&rho)).unwrap();
            prop_assert_eq!(back.matrix(), rho.matrix());
            prop_assert_eq!(back.dims(), rho.dims());
        }
    }
}
