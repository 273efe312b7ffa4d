//! Cleartext reference implementations used by the tests.
//!
//! The fixed-point oracles work on the same integer grid as the secure
//! path (`i64` values at `f` fractional bits) but share no code with it
//! beyond public constants and the cleartext generator. Truncations round
//! down where the secure path may round either way.

pub mod binning;
pub mod corpus;
pub mod local_binning;
pub mod lr;
pub mod marginals;
pub mod noise;
pub mod pipeline;
pub mod wle;

pub use binning::{clear_bin, float_bin, ClearBinned};
pub use corpus::{skewed_split, split_rows, synthetic_dataset};
pub use marginals::{brute_marginals, ClearCounts};
pub use pipeline::{clear_pipeline, ClearRun};

use mpcsynth_core::io::Dataset;
use mpcsynth_core::{FixedPointConfig, Result};

/// Gene values at `f` fractional bits, row-major.
pub fn encode_genes(ds: &Dataset, fixed: FixedPointConfig) -> Result<Vec<Vec<i64>>> {
    ds.values.iter().map(|r| r.iter().map(|&x| Ok(fixed.encode(x)?.as_i64())).collect()).collect()
}

/// Rows of gene bins followed by the label.
pub type BinnedRows = Vec<Vec<u8>>;
