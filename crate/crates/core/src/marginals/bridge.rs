//! Running the cleartext generator next to S1 and re-sharing its output.
//!
//! Only the noisy marginals are reconstructed, and only at S1, which hosts
//! the generator. The synthetic rows are input back by S1, so downstream
//! evaluation works on shares.

use super::generator::{generate_synthetic, ClearMarginals};
use super::MarginalSet;
use crate::error::{Error, Result};
use crate::ring::{decode_at, RingValue};
use crate::rss::ShareMatrix;
use crate::runtime::{Party, PartyId, Protocol, Seed};

/// The party co-located with the generator.
pub const GENERATOR_HOST: PartyId = PartyId::ALL[0];

/// Produces `n_out` binned synthetic rows from shared noisy marginals.
pub fn secure_generate(
    p: &mut Party,
    marginals: &MarginalSet,
    n_out: usize,
    iterations: usize,
    generator_seed: Seed,
) -> Result<ShareMatrix> {
    p.scoped(Protocol::Sdg, |p| {
        let d = marginals.genes;
        let opened = p.reveal_to(GENERATOR_HOST, &marginals.flatten())?;
        let mut cells = Vec::new();
        if let Some(vals) = opened {
            let flat: Vec<f64> = vals.into_iter().map(|v| decode_at(v, marginals.frac_bits)).collect();
            let m = ClearMarginals::from_flat(d, &flat)?;
            let rows = generate_synthetic(&m, n_out, iterations, &mut generator_seed.rng());
            if rows.rows.len() != n_out {
                return Err(Error::Integrity("generator returned the wrong number of rows".into()));
            }
            cells = rows.rows.iter().flatten().map(|&v| RingValue(v as u64)).collect();
        }
        let shares = p.input_from(GENERATOR_HOST, &cells, n_out * (d + 1))?;
        Ok(ShareMatrix::new(n_out, d + 1, shares))
    })
}
