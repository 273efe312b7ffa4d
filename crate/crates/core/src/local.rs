//! Running all three parties inside one process over the in-process mesh.

use std::thread;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::ring::FixedPointConfig;
use crate::runtime::{local_mesh, Party, PartyId, Seed, SessionParams};

/// Default receive timeout for in-process runs.
pub const LOCAL_TIMEOUT: Duration = Duration::from_secs(120);

/// Private seed of a party derived from a master seed. Real deployments
/// must keep this material secret from the other servers; deriving all
/// three from one value is only meant for reproducible local runs.
pub fn party_private_seed(master: Seed, id: PartyId) -> Seed {
    master.derive(&format!("party-private/{id}"))
}

/// All three private seeds derived from one master value.
pub fn derived_party_seeds(master: u64) -> [Seed; 3] {
    let m = Seed::from_u64(master);
    PartyId::ALL.map(|id| party_private_seed(m, id))
}

/// Establishes three sessions and runs `body` at every party concurrently.
/// When several parties fail, the most informative error is returned: a
/// party's own failure is preferred over peers noticing the closed channel.
pub fn run_parties<T, F>(params: &SessionParams, seeds: [Seed; 3], timeout: Duration, body: F) -> Result<[T; 3]>
where
    T: Send,
    F: Fn(&mut Party) -> Result<T> + Sync,
{
    let mesh = local_mesh(timeout);
    let results: Vec<Result<T>> = thread::scope(|scope| {
        let handles: Vec<_> = mesh
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                let body = &body;
                scope.spawn(move || {
                    let id = PartyId::from_index(i);
                    let mut p = Party::establish(id, Box::new(t), params, seeds[i])?;
                    body(&mut p)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("party thread panicked")).collect()
    });
    let mut errors = Vec::new();
    let mut oks = Vec::new();
    for r in results {
        match r {
            Ok(v) => oks.push(v),
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        let pos = errors.iter().position(|e| !e.is_connectivity()).unwrap_or(0);
        return Err(errors.swap_remove(pos));
    }
    let mut it = oks.into_iter();
    Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
}

/// Test convenience: default precision, seeds derived from `master`.
pub fn run3<T, F>(master: u64, body: F) -> Result<[T; 3]>
where
    T: Send,
    F: Fn(&mut Party) -> Result<T> + Sync,
{
    let params = SessionParams::new(FixedPointConfig::default());
    run_parties(&params, derived_party_seeds(master), LOCAL_TIMEOUT, body)
}

/// Reconstructs a vector from the three parties' share vectors.
pub fn reconstruct_all(shares: &[Vec<crate::rss::Share>; 3]) -> Result<Vec<crate::ring::RingValue>> {
    let n = shares[0].len();
    if shares.iter().any(|s| s.len() != n) {
        return Err(Error::Integrity("share vectors differ in length".into()));
    }
    (0..n).map(|i| crate::rss::reconstruct(&[shares[0][i], shares[1][i], shares[2][i]])).collect()
}
