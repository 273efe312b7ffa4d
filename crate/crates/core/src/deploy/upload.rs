//! Custodian uploads and the reveal of the published matrix.
//!
//! A custodian splits every cell additively into three components and sends
//! component `i` to S_i only. Each server then forwards its component to its
//! predecessor, which completes the replicated pairs in one round.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::orchestrator::{ClearThresholds, CustodianInput, PipelineConfig, Thresholds};
use crate::ring::RingValue;
use crate::rss::{reconstruct, Share, ShareMatrix};
use crate::runtime::{handshake_fields, Party, PartyId, Protocol, SessionParams};

/// What one custodian sends to one server.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Upload {
    /// 1-based custodian index; fixes the stacking order.
    pub custodian: u32,
    pub handshake: Vec<u64>,
    pub header: Vec<String>,
    pub rows: usize,
    /// Row-major data components followed by the two threshold components.
    pub words: Vec<u64>,
}

impl Upload {
    pub fn cols(&self) -> usize {
        self.header.len()
    }
}

/// Encodes and splits a custodian's dataset and thresholds. Entry `i` goes
/// to server `i + 1`.
pub fn prepare_uploads(
    custodian: u32,
    data: &Dataset,
    thresholds: &ClearThresholds,
    cfg: &PipelineConfig,
    rng: &mut impl RngCore,
) -> Result<[Upload; 3]> {
    let fixed = cfg.fixed()?;
    if data.rows() == 0 {
        return Err(Error::Ingest(format!("custodian {custodian} has no rows")));
    }
    data.check_range(fixed, cfg.value_bits)?;
    let mut cells = data.encode(fixed)?;
    cells.extend(thresholds.encode(&fixed)?);
    let mut words = [Vec::with_capacity(cells.len()), Vec::with_capacity(cells.len()), Vec::with_capacity(cells.len())];
    for x in cells {
        let x1 = rng.next_u64();
        let x2 = rng.next_u64();
        words[0].push(x1);
        words[1].push(x2);
        words[2].push((x - RingValue(x1) - RingValue(x2)).0);
    }
    let handshake = handshake_fields(&cfg.session_params()?);
    Ok(words.map(|words| Upload {
        custodian,
        handshake: handshake.clone(),
        header: data.header(),
        rows: data.rows(),
        words,
    }))
}

/// Checks an upload against the local session, naming the first field
/// that differs.
pub fn check_upload(u: &Upload, params: &SessionParams) -> Result<()> {
    let mine = handshake_fields(params);
    if u.handshake.len() != mine.len() {
        return Err(Error::Setup(format!("custodian {} sent a malformed configuration digest", u.custodian)));
    }
    if let Some(i) = (1..mine.len()).find(|&i| u.handshake[i] != mine[i]) {
        return Err(Error::ConfigMismatch { field: params.fields()[i - 1].0.clone() });
    }
    if u.cols() < 2 || u.words.len() != u.rows * u.cols() + 2 {
        return Err(Error::Ingest(format!(
            "custodian {} sent {} words for {} rows of {} columns",
            u.custodian,
            u.words.len(),
            u.rows,
            u.cols()
        )));
    }
    Ok(())
}

/// Turns this server's components into replicated shares. `uploads` must be
/// sorted by custodian and identical in shape at all servers.
pub fn ingest(p: &mut Party, uploads: &[Upload], params: &SessionParams) -> Result<Vec<CustodianInput>> {
    for (i, u) in uploads.iter().enumerate() {
        if u.custodian as usize != i + 1 {
            return Err(Error::Ingest(format!("expected custodian {}, got {}", i + 1, u.custodian)));
        }
        check_upload(u, params)?;
    }
    p.scoped(Protocol::Input, |p| {
        let id = p.id();
        let own: Vec<RingValue> = uploads.iter().flat_map(|u| u.words.iter().map(|&w| RingValue(w))).collect();
        let next = p.exchange(id.prev(), &own, id.next())?;
        let mut shares = own.iter().zip(&next).map(|(&a, &b)| Share::new(a, b));
        Ok(uploads
            .iter()
            .map(|u| {
                let cells: Vec<Share> = shares.by_ref().take(u.rows * u.cols()).collect();
                let t: Vec<Share> = shares.by_ref().take(2).collect();
                CustodianInput {
                    header: u.header.clone(),
                    data: ShareMatrix::new(u.rows, u.cols(), cells),
                    thresholds: Thresholds { max_wle: t[0], min_accuracy: t[1] },
                }
            })
            .collect())
    })
}

/// One server's share pairs of the published matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevealMessage {
    pub party: u8,
    pub header: Vec<String>,
    pub rows: usize,
    pub frac_bits: u32,
    pub pairs: Vec<[u64; 2]>,
}

/// Reconstructs the published dataset from the three servers' messages.
pub fn reconstruct_published(msgs: &[RevealMessage]) -> Result<Dataset> {
    let mut by_party: [Option<&RevealMessage>; 3] = [None; 3];
    for m in msgs {
        let id = PartyId::new(m.party).ok_or_else(|| Error::Integrity(format!("reveal from party {}", m.party)))?;
        if by_party[id.index()].replace(m).is_some() {
            return Err(Error::Integrity(format!("two reveals from party {id}")));
        }
    }
    let [Some(a), Some(b), Some(c)] = by_party else {
        return Err(Error::Integrity("reveal is missing a server".into()));
    };
    for m in [b, c] {
        if (m.rows, m.frac_bits, &m.header, m.pairs.len()) != (a.rows, a.frac_bits, &a.header, a.pairs.len()) {
            return Err(Error::Integrity(format!("server {} revealed a differently shaped matrix", m.party)));
        }
    }
    if a.header.len() < 2 || a.pairs.len() != a.rows * a.header.len() {
        return Err(Error::Integrity("revealed matrix does not match its header".into()));
    }
    let share = |m: &RevealMessage, i: usize| Share::new(RingValue(m.pairs[i][0]), RingValue(m.pairs[i][1]));
    let cells = (0..a.pairs.len()).map(|i| reconstruct(&[share(a, i), share(b, i), share(c, i)])).collect::<Result<Vec<_>>>()?;
    Dataset::decode(a.header[..a.header.len() - 1].to_vec(), &cells, a.frac_bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::run3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn toy(rows: usize) -> Dataset {
        Dataset {
            genes: vec!["a".into(), "b".into()],
            values: (0..rows).map(|i| vec![i as f64 * 0.5, -(i as f64)]).collect(),
            labels: (0..rows).map(|i| (i % 5) as u8).collect(),
        }
    }

    #[test]
    fn upload_sizes_and_ingest_round_trip() {
        let cfg = PipelineConfig { custodians: 2, ..PipelineConfig::default() };
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let th = ClearThresholds { max_wle: 0.25, min_accuracy: 0.5 };
        let ups = [
            prepare_uploads(1, &toy(3), &th, &cfg, &mut rng).unwrap(),
            prepare_uploads(2, &toy(4), &ClearThresholds::VACUOUS, &cfg, &mut rng).unwrap(),
        ];
        assert!(ups[0].iter().all(|u| u.words.len() == 3 * 3 + 2));
        let params = cfg.session_params().unwrap();
        let out = run3(1, |p| {
            let mine: Vec<Upload> = ups.iter().map(|u| u[p.id().index()].clone()).collect();
            let inputs = ingest(p, &mine, &params)?;
            let (data, th) = (inputs[1].data.clone(), inputs[0].thresholds);
            Ok((data.cells, vec![th.max_wle, th.min_accuracy]))
        })
        .unwrap();
        let cells = crate::local::reconstruct_all(&[out[0].0.clone(), out[1].0.clone(), out[2].0.clone()]).unwrap();
        let fx = cfg.fixed().unwrap();
        assert_eq!(cells, toy(4).encode(fx).unwrap());
        let th_open = crate::local::reconstruct_all(&[out[0].1.clone(), out[1].1.clone(), out[2].1.clone()]).unwrap();
        assert_eq!(th_open, th.encode(&fx).unwrap());
    }

    #[test]
    fn mismatched_digest_names_the_field() {
        let cfg = PipelineConfig::default();
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let u = prepare_uploads(1, &toy(2), &ClearThresholds::VACUOUS, &cfg, &mut rng).unwrap();
        let other = PipelineConfig { folds: 3, ..cfg }.session_params().unwrap();
        match check_upload(&u[0], &other) {
            Err(Error::ConfigMismatch { field }) => assert_eq!(field, "folds"),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn reveal_reconstructs_and_detects_tampering() {
        let ds = toy(3);
        let cells = ds.encode(crate::ring::FixedPointConfig::default()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let shares: Vec<[Share; 3]> = cells.iter().map(|&x| crate::rss::share_secret(x, &mut rng)).collect();
        let mut msgs: Vec<RevealMessage> = (0..3)
            .map(|i| RevealMessage {
                party: i as u8 + 1,
                header: ds.header(),
                rows: 3,
                frac_bits: 16,
                pairs: shares.iter().map(|s| [s[i].a.0, s[i].b.0]).collect(),
            })
            .collect();
        assert_eq!(reconstruct_published(&msgs).unwrap(), ds);
        msgs[1].pairs[0][0] ^= 1;
        assert!(matches!(reconstruct_published(&msgs), Err(Error::Integrity(_))));
        assert!(reconstruct_published(&msgs[..2]).is_err());
    }
}
