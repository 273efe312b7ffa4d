//! Three-party replicated secret sharing.
//!
//! A secret `x = x1 + x2 + x3 (mod 2^64)` is held as pairs: party S_i holds
//! `(x_i, x_{i+1})`. Component `j` is therefore known to S_j and S_{j-1}.

use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use rand::RngCore;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::RingValue;
use crate::runtime::{OpeningKind, Party, PartyId, Seed};

/// One party's pair of additive components of a secret.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Share {
    pub a: RingValue,
    pub b: RingValue,
}

impl Share {
    pub const ZERO: Share = Share { a: RingValue::ZERO, b: RingValue::ZERO };

    pub fn new(a: RingValue, b: RingValue) -> Self {
        Share { a, b }
    }

    /// Sharing of a public constant: component 1 carries the value.
    pub fn public(id: PartyId, c: RingValue) -> Self {
        match id.get() {
            1 => Share { a: c, b: RingValue::ZERO },
            3 => Share { a: RingValue::ZERO, b: c },
            _ => Share::ZERO,
        }
    }

    pub fn add_public(self, id: PartyId, c: RingValue) -> Self {
        self + Share::public(id, c)
    }

    pub fn mul_public(self, c: RingValue) -> Self {
        Share { a: self.a * c, b: self.b * c }
    }

    /// Multiplies by `2^bits`.
    pub fn shl(self, bits: u32) -> Self {
        Share { a: self.a.shl(bits), b: self.b.shl(bits) }
    }
}

impl Add for Share {
    type Output = Share;
    fn add(self, o: Share) -> Share {
        Share { a: self.a + o.a, b: self.b + o.b }
    }
}

impl Sub for Share {
    type Output = Share;
    fn sub(self, o: Share) -> Share {
        Share { a: self.a - o.a, b: self.b - o.b }
    }
}

impl Neg for Share {
    type Output = Share;
    fn neg(self) -> Share {
        Share { a: -self.a, b: -self.b }
    }
}

impl AddAssign for Share {
    fn add_assign(&mut self, o: Share) {
        *self = *self + o;
    }
}

impl SubAssign for Share {
    fn sub_assign(&mut self, o: Share) {
        *self = *self - o;
    }
}

impl std::iter::Sum for Share {
    fn sum<I: Iterator<Item = Share>>(iter: I) -> Share {
        iter.fold(Share::ZERO, |a, b| a + b)
    }
}

/// Splits `x` into three replicated shares, indexed by party.
pub fn share_secret(x: RingValue, rng: &mut impl RngCore) -> [Share; 3] {
    let x1 = RingValue(rng.next_u64());
    let x2 = RingValue(rng.next_u64());
    let x3 = x - x1 - x2;
    [Share::new(x1, x2), Share::new(x2, x3), Share::new(x3, x1)]
}

/// Recombines the three parties' shares, checking that overlapping
/// components agree.
pub fn reconstruct(shares: &[Share; 3]) -> Result<RingValue> {
    for i in 0..3 {
        let next = (i + 1) % 3;
        if shares[i].b != shares[next].a {
            return Err(Error::Integrity(format!(
                "S{} and S{} disagree on component {}",
                i + 1,
                next + 1,
                next + 1
            )));
        }
    }
    Ok(shares[0].a + shares[1].a + shares[2].a)
}

/// Pairwise PRG keys. S_i holds its own key `k_i` and its successor's key
/// `k_{i+1}`. Each key drives two independent streams: one for zero
/// sharings and one for masks known to exactly the two key holders.
pub struct ZeroShareKeys {
    zero_own: ChaCha20Rng,
    zero_next: ChaCha20Rng,
    mask_own: ChaCha20Rng,
    mask_next: ChaCha20Rng,
}

impl ZeroShareKeys {
    pub fn new(own: Seed, next: Seed) -> Self {
        ZeroShareKeys {
            zero_own: own.derive("zero").rng(),
            zero_next: next.derive("zero").rng(),
            mask_own: own.derive("mask").rng(),
            mask_next: next.derive("mask").rng(),
        }
    }

    /// `u_i = F(k_i) - F(k_{i+1})`; the three parties' values sum to zero.
    pub fn zero(&mut self) -> RingValue {
        RingValue(self.zero_own.next_u64()) - RingValue(self.zero_next.next_u64())
    }

    /// Next mask from the own key, known also to the predecessor.
    pub fn mask_own(&mut self) -> RingValue {
        RingValue(self.mask_own.next_u64())
    }

    /// Next mask from the successor's key, known also to the successor.
    pub fn mask_next(&mut self) -> RingValue {
        RingValue(self.mask_next.next_u64())
    }
}

/// A secret-shared table: `rows` samples by `cols` columns, row-major. The
/// last column is the label; the others are genes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ShareMatrix {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<Share>,
}

impl ShareMatrix {
    pub fn new(rows: usize, cols: usize, cells: Vec<Share>) -> Self {
        assert_eq!(cells.len(), rows * cols, "share matrix shape mismatch");
        ShareMatrix { rows, cols, cells }
    }

    pub fn genes(&self) -> usize {
        self.cols.saturating_sub(1)
    }

    pub fn label_col(&self) -> usize {
        self.cols - 1
    }

    pub fn get(&self, r: usize, c: usize) -> Share {
        self.cells[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, s: Share) {
        self.cells[r * self.cols + c] = s;
    }

    pub fn column(&self, c: usize) -> Vec<Share> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> ShareMatrix {
        let mut cells = Vec::with_capacity(idx.len() * self.cols);
        for &r in idx {
            cells.extend_from_slice(&self.cells[r * self.cols..(r + 1) * self.cols]);
        }
        ShareMatrix::new(idx.len(), self.cols, cells)
    }

    /// Builds a matrix from per-column vectors of equal length.
    pub fn from_columns(columns: &[Vec<Share>]) -> ShareMatrix {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut cells = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in columns {
                cells.push(c[r]);
            }
        }
        ShareMatrix::new(rows, cols, cells)
    }
}

fn ids() -> [PartyId; 3] {
    PartyId::ALL
}

impl Party {
    /// Local cross term of a replicated product, `x_i y_i + x_i y_{i+1} + x_{i+1} y_i`.
    #[inline]
    fn cross(x: Share, y: Share) -> RingValue {
        x.a * y.a + x.a * y.b + x.b * y.a
    }

    /// Turns additive components `z_i` into replicated shares: each party
    /// masks with a zero sharing, sends to its predecessor and receives from
    /// its successor. One round, one element per output per party.
    fn reshare(&mut self, z: Vec<RingValue>) -> Result<Vec<Share>> {
        let z: Vec<RingValue> = z.into_iter().map(|v| v + self.keys.zero()).collect();
        let (prev, next) = (self.id().prev(), self.id().next());
        let got = self.exchange(prev, &z, next)?;
        Ok(z.into_iter().zip(got).map(|(a, b)| Share::new(a, b)).collect())
    }

    /// Element-wise product of two share vectors (integer ring product).
    pub fn mul(&mut self, x: &[Share], y: &[Share]) -> Result<Vec<Share>> {
        assert_eq!(x.len(), y.len());
        self.count_call("π_MUL", x.len());
        let z = x.iter().zip(y).map(|(&x, &y)| Self::cross(x, y)).collect();
        self.reshare(z)
    }

    /// Several independent inner products, each resharing once.
    pub fn dot(&mut self, pairs: &[(Vec<Share>, Vec<Share>)]) -> Result<Vec<Share>> {
        self.count_call("π_DOT", pairs.len());
        let z = pairs
            .iter()
            .map(|(x, y)| {
                assert_eq!(x.len(), y.len());
                x.iter().zip(y).map(|(&x, &y)| Self::cross(x, y)).sum()
            })
            .collect();
        self.reshare(z)
    }

    /// Product of an `n x k` and a `k x m` row-major share matrix.
    pub fn matmul(&mut self, a: &[Share], n: usize, k: usize, b: &[Share], m: usize) -> Result<Vec<Share>> {
        assert_eq!(a.len(), n * k);
        assert_eq!(b.len(), k * m);
        self.count_call("π_DOT", n * m);
        let mut z = vec![RingValue::ZERO; n * m];
        for i in 0..n {
            for t in 0..k {
                let x = a[i * k + t];
                for j in 0..m {
                    z[i * m + j] += Self::cross(x, b[t * m + j]);
                }
            }
        }
        self.reshare(z)
    }

    /// Divides by `2^bits`, rounding to within one unit of the floor.
    ///
    /// S1 knows `x1 + x2` and shifts it; S2 and S3 both know `x3` and shift
    /// it rounding up. S1 then re-randomizes its part with a mask shared
    /// with S3 and sends the difference to S2: one round, one element.
    /// The result is exact whenever the secret is a multiple of `2^bits`.
    /// It fails (off by `2^(64-bits)`) with probability about `|x| / 2^64`.
    pub fn trunc(&mut self, x: &[Share], bits: u32) -> Result<Vec<Share>> {
        self.count_call("π_TRUNC", x.len());
        let [s1, s2, s3] = ids();
        let me = self.id();
        if me == s1 {
            let mut out = Vec::with_capacity(x.len());
            let mut send = Vec::with_capacity(x.len());
            for s in x {
                let hi = (s.a + s.b).shr_arith(bits);
                let r = self.keys.mask_own();
                out.push(Share::new(r, hi - r));
                send.push((hi - r).0);
            }
            self.step(&[(s2, send)], &[])?;
            Ok(out)
        } else if me == s2 {
            let got = self.step(&[], &[s1])?.remove(0);
            if got.len() != x.len() {
                return Err(Error::Integrity("truncation message has the wrong length".into()));
            }
            Ok(x.iter().zip(got).map(|(s, y2)| Share::new(RingValue(y2), -(-s.b).shr_arith(bits))).collect())
        } else {
            debug_assert_eq!(me, s3);
            self.step(&[], &[])?;
            Ok(x.iter().map(|s| Share::new(-(-s.a).shr_arith(bits), self.keys.mask_next())).collect())
        }
    }

    /// Fixed-point product: ring product followed by truncation by `f`.
    pub fn mul_fixed(&mut self, x: &[Share], y: &[Share]) -> Result<Vec<Share>> {
        let z = self.mul(x, y)?;
        let f = self.fixed().frac_bits();
        self.trunc(&z, f)
    }

    /// Shares private inputs of all three parties in one round. `mine` are
    /// this party's values; `counts[j]` is the public number of values
    /// contributed by party `j+1`. Returns the shares grouped by owner.
    ///
    /// For owner S_o: `x_o = r` from S_o's mask key (known to S_{o-1}),
    /// `x_{o+1} = v - r` sent from S_o to S_{o+1}, `x_{o+2} = 0`.
    pub fn input_all(&mut self, mine: &[RingValue], counts: [usize; 3]) -> Result<[Vec<Share>; 3]> {
        let me = self.id();
        assert_eq!(mine.len(), counts[me.index()], "input count mismatch");
        self.count_call("π_INPUT", counts.iter().sum());
        let (next, prev) = (me.next(), me.prev());

        let mut own = Vec::with_capacity(mine.len());
        let mut send = Vec::with_capacity(mine.len());
        for &v in mine {
            let r = self.keys.mask_own();
            own.push(Share::new(r, v - r));
            send.push((v - r).0);
        }
        let from_next: Vec<Share> =
            (0..counts[next.index()]).map(|_| Share::new(RingValue::ZERO, self.keys.mask_next())).collect();

        let got = self.step(&[(next, send)], &[prev])?.remove(0);
        if got.len() != counts[prev.index()] {
            return Err(Error::Integrity("input message has the wrong length".into()));
        }
        let from_prev: Vec<Share> = got.into_iter().map(|w| Share::new(RingValue(w), RingValue::ZERO)).collect();

        let mut out: [Vec<Share>; 3] = Default::default();
        out[me.index()] = own;
        out[next.index()] = from_next;
        out[prev.index()] = from_prev;
        Ok(out)
    }

    /// Shares values held by a single party. Other parties pass an empty slice.
    pub fn input_from(&mut self, owner: PartyId, values: &[RingValue], n: usize) -> Result<Vec<Share>> {
        let mut counts = [0; 3];
        counts[owner.index()] = n;
        let mine = if self.id() == owner { values } else { &[] };
        let mut out = self.input_all(mine, counts)?;
        Ok(std::mem::take(&mut out[owner.index()]))
    }

    /// Opens values to all three parties and records them in the opening log.
    pub fn open(&mut self, x: &[Share]) -> Result<Vec<RingValue>> {
        self.count_call("π_OPEN", x.len());
        let send: Vec<RingValue> = x.iter().map(|s| s.a).collect();
        let (next, prev) = (self.id().next(), self.id().prev());
        let got = self.exchange(next, &send, prev)?;
        let out: Vec<RingValue> = x.iter().zip(got).map(|(s, c)| s.a + s.b + c).collect();
        self.log_opening(OpeningKind::Public, &out);
        Ok(out)
    }

    /// Reconstructs values at `target` only. Other parties get `None`.
    pub fn reveal_to(&mut self, target: PartyId, x: &[Share]) -> Result<Option<Vec<RingValue>>> {
        self.count_call("π_REVEAL-ONE", x.len());
        let me = self.id();
        if me == target {
            let got = self.step(&[], &[target.prev()])?.remove(0);
            if got.len() != x.len() {
                return Err(Error::Integrity("reveal message has the wrong length".into()));
            }
            let out: Vec<RingValue> = x.iter().zip(got).map(|(s, c)| s.a + s.b + RingValue(c)).collect();
            self.log_opening(OpeningKind::Enclave(target), &out);
            Ok(Some(out))
        } else if me == target.prev() {
            self.step(&[(target, x.iter().map(|s| s.a.0).collect())], &[])?;
            self.log_opening(OpeningKind::Enclave(target), &[]);
            Ok(None)
        } else {
            self.step(&[], &[])?;
            self.log_opening(OpeningKind::Enclave(target), &[]);
            Ok(None)
        }
    }

    /// Public constant as a share vector.
    pub fn constant(&self, c: RingValue, n: usize) -> Vec<Share> {
        vec![Share::public(self.id(), c); n]
    }
}
