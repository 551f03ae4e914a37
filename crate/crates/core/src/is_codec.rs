//! Random-binning code applied column by column.
//!
//! A column `m` of `ℓ` bits is read as a big-endian integer; its first `k_s`
//! bits select the bin and the remaining `k_w` bits the codeword inside it, so
//! the codeword index is simply `bin · 2^{k_w} + offset = uint(m)`.
//! Codewords are stored as `u32` with link 0 in the most significant of the
//! `ℓ` used bits.

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitmat::{BitMatrix, BitVector};
use crate::error::{dim, invalid, Error, Result};

/// Hard cap on the codeword length.
pub const MAX_ELL: usize = 24;

/// How codewords are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodebookKind {
    /// Every codeword i.i.d. uniform on `{0,1}^ℓ`; duplicates are kept.
    #[default]
    Independent,
    /// I.i.d. uniform conditioned on all `2^ℓ` codewords being distinct
    /// (a uniformly random bijection); decoding never fails.
    Injective,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    pub ell: usize,
    pub w: usize,
    pub k_s: usize,
    pub k_w: usize,
    pub l_eps: usize,
    pub t: f64,
    pub rng_seed: u64,
    #[serde(default)]
    pub kind: CodebookKind,
}

/// `ℓε = ⌈t · log₂ ℓ⌉`, at least 1.
pub fn l_eps_for(ell: usize, t: f64) -> usize {
    ((t * (ell as f64).log2()).ceil() as usize).max(1)
}

impl CodeParams {
    pub fn new(ell: usize, w: usize, k_s: usize, t: f64, rng_seed: u64) -> Self {
        Self {
            ell,
            w,
            k_s,
            k_w: ell.saturating_sub(k_s),
            l_eps: l_eps_for(ell, t),
            t,
            rng_seed,
            kind: CodebookKind::Independent,
        }
    }

    pub fn with_kind(mut self, kind: CodebookKind) -> Self {
        self.kind = kind;
        self
    }

    /// Structural checks; with `security` also the `k_s ≤ ℓ − w − ℓε` regime.
    pub fn validate(&self, security: bool) -> Result<()> {
        if self.ell == 0 {
            return Err(invalid("ℓ must be positive"));
        }
        if self.ell > MAX_ELL {
            return Err(Error::TooLarge {
                what: "codeword length ℓ",
                value: self.ell as u64,
                limit: MAX_ELL as u64,
            });
        }
        if self.k_s + self.k_w != self.ell {
            return Err(invalid(format!(
                "k_s + k_w = {} + {} differs from ℓ = {}",
                self.k_s, self.k_w, self.ell
            )));
        }
        if self.w >= self.ell {
            return Err(invalid(format!("w = {} must be below ℓ = {}", self.w, self.ell)));
        }
        if self.t < 1.0 || self.l_eps < 1 {
            return Err(invalid(format!("t = {} must be at least 1", self.t)));
        }
        if security && self.k_s + self.w + self.l_eps > self.ell {
            return Err(invalid(format!(
                "k_s = {} exceeds ℓ − w − ℓε = {}",
                self.k_s,
                self.ell as i64 - self.w as i64 - self.l_eps as i64
            )));
        }
        Ok(())
    }
}

/// `2^{k_s}` bins of `2^{k_w}` codewords with a reverse index.
#[derive(Clone, Debug)]
pub struct Codebook {
    ell: usize,
    k_s: usize,
    k_w: usize,
    words: Vec<u32>,
    // CSR reverse index: indices of codewords equal to `x` are rev[start[x]..start[x + 1]]
    start: Vec<u32>,
    rev: Vec<u32>,
}

impl Codebook {
    /// Deterministic in `params.rng_seed`.
    pub fn generate(params: &CodeParams) -> Result<Codebook> {
        params.validate(false)?;
        let size = 1usize << params.ell;
        let mask = (size - 1) as u32;
        let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
        let words = match params.kind {
            CodebookKind::Independent => (0..size).map(|_| rng.next_u32() & mask).collect(),
            CodebookKind::Injective => {
                let mut w: Vec<u32> = (0..size as u32).collect();
                w.shuffle(&mut rng);
                w
            }
        };
        Self::from_codewords(params.ell, params.k_s, words)
    }

    /// A codebook from an explicit table indexed by `bin · 2^{k_w} + offset`.
    pub fn from_codewords(ell: usize, k_s: usize, words: Vec<u32>) -> Result<Codebook> {
        if ell == 0 || ell > MAX_ELL || k_s > ell {
            return Err(invalid(format!("bad shape ℓ = {ell}, k_s = {k_s}")));
        }
        let size = 1usize << ell;
        if words.len() != size {
            return Err(dim(format!("{} codewords for ℓ = {ell}", words.len())));
        }
        if let Some(&bad) = words.iter().find(|&&c| c as usize >= size) {
            return Err(invalid(format!("codeword {bad:#x} longer than {ell} bits")));
        }
        let mut start = vec![0u32; size + 1];
        for &c in &words {
            start[c as usize + 1] += 1;
        }
        for x in 0..size {
            start[x + 1] += start[x];
        }
        let mut fill = start.clone();
        let mut rev = vec![0u32; size];
        for (idx, &c) in words.iter().enumerate() {
            rev[fill[c as usize] as usize] = idx as u32;
            fill[c as usize] += 1;
        }
        Ok(Codebook {
            ell,
            k_s,
            k_w: ell - k_s,
            words,
            start,
            rev,
        })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn k_s(&self) -> usize {
        self.k_s
    }

    pub fn k_w(&self) -> usize {
        self.k_w
    }

    pub fn num_bins(&self) -> usize {
        1 << self.k_s
    }

    pub fn bin_size(&self) -> usize {
        1 << self.k_w
    }

    /// Packed codeword at `bin`, `offset`.
    pub fn word(&self, bin: usize, offset: usize) -> u32 {
        self.words[(bin << self.k_w) | offset]
    }

    pub fn codeword(&self, bin: usize, offset: usize) -> BitVector {
        BitVector::from_uint(self.word(bin, offset) as u64, self.ell)
    }

    /// Packed codewords of one bin.
    pub fn bin(&self, bin: usize) -> &[u32] {
        let s = bin << self.k_w;
        &self.words[s..s + self.bin_size()]
    }

    /// Codeword indices (`bin · 2^{k_w} + offset`) whose codeword equals `x`.
    pub fn lookup(&self, x: u32) -> &[u32] {
        let x = x as usize;
        if x >= self.words.len() {
            return &[];
        }
        &self.rev[self.start[x] as usize..self.start[x + 1] as usize]
    }

    /// Number of message values sharing their codeword with another message.
    pub fn ambiguous_messages(&self) -> usize {
        (0..self.words.len())
            .map(|x| (self.start[x + 1] - self.start[x]) as usize)
            .filter(|&k| k > 1)
            .sum()
    }

    /// Encode a packed column.
    pub fn encode_word(&self, m: u32) -> u32 {
        self.words[m as usize]
    }

    /// Decode a packed column.
    pub fn decode_word(&self, x: u32) -> Result<u32> {
        match self.lookup(x) {
            [] => Err(Error::NotACodeword),
            [idx] => Ok(*idx),
            many => Err(Error::Ambiguous(many.len())),
        }
    }
}

/// Probability that a given message's codeword is shared with another when all
/// `2^ℓ` codewords are i.i.d. uniform on `{0,1}^ℓ`.
pub fn independent_ambiguity_probability(ell: usize) -> f64 {
    let q = (-(ell as f64)).exp2();
    1.0 - ((2f64.powi(ell as i32) - 1.0) * (-q).ln_1p()).exp()
}

pub fn encode_column(m: &BitVector, cb: &Codebook) -> Result<BitVector> {
    if m.len() != cb.ell {
        return Err(dim(format!("column of length {}, ℓ = {}", m.len(), cb.ell)));
    }
    Ok(BitVector::from_uint(cb.encode_word(m.to_uint() as u32) as u64, cb.ell))
}

pub fn decode_column(x: &BitVector, cb: &Codebook) -> Result<BitVector> {
    if x.len() != cb.ell {
        return Err(dim(format!("column of length {}, ℓ = {}", x.len(), cb.ell)));
    }
    Ok(BitVector::from_uint(cb.decode_word(x.to_uint() as u32)? as u64, cb.ell))
}

/// Column `j` of `m` packed with row 0 as the most significant bit.
pub(crate) fn column_word(m: &BitMatrix, j: usize) -> u32 {
    (0..m.rows()).fold(0u32, |acc, i| (acc << 1) | m.get(i, j) as u32)
}

pub(crate) fn set_column_word(m: &mut BitMatrix, j: usize, word: u32) {
    let rows = m.rows();
    for i in 0..rows {
        m.set(i, j, (word >> (rows - 1 - i)) & 1 == 1);
    }
}

/// Column-wise encoding of an `ℓ × ñ` matrix.
pub fn encode_matrix(m: &BitMatrix, cb: &Codebook) -> Result<BitMatrix> {
    if m.rows() != cb.ell {
        return Err(dim(format!("{} rows, ℓ = {}", m.rows(), cb.ell)));
    }
    let mut x = BitMatrix::zeros(m.rows(), m.cols());
    for j in 0..m.cols() {
        set_column_word(&mut x, j, cb.encode_word(column_word(m, j)));
    }
    Ok(x)
}

/// Column-wise decoding; the first failing column's error is returned.
pub fn decode_matrix(x: &BitMatrix, cb: &Codebook) -> Result<BitMatrix> {
    if x.rows() != cb.ell {
        return Err(dim(format!("{} rows, ℓ = {}", x.rows(), cb.ell)));
    }
    let mut m = BitMatrix::zeros(x.rows(), x.cols());
    for j in 0..x.cols() {
        set_column_word(&mut m, j, cb.decode_word(column_word(x, j))?);
    }
    Ok(m)
}
