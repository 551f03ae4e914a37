//! Seeded polar source coding, row by row.
//!
//! A row `v` is transformed to `A = v · G_n`; the output is `A[H]` followed by
//! `A[J] ⊕ seed`, both in increasing index order. Seed bit `k` pads the `k`-th
//! smallest index of `J`. Decoding un-pads, pins the known positions and
//! recovers `A[U]` by successive cancellation under the Bernoulli(p) prior.

use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitmat::{BitMatrix, BitVector};
use crate::error::{dim, Error, Result};
use crate::polar::{self, IndexProfile, ScDecoder};

/// The shared uniform seed `U`, one row of `d_J` bits per source row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedMatrix {
    pub bits: BitMatrix,
}

impl SeedMatrix {
    pub fn new(bits: BitMatrix) -> Self {
        Self { bits }
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, d_j: usize, rng: &mut R) -> Self {
        Self {
            bits: BitMatrix::random(rows, d_j, rng),
        }
    }

    pub fn zeros(rows: usize, d_j: usize) -> Self {
        Self {
            bits: BitMatrix::zeros(rows, d_j),
        }
    }

    pub fn rows(&self) -> usize {
        self.bits.rows()
    }

    pub fn cols(&self) -> usize {
        self.bits.cols()
    }
}

/// The compressed message matrix, `ℓ × ñ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedMatrix {
    pub bits: BitMatrix,
    pub profile_id: String,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    profile_id: String,
    rows: usize,
    cols: usize,
}

impl CompressedMatrix {
    pub fn rows(&self) -> usize {
        self.bits.rows()
    }

    pub fn cols(&self) -> usize {
        self.bits.cols()
    }

    fn sidecar_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    }

    /// Write the matrix file and a `<path>.json` sidecar naming the profile.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.bits.save(path)?;
        let side = Sidecar {
            profile_id: self.profile_id.clone(),
            rows: self.rows(),
            cols: self.cols(),
        };
        std::fs::write(Self::sidecar_path(path), serde_json::to_string_pretty(&side)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<CompressedMatrix> {
        let path = path.as_ref();
        let bits = BitMatrix::load(path)?;
        let side: Sidecar = serde_json::from_str(&std::fs::read_to_string(Self::sidecar_path(path))?)?;
        if side.rows != bits.rows() || side.cols != bits.cols() {
            return Err(Error::Format("sidecar shape disagrees with matrix file".into()));
        }
        Ok(CompressedMatrix {
            bits,
            profile_id: side.profile_id,
        })
    }
}

fn check_row(v_len: usize, seed_len: usize, profile: &IndexProfile) -> Result<()> {
    if v_len != profile.n {
        return Err(dim(format!("row of length {v_len}, profile n = {}", profile.n)));
    }
    if seed_len != profile.d_j() {
        return Err(dim(format!("seed of length {seed_len}, profile d_J = {}", profile.d_j())));
    }
    Ok(())
}

/// `[A[H], A[J] ⊕ seed]` with `A = v · G_n`.
pub fn encode_row(v: &BitVector, seed: &BitVector, profile: &IndexProfile) -> Result<BitVector> {
    check_row(v.len(), seed.len(), profile)?;
    let a = polar::polar_transform(v, profile.n)?;
    let mut out = a.select(&profile.h_set)?;
    let padded = a.select(&profile.j_set)?.xor(seed)?;
    out.extend_from(&padded);
    Ok(out)
}

/// Reconstruct a source row. Always returns a candidate; unknown positions are
/// filled by successive cancellation with ties resolved to 0.
pub fn decode_row(m: &BitVector, seed: &BitVector, profile: &IndexProfile, p: f64) -> Result<BitVector> {
    let mut dec = RowDecoder::new(profile, p);
    dec.decode(m, seed)
}

/// Reusable decoding state for one profile.
pub struct RowDecoder<'a> {
    profile: &'a IndexProfile,
    prior: Vec<f64>,
    // 0/1 for pinned positions, 2 for positions left to the decoder
    pinned: Vec<u8>,
    sc: ScDecoder,
}

impl<'a> RowDecoder<'a> {
    pub fn new(profile: &'a IndexProfile, p: f64) -> Self {
        let n = profile.n;
        Self {
            profile,
            prior: vec![1.0 - 2.0 * p; n],
            pinned: vec![2; n],
            sc: ScDecoder::new(n),
        }
    }

    pub fn decode(&mut self, m: &BitVector, seed: &BitVector) -> Result<BitVector> {
        let prof = self.profile;
        if m.len() != prof.n_tilde() {
            return Err(dim(format!(
                "compressed row of length {}, profile ñ = {}",
                m.len(),
                prof.n_tilde()
            )));
        }
        check_row(prof.n, seed.len(), prof)?;
        self.pinned.fill(2);
        let hlen = prof.h_set.len();
        for (k, &j) in prof.h_set.iter().enumerate() {
            self.pinned[j] = m.get(k) as u8;
        }
        for (k, &j) in prof.j_set.iter().enumerate() {
            self.pinned[j] = (m.get(hlen + k) ^ seed.get(k)) as u8;
        }
        let mut a = vec![0u8; prof.n];
        let pinned = &self.pinned;
        let mut decide = |j: usize, d: f64| match pinned[j] {
            2 => (d < 0.0) as u8,
            b => b,
        };
        self.sc.run(&self.prior, &mut a, &mut decide);
        Ok(BitVector::from_bits(&polar::transform_bits(&a)))
    }
}

fn check_matrix(rows: usize, seeds: &SeedMatrix) -> Result<()> {
    if seeds.rows() != rows {
        return Err(dim(format!("{rows} source rows but {} seed rows", seeds.rows())));
    }
    Ok(())
}

/// Row-wise [`encode_row`]; `ℓ × n` → `ℓ × ñ`.
pub fn encode_matrix(v: &BitMatrix, seeds: &SeedMatrix, profile: &IndexProfile) -> Result<CompressedMatrix> {
    check_matrix(v.rows(), seeds)?;
    if v.cols() != profile.n || seeds.cols() != profile.d_j() {
        return Err(dim(format!(
            "shapes {}×{} and {}×{} against n = {}, d_J = {}",
            v.rows(),
            v.cols(),
            seeds.rows(),
            seeds.cols(),
            profile.n,
            profile.d_j()
        )));
    }
    let rows = (0..v.rows())
        .into_par_iter()
        .map(|i| encode_row(&v.row(i), &seeds.bits.row(i), profile))
        .collect::<Result<Vec<_>>>()?;
    Ok(CompressedMatrix {
        bits: BitMatrix::from_rows(&rows, profile.n_tilde())?,
        profile_id: profile.id(),
    })
}

/// Row-wise [`decode_row`]; `ℓ × ñ` → `ℓ × n`.
pub fn decode_matrix(m: &CompressedMatrix, seeds: &SeedMatrix, profile: &IndexProfile, p: f64) -> Result<BitMatrix> {
    check_matrix(m.rows(), seeds)?;
    let rows = (0..m.rows())
        .into_par_iter()
        .map_init(
            || RowDecoder::new(profile, p),
            |dec, i| dec.decode(&m.bits.row(i), &seeds.bits.row(i)),
        )
        .collect::<Result<Vec<_>>>()?;
    BitMatrix::from_rows(&rows, profile.n)
}

/// Limit on `ℓ(n + d_J)` for [`exact_output_law`].
pub const OUTPUT_LAW_MAX_BITS: usize = 24;

/// Exact law of the `ℓ × ñ` output by enumerating every `(V, seed)` pair.
///
/// Index `k` of the result is the output matrix read row-major as a
/// big-endian integer.
pub fn exact_output_law(profile: &IndexProfile, ell: usize) -> Result<Vec<f64>> {
    let (n, dj, nt) = (profile.n, profile.d_j(), profile.n_tilde());
    let state_bits = ell * (n + dj);
    if state_bits > OUTPUT_LAW_MAX_BITS || ell * nt > OUTPUT_LAW_MAX_BITS {
        return Err(Error::TooLarge {
            what: "enumerated state bits",
            value: state_bits.max(ell * nt) as u64,
            limit: OUTPUT_LAW_MAX_BITS as u64,
        });
    }
    let m = n.trailing_zeros();
    let p = profile.p;
    let seed_weight = (-(dj as f64)).exp2();
    // per-row output table for every (v, seed)
    let mut row_out = vec![0u32; 1 << (n + dj)];
    let mut row_prob = vec![0.0f64; 1 << n];
    for v in 0..1usize << n {
        let w = v.count_ones() as i32;
        row_prob[v] = p.powi(w) * (1.0 - p).powi(n as i32 - w) * seed_weight;
        let a = polar::transform_word(v as u64, m);
        for s in 0..1usize << dj {
            let mut out = 0u32;
            for &j in &profile.h_set {
                out = (out << 1) | ((a >> j) & 1) as u32;
            }
            for (k, &j) in profile.j_set.iter().enumerate() {
                out = (out << 1) | (((a >> j) as u32) ^ (s >> (dj - 1 - k)) as u32) & 1;
            }
            row_out[(v << dj) | s] = out;
        }
    }
    let mut law = vec![0.0f64; 1 << (ell * nt)];
    let row_states = 1usize << (n + dj);
    for state in 0..1usize << state_bits {
        let mut idx = 0usize;
        let mut prob = 1.0;
        let mut rest = state;
        for _ in 0..ell {
            let rs = rest % row_states;
            rest /= row_states;
            prob *= row_prob[rs >> dj];
            idx = (idx << nt) | row_out[rs] as usize;
        }
        law[idx] += prob;
    }
    Ok(law)
}
