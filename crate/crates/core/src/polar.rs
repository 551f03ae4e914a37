//! The polarization transform `G_n = P_n · F^{⊗m}` and source entropy profiling.
//!
//! Positions are 0-based throughout (`0..n`). For a row vector `v`,
//! `polar_transform(v) = v · G_n`, where `P_n` is the bit-reversal permutation
//! and `F = [[1,0],[1,1]]`. Because `G_n` is an involution over GF(2) the same
//! routine maps `A` back to `V`.
//!
//! [`entropy_profile`] computes the conditional entropies
//! `H(A_j | A_0..A_{j-1})` of `A = V · G_n` for `V` i.i.d. Bernoulli(p), either
//! exactly (full enumeration, `n <= 20`) or by Monte-Carlo over genie-aided
//! successive-cancellation likelihoods, and splits positions into the
//! high-entropy set `H`, the low-entropy set `U` and the in-between set `J`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitmat::{BitMatrix, BitVector};
use crate::error::{invalid, Error, Result};

/// Largest blocklength accepted by exact enumeration.
pub const EXACT_MAX_N: usize = 20;
/// Largest `n` for which [`materialize_gn`] builds the dense matrix.
pub const MATERIALIZE_MAX_N: usize = 4096;
/// Minimum Monte-Carlo sample count.
pub const MC_MIN_SAMPLES: usize = 10_000;
/// Samples per deterministic Monte-Carlo shard. Shard `k` always uses stream `k`
/// of the estimator seed, so the estimate does not depend on the thread count.
pub const MC_SHARD: usize = 1_000;

/// Binary entropy in bits.
pub fn binary_entropy(q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        0.0
    } else {
        -q * q.log2() - (1.0 - q) * (1.0 - q).log2()
    }
}

fn log2_exact(n: usize) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return Err(invalid(format!("blocklength {n} is not a power of two")));
    }
    Ok(n.trailing_zeros())
}

/// Reverse the low `m` bits of `i`.
pub fn bit_reverse(i: usize, m: u32) -> usize {
    if m == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - m)
    }
}

/// In-place `x ← x · F^{⊗m}` on unpacked bits.
pub(crate) fn butterfly(x: &mut [u8]) {
    let n = x.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for i in start..start + h {
                x[i] ^= x[i + h];
            }
        }
        h *= 2;
    }
}

/// `v · G_n` on unpacked bits (`v.len()` must be a power of two).
pub(crate) fn transform_bits(v: &[u8]) -> Vec<u8> {
    let n = v.len();
    let m = n.trailing_zeros();
    let mut x: Vec<u8> = (0..n).map(|j| v[bit_reverse(j, m)]).collect();
    butterfly(&mut x);
    x
}

/// `v · G_n`, computed in `O(n log n)`.
pub fn polar_transform(v: &BitVector, n: usize) -> Result<BitVector> {
    log2_exact(n)?;
    if v.len() != n {
        return Err(crate::error::dim(format!(
            "vector of length {} for blocklength {n}",
            v.len()
        )));
    }
    Ok(BitVector::from_bits(&transform_bits(&v.to_bits())))
}

/// The explicit `n × n` matrix `G_n = P_n · F^{⊗m}`.
pub fn materialize_gn(n: usize) -> Result<BitMatrix> {
    log2_exact(n)?;
    if n > MATERIALIZE_MAX_N {
        return Err(Error::TooLarge {
            what: "materialized blocklength",
            value: n as u64,
            limit: MATERIALIZE_MAX_N as u64,
        });
    }
    let m = n.trailing_zeros();
    // Kronecker power, built by doubling.
    let mut kron = BitMatrix::identity(1);
    for _ in 0..m {
        let s = kron.rows();
        let mut next = BitMatrix::zeros(2 * s, 2 * s);
        for i in 0..s {
            for j in 0..s {
                if kron.get(i, j) {
                    next.set(i, j, true);
                    next.set(s + i, j, true);
                    next.set(s + i, s + j, true);
                }
            }
        }
        kron = next;
    }
    let order: Vec<usize> = (0..n).map(|i| bit_reverse(i, m)).collect();
    kron.submatrix_rows(&order)
}

/// Source and polarization parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarParams {
    pub n: usize,
    /// `P(V = 1)` of the Bernoulli source.
    pub p: f64,
    pub beta: f64,
    /// Replaces `2^{-n^β}` when set.
    #[serde(default)]
    pub delta_override: Option<f64>,
}

impl PolarParams {
    pub fn new(n: usize, p: f64, beta: f64) -> Self {
        Self {
            n,
            p,
            beta,
            delta_override: None,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta_override = Some(delta);
        self
    }

    /// `δ_n = 2^{-n^β}` unless overridden.
    pub fn delta(&self) -> f64 {
        self.delta_override
            .unwrap_or_else(|| (-(self.n as f64).powf(self.beta)).exp2())
    }

    pub fn validate(&self) -> Result<()> {
        log2_exact(self.n)?;
        if !(0.0..=1.0).contains(&self.p) {
            return Err(invalid(format!("source bias p = {} not in [0, 1]", self.p)));
        }
        if !(0.0..0.5).contains(&self.beta) {
            return Err(invalid(format!("beta = {} not in [0, 1/2)", self.beta)));
        }
        let d = self.delta();
        // Above 1/2 the "high" and "low" thresholds cross and the partition is ill-defined.
        if !(d > 0.0 && d <= 0.5) {
            return Err(invalid(format!("delta = {d} not in (0, 1/2]")));
        }
        Ok(())
    }
}

/// How the conditional entropies were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileMethod {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

/// Per-position conditional entropies and the `H` / `U` / `J` partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexProfile {
    pub n: usize,
    pub p: f64,
    pub beta: f64,
    pub delta: f64,
    pub entropies: Vec<f64>,
    pub h_set: Vec<usize>,
    pub u_set: Vec<usize>,
    pub j_set: Vec<usize>,
    pub method: ProfileMethod,
    /// Monte-Carlo sample count, `0` for exact profiles.
    pub samples: usize,
}

impl IndexProfile {
    /// Build a profile by classifying `entropies` against `delta`.
    ///
    /// Strict inequalities on both thresholds; a tie lands in `J`.
    pub fn classify(
        n: usize,
        p: f64,
        beta: f64,
        delta: f64,
        entropies: Vec<f64>,
        method: ProfileMethod,
    ) -> IndexProfile {
        let mut h_set = Vec::new();
        let mut u_set = Vec::new();
        let mut j_set = Vec::new();
        for (j, &e) in entropies.iter().enumerate() {
            if e > 1.0 - delta {
                h_set.push(j);
            } else if e < delta {
                u_set.push(j);
            } else {
                j_set.push(j);
            }
        }
        let samples = match method {
            ProfileMethod::Exact => 0,
            ProfileMethod::MonteCarlo { samples, .. } => samples,
        };
        IndexProfile {
            n,
            p,
            beta,
            delta,
            entropies,
            h_set,
            u_set,
            j_set,
            method,
            samples,
        }
    }

    /// A profile with explicit sets, for synthetic experiments (rate grids, hand-built tests).
    pub fn from_sets(
        n: usize,
        p: f64,
        h_set: Vec<usize>,
        j_set: Vec<usize>,
    ) -> Result<IndexProfile> {
        let mut seen = vec![false; n];
        for &j in h_set.iter().chain(&j_set) {
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, len: n });
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(invalid(format!("position {j} listed twice")));
            }
        }
        let mut entropies = vec![0.0; n];
        for &j in &h_set {
            entropies[j] = 1.0;
        }
        for &j in &j_set {
            entropies[j] = 0.5;
        }
        let u_set = (0..n).filter(|&j| !seen[j]).collect();
        let mut h_set = h_set;
        let mut j_set = j_set;
        h_set.sort_unstable();
        j_set.sort_unstable();
        Ok(IndexProfile {
            n,
            p,
            beta: 0.0,
            delta: 0.25,
            entropies,
            h_set,
            u_set,
            j_set,
            method: ProfileMethod::Exact,
            samples: 0,
        })
    }

    /// `|J|`, the per-row seed length.
    pub fn d_j(&self) -> usize {
        self.j_set.len()
    }

    /// `|H| + |J|`, the compressed row length.
    pub fn n_tilde(&self) -> usize {
        self.h_set.len() + self.j_set.len()
    }

    /// Short identifier used in sidecar files.
    pub fn id(&self) -> String {
        let method = match self.method {
            ProfileMethod::Exact => "exact".to_string(),
            ProfileMethod::MonteCarlo { samples, seed } => format!("mc{samples}s{seed}"),
        };
        format!(
            "n{}-p{}-delta{:.6e}-{}-h{}-j{}",
            self.n,
            self.p,
            self.delta,
            method,
            self.h_set.len(),
            self.j_set.len()
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<IndexProfile> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Compute the entropy profile for `params` using `method`.
pub fn entropy_profile(params: &PolarParams, method: ProfileMethod) -> Result<IndexProfile> {
    params.validate()?;
    let entropies = match method {
        ProfileMethod::Exact => exact_entropies(params.n, params.p)?,
        ProfileMethod::MonteCarlo { samples, seed } => {
            if samples < MC_MIN_SAMPLES {
                return Err(invalid(format!(
                    "Monte-Carlo profile needs at least {MC_MIN_SAMPLES} samples, got {samples}"
                )));
            }
            mc_entropies(params.n, params.p, samples, seed)
        }
    };
    Ok(IndexProfile::classify(
        params.n,
        params.p,
        params.beta,
        params.delta(),
        entropies,
        method,
    ))
}

/// `v · G_n` on a packed word, position `i` at bit `i`.
pub(crate) fn transform_word(v: u64, m: u32) -> u64 {
    let n = 1usize << m;
    let mut x = 0u64;
    for j in 0..n {
        x |= ((v >> bit_reverse(j, m)) & 1) << j;
    }
    let mut h = 1;
    while h < n {
        // positions i with (i & h) == 0 receive bit i + h
        let mut mask = 0u64;
        for i in 0..n {
            if i & h == 0 {
                mask |= 1 << i;
            }
        }
        x ^= (x >> h) & mask;
        h *= 2;
    }
    x
}

/// Exact `H(A_j | A^{j-1})` by enumerating all `2^n` source words.
pub fn exact_entropies(n: usize, p: f64) -> Result<Vec<f64>> {
    let m = log2_exact(n)?;
    if n > EXACT_MAX_N {
        return Err(Error::TooLarge {
            what: "exact-profile blocklength",
            value: n as u64,
            limit: EXACT_MAX_N as u64,
        });
    }
    let size = 1usize << n;
    let mut dist = vec![0.0f64; size];
    let (lp1, lp0) = (p.ln(), (1.0 - p).ln());
    for v in 0..size {
        let w = (v as u64).count_ones() as f64;
        let lp = if w > 0.0 { w * lp1 } else { 0.0 }
            + if (n as f64 - w) > 0.0 {
                (n as f64 - w) * lp0
            } else {
                0.0
            };
        dist[transform_word(v as u64, m) as usize] += lp.exp();
    }
    // dist is indexed by A with position i at bit i; peel the top position off repeatedly.
    let mut out = vec![0.0; n];
    for j in (0..n).rev() {
        let half = 1usize << j;
        let mut acc = 0.0;
        for k in 0..half {
            let (p0, p1) = (dist[k], dist[k + half]);
            let tot = p0 + p1;
            if tot > 0.0 {
                acc += tot * binary_entropy(p1 / tot);
            }
            dist[k] = tot;
        }
        dist.truncate(half);
        out[j] = acc.clamp(0.0, 1.0);
    }
    Ok(out)
}

/// Successive-cancellation core for `x = u · F^{⊗m}`.
///
/// Soft values are `d = P(0) - P(1)`; a check node multiplies them and a
/// variable node combines with `(d1 + d2) / (1 + d1 d2)`, both exact.
pub(crate) struct ScDecoder {
    scratch: Vec<f64>,
    partial: Vec<u8>,
}

#[inline]
fn var_combine(a: f64, b: f64) -> f64 {
    let den = 1.0 + a * b;
    if den <= 0.0 {
        0.0
    } else {
        ((a + b) / den).clamp(-1.0, 1.0)
    }
}

impl ScDecoder {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            scratch: vec![0.0; 2 * n],
            partial: vec![0; n],
        }
    }

    /// Decode `u` from channel soft values `d` (one per `x` position).
    /// `decide(j, d_j)` is called in order `j = 0..n` and returns the bit to commit.
    pub(crate) fn run<F: FnMut(usize, f64) -> u8>(&mut self, d: &[f64], u: &mut [u8], decide: &mut F) {
        let n = d.len();
        assert_eq!(u.len(), n);
        if self.partial.len() < n {
            *self = Self::new(n);
        }
        let (input, rest) = self.scratch.split_at_mut(n);
        input.copy_from_slice(d);
        sc_rec(input, rest, u, &mut self.partial[..n], 0, decide);
    }
}

fn sc_rec<F: FnMut(usize, f64) -> u8>(
    d: &[f64],
    scratch: &mut [f64],
    u: &mut [u8],
    x: &mut [u8],
    offset: usize,
    decide: &mut F,
) {
    let n = d.len();
    if n == 1 {
        let b = decide(offset, d[0]);
        u[0] = b;
        x[0] = b;
        return;
    }
    let h = n / 2;
    let (child, deeper) = scratch.split_at_mut(h);
    for i in 0..h {
        child[i] = d[i] * d[i + h];
    }
    let (ua, ub) = u.split_at_mut(h);
    let (xa, xb) = x.split_at_mut(h);
    sc_rec(child, deeper, ua, xa, offset, decide);
    for i in 0..h {
        let top = if xa[i] == 1 { -d[i] } else { d[i] };
        child[i] = var_combine(top, d[i + h]);
    }
    sc_rec(child, deeper, ub, xb, offset + h, decide);
    for i in 0..h {
        xa[i] ^= xb[i];
    }
}

/// Monte-Carlo `H(A_j | A^{j-1})`: average binary entropy of the genie-aided
/// SC posterior over `samples` i.i.d. source words.
pub fn mc_entropies(n: usize, p: f64, samples: usize, seed: u64) -> Vec<f64> {
    let shards = samples.div_ceil(MC_SHARD);
    let partials: Vec<Vec<f64>> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let count = MC_SHARD.min(samples - k * MC_SHARD);
            mc_shard(n, p, count, seed, k as u64)
        })
        .collect();
    let mut acc = vec![0.0; n];
    for part in &partials {
        for (a, b) in acc.iter_mut().zip(part) {
            *a += b;
        }
    }
    acc.iter()
        .map(|s| (s / samples as f64).clamp(0.0, 1.0))
        .collect()
}

fn mc_shard(n: usize, p: f64, count: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let threshold = bernoulli_threshold(p);
    let prior = vec![1.0 - 2.0 * p; n];
    let mut dec = ScDecoder::new(n);
    let mut acc = vec![0.0; n];
    let mut a = vec![0u8; n];
    let mut u = vec![0u8; n];
    for _ in 0..count {
        // x' = A·F is an i.i.d. Bernoulli(p) word (a permutation of V); A = x'·F.
        for bit in a.iter_mut() {
            *bit = sample_bit(&mut rng, threshold);
        }
        butterfly(&mut a);
        let mut decide = |j: usize, d: f64| {
            // saturated posteriors are common once positions polarize
            if d.abs() < 1.0 {
                acc[j] += binary_entropy((1.0 - d) * 0.5);
            }
            a[j]
        };
        dec.run(&prior, &mut u, &mut decide);
    }
    acc
}

/// Threshold for drawing Bernoulli(p) bits from 64-bit uniforms.
pub(crate) fn bernoulli_threshold(p: f64) -> u64 {
    if p >= 1.0 {
        u64::MAX
    } else {
        (p * 18446744073709551616.0) as u64
    }
}

#[inline]
pub(crate) fn sample_bit<R: RngCore>(rng: &mut R, threshold: u64) -> u8 {
    if threshold == u64::MAX {
        1
    } else {
        (rng.next_u64() < threshold) as u8
    }
}
