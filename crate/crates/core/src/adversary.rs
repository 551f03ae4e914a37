//! Eavesdropper harnesses.
//!
//! The information-theoretic eavesdropper sees `w` links of the coded matrix
//! and its leakage is measured exactly by enumeration. The computational
//! eavesdropper sees every link, but only the `ℓ − c` unencrypted ones in the
//! clear, and plays a distinguishing game against an exact Bayesian strategy.
//!
//! Distances use the non-normalized variational distance `Σ|p − q|` (max 2).

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitmat::{BitMatrix, BitVector};
use crate::crypt::{BlockCipher, ToyStream};
use crate::error::{invalid, Error, Result};
use crate::is_codec::Codebook;
use crate::polar::{self, IndexProfile};

/// Rows `wset` of the coded matrix.
pub fn it_eve_observe(x: &BitMatrix, wset: &[usize]) -> Result<BitMatrix> {
    if wset.len() >= x.rows() && x.rows() > 0 {
        return Err(invalid(format!("|W| = {} must be below ℓ = {}", wset.len(), x.rows())));
    }
    x.submatrix_rows(wset)
}

/// `ñ ℓ^{-t/2} + 2 √(2 ñ ℓ 2^{-n^β})`.
pub fn leakage_bound(n_tilde: usize, ell: usize, t: f64, n: usize, beta: f64) -> f64 {
    let (nt, l) = (n_tilde as f64, ell as f64);
    nt * l.powf(-t / 2.0) + 2.0 * (2.0 * nt * l * (-(n as f64).powf(beta)).exp2()).sqrt()
}

/// Everything the leakage enumeration needs.
pub struct LeakageInstance<'a> {
    pub profile: &'a IndexProfile,
    pub codebook: &'a Codebook,
    pub w: usize,
    pub t: f64,
}

/// Upper limit on `ℓ(n + d_J)` for [`leakage_exact`].
pub const LEAKAGE_MAX_STATE_BITS: usize = 22;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub n: usize,
    pub p: f64,
    pub ell: usize,
    pub w: usize,
    pub ks_set: Vec<usize>,
    pub n_tilde: usize,
    pub d_j: usize,
    pub t: f64,
    pub beta: f64,
    pub states: u64,
    /// Worst case over observed sets `W` and conditioning values.
    pub max_distance: f64,
    /// Worst `W`, averaged over conditioning values under their law.
    pub mean_distance: f64,
    pub worst_w: Vec<usize>,
    pub bound: f64,
}

fn subsets_of_size(ell: usize, w: usize) -> Vec<u32> {
    (0u32..1 << ell).filter(|m| m.count_ones() as usize == w).collect()
}

/// Exact `max_{W, v} 𝕍(p_{Z_W | V_K = v}, p_{Z_W})` over all `|W| = w`.
pub fn leakage_exact(inst: &LeakageInstance, ks_set: &[usize]) -> Result<LeakageReport> {
    let prof = inst.profile;
    let cb = inst.codebook;
    let ell = cb.ell();
    let (n, dj, nt) = (prof.n, prof.d_j(), prof.n_tilde());
    if inst.w >= ell {
        return Err(invalid(format!("w = {} must be below ℓ = {ell}", inst.w)));
    }
    if let Some(&k) = ks_set.iter().find(|&&k| k >= ell) {
        return Err(Error::IndexOutOfRange { index: k, len: ell });
    }
    let state_bits = ell * (n + dj);
    if state_bits > LEAKAGE_MAX_STATE_BITS {
        return Err(Error::TooLarge {
            what: "leakage enumeration state bits",
            value: state_bits as u64,
            limit: LEAKAGE_MAX_STATE_BITS as u64,
        });
    }
    if ks_set.len() * n > 64 || inst.w * nt > 64 {
        return Err(Error::TooLarge {
            what: "conditioning or observation key bits",
            value: (ks_set.len() * n).max(inst.w * nt) as u64,
            limit: 64,
        });
    }
    let m = n.trailing_zeros();
    let p = prof.p;
    let seed_weight = (-(dj as f64)).exp2();
    let row_states = 1usize << (n + dj);
    let mut row_out = vec![0u32; row_states];
    let mut row_prob = vec![0.0f64; 1 << n];
    for v in 0..1usize << n {
        let wt = v.count_ones() as i32;
        row_prob[v] = p.powi(wt) * (1.0 - p).powi(n as i32 - wt) * seed_weight;
        let a = polar::transform_word(v as u64, m);
        for s in 0..1usize << dj {
            let mut out = 0u32;
            for &j in &prof.h_set {
                out = (out << 1) | ((a >> j) & 1) as u32;
            }
            for (k, &j) in prof.j_set.iter().enumerate() {
                out = (out << 1) | ((((a >> j) as u32) ^ (s >> (dj - 1 - k)) as u32) & 1);
            }
            row_out[(v << dj) | s] = out;
        }
    }

    let masks = subsets_of_size(ell, inst.w);
    let mut joint: Vec<HashMap<(u64, u64), f64>> = vec![HashMap::new(); masks.len()];
    let mut rows = vec![0usize; ell];
    let mut xcols = vec![0u32; nt];
    for state in 0..1usize << state_bits {
        let mut prob = 1.0;
        let mut rest = state;
        for r in rows.iter_mut() {
            *r = rest % row_states;
            rest /= row_states;
            prob *= row_prob[*r >> dj];
        }
        if prob == 0.0 {
            continue;
        }
        let vk = ks_set
            .iter()
            .fold(0u64, |acc, &i| (acc << n) | (rows[i] >> dj) as u64);
        for (j, xc) in xcols.iter_mut().enumerate() {
            let col = rows
                .iter()
                .fold(0u32, |acc, &r| (acc << 1) | ((row_out[r] >> (nt - 1 - j)) & 1));
            *xc = cb.encode_word(col);
        }
        for (mask, map) in masks.iter().zip(joint.iter_mut()) {
            let mut z = 0u64;
            for &xc in &xcols {
                for i in 0..ell {
                    if mask >> (ell - 1 - i) & 1 == 1 {
                        z = (z << 1) | ((xc >> (ell - 1 - i)) & 1) as u64;
                    }
                }
            }
            *map.entry((vk, z)).or_insert(0.0) += prob;
        }
    }

    let mut max_distance = 0.0f64;
    let mut mean_distance = 0.0f64;
    let mut worst_w = Vec::new();
    for (mask, map) in masks.iter().zip(&joint) {
        let mut pz: HashMap<u64, f64> = HashMap::new();
        let mut pv: HashMap<u64, f64> = HashMap::new();
        for (&(v, z), &q) in map {
            *pz.entry(z).or_insert(0.0) += q;
            *pv.entry(v).or_insert(0.0) += q;
        }
        let total: f64 = pz.values().sum();
        let (mut worst, mut avg) = (0.0f64, 0.0f64);
        for (&v, &qv) in &pv {
            let d: f64 = pz
                .iter()
                .map(|(&z, &qz)| (map.get(&(v, z)).copied().unwrap_or(0.0) / qv - qz / total).abs())
                .sum();
            worst = worst.max(d);
            avg += qv / total * d;
        }
        if worst > max_distance || worst_w.is_empty() {
            max_distance = worst;
            mean_distance = avg;
            worst_w = (0..ell).filter(|i| mask >> (ell - 1 - i) & 1 == 1).collect();
        }
    }
    Ok(LeakageReport {
        n,
        p,
        ell,
        w: inst.w,
        ks_set: ks_set.to_vec(),
        n_tilde: nt,
        d_j: dj,
        t: inst.t,
        beta: prof.beta,
        states: 1u64 << state_bits,
        max_distance,
        mean_distance,
        worst_w,
        bound: leakage_bound(nt, ell, inst.t, n, prof.beta),
    })
}

/// Offsets in `bin1` and `bin2` whose codewords agree with `observed` on `coords`.
pub fn filter_bins(
    cb: &Codebook,
    coords: &[usize],
    observed: &BitVector,
    bin1: usize,
    bin2: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if coords.len() != observed.len() {
        return Err(crate::error::dim("one observed bit per coordinate"));
    }
    let ell = cb.ell();
    let mut mask = 0u32;
    let mut want = 0u32;
    for (k, &i) in coords.iter().enumerate() {
        if i >= ell {
            return Err(Error::IndexOutOfRange { index: i, len: ell });
        }
        let bit = 1u32 << (ell - 1 - i);
        if mask & bit != 0 && (want & bit != 0) != observed.get(k) {
            // contradictory observation of the same coordinate
            return Ok((Vec::new(), Vec::new()));
        }
        mask |= bit;
        if observed.get(k) {
            want |= bit;
        }
    }
    for b in [bin1, bin2] {
        if b >= cb.num_bins() {
            return Err(Error::IndexOutOfRange { index: b, len: cb.num_bins() });
        }
    }
    let scan = |b: usize| -> Vec<usize> {
        cb.bin(b)
            .iter()
            .enumerate()
            .filter(|(_, &x)| x & mask == want)
            .map(|(o, _)| o)
            .collect()
    };
    Ok((scan(bin1), scan(bin2)))
}

/// `√(1 − (1 − δ)^{ln 4}) / 2`.
pub fn zeta_of_delta(delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(invalid(format!("δ = {delta} not in [0, 1]")));
    }
    Ok((1.0 - (1.0 - delta).powf(4f64.ln())).sqrt() / 2.0)
}

/// `(p_max, p_min) = ((½ + ζ)^{k_w}, (½ − ζ)^{k_w})`.
pub fn codeword_probability_bounds(zeta: f64, k_w: usize) -> (f64, f64) {
    ((0.5 + zeta).powi(k_w as i32), (0.5 - zeta).powi(k_w as i32))
}

/// `(|B₁| p_max − |B₂| p_min) / (|B₁| p_max + |B₂| p_min)`.
pub fn advantage_ratio(b1: f64, p_max: f64, b2: f64, p_min: f64) -> f64 {
    let den = b1 * p_max + b2 * p_min;
    if den == 0.0 {
        0.0
    } else {
        (b1 * p_max - b2 * p_min) / den
    }
}

/// `2^{-n^β / 2} k_w + ℓ^{-t} + c^{-d}`.
pub fn advantage_bound(n: usize, beta: f64, k_w: usize, ell: usize, t: f64, c: usize, d: f64) -> f64 {
    (-(n as f64).powf(beta) / 2.0).exp2() * k_w as f64 + (ell as f64).powf(-t) + (c as f64).powf(-d)
}

/// `P(A_j = 1)` for `A = V · G_n`, `V` i.i.d. Bernoulli(p): column `j` of
/// `G_n` has weight `2^{m − popcount(j)}`.
pub fn column_marginal(n: usize, p: f64, j: usize) -> f64 {
    let m = n.trailing_zeros();
    let weight = 1i32 << (m - (j as u32).count_ones());
    (1.0 - (1.0 - 2.0 * p).powi(weight)) / 2.0
}

/// System side of the game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSystem {
    pub n: usize,
    pub beta: f64,
    /// `δ` used for ζ; normally `2^{-n^β}`.
    pub delta: f64,
    pub t: f64,
    /// Encrypted links; `ℓ − c` coordinates are seen in the clear.
    pub c: usize,
    /// Expansion of the toy block cipher used by the challenger.
    pub r: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    /// Challenged position, 0-based, among the secured bits `0..k_s`.
    pub i_star: usize,
    /// The two candidate values of the challenged bit.
    pub m1: bool,
    pub m2: bool,
    pub trials: usize,
    pub d: f64,
    pub reveal_ks_minus_one: bool,
    /// `P(bit = 1)` of every non-challenged bit in the column.
    pub column_bias: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdvantageReport {
    pub trials: usize,
    pub wins: usize,
    pub win_rate: f64,
    pub p_sigma_max: f64,
    pub empirical_advantage: f64,
    pub std_error: f64,
    pub analytic_bound: f64,
    /// Mean filtered sizes of the `m1` and `m2` bins.
    pub b1_size: f64,
    pub b2_size: f64,
    pub zeta: f64,
    pub p_max: f64,
    pub p_min: f64,
    pub ell: usize,
    pub k_s: usize,
    pub k_w: usize,
    pub c: usize,
    pub column_bias: f64,
    pub system: GameSystem,
    pub config: GameConfig,
}

impl AdvantageReport {
    /// `empirical ≤ bound + k·SE`.
    pub fn within_bound(&self, k: f64) -> bool {
        self.empirical_advantage <= self.analytic_bound + k * self.std_error
    }
}

const GAME_SHARD: usize = 2_000;

/// Plays the individual-bit distinguishing game `cfg.trials` times.
///
/// Per trial the challenger draws `h`, sets the challenged bit to `m_h`, draws
/// the remaining column bits i.i.d. Bernoulli(column_bias), encodes, and
/// encrypts the first `c` coordinates with the toy cipher. The adversary sees
/// the clear coordinates (and the other secured bits when revealed) and picks
/// the `h` of larger exact posterior mass, breaking ties by a coin flip.
pub fn run_iss_cca1_game(cb: &Codebook, sys: &GameSystem, cfg: &GameConfig) -> Result<AdvantageReport> {
    let (ell, k_s, k_w) = (cb.ell(), cb.k_s(), cb.k_w());
    if cfg.i_star >= k_s {
        return Err(Error::IndexOutOfRange { index: cfg.i_star, len: k_s });
    }
    if cfg.trials == 0 || cfg.m1 == cfg.m2 {
        return Err(invalid("need at least one trial and two distinct candidate bits"));
    }
    if sys.c == 0 || sys.c > ell {
        return Err(invalid(format!("c = {} with ℓ = {ell}", sys.c)));
    }
    if !(0.0..=1.0).contains(&cfg.column_bias) {
        return Err(invalid("column bias outside [0, 1]"));
    }
    let q = cfg.column_bias;
    let w = ell - sys.c;
    let clear_mask = if w == 0 { 0 } else { (1u32 << w) - 1 };
    let bit_prob = |bits: u32, len: usize| -> f64 {
        let ones = bits.count_ones() as i32;
        q.powi(ones) * (1.0 - q).powi(len as i32 - ones)
    };
    // mass[b][z]: prior mass of offsets in bin b whose clear coordinates read z
    let patterns = 1usize << w;
    let mut mass = vec![0.0f64; cb.num_bins() * patterns];
    let mut count = vec![0u32; cb.num_bins() * patterns];
    for b in 0..cb.num_bins() {
        for (o, &x) in cb.bin(b).iter().enumerate() {
            let z = (x & clear_mask) as usize;
            mass[b * patterns + z] += bit_prob(o as u32, k_w);
            count[b * patterns + z] += 1;
        }
    }
    let star_bit = 1usize << (k_s - 1 - cfg.i_star);
    let others_len = k_s - 1;
    let other_prob = |bin: usize| -> f64 {
        let others = (bin & !star_bit) as u32;
        bit_prob(others, others_len)
    };
    let with_star = |bin: usize, v: bool| if v { bin | star_bit } else { bin & !star_bit };
    let posterior = |bin_true: usize, z: usize, v: bool| -> f64 {
        if cfg.reveal_ks_minus_one {
            mass[with_star(bin_true, v) * patterns + z]
        } else {
            (0..cb.num_bins())
                .filter(|&b| (b & star_bit != 0) == v)
                .map(|b| other_prob(b) * mass[b * patterns + z])
                .sum()
        }
    };

    let cipher = ToyStream::new(sys.c, sys.r)?;
    let keys = crate::crypt::keygen(&cipher, Some(cfg.seed ^ 0x6b65_7973));
    let threshold = polar::bernoulli_threshold(q);
    let shards = cfg.trials.div_ceil(GAME_SHARD);
    let results: Vec<Result<(usize, f64, f64)>> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(s as u64);
            let count_here = GAME_SHARD.min(cfg.trials - s * GAME_SHARD);
            let (mut wins, mut b1, mut b2) = (0usize, 0.0, 0.0);
            for _ in 0..count_here {
                let h = rng.gen::<bool>();
                let star = if h { cfg.m2 } else { cfg.m1 };
                let mut bin = 0usize;
                for _ in 0..k_s {
                    bin = (bin << 1) | polar::sample_bit(&mut rng, threshold) as usize;
                }
                bin = with_star(bin, star);
                let mut offset = 0usize;
                for _ in 0..k_w {
                    offset = (offset << 1) | polar::sample_bit(&mut rng, threshold) as usize;
                }
                let x = cb.word(bin, offset);
                // the challenger's ciphertext; the adversary cannot use it
                let head = BitVector::from_uint((x >> w) as u64, sys.c);
                let _y = cipher.encrypt(&head, &keys.public_key, &mut rng as &mut dyn RngCore)?;
                let z = (x & clear_mask) as usize;
                let (l1, l2) = (posterior(bin, z, cfg.m1), posterior(bin, z, cfg.m2));
                let guess = if l1 > l2 {
                    false
                } else if l2 > l1 {
                    true
                } else {
                    rng.gen::<bool>()
                };
                wins += (guess == h) as usize;
                b1 += count[with_star(bin, cfg.m1) * patterns + z] as f64;
                b2 += count[with_star(bin, cfg.m2) * patterns + z] as f64;
            }
            Ok((wins, b1, b2))
        })
        .collect();
    let (mut wins, mut b1, mut b2) = (0usize, 0.0, 0.0);
    for r in results {
        let (a, x, y) = r?;
        wins += a;
        b1 += x;
        b2 += y;
    }
    let n_trials = cfg.trials as f64;
    let win_rate = wins as f64 / n_trials;
    let zeta = zeta_of_delta(sys.delta)?;
    let (p_max, p_min) = codeword_probability_bounds(zeta, k_w);
    Ok(AdvantageReport {
        trials: cfg.trials,
        wins,
        win_rate,
        p_sigma_max: 0.5,
        empirical_advantage: win_rate - 0.5,
        std_error: (win_rate * (1.0 - win_rate) / n_trials).sqrt(),
        analytic_bound: advantage_bound(sys.n, sys.beta, k_w, ell, sys.t, sys.c, cfg.d),
        b1_size: b1 / n_trials,
        b2_size: b2 / n_trials,
        zeta,
        p_max,
        p_min,
        ell,
        k_s,
        k_w,
        c: sys.c,
        column_bias: q,
        system: sys.clone(),
        config: cfg.clone(),
    })
}

/// A codebook whose bins with the challenged bit set mirror the bins with it
/// clear, except that encrypted coordinate 0 is flipped. Clear coordinates
/// then carry no information about the challenged bit.
pub fn mirrored_codebook(ell: usize, k_s: usize, i_star: usize, seed: u64) -> Result<Codebook> {
    if ell == 0 || ell > crate::is_codec::MAX_ELL || i_star >= k_s || k_s > ell {
        return Err(invalid(format!("bad mirrored shape ℓ = {ell}, k_s = {k_s}, i* = {i_star}")));
    }
    let half = 1u32 << (ell - 1);
    let mut base: Vec<u32> = (0..half).collect();
    base.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let k_w = ell - k_s;
    let star_bit = 1usize << (k_s - 1 - i_star);
    let mut next = base.into_iter();
    let mut words = vec![0u32; 1 << ell];
    for b in (0..1usize << k_s).filter(|b| b & star_bit == 0) {
        for o in 0..1usize << k_w {
            let w = next.next().expect("half of the codewords");
            words[(b << k_w) | o] = w;
            words[((b | star_bit) << k_w) | o] = w ^ half;
        }
    }
    Codebook::from_codewords(ell, k_s, words)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub patterns: usize,
    pub expected: f64,
    pub eps: f64,
    /// Fraction of patterns where every bin's filtered size is in the window.
    pub all_bins_fraction: f64,
    /// Fraction of (pattern, bin) pairs in the window.
    pub per_bin_fraction: f64,
    pub min_size: usize,
    pub max_size: usize,
}

/// Filtered bin sizes for random observation patterns: a random set of `w`
/// coordinates read off the codeword of a uniformly random message.
pub fn bin_concentration(
    cb: &Codebook,
    w: usize,
    l_eps: usize,
    eps: f64,
    patterns: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    let ell = cb.ell();
    if w > ell {
        return Err(invalid(format!("w = {w} exceeds ℓ = {ell}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let expected = (l_eps as f64).exp2();
    let (lo, hi) = ((1.0 - eps) * expected, (1.0 + eps) * expected);
    let (mut all_ok, mut bins_ok) = (0usize, 0usize);
    let (mut min_size, mut max_size) = (usize::MAX, 0usize);
    for _ in 0..patterns {
        let coords = rand::seq::index::sample(&mut rng, ell, w).into_vec();
        let msg = rng.gen_range(0..1u32 << ell);
        let x = cb.encode_word(msg);
        let mut mask = 0u32;
        for &i in &coords {
            mask |= 1 << (ell - 1 - i);
        }
        let want = x & mask;
        let mut all = true;
        for b in 0..cb.num_bins() {
            let size = cb.bin(b).iter().filter(|&&y| y & mask == want).count();
            min_size = min_size.min(size);
            max_size = max_size.max(size);
            let ok = (size as f64) >= lo && (size as f64) <= hi;
            bins_ok += ok as usize;
            all &= ok;
        }
        all_ok += all as usize;
    }
    Ok(ConcentrationReport {
        patterns,
        expected,
        eps,
        all_bins_fraction: all_ok as f64 / patterns as f64,
        per_bin_fraction: bins_ok as f64 / (patterns * cb.num_bins()) as f64,
        min_size,
        max_size,
    })
}
