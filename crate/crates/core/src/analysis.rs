//! Divergences, the information-rate identity and the seed-length study.

use std::io::Write;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitmat::BitMatrix;
use crate::crypt::{self, BlockCipher};
use crate::error::{dim, invalid, Result};
use crate::is_codec::{CodeParams, Codebook, CodebookKind};
use crate::polar::{self, IndexProfile, PolarParams, ProfileMethod};
use crate::source_codec::{CompressedMatrix, SeedMatrix};

fn check_distribution(p: &[f64]) -> Result<()> {
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 || p.iter().any(|&x| x < 0.0) {
        return Err(invalid(format!("not a distribution (sum {s})")));
    }
    Ok(())
}

fn check_pair(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(dim(format!("supports of size {} and {}", p.len(), q.len())));
    }
    check_distribution(p)?;
    check_distribution(q)
}

/// Non-normalized variational distance `Σ|p − q|`.
pub fn variational_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pair(p, q)?;
    Ok(p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum())
}

/// Shannon entropy in bits.
pub fn entropy_bits(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// `D(p ‖ q)` in bits; infinite when `q` misses mass of `p`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pair(p, q)?;
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b == 0.0 {
                return Ok(f64::INFINITY);
            }
            d += a * (a / b).log2();
        }
    }
    Ok(d.max(0.0))
}

/// `k − H(p)` for a law on `k` bits (`p.len() == 2^k`).
pub fn kl_to_uniform(p: &[f64]) -> Result<f64> {
    if !p.len().is_power_of_two() {
        return Err(dim(format!("support of size {} is not 2^k", p.len())));
    }
    check_distribution(p)?;
    Ok((p.len().trailing_zeros() as f64 - entropy_bits(p)).max(0.0))
}

/// `(½ 𝕍(p, q)², D(p ‖ q))`, the divergence in nats.
pub fn pinsker_gap(p: &[f64], q: &[f64]) -> Result<(f64, f64)> {
    let v = variational_distance(p, q)?;
    let d = kl_divergence(p, q)? * std::f64::consts::LN_2;
    Ok((0.5 * v * v, d))
}

/// Bias `p ∈ [0, ½]` with binary entropy `h`.
pub fn bias_for_entropy(h: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&h) {
        return Err(invalid(format!("entropy {h} not in [0, 1]")));
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if polar::binary_entropy(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub type Rational = Ratio<u128>;

/// `1 / (|H|/n (1 + r/ℓ) + d_J/n (2 + r/ℓ + r/c))`, exactly.
pub fn rate_formula(n: usize, h: usize, d_j: usize, ell: usize, c: usize, r: usize) -> Result<Rational> {
    if c == 0 || c >= ell {
        return Err(invalid(format!("c = {c} must satisfy 1 ≤ c < ℓ = {ell}")));
    }
    let q = |a: usize, b: usize| Rational::new(a as u128, b as u128);
    let one = Rational::from_integer(1);
    let two = Rational::from_integer(2);
    let den = q(h, n) * (one + q(r, ell)) + q(d_j, n) * (two + q(r, ell) + q(r, c));
    if den == Rational::from_integer(0) {
        return Err(invalid("rate undefined: nothing is transmitted"));
    }
    Ok(den.recip())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub n: usize,
    pub ell: usize,
    pub c: usize,
    pub r: usize,
    pub h_size: usize,
    pub d_j: usize,
    /// Formula value as `num/den`.
    pub rate_exact: String,
    pub rate: f64,
    /// `ℓ n / frame payload bits` of a frame actually built, as `num/den`.
    pub measured_exact: String,
    pub measured_rate: f64,
    pub frame_bits: usize,
    pub exact_match: bool,
    pub hv_frac: f64,
    pub dj_frac: f64,
    pub r_over_ell: f64,
    pub r_over_c: f64,
}

fn ratio_string(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

fn ratio_f64(x: &Rational) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Rate by formula and by counting the bits of a real frame built for `profile`.
pub fn rate_report(profile: &IndexProfile, ell: usize, c: usize, r: usize, cb: Option<&Codebook>) -> Result<RateReport> {
    let (n, h, d_j) = (profile.n, profile.h_set.len(), profile.d_j());
    let formula = rate_formula(n, h, d_j, ell, c, r)?;
    let owned;
    let cb = match cb {
        Some(cb) if cb.ell() == ell => cb,
        Some(cb) => return Err(dim(format!("codebook for ℓ = {}, system ℓ = {ell}", cb.ell()))),
        None => {
            owned = Codebook::generate(&CodeParams::new(ell, 0, 1, 1.0, 0).with_kind(CodebookKind::Injective))?;
            &owned
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(((n * 31 + ell) * 31 + c) as u64 * 31 + r as u64);
    let m = CompressedMatrix {
        bits: BitMatrix::random(ell, profile.n_tilde(), &mut rng),
        profile_id: profile.id(),
    };
    let seeds = SeedMatrix::random(ell, d_j, &mut rng);
    let cipher: Box<dyn BlockCipher> = crypt::scheme("toy-stream", c, r)?;
    let keys = crypt::keygen(cipher.as_ref(), Some(0));
    let frame = crypt::crypt2_encrypt(&m, &seeds, cb, cipher.as_ref(), &keys.public_key, &mut rng)?;
    let bits = frame.payload_bits();
    let measured = Rational::new((ell * n) as u128, bits as u128);
    Ok(RateReport {
        n,
        ell,
        c,
        r,
        h_size: h,
        d_j,
        rate_exact: ratio_string(&formula),
        rate: ratio_f64(&formula),
        measured_exact: ratio_string(&measured),
        measured_rate: ratio_f64(&measured),
        frame_bits: bits,
        exact_match: measured == formula,
        hv_frac: h as f64 / n as f64,
        dj_frac: d_j as f64 / n as f64,
        r_over_ell: r as f64 / ell as f64,
        r_over_c: r as f64 / c as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedStudyPoint {
    pub n: usize,
    pub p: f64,
    pub beta: f64,
    pub delta: f64,
    pub d_j: usize,
    pub n_tilde: usize,
    pub seed_fraction: f64,
    pub bound_low: f64,
    pub bound_high: f64,
    pub method: String,
}

/// Estimator for profiles beyond exact reach.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub samples: usize,
    pub seed: u64,
    /// Largest `n` profiled exactly.
    pub exact_up_to: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 1,
            exact_up_to: 16,
        }
    }
}

pub fn seed_study_point(profile: &IndexProfile) -> SeedStudyPoint {
    let n = profile.n as f64;
    let method = match profile.method {
        ProfileMethod::Exact => "exact".to_string(),
        ProfileMethod::MonteCarlo { samples, seed } => format!("monte-carlo({samples},{seed})"),
    };
    SeedStudyPoint {
        n: profile.n,
        p: profile.p,
        beta: profile.beta,
        delta: profile.delta,
        d_j: profile.d_j(),
        n_tilde: profile.n_tilde(),
        seed_fraction: if profile.n_tilde() == 0 {
            0.0
        } else {
            profile.d_j() as f64 / profile.n_tilde() as f64
        },
        bound_low: n.powf(0.7214),
        bound_high: n.powf(0.7331),
        method,
    }
}

/// Seed length against blocklength. The `n^{0.7214}`/`n^{0.7331}` bracket is
/// asymptotic and only reported.
pub fn seed_study(n_list: &[usize], p: f64, beta: f64, est: &EstimatorConfig) -> Result<Vec<SeedStudyPoint>> {
    n_list
        .iter()
        .map(|&n| {
            let method = if n <= est.exact_up_to {
                ProfileMethod::Exact
            } else {
                ProfileMethod::MonteCarlo {
                    samples: est.samples,
                    seed: est.seed,
                }
            };
            let prof = polar::entropy_profile(&PolarParams::new(n, p, beta), method)?;
            Ok(seed_study_point(&prof))
        })
        .collect()
}

/// One CSV row per record, header from the field names.
pub fn write_csv<T: Serialize, W: Write>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variational_examples() {
        let p = [0.25, 0.25, 0.5];
        assert_eq!(variational_distance(&p, &p).unwrap(), 0.0);
        assert_eq!(variational_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
        let a = [0.1, 0.2, 0.05, 0.05, 0.2, 0.1, 0.2, 0.1];
        let b = [0.125; 8];
        let hand = 0.025 + 0.075 + 0.075 + 0.075 + 0.075 + 0.025 + 0.075 + 0.025;
        assert!((variational_distance(&a, &b).unwrap() - hand).abs() < 1e-12);
        assert!(variational_distance(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn kl_uniform_examples() {
        assert!(kl_to_uniform(&[0.25; 4]).unwrap().abs() < 1e-12);
        let mut point = vec![0.0; 8];
        point[3] = 1.0;
        assert_eq!(kl_to_uniform(&point).unwrap(), 3.0);
        let b = [0.89, 0.11];
        let prod: Vec<f64> = (0..4).map(|k| b[k >> 1] * b[k & 1]).collect();
        let expect = 2.0 - 2.0 * polar::binary_entropy(0.11);
        assert!((kl_to_uniform(&prod).unwrap() - expect).abs() < 1e-12);
        assert!((expect - 1.0002).abs() < 1e-3);
    }

    #[test]
    fn pinsker_holds() {
        assert_eq!(pinsker_gap(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), (0.0, 0.0));
        let (_, d) = pinsker_gap(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert!(d.is_infinite());
    }

    #[test]
    fn rate_examples() {
        // |H|/n = 0.9, d_J/n = 0.02 at n = 100
        let r = rate_formula(100, 90, 2, 16, 2, 2).unwrap();
        assert_eq!(r, Rational::new(1000, 1075));
        assert_eq!(rate_formula(16, 10, 2, 8, 2, 0).unwrap(), Rational::new(16, 14));
        assert_eq!(rate_formula(16, 12, 0, 8, 2, 0).unwrap(), Rational::new(16, 12));
        assert!(rate_formula(16, 12, 0, 8, 8, 0).is_err());
    }

    #[test]
    fn rate_report_matches() {
        let prof = IndexProfile::from_sets(16, 0.11, (0..10).collect(), vec![10, 11]).unwrap();
        let rep = rate_report(&prof, 8, 2, 4, None).unwrap();
        assert!(rep.exact_match, "{rep:?}");
    }

    #[test]
    fn entropy_inverse() {
        let p = bias_for_entropy(0.9).unwrap();
        assert!((polar::binary_entropy(p) - 0.9).abs() < 1e-12);
        assert!((p - 0.3160).abs() < 1e-3);
    }

    #[test]
    fn csv_output() {
        let pts = seed_study(&[8, 16], 0.5, 0.25, &EstimatorConfig::default()).unwrap();
        assert!(pts.iter().all(|p| p.d_j == 0));
        let mut buf = Vec::new();
        write_csv(&mut buf, &pts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,p,beta,delta,d_j,n_tilde,seed_fraction"));
        assert_eq!(text.lines().count(), 3);
    }
}
