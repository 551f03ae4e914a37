//! End-to-end system: profile, codebook and keys for one parameter set, and
//! the encode → encrypt → decrypt → decode roundtrip.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitmat::BitMatrix;
use crate::crypt::{self, BlockCipher, CryptoParams, KeyPair, LinkFrame};
use crate::error::{invalid, Error, Result};
use crate::is_codec::{CodeParams, Codebook, CodebookKind};
use crate::polar::{self, IndexProfile, PolarParams, ProfileMethod};
use crate::source_codec::{self, SeedMatrix};

fn default_scheme() -> String {
    "toy-stream".into()
}

fn default_kind() -> CodebookKind {
    CodebookKind::Injective
}

fn default_samples() -> usize {
    100_000
}

fn default_t() -> f64 {
    1.0
}

/// Every symbol of the system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub n: usize,
    pub p: f64,
    pub beta: f64,
    #[serde(default)]
    pub delta_override: Option<f64>,
    pub ell: usize,
    #[serde(default)]
    pub w: usize,
    pub k_s: usize,
    #[serde(default = "default_t")]
    pub t: f64,
    pub c: usize,
    #[serde(default)]
    pub r: usize,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "default_kind")]
    pub codebook_kind: CodebookKind,
    #[serde(default)]
    pub codebook_seed: u64,
    /// Monte-Carlo samples when `n` is beyond exact profiling.
    #[serde(default = "default_samples")]
    pub mc_samples: usize,
    /// Enforce `k_s ≤ ℓ − w − ℓε`.
    #[serde(default)]
    pub security_checks: bool,
}

impl SystemParams {
    pub fn polar(&self) -> PolarParams {
        PolarParams {
            n: self.n,
            p: self.p,
            beta: self.beta,
            delta_override: self.delta_override,
        }
    }

    pub fn code(&self) -> CodeParams {
        CodeParams::new(self.ell, self.w, self.k_s, self.t, self.codebook_seed).with_kind(self.codebook_kind)
    }

    pub fn crypto(&self) -> CryptoParams {
        CryptoParams::new(self.c, self.r, &self.scheme)
    }

    pub fn profile_method(&self, seed: u64) -> ProfileMethod {
        if self.n <= 16 {
            ProfileMethod::Exact
        } else {
            ProfileMethod::MonteCarlo {
                samples: self.mc_samples,
                seed,
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.polar().validate()?;
        self.code().validate(self.security_checks)?;
        self.crypto().validate(self.ell)?;
        if self.k_s == 0 || self.k_s > self.ell {
            return Err(invalid(format!("k_s = {} must be in 1..=ℓ", self.k_s)));
        }
        Ok(())
    }
}

/// A ready-to-run instance.
pub struct System {
    pub params: SystemParams,
    pub profile: IndexProfile,
    pub codebook: Codebook,
    pub cipher: Box<dyn BlockCipher>,
    pub keys: KeyPair,
}

/// One roundtrip.
#[derive(Clone, Debug)]
pub struct Roundtrip {
    pub frame: LinkFrame,
    pub decoded: Option<BitMatrix>,
    pub ok: bool,
    /// Why the frame did not decode (codeword ambiguity, crypto failure).
    pub error: Option<String>,
}

impl System {
    /// Profile, codebook and keys; `seed` drives the profile estimator and keys.
    pub fn build(params: &SystemParams, seed: u64) -> Result<System> {
        params.validate()?;
        let profile = polar::entropy_profile(&params.polar(), params.profile_method(seed))?;
        let codebook = Codebook::generate(&params.code())?;
        let cipher = params.crypto().cipher()?;
        let keys = crypt::keygen(cipher.as_ref(), Some(seed));
        Ok(System {
            params: params.clone(),
            profile,
            codebook,
            cipher,
            keys,
        })
    }

    /// Fresh source matrix from the Bernoulli(p) law.
    pub fn sample_source<R: Rng + ?Sized>(&self, rng: &mut R) -> BitMatrix {
        let mut v = BitMatrix::zeros(self.params.ell, self.params.n);
        let threshold = polar::bernoulli_threshold(self.params.p);
        for i in 0..v.rows() {
            for j in 0..v.cols() {
                v.set(i, j, rng.next_u64() < threshold || threshold == u64::MAX);
            }
        }
        v
    }

    pub fn encrypt(&self, v: &BitMatrix, rng: &mut dyn RngCore) -> Result<(LinkFrame, SeedMatrix)> {
        let mut seed_rng = ChaCha8Rng::seed_from_u64(rng.next_u64());
        let seeds = SeedMatrix::random(self.params.ell, self.profile.d_j(), &mut seed_rng);
        let m = source_codec::encode_matrix(v, &seeds, &self.profile)?;
        let frame = crypt::crypt2_encrypt(&m, &seeds, &self.codebook, self.cipher.as_ref(), &self.keys.public_key, rng)?;
        Ok((frame, seeds))
    }

    pub fn decrypt(&self, frame: &LinkFrame) -> Result<BitMatrix> {
        let (m, seeds) = crypt::crypt2_decrypt(frame, &self.codebook, self.cipher.as_ref(), &self.keys.secret_key)?;
        source_codec::decode_matrix(&m, &seeds, &self.profile, self.params.p)
    }

    /// Encode, encrypt, decrypt and decode `v`. Codeword ambiguity and
    /// decryption failures count as failed roundtrips rather than errors.
    pub fn roundtrip(&self, v: &BitMatrix, rng: &mut dyn RngCore) -> Result<Roundtrip> {
        let (frame, _) = self.encrypt(v, rng)?;
        match self.decrypt(&frame) {
            Ok(decoded) => Ok(Roundtrip {
                ok: &decoded == v,
                decoded: Some(decoded),
                frame,
                error: None,
            }),
            Err(e @ (Error::Ambiguous(_) | Error::NotACodeword | Error::Decryption(_))) => Ok(Roundtrip {
                frame,
                decoded: None,
                ok: false,
                error: Some(e.to_string()),
            }),
            Err(e) => Err(e),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    /// Failures where channel decoding itself failed.
    pub channel_failures: usize,
    pub n_tilde: usize,
    pub d_j: usize,
    pub u_size: usize,
    pub params: SystemParams,
    pub seed: u64,
}

const TRIAL_SHARD: usize = 500;

/// Roundtrip failure rate over `trials` independent source matrices.
pub fn reliability(sys: &System, trials: usize, seed: u64) -> Result<ReliabilityReport> {
    let shards = trials.div_ceil(TRIAL_SHARD);
    let parts = (0..shards)
        .into_par_iter()
        .map(|s| -> Result<(usize, usize)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let (mut fail, mut chan) = (0, 0);
            for _ in 0..TRIAL_SHARD.min(trials - s * TRIAL_SHARD) {
                let v = sys.sample_source(&mut rng);
                let rt = sys.roundtrip(&v, &mut rng)?;
                fail += !rt.ok as usize;
                chan += rt.error.is_some() as usize;
            }
            Ok((fail, chan))
        })
        .collect::<Vec<_>>();
    let (mut failures, mut channel_failures) = (0, 0);
    for part in parts {
        let (f, c) = part?;
        failures += f;
        channel_failures += c;
    }
    Ok(ReliabilityReport {
        trials,
        failures,
        failure_rate: failures as f64 / trials.max(1) as f64,
        channel_failures,
        n_tilde: sys.profile.n_tilde(),
        d_j: sys.profile.d_j(),
        u_size: sys.profile.u_set.len(),
        params: sys.params.clone(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, ell: usize, p: f64) -> SystemParams {
        SystemParams {
            n,
            p,
            beta: 0.25,
            delta_override: None,
            ell,
            w: 0,
            k_s: 2,
            t: 1.0,
            c: 2,
            r: 16,
            scheme: "toy-stream".into(),
            codebook_kind: CodebookKind::Injective,
            codebook_seed: 3,
            mc_samples: 10_000,
            security_checks: false,
        }
    }

    #[test]
    fn uniform_source_roundtrips() {
        let sys = System::build(&params(16, 8, 0.5), 1).unwrap();
        let rep = reliability(&sys, 50, 2).unwrap();
        assert_eq!(rep.failures, 0);
        assert_eq!(rep.d_j, 0);
    }

    #[test]
    fn transparency_roundtrip() {
        let mut p = params(8, 6, 0.11);
        p.scheme = "identity".into();
        p.r = 0;
        p.c = 1;
        let sys = System::build(&p, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v = BitMatrix::zeros(6, 8);
        let rt = sys.roundtrip(&v, &mut rng).unwrap();
        assert!(rt.ok);
    }

    #[test]
    fn params_json_roundtrip() {
        let p = params(16, 8, 0.2);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<SystemParams>(&text).unwrap(), p);
        assert!(serde_json::from_str::<SystemParams>(r#"{"n": 8}"#).is_err());
    }
}
