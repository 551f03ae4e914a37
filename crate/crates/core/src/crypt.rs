//! Partial encryption: a pluggable `c → c + r` block cipher and the link
//! frame that carries encrypted columns, overflow bits and the encrypted seed.
//!
//! Frame layout, with encrypted links `0..c`:
//! * link `k < c` carries bit `k` of each column ciphertext, column by column;
//! * links `k ≥ c` carry row `k` of the coded matrix unchanged;
//! * link 0 additionally carries the `r` overflow bits of every column
//!   ciphertext (in column order) and then the `γ` seed ciphertexts of
//!   `c + r` bits each.
//!
//! The seed matrix is flattened row-major and zero-padded to `γ · c` bits.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bitmat::{pack_msb, unpack_msb, BitMatrix, BitVector};
use crate::error::{dim, invalid, Error, Result};
use crate::is_codec::{self, Codebook};
use crate::source_codec::{CompressedMatrix, SeedMatrix};

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyPair {
    pub public_key: Vec<u8>,
    pub secret_key: Vec<u8>,
    pub scheme_name: String,
}

impl std::fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyPair")
            .field("scheme_name", &self.scheme_name)
            .field("public_key_len", &self.public_key.len())
            .finish_non_exhaustive()
    }
}

/// Result of a block decryption.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decrypted {
    pub block: BitVector,
    /// False when the scheme has no room for an integrity tag.
    pub authenticated: bool,
}

/// A probabilistic block cipher mapping `c` bits to `c + r` bits.
pub trait BlockCipher: Send + Sync {
    fn name(&self) -> &str;
    fn block_bits(&self) -> usize;
    fn expansion_bits(&self) -> usize;
    fn keygen(&self, rng: &mut dyn RngCore) -> KeyPair;
    fn encrypt(&self, block: &BitVector, public_key: &[u8], rng: &mut dyn RngCore) -> Result<BitVector>;
    fn decrypt(&self, cipher: &BitVector, secret_key: &[u8]) -> Result<Decrypted>;
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(dim(format!("{what} of {got} bits, expected {want}")));
    }
    Ok(())
}

/// Stream cipher over SHA-256 with the `r` expansion bits split into a random
/// nonce and a truncated MAC tag. A stand-in honouring the probabilistic
/// encryption contract only; it is not post-quantum and not meant for real use.
#[derive(Clone, Debug)]
pub struct ToyStream {
    c: usize,
    r: usize,
}

const TOY_KEY_BYTES: usize = 32;

impl ToyStream {
    pub fn new(c: usize, r: usize) -> Result<Self> {
        if c == 0 {
            return Err(invalid("block width c must be positive"));
        }
        Ok(Self { c, r })
    }

    /// Tag length: half of `r` up to 32 bits once `r ≥ 8`, otherwise none.
    pub fn tag_bits(&self) -> usize {
        if self.r >= 8 {
            (self.r / 2).min(32)
        } else {
            0
        }
    }

    pub fn nonce_bits(&self) -> usize {
        self.r - self.tag_bits()
    }

    fn keystream(&self, key: &[u8], nonce: &[u8]) -> BitVector {
        let mut out = BitVector::zeros(0);
        let mut counter = 0u32;
        while out.len() < self.c {
            let digest = Sha256::new()
                .chain_update(key)
                .chain_update(b"ks")
                .chain_update(nonce)
                .chain_update(counter.to_le_bytes())
                .finalize();
            for byte in digest {
                for k in 0..8 {
                    if out.len() < self.c {
                        out.push(byte & (0x80 >> k) != 0);
                    }
                }
            }
            counter += 1;
        }
        out
    }

    fn tag(&self, key: &[u8], nonce: &[u8], body: &BitVector) -> BitVector {
        let digest = Sha256::new()
            .chain_update(key)
            .chain_update(b"tag")
            .chain_update(nonce)
            .chain_update(pack_msb(body.iter()))
            .finalize();
        let bits = self.tag_bits();
        BitVector::from_bools((0..bits).map(|k| digest[k / 8] & (0x80 >> (k % 8)) != 0))
    }

    fn check_key(key: &[u8]) -> Result<()> {
        if key.len() != TOY_KEY_BYTES {
            return Err(invalid(format!("toy-stream key of {} bytes", key.len())));
        }
        Ok(())
    }
}

impl BlockCipher for ToyStream {
    fn name(&self) -> &str {
        "toy-stream"
    }

    fn block_bits(&self) -> usize {
        self.c
    }

    fn expansion_bits(&self) -> usize {
        self.r
    }

    fn keygen(&self, rng: &mut dyn RngCore) -> KeyPair {
        let mut key = vec![0u8; TOY_KEY_BYTES];
        rng.fill_bytes(&mut key);
        KeyPair {
            public_key: key.clone(),
            secret_key: key,
            scheme_name: self.name().into(),
        }
    }

    fn encrypt(&self, block: &BitVector, public_key: &[u8], rng: &mut dyn RngCore) -> Result<BitVector> {
        check_len("plaintext block", block.len(), self.c)?;
        Self::check_key(public_key)?;
        let nonce = BitVector::from_bools((0..self.nonce_bits()).map(|_| rng.next_u32() & 1 == 1));
        let nonce_bytes = pack_msb(nonce.iter());
        let body = block.xor(&self.keystream(public_key, &nonce_bytes))?;
        let tag = self.tag(public_key, &nonce_bytes, &body);
        Ok(BitVector::concat(&[&body, &nonce, &tag]))
    }

    fn decrypt(&self, cipher: &BitVector, secret_key: &[u8]) -> Result<Decrypted> {
        check_len("ciphertext", cipher.len(), self.c + self.r)?;
        Self::check_key(secret_key)?;
        let body = cipher.slice(0..self.c);
        let nonce = cipher.slice(self.c..self.c + self.nonce_bits());
        let tag = cipher.slice(self.c + self.nonce_bits()..cipher.len());
        let nonce_bytes = pack_msb(nonce.iter());
        if self.tag_bits() > 0 && self.tag(secret_key, &nonce_bytes, &body) != tag {
            return Err(Error::Decryption("authentication tag mismatch".into()));
        }
        Ok(Decrypted {
            block: body.xor(&self.keystream(secret_key, &nonce_bytes))?,
            authenticated: self.tag_bits() > 0,
        })
    }
}

/// Null cipher (`r = 0`); test and transparency use only.
#[derive(Clone, Debug)]
pub struct Identity {
    c: usize,
}

impl Identity {
    pub fn new(c: usize) -> Self {
        Self { c }
    }
}

impl BlockCipher for Identity {
    fn name(&self) -> &str {
        "identity"
    }

    fn block_bits(&self) -> usize {
        self.c
    }

    fn expansion_bits(&self) -> usize {
        0
    }

    fn keygen(&self, _rng: &mut dyn RngCore) -> KeyPair {
        KeyPair {
            public_key: Vec::new(),
            secret_key: Vec::new(),
            scheme_name: self.name().into(),
        }
    }

    fn encrypt(&self, block: &BitVector, _pk: &[u8], _rng: &mut dyn RngCore) -> Result<BitVector> {
        check_len("plaintext block", block.len(), self.c)?;
        Ok(block.clone())
    }

    fn decrypt(&self, cipher: &BitVector, _sk: &[u8]) -> Result<Decrypted> {
        check_len("ciphertext", cipher.len(), self.c)?;
        Ok(Decrypted {
            block: cipher.clone(),
            authenticated: false,
        })
    }
}

/// Names accepted by [`scheme`].
pub const SCHEMES: &[&str] = &["toy-stream", "identity"];

/// Look up a registered scheme.
pub fn scheme(name: &str, c: usize, r: usize) -> Result<Box<dyn BlockCipher>> {
    match name {
        "toy-stream" => Ok(Box::new(ToyStream::new(c, r)?)),
        "identity" if r == 0 => Ok(Box::new(Identity::new(c))),
        "identity" => Err(invalid("identity scheme requires r = 0")),
        other => Err(Error::UnknownScheme(other.into())),
    }
}

/// Fresh keys; `seed` makes them reproducible (tests only).
pub fn keygen(cipher: &dyn BlockCipher, seed: Option<u64>) -> KeyPair {
    match seed {
        Some(s) => cipher.keygen(&mut ChaCha8Rng::seed_from_u64(s)),
        None => cipher.keygen(&mut rand::thread_rng()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CryptoParams {
    pub c: usize,
    pub r: usize,
    pub scheme: String,
}

impl CryptoParams {
    pub fn new(c: usize, r: usize, scheme: &str) -> Self {
        Self {
            c,
            r,
            scheme: scheme.into(),
        }
    }

    pub fn validate(&self, ell: usize) -> Result<()> {
        if self.c == 0 || self.c >= ell {
            return Err(invalid(format!("c = {} must satisfy 1 ≤ c < ℓ = {ell}", self.c)));
        }
        Ok(())
    }

    /// `γ = ⌈ℓ·d_J / c⌉`.
    pub fn gamma(&self, ell: usize, d_j: usize) -> usize {
        (ell * d_j).div_ceil(self.c)
    }

    pub fn seed_pad(&self, ell: usize, d_j: usize) -> usize {
        self.gamma(ell, d_j) * self.c - ell * d_j
    }

    pub fn cipher(&self) -> Result<Box<dyn BlockCipher>> {
        scheme(&self.scheme, self.c, self.r)
    }
}

/// Payload bits on all links: `ñℓ + ñr + γ(c + r)`.
pub fn frame_payload_bits(ell: usize, n_tilde: usize, c: usize, r: usize, gamma: usize) -> usize {
    n_tilde * ell + n_tilde * r + gamma * (c + r)
}

/// Per-link payloads plus the header fields of the wire format.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkFrame {
    pub ell: usize,
    pub n_tilde: usize,
    pub c: usize,
    pub r: usize,
    pub d_j: usize,
    pub gamma: usize,
    pub pad: usize,
    pub links: Vec<BitVector>,
}

const FRAME_MAGIC: &[u8; 4] = b"NUH2";

impl LinkFrame {
    pub fn payload_bits(&self) -> usize {
        self.links.iter().map(BitVector::len).sum()
    }

    fn link_len(&self, k: usize) -> usize {
        if k == 0 {
            self.n_tilde * (1 + self.r) + self.gamma * (self.c + self.r)
        } else {
            self.n_tilde
        }
    }

    fn check(&self) -> Result<()> {
        if self.c == 0 || self.c > self.ell {
            return Err(Error::Format(format!("c = {} with ℓ = {}", self.c, self.ell)));
        }
        if self.gamma != (self.ell * self.d_j).div_ceil(self.c)
            || self.pad != self.gamma * self.c - self.ell * self.d_j
        {
            return Err(Error::Format("seed block count or padding inconsistent".into()));
        }
        if self.links.len() != self.ell {
            return Err(Error::Format(format!("{} links, ℓ = {}", self.links.len(), self.ell)));
        }
        for (k, link) in self.links.iter().enumerate() {
            if link.len() != self.link_len(k) {
                return Err(Error::Format(format!(
                    "link {k} carries {} bits, expected {}",
                    link.len(),
                    self.link_len(k)
                )));
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = FRAME_MAGIC.to_vec();
        for v in [self.ell, self.n_tilde, self.c, self.r, self.d_j, self.gamma, self.pad] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        out.extend(pack_msb(self.links.iter().flat_map(|l| l.iter())));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<LinkFrame> {
        const HEADER: usize = 4 + 7 * 4;
        if bytes.len() < HEADER {
            return Err(Error::Format("truncated frame header".into()));
        }
        if &bytes[..4] != FRAME_MAGIC {
            return Err(Error::Format("bad frame magic".into()));
        }
        let field = |k: usize| u32::from_le_bytes(bytes[4 + 4 * k..8 + 4 * k].try_into().unwrap()) as usize;
        let mut frame = LinkFrame {
            ell: field(0),
            n_tilde: field(1),
            c: field(2),
            r: field(3),
            d_j: field(4),
            gamma: field(5),
            pad: field(6),
            links: Vec::new(),
        };
        if frame.ell == 0 || frame.ell > is_codec::MAX_ELL {
            return Err(Error::Format(format!("ℓ = {} out of range", frame.ell)));
        }
        let lens: Vec<usize> = (0..frame.ell).map(|k| frame.link_len(k)).collect();
        let total: usize = lens.iter().sum();
        let body = &bytes[HEADER..];
        if body.len() != total.div_ceil(8) {
            return Err(Error::Format(format!(
                "frame body of {} bytes, expected {}",
                body.len(),
                total.div_ceil(8)
            )));
        }
        let all = unpack_msb(body, total)?;
        let mut at = 0;
        for len in lens {
            frame.links.push(all.slice(at..at + len));
            at += len;
        }
        frame.check()?;
        Ok(frame)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<LinkFrame> {
        LinkFrame::from_bytes(&std::fs::read(path)?)
    }
}

fn seed_blocks(seeds: &SeedMatrix, c: usize, gamma: usize) -> Vec<BitVector> {
    let mut flat = BitVector::zeros(0);
    for i in 0..seeds.rows() {
        flat.extend_from(&seeds.bits.row(i));
    }
    while flat.len() < gamma * c {
        flat.push(false);
    }
    (0..gamma).map(|k| flat.slice(k * c..(k + 1) * c)).collect()
}

/// Encode, then encrypt the first `c` links of every column and the seed.
pub fn crypt2_encrypt(
    m: &CompressedMatrix,
    seeds: &SeedMatrix,
    cb: &Codebook,
    cipher: &dyn BlockCipher,
    public_key: &[u8],
    rng: &mut dyn RngCore,
) -> Result<LinkFrame> {
    let ell = cb.ell();
    let (c, r) = (cipher.block_bits(), cipher.expansion_bits());
    if c == 0 || c > ell {
        return Err(invalid(format!("c = {c} with ℓ = {ell}")));
    }
    if m.rows() != ell || seeds.rows() != ell {
        return Err(dim(format!(
            "{} message rows and {} seed rows for ℓ = {ell}",
            m.rows(),
            seeds.rows()
        )));
    }
    let (n_tilde, d_j) = (m.cols(), seeds.cols());
    let gamma = (ell * d_j).div_ceil(c);
    let x = is_codec::encode_matrix(&m.bits, cb)?;
    let mut links: Vec<BitVector> = (0..ell).map(|_| BitVector::zeros(0)).collect();
    let mut overflow = BitVector::zeros(0);
    for j in 0..n_tilde {
        let col = x.column(j);
        let y = cipher.encrypt(&col.slice(0..c), public_key, rng)?;
        for (k, link) in links.iter_mut().enumerate() {
            link.push(if k < c { y.get(k) } else { col.get(k) });
        }
        overflow.extend_from(&y.slice(c..c + r));
    }
    links[0].extend_from(&overflow);
    for block in seed_blocks(seeds, c, gamma) {
        let y = cipher.encrypt(&block, public_key, rng)?;
        links[0].extend_from(&y);
    }
    Ok(LinkFrame {
        ell,
        n_tilde,
        c,
        r,
        d_j,
        gamma,
        pad: gamma * c - ell * d_j,
        links,
    })
}

/// Inverse of [`crypt2_encrypt`]. The returned matrix carries an empty
/// `profile_id`; the frame does not record one.
pub fn crypt2_decrypt(
    frame: &LinkFrame,
    cb: &Codebook,
    cipher: &dyn BlockCipher,
    secret_key: &[u8],
) -> Result<(CompressedMatrix, SeedMatrix)> {
    frame.check()?;
    let (ell, c, r) = (frame.ell, frame.c, frame.r);
    if cb.ell() != ell || cipher.block_bits() != c || cipher.expansion_bits() != r {
        return Err(dim("frame, codebook and cipher disagree on ℓ, c or r"));
    }
    let nt = frame.n_tilde;
    let link0 = &frame.links[0];
    let mut x = BitMatrix::zeros(ell, nt);
    for j in 0..nt {
        let mut y = BitVector::from_bools((0..c).map(|k| frame.links[k].get(j)));
        y.extend_from(&link0.slice(nt + j * r..nt + (j + 1) * r));
        let plain = cipher.decrypt(&y, secret_key)?.block;
        for k in 0..ell {
            x.set(k, j, if k < c { plain.get(k) } else { frame.links[k].get(j) });
        }
    }
    let m = is_codec::decode_matrix(&x, cb)?;
    let mut flat = BitVector::zeros(0);
    let base = nt * (1 + r);
    for k in 0..frame.gamma {
        let y = link0.slice(base + k * (c + r)..base + (k + 1) * (c + r));
        flat.extend_from(&cipher.decrypt(&y, secret_key)?.block);
    }
    let mut seeds = BitMatrix::zeros(ell, frame.d_j);
    for i in 0..ell {
        for t in 0..frame.d_j {
            seeds.set(i, t, flat.get(i * frame.d_j + t));
        }
    }
    Ok((
        CompressedMatrix {
            bits: m,
            profile_id: String::new(),
        },
        SeedMatrix::new(seeds),
    ))
}
