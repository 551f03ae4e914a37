//! Packed vectors and matrices over GF(2).
//!
//! Bits are stored LSB-first inside 64-bit words; matrices are row-major with
//! every row starting on a fresh word. Padding bits are always zero, so two
//! values are equal exactly when their word payloads are equal.
//!
//! The on-disk matrix format is `"NUH1"`, `u32` rows, `u32` cols (little
//! endian), followed by the row-major bit stream packed MSB-first into bytes
//! and zero-padded to a byte boundary.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{dim, Error, Result};

const WORD: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

fn tail_mask(bits: usize) -> u64 {
    match bits % WORD {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                v.words[i / WORD] |= 1 << (i % WORD);
            }
        }
        v
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % WORD == 0 {
                words.push(0);
            }
            if b {
                *words.last_mut().unwrap() |= 1 << (len % WORD);
            }
            len += 1;
        }
        Self { len, words }
    }

    /// Big-endian encoding of `value` on `len` bits: bit 0 is the most significant.
    pub fn from_uint(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        Self::from_bools((0..len).map(|i| (value >> (len - 1 - i)) & 1 == 1))
    }

    /// Inverse of [`BitVector::from_uint`].
    pub fn to_uint(&self) -> u64 {
        assert!(self.len <= 64);
        self.iter().fold(0u64, |acc, b| (acc << 1) | b as u64)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut words: Vec<u64> = (0..words_for(len)).map(|_| rng.gen()).collect();
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Self { len, words }
    }

    /// Draw each bit independently with `P(bit = 1) = p`.
    pub fn bernoulli<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> Self {
        Self::from_bools((0..len).map(|_| rng.gen::<f64>() < p))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let m = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= m;
        } else {
            self.words[i / WORD] &= !m;
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % WORD == 0 {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    pub fn extend_from(&mut self, other: &BitVector) {
        for b in other.iter() {
            self.push(b);
        }
    }

    pub fn concat(parts: &[&BitVector]) -> BitVector {
        BitVector::from_bools(parts.iter().flat_map(|p| p.iter()))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Bits at `idx`, in the given order.
    pub fn select(&self, idx: &[usize]) -> Result<BitVector> {
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.len) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.len,
            });
        }
        Ok(BitVector::from_bools(idx.iter().map(|&i| self.get(i))))
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> BitVector {
        assert!(range.end <= self.len);
        BitVector::from_bools(range.map(|i| self.get(i)))
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        if self.len != other.len {
            return Err(dim(format!(
                "xor of lengths {} and {}",
                self.len, other.len
            )));
        }
        Ok(BitVector {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    pub fn xor_assign(&mut self, other: &BitVector) -> Result<()> {
        if self.len != other.len {
            return Err(dim(format!(
                "xor of lengths {} and {}",
                self.len, other.len
            )));
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[{}]({})", self.len, self)
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A dense `rows × cols` matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Build from rows; every row must have length `cols`.
    pub fn from_rows(rows: &[BitVector], cols: usize) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            m.set_row(i, r)?;
        }
        Ok(m)
    }

    pub fn from_columns(columns: &[BitVector], rows: usize) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            m.set_column(j, c)?;
        }
        Ok(m)
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let rs: Vec<BitVector> = (0..rows).map(|_| BitVector::random(cols, rng)).collect();
        Self::from_rows(&rs, cols).expect("row lengths match")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols);
        (self.data[i * self.stride + j / WORD] >> (j % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        assert!(i < self.rows && j < self.cols);
        let w = &mut self.data[i * self.stride + j / WORD];
        let m = 1u64 << (j % WORD);
        if bit {
            *w |= m;
        } else {
            *w &= !m;
        }
    }

    pub fn row(&self, i: usize) -> BitVector {
        assert!(i < self.rows);
        BitVector {
            len: self.cols,
            words: self.row_words(i).to_vec(),
        }
    }

    pub fn set_row(&mut self, i: usize, v: &BitVector) -> Result<()> {
        if i >= self.rows {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.rows,
            });
        }
        if v.len() != self.cols {
            return Err(dim(format!(
                "row of length {} into {} columns",
                v.len(),
                self.cols
            )));
        }
        self.row_words_mut(i).copy_from_slice(v.words());
        Ok(())
    }

    pub fn column(&self, j: usize) -> BitVector {
        assert!(j < self.cols);
        BitVector::from_bools((0..self.rows).map(|i| self.get(i, j)))
    }

    pub fn set_column(&mut self, j: usize, v: &BitVector) -> Result<()> {
        if j >= self.cols {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.cols,
            });
        }
        if v.len() != self.rows {
            return Err(dim(format!(
                "column of length {} into {} rows",
                v.len(),
                self.rows
            )));
        }
        for i in 0..self.rows {
            self.set(i, j, v.get(i));
        }
        Ok(())
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    /// Product over GF(2).
    pub fn matmul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows {
            return Err(dim(format!(
                "matmul of {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for (w, &word) in self.row_words(i).iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let k = w * WORD + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let (src, dst) = (other.row_words(k).to_vec(), out.row_words_mut(i));
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d ^= s;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.rows {
            return Err(dim(format!(
                "vector of length {} times {}x{}",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        let mut out = BitVector::zeros(self.cols);
        for k in 0..self.rows {
            if v.get(k) {
                for (d, s) in out.words.iter_mut().zip(self.row_words(k)) {
                    *d ^= s;
                }
            }
        }
        Ok(out)
    }

    pub fn xor(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(dim("xor of differently shaped matrices"));
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a ^= b;
        }
        Ok(out)
    }

    /// Rows at `idx`, in the given order.
    pub fn submatrix_rows(&self, idx: &[usize]) -> Result<BitMatrix> {
        let mut out = BitMatrix::zeros(idx.len(), self.cols);
        for (o, &i) in idx.iter().enumerate() {
            if i >= self.rows {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.rows,
                });
            }
            let src = self.row_words(i).to_vec();
            out.row_words_mut(o).copy_from_slice(&src);
        }
        Ok(out)
    }

    pub fn submatrix_cols(&self, idx: &[usize]) -> Result<BitMatrix> {
        if let Some(&bad) = idx.iter().find(|&&j| j >= self.cols) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.cols,
            });
        }
        let mut out = BitMatrix::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (o, &j) in idx.iter().enumerate() {
                out.set(i, o, self.get(i, j));
            }
        }
        Ok(out)
    }

    /// Row-major bit stream.
    pub fn iter_bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.rows).flat_map(move |i| (0..self.cols).map(move |j| self.get(i, j)))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + (self.rows * self.cols).div_ceil(8));
        out.extend_from_slice(b"NUH1");
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        out.extend(pack_msb(self.iter_bits()));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<BitMatrix> {
        if bytes.len() < 12 || &bytes[..4] != b"NUH1" {
            return Err(Error::Format("missing NUH1 header".into()));
        }
        let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let nbits = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Format("matrix size overflows".into()))?;
        let body = &bytes[12..];
        if body.len() != nbits.div_ceil(8) {
            return Err(Error::Format(format!(
                "expected {} payload bytes for {rows}x{cols}, found {}",
                nbits.div_ceil(8),
                body.len()
            )));
        }
        let bits = unpack_msb(body, nbits)?;
        let mut m = BitMatrix::zeros(rows, cols);
        for (k, b) in bits.iter().enumerate() {
            if b {
                m.set(k / cols, k % cols, true);
            }
        }
        Ok(m)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<BitMatrix> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<BitMatrix> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {}", self.row(i))?;
        }
        Ok(())
    }
}

/// Pack a bit stream MSB-first into bytes, zero-padding the last byte.
pub(crate) fn pack_msb<I: IntoIterator<Item = bool>>(bits: I) -> Vec<u8> {
    let mut out = Vec::new();
    for (k, b) in bits.into_iter().enumerate() {
        if k % 8 == 0 {
            out.push(0);
        }
        if b {
            *out.last_mut().unwrap() |= 0x80 >> (k % 8);
        }
    }
    out
}

/// Inverse of [`pack_msb`]; padding bits must be zero.
pub(crate) fn unpack_msb(bytes: &[u8], nbits: usize) -> Result<BitVector> {
    if bytes.len() < nbits.div_ceil(8) {
        return Err(Error::Format(format!(
            "{} bytes cannot hold {nbits} bits",
            bytes.len()
        )));
    }
    let v = BitVector::from_bools((0..nbits).map(|k| bytes[k / 8] & (0x80 >> (k % 8)) != 0));
    if nbits % 8 != 0 {
        let last = bytes[nbits / 8];
        if last & (0xffu8 >> (nbits % 8)) != 0 {
            return Err(Error::Format("non-zero padding bits".into()));
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert_eq, proptest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn naive_mul(a: &BitMatrix, b: &BitMatrix) -> Vec<Vec<u8>> {
        let mut out = vec![vec![0u8; b.cols()]; a.rows()];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut acc = 0u8;
                for k in 0..a.cols() {
                    acc ^= (a.get(i, k) as u8) & (b.get(k, j) as u8);
                }
                *cell = acc;
            }
        }
        out
    }

    fn cells(m: &BitMatrix) -> Vec<Vec<u8>> {
        (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m.get(i, j) as u8).collect())
            .collect()
    }

    #[test]
    fn identity_squared() {
        let i2 = BitMatrix::identity(2);
        assert_eq!(i2.matmul(&i2).unwrap(), i2);
    }

    #[test]
    fn hand_multiply() {
        let v = BitMatrix::from_rows(&[BitVector::from_bits(&[0, 1])], 2).unwrap();
        let m = BitMatrix::from_rows(
            &[BitVector::from_bits(&[1, 0]), BitVector::from_bits(&[1, 1])],
            2,
        )
        .unwrap();
        assert_eq!(v.matmul(&m).unwrap().row(0), BitVector::from_bits(&[1, 1]));
        assert_eq!(
            m.left_mul(&BitVector::from_bits(&[0, 1])).unwrap(),
            BitVector::from_bits(&[1, 1])
        );
    }

    #[test]
    fn matmul_dimension_error() {
        let a = BitMatrix::zeros(2, 3);
        assert!(matches!(a.matmul(&a), Err(Error::Dimension(_))));
    }

    #[test]
    fn matmul_against_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (a, b) = (
            BitMatrix::random(8, 8, &mut rng),
            BitMatrix::random(8, 8, &mut rng),
        );
        assert_eq!(cells(&a.matmul(&b).unwrap()), naive_mul(&a, &b));
        for _ in 0..200 {
            let r = rng.gen_range(0..=64);
            let k = rng.gen_range(0..=64);
            let c = rng.gen_range(0..=64);
            let a = BitMatrix::random(r, k, &mut rng);
            let b = BitMatrix::random(k, c, &mut rng);
            assert_eq!(cells(&a.matmul(&b).unwrap()), naive_mul(&a, &b));
        }
    }

    #[test]
    fn xor_examples() {
        let a = BitVector::from_bits(&[1, 0, 1]);
        let b = BitVector::from_bits(&[1, 1, 0]);
        assert_eq!(a.xor(&b).unwrap(), BitVector::from_bits(&[0, 1, 1]));
        assert_eq!(a.xor(&BitVector::zeros(3)).unwrap(), a);
        assert_eq!(a.xor(&a).unwrap(), BitVector::zeros(3));
        assert!(a.xor(&BitVector::zeros(4)).is_err());
    }

    #[test]
    fn submatrix_rows_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = BitMatrix::random(3, 4, &mut rng);
        assert_eq!(m.submatrix_rows(&[0, 1, 2]).unwrap(), m);
        let empty = m.submatrix_rows(&[]).unwrap();
        assert_eq!((empty.rows(), empty.cols()), (0, 4));
        let s = m.submatrix_rows(&[2, 0]).unwrap();
        for j in 0..4 {
            assert_eq!(s.get(0, j), m.get(2, j));
            assert_eq!(s.get(1, j), m.get(0, j));
        }
        assert!(matches!(
            m.submatrix_rows(&[3]),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn file_format_layout() {
        let m = BitMatrix::from_rows(
            &[
                BitVector::from_bits(&[1, 0, 1]),
                BitVector::from_bits(&[1, 1, 1]),
            ],
            3,
        )
        .unwrap();
        let bytes = m.to_bytes();
        assert_eq!(&bytes[..4], b"NUH1");
        assert_eq!(&bytes[4..12], &[2, 0, 0, 0, 3, 0, 0, 0]);
        // 101111 + two zero pad bits
        assert_eq!(&bytes[12..], &[0b1011_1100]);
    }

    #[test]
    fn truncated_and_bad_padding_rejected() {
        let m = BitMatrix::identity(3);
        let bytes = m.to_bytes();
        assert!(BitMatrix::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        *bad.last_mut().unwrap() |= 1;
        assert!(BitMatrix::from_bytes(&bad).is_err());
        assert!(BitMatrix::from_bytes(b"NUH2\0\0\0\0\0\0\0\0").is_err());
    }

    proptest! {
        #[test]
        fn serialization_roundtrip(rows in 0usize..20, cols in 0usize..150, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = BitMatrix::random(rows, cols, &mut rng);
            let back = BitMatrix::from_bytes(&m.to_bytes()).unwrap();
            prop_assert_eq!(back, m);
        }

        #[test]
        fn xor_involution_and_commutative(bits_a in proptest::collection::vec(0u8..2, 0..200), seed in any::<u64>()) {
            let a = BitVector::from_bits(&bits_a);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = BitVector::random(a.len(), &mut rng);
            prop_assert_eq!(a.xor(&b).unwrap().xor(&b).unwrap(), a.clone());
            prop_assert_eq!(a.xor(&b).unwrap(), b.xor(&a).unwrap());
        }

        #[test]
        fn uint_roundtrip(v in any::<u32>()) {
            prop_assert_eq!(BitVector::from_uint(v as u64, 32).to_uint(), v as u64);
        }
    }
}
