//! Even words and their associated integer matrices.
//!
//! An even word is a finite sequence of positive integers of even length.
//! It encodes one period of a continued fraction; the evenness guarantees
//! that the matrix built from its letters has determinant +1.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::Error;

/// A finite sequence of positive integers of even length.
///
/// The empty word is allowed and acts as the identity for concatenation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EvenWord {
    entries: Vec<u64>,
}

impl EvenWord {
    /// Builds a word from its letters, rejecting odd length or entries < 1.
    pub fn new(entries: Vec<u64>) -> Result<Self, Error> {
        if entries.len() % 2 != 0 {
            return Err(Error::OddWordLength(entries.len()));
        }
        if let Some(&k) = entries.iter().find(|&&k| k < 1) {
            return Err(Error::WordEntryOutOfRange(k));
        }
        Ok(EvenWord { entries })
    }

    /// The empty word.
    pub fn empty() -> Self {
        EvenWord { entries: Vec::new() }
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Concatenation in order; the empty list yields the empty word.
    pub fn concat<'a, I>(words: I) -> Self
    where
        I: IntoIterator<Item = &'a EvenWord>,
    {
        let mut entries = Vec::new();
        for w in words {
            entries.extend_from_slice(&w.entries);
        }
        EvenWord { entries }
    }

    /// `n`-fold repetition; `repeat(0)` is the empty word.
    pub fn repeat(&self, n: u32) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len() * n as usize);
        for _ in 0..n {
            entries.extend_from_slice(&self.entries);
        }
        EvenWord { entries }
    }

    /// Splits a non-empty word as `root^n` with maximal multiplicity `n`.
    ///
    /// Scans the even divisors of the length in increasing order and returns
    /// the first period that tiles the word, so the root has multiplicity 1.
    pub fn primitive_decomposition(&self) -> Result<(EvenWord, u32), Error> {
        if self.is_empty() {
            return Err(Error::EmptyWord);
        }
        let len = self.entries.len();
        let mut d = 2;
        while d <= len {
            if len % d == 0 && self.entries.chunks(d).all(|c| c == &self.entries[..d]) {
                let root = EvenWord { entries: self.entries[..d].to_vec() };
                return Ok((root, (len / d) as u32));
            }
            d += 2;
        }
        unreachable!("a word always tiles itself");
    }

    /// The matrix product of the elementary letter matrices `[[k,1],[1,0]]`.
    pub fn gamma(&self) -> Mat2 {
        let mut g = Mat2::identity();
        for &k in &self.entries {
            g = g.mul(&Mat2::elementary(k));
        }
        g
    }
}

impl fmt::Display for EvenWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", k)?;
        }
        write!(f, ")")
    }
}

/// All even words with entries in `1..=max_entry` and length in `2..=max_len`,
/// in order of increasing length, lexicographic within a length.
pub fn enumerate_words(max_entry: u64, max_len: usize) -> Vec<EvenWord> {
    let mut out = Vec::new();
    let mut len = 2;
    while len <= max_len {
        let mut idx = vec![1u64; len];
        'words: loop {
            out.push(EvenWord { entries: idx.clone() });
            // Odometer increment with carry.
            let mut i = len;
            loop {
                if i == 0 {
                    break 'words;
                }
                i -= 1;
                if idx[i] < max_entry {
                    idx[i] += 1;
                    for v in idx[i + 1..].iter_mut() {
                        *v = 1;
                    }
                    break;
                }
            }
        }
        len += 2;
    }
    out
}

/// Cyclically rotates a list of words so the 1-based `i`-th element comes first.
pub fn rotate_blocks(words: &[EvenWord], i: usize) -> Result<Vec<EvenWord>, Error> {
    if i < 1 || i > words.len() {
        return Err(Error::RotationIndex { index: i, len: words.len() });
    }
    let mut out = Vec::with_capacity(words.len());
    out.extend_from_slice(&words[i - 1..]);
    out.extend_from_slice(&words[..i - 1]);
    Ok(out)
}

/// A 2x2 integer matrix with arbitrary-precision entries.
///
/// Every matrix handled here has determinant +1 or -1; word matrices have
/// determinant +1, nonnegative entries and trace >= 3 when the word is
/// non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl Mat2 {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Mat2::from_i64(1, 0, 0, 1)
    }

    /// The letter matrix `[[k,1],[1,0]]`.
    pub fn elementary(k: u64) -> Self {
        Mat2::new(k.into(), BigInt::one(), BigInt::one(), BigInt::zero())
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2 {
            a: &self.a * &rhs.a + &self.b * &rhs.c,
            b: &self.a * &rhs.b + &self.b * &rhs.d,
            c: &self.c * &rhs.a + &self.d * &rhs.c,
            d: &self.c * &rhs.b + &self.d * &rhs.d,
        }
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn trace(&self) -> BigInt {
        &self.a + &self.d
    }

    /// Inverse of a matrix with determinant +-1.
    pub fn inverse(&self) -> Result<Mat2, Error> {
        let det = self.det();
        if det.is_one() {
            Ok(Mat2::new(self.d.clone(), -&self.b, -&self.c, self.a.clone()))
        } else if (-&det).is_one() {
            Ok(Mat2::new(-&self.d, self.b.clone(), self.c.clone(), -&self.a))
        } else {
            Err(Error::NotUnimodular(det.to_string()))
        }
    }

    pub fn pow(&self, n: u32) -> Mat2 {
        let mut out = Mat2::identity();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                out = out.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.c.is_zero() && self.d.is_one()
    }

    /// A matrix is hyperbolic when |trace| > 2.
    pub fn is_hyperbolic(&self) -> bool {
        self.trace().abs() > BigInt::from(2)
    }

    /// Entries converted to f64, or an error if any entry overflows.
    pub fn to_f64(&self) -> Result<[f64; 4], Error> {
        let conv = |x: &BigInt| -> Result<f64, Error> {
            let v = crate::field::bigint_to_f64(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::MatrixTooLarge)
            }
        };
        Ok([conv(&self.a)?, conv(&self.b)?, conv(&self.c)?, conv(&self.d)?])
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}
