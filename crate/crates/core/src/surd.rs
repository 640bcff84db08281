//! Exact real quadratic irrationals.
//!
//! A surd is stored as `(P + sqrt(D))/Q` with integer `P`, `Q != 0` and
//! positive nonsquare `D`, normalized through its primitive minimal
//! polynomial: `Q` divides `D - P^2` and `gcd(P, Q, (D - P^2)/Q) = 1`.
//! This form is unique, so equality and hashing are structural.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::field::{is_square, isqrt, QuadExt};
use crate::word::{EvenWord, Mat2};
use crate::Error;

/// An exact real quadratic irrational `(P + sqrt(D))/Q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadraticSurd {
    p: BigInt,
    q: BigInt,
    d: BigInt,
}

/// Primitive integer quadratic `a w^2 + b w + c = 0` with `a > 0`,
/// `gcd(a,b,c) = 1` and positive nonsquare discriminant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MinimalPolynomial {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
}

impl MinimalPolynomial {
    pub fn discriminant(&self) -> BigInt {
        &self.b * &self.b - BigInt::from(4) * &self.a * &self.c
    }
}

impl fmt::Display for MinimalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})w^2 + ({})w + ({}) = 0", self.a, self.b, self.c)
    }
}

impl QuadraticSurd {
    /// Builds the surd `(p + sqrt(d))/q` and normalizes it.
    pub fn new<P, Q, D>(p: P, q: Q, d: D) -> Result<Self, Error>
    where
        P: Into<BigInt>,
        Q: Into<BigInt>,
        D: Into<BigInt>,
    {
        let p = p.into();
        let q = q.into();
        let d = d.into();
        if q.is_zero() {
            return Err(Error::InvalidSurd("denominator Q must be nonzero".into()));
        }
        if !d.is_positive() {
            return Err(Error::InvalidSurd(format!("D = {d} must be positive")));
        }
        if is_square(&d) {
            return Err(Error::InvalidSurd(format!("D = {d} is a perfect square")));
        }
        Ok(Self::canonical(p, q, d))
    }

    /// Canonical form through the primitive minimal polynomial. The sign of
    /// `Q` records which root of the polynomial this is.
    fn canonical(p: BigInt, q: BigInt, d: BigInt) -> Self {
        // (Qw - P)^2 = D  =>  Q^2 w^2 - 2PQ w + (P^2 - D) = 0
        let a0 = &q * &q;
        let b0 = BigInt::from(-2) * &p * &q;
        let c0 = &p * &p - &d;
        let g = a0.gcd(&b0).gcd(&c0);
        let (a, b, c) = (a0 / &g, b0 / &g, c0 / &g);
        let disc = &b * &b - BigInt::from(4) * &a * &c;
        let branch = if q.is_positive() { BigInt::one() } else { -BigInt::one() };
        if b.is_even() {
            QuadraticSurd {
                p: -&b / 2 * &branch,
                q: a * &branch,
                d: disc / 4,
            }
        } else {
            QuadraticSurd {
                p: -&b * &branch,
                q: BigInt::from(2) * a * &branch,
                d: disc,
            }
        }
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    /// The surd as an exact element of Q(sqrt(D)).
    pub fn to_quad_ext(&self) -> QuadExt {
        QuadExt::new(
            BigRational::new(self.p.clone(), self.q.clone()),
            BigRational::new(BigInt::one(), self.q.clone()),
            self.d.clone(),
        )
    }

    /// Galois conjugate `(P - sqrt(D))/Q`.
    pub fn conjugate(&self) -> Self {
        // Negating P and Q swaps the root while staying canonical.
        QuadraticSurd { p: -&self.p, q: -&self.q, d: self.d.clone() }
    }

    /// The primitive quadratic polynomial vanishing at this surd.
    pub fn minimal_polynomial(&self) -> MinimalPolynomial {
        let a0 = &self.q * &self.q;
        let b0 = BigInt::from(-2) * &self.p * &self.q;
        let c0 = &self.p * &self.p - &self.d;
        let g = a0.gcd(&b0).gcd(&c0);
        MinimalPolynomial { a: a0 / &g, b: b0 / &g, c: c0 / &g }
    }

    /// Floating approximation with relative error at most `precision`.
    pub fn to_f64(&self, precision: f64) -> f64 {
        self.to_quad_ext().to_f64(precision)
    }

    /// Floating approximation at near machine precision.
    pub fn approx(&self) -> f64 {
        self.to_f64(1e-15)
    }

    /// Exact test for `self > 1 && -1 < conjugate < 0` (purely periodic CF).
    pub fn is_reduced(&self) -> bool {
        let one = BigRational::one();
        let w = self.to_quad_ext();
        let wc = self.conjugate().to_quad_ext();
        w.cmp_rational(&one) == std::cmp::Ordering::Greater
            && wc.cmp_rational(&BigRational::zero()) == std::cmp::Ordering::Less
            && wc.cmp_rational(&(-one)) == std::cmp::Ordering::Greater
    }

    /// First `n` partial quotients of the simple continued fraction.
    pub fn cf_expand(&self, n: usize) -> Vec<BigInt> {
        let mut state = CfState::start(self);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(state.step());
        }
        out
    }

    /// Minimal preperiod and period of the continued fraction, plus the
    /// evenized pair `(V, W)` with `self = [V; overline(W)]`.
    ///
    /// Detected by the first repetition of the `(P, Q)` state. If the
    /// minimal period has odd length the period is doubled; if the minimal
    /// preperiod has odd length one period entry is absorbed into it and the
    /// cycle is shifted, so both become even.
    pub fn periodic_form(&self) -> Result<PeriodicForm, Error> {
        // The period length grows like sqrt(D) log D; cap the search so
        // hopeless discriminants fail cleanly instead of spinning.
        const MAX_STEPS: usize = 100_000;
        let mut state = CfState::start(self);
        let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
        let mut quotients: Vec<BigInt> = Vec::new();
        let pre_len = loop {
            let key = (state.p.clone(), state.q.clone());
            if let Some(&first) = seen.get(&key) {
                break first;
            }
            if quotients.len() >= MAX_STEPS {
                return Err(Error::PeriodSearchExhausted { steps: MAX_STEPS });
            }
            seen.insert(key, quotients.len());
            quotients.push(state.step());
        };
        let preperiod: Vec<BigInt> = quotients[..pre_len].to_vec();
        let period: Vec<BigInt> = quotients[pre_len..].to_vec();

        let mut v = preperiod.clone();
        let mut w = period.clone();
        if v.len() % 2 != 0 {
            v.push(w[0].clone());
            w.rotate_left(1);
        }
        if w.len() % 2 != 0 {
            let copy = w.clone();
            w.extend(copy);
        }
        let entries = w
            .iter()
            .map(|k| u64::try_from(k).map_err(|_| Error::PeriodEntryTooLarge(k.to_string())))
            .collect::<Result<Vec<u64>, Error>>()?;
        let word = EvenWord::new(entries)?;
        Ok(PeriodicForm { preperiod, period, prefix: v, word })
    }

    /// Surd serialization fields as decimal strings.
    pub fn to_json_fields(&self) -> SurdJson {
        SurdJson {
            p: self.p.to_string(),
            q: self.q.to_string(),
            d: self.d.to_string(),
        }
    }
}

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}+sqrt({}))/{}", self.p, self.d, self.q)
    }
}

impl FromStr for QuadraticSurd {
    type Err = Error;

    /// Parses the textual form `(P+sqrt(D))/Q`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidSurd(format!("cannot parse `{s}`; expected (P+sqrt(D))/Q"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let rest = t.strip_prefix('(').ok_or_else(bad)?;
        let (p_str, rest) = rest.split_once("+sqrt(").ok_or_else(bad)?;
        let (d_str, rest) = rest.split_once("))/").ok_or_else(bad)?;
        let p = BigInt::from_str(p_str).map_err(|_| bad())?;
        let d = BigInt::from_str(d_str).map_err(|_| bad())?;
        let q = BigInt::from_str(rest).map_err(|_| bad())?;
        QuadraticSurd::new(p, q, d)
    }
}

/// JSON shape of a surd; entries can exceed native integer width.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurdJson {
    pub p: String,
    pub q: String,
    pub d: String,
}

/// Continued-fraction data of a surd.
#[derive(Debug, Clone)]
pub struct PeriodicForm {
    /// Minimal preperiod; the first entry may be any integer.
    pub preperiod: Vec<BigInt>,
    /// Minimal period; entries are positive.
    pub period: Vec<BigInt>,
    /// Evenized preperiod. All entries after the first are positive; the
    /// first is any integer (negative or zero for surds not exceeding 1).
    pub prefix: Vec<BigInt>,
    /// Evenized period as an even word.
    pub word: EvenWord,
}

impl PeriodicForm {
    /// The evenized prefix as an even word, when its entries allow it.
    pub fn prefix_word(&self) -> Result<EvenWord, Error> {
        let entries = self
            .prefix
            .iter()
            .map(|k| u64::try_from(k).map_err(|_| Error::PeriodEntryTooLarge(k.to_string())))
            .collect::<Result<Vec<u64>, Error>>()?;
        EvenWord::new(entries)
    }

    /// Matrix of the evenized prefix (valid for any integer first entry).
    pub fn prefix_gamma(&self) -> Mat2 {
        let mut g = Mat2::identity();
        for k in &self.prefix {
            g = g.mul(&Mat2::new(
                k.clone(),
                BigInt::one(),
                BigInt::one(),
                BigInt::zero(),
            ));
        }
        g
    }

    pub fn is_purely_periodic(&self) -> bool {
        self.preperiod.is_empty()
    }
}

/// Exact continued-fraction state machine over `(P, Q)` with fixed `D`.
struct CfState {
    p: BigInt,
    q: BigInt,
    d: BigInt,
    sqrt_d: BigInt,
}

impl CfState {
    fn start(w: &QuadraticSurd) -> Self {
        CfState {
            p: w.p.clone(),
            q: w.q.clone(),
            d: w.d.clone(),
            sqrt_d: isqrt(&w.d),
        }
    }

    /// Emits the next partial quotient and advances: exact floors only.
    fn step(&mut self) -> BigInt {
        // floor((P + sqrt(D))/Q): since sqrt(D) is irrational, replace it by
        // floor(sqrt(D)) for Q > 0 and by floor(sqrt(D)) + 1 for Q < 0.
        let k = if self.q.is_positive() {
            (&self.p + &self.sqrt_d).div_floor(&self.q)
        } else {
            (&self.p + &self.sqrt_d + BigInt::one()).div_floor(&self.q)
        };
        let p_next = &k * &self.q - &self.p;
        let q_next = (&self.d - &p_next * &p_next) / &self.q;
        self.p = p_next;
        self.q = q_next;
        k
    }
}

/// The attracting fixed point of a hyperbolic integer matrix.
///
/// For `g = [[a,b],[c,d]]` this is the root of `c w^2 + (d-a) w - b` at
/// which `|c w + d| > 1`; for a word matrix it is the purely periodic value
/// of the word, which is reduced.
pub fn fixed_point(g: &Mat2) -> Result<QuadraticSurd, Error> {
    if !g.is_hyperbolic() {
        return Err(Error::NotHyperbolic(g.to_string()));
    }
    if g.c.is_zero() {
        return Err(Error::FixedPointAtInfinity);
    }
    let tr = g.trace();
    let disc = &tr * &tr - BigInt::from(4) * g.det();
    if !disc.is_positive() || is_square(&disc) {
        return Err(Error::NotHyperbolic(g.to_string()));
    }
    let plus = QuadraticSurd::new(&g.a - &g.d, BigInt::from(2) * &g.c, disc)?;
    // |c w + d| > 1 picks the attracting root; the two roots are conjugate.
    let attracting = |w: &QuadraticSurd| {
        let j = cocycle(g, w);
        let j2 = j.mul(&j);
        j2.cmp_rational(&BigRational::one()) == std::cmp::Ordering::Greater
    };
    if attracting(&plus) {
        Ok(plus)
    } else {
        Ok(plus.conjugate())
    }
}

/// Applies the Moebius transformation `g` to the surd exactly.
pub fn moebius_apply(g: &Mat2, w: &QuadraticSurd) -> Result<QuadraticSurd, Error> {
    let det = g.det();
    if !det.is_one() && !(-&det).is_one() {
        return Err(Error::NotUnimodular(det.to_string()));
    }
    let (p, q, d) = (&w.p, &w.q, &w.d);
    let num_rat = &g.a * p + &g.b * q;
    let den_rat = &g.c * p + &g.d * q;
    let a_part = &num_rat * &den_rat - &g.a * &g.c * d;
    let b_part = q * det; // coefficient of sqrt(D); nonzero
    let norm = &den_rat * &den_rat - &g.c * &g.c * d;
    let sigma = if b_part.is_positive() { BigInt::one() } else { -BigInt::one() };
    QuadraticSurd::new(a_part * &sigma, norm * &sigma, &b_part * &b_part * d)
}

/// The automorphy factor `j(g, w) = c w + d` as an exact field element.
pub fn cocycle(g: &Mat2, w: &QuadraticSurd) -> QuadExt {
    QuadExt::new(
        BigRational::new(&g.c * &w.p + &g.d * &w.q, w.q.clone()),
        BigRational::new(g.c.clone(), w.q.clone()),
        w.d.clone(),
    )
}
