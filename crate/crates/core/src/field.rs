//! Exact arithmetic in real quadratic fields.
//!
//! `QuadExt` represents `a + b*sqrt(d)` with rational `a`, `b` and a fixed
//! positive nonsquare `d`. Signs and comparisons are decided exactly by
//! integer case analysis, never through floating point.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Error;

/// Floor of the square root of a nonnegative big integer.
pub fn isqrt(n: &BigInt) -> BigInt {
    n.sqrt()
}

/// True if `n` is a perfect square (negative numbers are not).
pub fn is_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}

/// Converts a big integer to f64; +-inf if it does not fit.
pub fn bigint_to_f64(n: &BigInt) -> f64 {
    n.to_f64().unwrap_or(f64::NAN)
}

/// `x * 2^e` without overflowing intermediate powers.
pub fn ldexp(x: f64, e: i64) -> f64 {
    let mut x = x;
    let mut e = e;
    while e > 900 {
        x *= 2f64.powi(900);
        e -= 900;
    }
    while e < -900 {
        x *= 2f64.powi(-900);
        e += 900;
    }
    x * 2f64.powi(e as i32)
}

/// Natural log of a positive big integer, accurate even when it overflows f64.
pub fn ln_bigint(n: &BigInt) -> f64 {
    assert!(n.is_positive(), "ln of non-positive integer");
    let bits = n.bits();
    if bits <= 512 {
        return bigint_to_f64(n).ln();
    }
    let shift = bits - 64;
    let head = bigint_to_f64(&(n >> shift));
    head.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Rational to f64 via a quotient scaled to ~96 significant bits.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    let n = r.numer();
    let d = r.denom();
    if n.is_zero() {
        return 0.0;
    }
    let shift = 96 - (n.bits() as i64 - d.bits() as i64);
    let q = if shift >= 0 {
        (n << shift as u64) / d
    } else {
        n / (d << (-shift) as u64)
    };
    ldexp(bigint_to_f64(&q), -shift)
}

/// An element `a + b*sqrt(d)` of the quadratic field Q(sqrt(d)).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadExt {
    pub a: BigRational,
    pub b: BigRational,
    pub d: BigInt,
}

impl QuadExt {
    pub fn new(a: BigRational, b: BigRational, d: BigInt) -> Self {
        debug_assert!(d.is_positive() && !is_square(&d), "d must be positive nonsquare");
        QuadExt { a, b, d }
    }

    pub fn from_int(n: i64, d: &BigInt) -> Self {
        QuadExt::new(
            BigRational::from_integer(n.into()),
            BigRational::zero(),
            d.clone(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        QuadExt::new(self.a.clone(), -self.b.clone(), self.d.clone())
    }

    /// Field norm `(a + b sqrt d)(a - b sqrt d)`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(self.d.clone())
    }

    pub fn add(&self, rhs: &QuadExt) -> Self {
        debug_assert_eq!(self.d, rhs.d);
        QuadExt::new(&self.a + &rhs.a, &self.b + &rhs.b, self.d.clone())
    }

    pub fn sub(&self, rhs: &QuadExt) -> Self {
        debug_assert_eq!(self.d, rhs.d);
        QuadExt::new(&self.a - &rhs.a, &self.b - &rhs.b, self.d.clone())
    }

    pub fn neg(&self) -> Self {
        QuadExt::new(-self.a.clone(), -self.b.clone(), self.d.clone())
    }

    pub fn mul(&self, rhs: &QuadExt) -> Self {
        debug_assert_eq!(self.d, rhs.d);
        let d = BigRational::from_integer(self.d.clone());
        QuadExt::new(
            &self.a * &rhs.a + &self.b * &rhs.b * d,
            &self.a * &rhs.b + &self.b * &rhs.a,
            self.d.clone(),
        )
    }

    pub fn mul_int(&self, n: &BigInt) -> Self {
        let n = BigRational::from_integer(n.clone());
        QuadExt::new(&self.a * &n, &self.b * &n, self.d.clone())
    }

    pub fn inv(&self) -> Result<Self, Error> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(QuadExt::new(&self.a / &n, -&self.b / &n, self.d.clone()))
    }

    pub fn div(&self, rhs: &QuadExt) -> Result<Self, Error> {
        Ok(self.mul(&rhs.inv()?))
    }

    /// Exact sign: -1, 0 or +1, decided by squaring with case analysis.
    pub fn sign(&self) -> i32 {
        let sa = rat_sign(&self.a);
        let sb = rat_sign(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 {
            return sb;
        }
        if sa == sb {
            return sa;
        }
        // Mixed signs: the term of larger square magnitude wins.
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * BigRational::from_integer(self.d.clone());
        match a2.cmp(&b2d) {
            std::cmp::Ordering::Greater => sa,
            std::cmp::Ordering::Less => sb,
            std::cmp::Ordering::Equal => 0,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() > 0
    }

    /// Exact comparison against a rational number.
    pub fn cmp_rational(&self, r: &BigRational) -> std::cmp::Ordering {
        let diff = QuadExt::new(&self.a - r, self.b.clone(), self.d.clone());
        match diff.sign() {
            s if s > 0 => std::cmp::Ordering::Greater,
            0 => std::cmp::Ordering::Equal,
            _ => std::cmp::Ordering::Less,
        }
    }

    /// Floating approximation with relative error below `precision`.
    ///
    /// sqrt(d) is enclosed by integer square roots at a growing binary scale
    /// until the interval is relatively tight, then converted.
    pub fn to_f64(&self, precision: f64) -> f64 {
        assert!(precision > 0.0);
        if self.b.is_zero() {
            return rat_to_f64(&self.a);
        }
        let prec = BigRational::from_float(precision).expect("finite precision");
        let mut shift: u64 = 64.max((-precision.log2()).ceil() as i64 + 16) as u64;
        loop {
            // lo <= 2^shift * den * value <= hi, all exact integers.
            let scale = BigInt::one() << shift;
            let d_scaled = &self.d << (2 * shift);
            let s = isqrt(&d_scaled); // s <= 2^shift sqrt(d) < s+1
            let num_a = self.a.numer() * self.b.denom();
            let num_b = self.b.numer() * self.a.denom();
            let den = self.a.denom() * self.b.denom();
            let (lo, hi) = if num_b.is_positive() {
                (&num_a * &scale + &num_b * &s, &num_a * &scale + &num_b * (&s + 1))
            } else {
                (&num_a * &scale + &num_b * (&s + 1), &num_a * &scale + &num_b * &s)
            };
            let width = BigRational::from_integer(&hi - &lo);
            let straddles = lo.sign() != hi.sign();
            let mag = BigRational::from_integer(BigInt::from(
                lo.magnitude().min(hi.magnitude()).clone(),
            ));
            if (!straddles && width <= &prec * &mag) || shift > 4096 {
                let mid = BigRational::new(lo + hi, BigInt::from(2));
                return rat_to_f64(&(mid / BigRational::from_integer(den * scale)));
            }
            shift *= 2;
        }
    }
}

fn rat_sign(r: &BigRational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}
