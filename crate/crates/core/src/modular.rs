//! Modular functions on the upper half plane, evaluated from q-expansions.
//!
//! The j-invariant is built once as `E4^3 / Delta` with exact integer
//! series arithmetic: `E4` from divisor sums and `Delta` from the Euler
//! product with pentagonal-number exponents. Evaluation reduces the point
//! into the standard fundamental domain first, where thirty terms of the
//! q-series are far beyond double precision.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{FromPrimitive, One, Zero};

use crate::field::bigint_to_f64;
use crate::word::Mat2;
use crate::Error;

/// A point `x + iy` with `y > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperHalfPoint {
    x: f64,
    y: f64,
}

impl UpperHalfPoint {
    pub fn new(x: f64, y: f64) -> Result<Self, Error> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::NonPositiveImaginary(y));
        }
        Ok(UpperHalfPoint { x, y })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn from_complex(z: Complex64) -> Result<Self, Error> {
        UpperHalfPoint::new(z.re, z.im)
    }

    /// Applies an integer Moebius transformation in floating point.
    pub fn moebius(&self, g: &Mat2) -> Result<UpperHalfPoint, Error> {
        let [a, b, c, d] = g.to_f64()?;
        let z = self.to_complex();
        let den = c * z + d;
        let w = (a * z + b) / den;
        UpperHalfPoint::from_complex(w)
    }
}

impl fmt::Display for UpperHalfPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}i", self.x, self.y)
    }
}

/// Brings `z` into the fundamental domain `|Re z| <= 1/2, |z| >= 1` by the
/// standard translate/invert loop; returns the reduced point and the matrix
/// `g` with `g z = z_reduced`.
pub fn reduce_to_fundamental_domain(
    z: &UpperHalfPoint,
) -> Result<(UpperHalfPoint, Mat2), Error> {
    const SLACK: f64 = 1e-15;
    let mut x = z.x;
    let mut y = z.y;
    let mut g = Mat2::identity();
    for _ in 0..10_000 {
        let t = x.round();
        if t != 0.0 {
            x -= t;
            let ti = BigInt::from_f64(t).ok_or(Error::MatrixTooLarge)?;
            // g <- T^{-t} g
            g = Mat2::new(BigInt::one(), -ti, BigInt::zero(), BigInt::one()).mul(&g);
        }
        let n = x * x + y * y;
        if n < 1.0 - SLACK {
            // g <- S g with S: z -> -1/z
            x = -x / n;
            y = y / n;
            g = Mat2::from_i64(0, -1, 1, 0).mul(&g);
        } else {
            return Ok((UpperHalfPoint::new(x, y)?, g));
        }
    }
    Err(Error::ReductionDiverged)
}

/// Float-only translate/invert loop for evaluation points; same geometry
/// as [`reduce_to_fundamental_domain`] without the matrix bookkeeping.
pub(crate) fn reduce_point_f64(mut x: f64, mut y: f64) -> (f64, f64) {
    const SLACK: f64 = 1e-15;
    for _ in 0..10_000 {
        x -= x.round();
        let n = x * x + y * y;
        if n < 1.0 - SLACK {
            x = -x / n;
            y /= n;
        } else {
            return (x, y);
        }
    }
    (x, y)
}

/// A modular function given by a truncated q-expansion
/// `f(z) = sum_{m=h}^{M} c_m q^m`, `q = exp(2 pi i z)`.
#[derive(Debug, Clone)]
pub struct QExpansion {
    /// Lowest order; at most a simple pole at infinity is supported.
    h: i32,
    /// Coefficients of `q^h, q^{h+1}, ..., q^M`.
    coeffs: Vec<f64>,
    /// Whether the function is SL2(Z)-invariant (reduce before summing).
    invariant: bool,
    /// Envelope constant: |c_m| <= envelope * exp(4 pi sqrt(m)) for m >= 1.
    envelope: f64,
    label: String,
}

impl QExpansion {
    /// Default truncation order; tail below 1e-40 inside the fundamental
    /// domain, far beyond double precision.
    pub const DEFAULT_TRUNCATION: usize = 30;

    pub fn from_coefficients(
        h: i32,
        coeffs: Vec<f64>,
        invariant: bool,
        label: &str,
    ) -> Result<Self, Error> {
        if h < -1 {
            return Err(Error::PoleOrderUnsupported(h));
        }
        if coeffs.is_empty() {
            return Err(Error::ExpansionFile("no coefficients given".into()));
        }
        let mut envelope: f64 = 1.0;
        for (i, c) in coeffs.iter().enumerate() {
            let m = h as i64 + i as i64;
            if m >= 1 {
                envelope = envelope.max(c.abs() / (4.0 * PI * (m as f64).sqrt()).exp());
            }
        }
        Ok(QExpansion { h, coeffs, invariant, envelope, label: label.to_string() })
    }

    /// The constant function 1.
    pub fn one() -> Self {
        QExpansion {
            h: 0,
            coeffs: vec![1.0],
            invariant: true,
            envelope: 1.0,
            label: "1".into(),
        }
    }

    /// The j-invariant truncated at order `M`.
    pub fn j_with_truncation(m: usize) -> Self {
        let coeffs = j_coefficients(m).iter().map(bigint_to_f64).collect();
        Self::from_coefficients(-1, coeffs, true, "j").expect("j-series is well formed")
    }

    pub fn j() -> Self {
        Self::j_with_truncation(Self::DEFAULT_TRUNCATION)
    }

    /// `j1 = j - 744`: the j-invariant with vanishing constant term.
    pub fn j1() -> Self {
        let mut f = Self::j();
        f.coeffs[1] = 0.0;
        f.label = "j1".into();
        f
    }

    pub fn h(&self) -> i32 {
        self.h
    }

    pub fn coefficient(&self, m: i32) -> f64 {
        if m < self.h {
            return 0.0;
        }
        self.coeffs.get((m - self.h) as usize).copied().unwrap_or(0.0)
    }

    pub fn truncation(&self) -> i32 {
        self.h + self.coeffs.len() as i32 - 1
    }

    pub fn is_invariant(&self) -> bool {
        self.invariant
    }

    pub fn has_pole(&self) -> bool {
        self.h < 0 && self.coeffs[0] != 0.0
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Bound on the dropped tail at height `y`; infinite if the geometric
    /// envelope does not contract there.
    pub fn tail_bound(&self, y: f64) -> f64 {
        let m1 = (self.truncation() + 1).max(1) as f64;
        let first = self.envelope * (4.0 * PI * m1.sqrt() - 2.0 * PI * y * m1).exp();
        let ratio = (2.0 * PI / m1.sqrt() - 2.0 * PI * y).exp();
        if ratio < 0.9 {
            first / (1.0 - ratio)
        } else {
            f64::INFINITY
        }
    }

    /// Evaluates the expansion, reducing invariant functions into the
    /// fundamental domain first.
    pub fn eval(&self, z: &UpperHalfPoint) -> Result<Complex64, Error> {
        Ok(self.eval_with_error(z)?.0)
    }

    /// Evaluation together with the truncation-error bound at the summation
    /// point.
    pub fn eval_with_error(&self, z: &UpperHalfPoint) -> Result<(Complex64, f64), Error> {
        let zr = if self.invariant {
            reduce_to_fundamental_domain(z)?.0
        } else {
            *z
        };
        Ok((self.sum_at(&zr), self.tail_bound(zr.y)))
    }

    /// Plain truncated sum at `z`, without any reduction.
    pub fn sum_at(&self, z: &UpperHalfPoint) -> Complex64 {
        self.sum_xy(z.x, z.y)
    }

    fn sum_xy(&self, x: f64, y: f64) -> Complex64 {
        let q = (Complex64::new(0.0, 2.0 * PI) * Complex64::new(x, y)).exp();
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * q + c;
        }
        // Multiply by q^h; h is -1 or 0 for the built-ins.
        match self.h.cmp(&0) {
            std::cmp::Ordering::Equal => acc,
            _ => acc * q.powi(self.h),
        }
    }

    /// Quadrature-path evaluation: pure floating point, no matrix tracking.
    pub(crate) fn eval_fast(&self, x: f64, y: f64) -> Complex64 {
        if self.invariant {
            let (xr, yr) = reduce_point_f64(x, y);
            self.sum_xy(xr, yr)
        } else {
            self.sum_xy(x, y)
        }
    }

    /// Sum of `c_m q^m` over `m >= 1` only: the part that decays toward the
    /// cusp. Evaluated directly, without reduction.
    pub fn positive_part_at(&self, z: &UpperHalfPoint) -> Complex64 {
        self.positive_part_xy(z.x, z.y)
    }

    pub(crate) fn positive_part_xy(&self, x: f64, y: f64) -> Complex64 {
        let q = (Complex64::new(0.0, 2.0 * PI) * Complex64::new(x, y)).exp();
        let start = (1 - self.h) as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        if start >= self.coeffs.len() {
            return acc;
        }
        for &c in self.coeffs[start..].iter().rev() {
            acc = acc * q + c;
        }
        acc * q
    }

    /// Loads a user expansion from the coefficient file format:
    /// `h=<int>`, optional `invariant=true|false`, lines `<m>=<number>`;
    /// missing orders are zero.
    pub fn load_str(text: &str, label: &str) -> Result<Self, Error> {
        let mut h: Option<i32> = None;
        let mut invariant = false;
        let mut entries: Vec<(i32, f64)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::ExpansionFile(format!("line {}: expected key=value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if key == "h" {
                let parsed: i32 = value.parse().map_err(|_| {
                    Error::ExpansionFile(format!("line {}: bad h `{}`", lineno + 1, value))
                })?;
                if parsed < -1 {
                    return Err(Error::PoleOrderUnsupported(parsed));
                }
                h = Some(parsed);
            } else if key == "invariant" {
                invariant = match value {
                    "true" => true,
                    "false" => false,
                    _ => {
                        return Err(Error::ExpansionFile(format!(
                            "line {}: invariant must be true or false",
                            lineno + 1
                        )))
                    }
                };
            } else {
                let m: i32 = key.parse().map_err(|_| {
                    Error::ExpansionFile(format!("line {}: bad order `{}`", lineno + 1, key))
                })?;
                let c: f64 = value.parse().map_err(|_| {
                    Error::ExpansionFile(format!("line {}: bad coefficient `{}`", lineno + 1, value))
                })?;
                entries.push((m, c));
            }
        }
        let h = h.ok_or_else(|| Error::ExpansionFile("missing h=<int> line".into()))?;
        let max_m = entries.iter().map(|&(m, _)| m).max().unwrap_or(h);
        if max_m < h {
            return Err(Error::ExpansionFile("no coefficient at or above h".into()));
        }
        if max_m - h > 100_000 {
            return Err(Error::ExpansionFile("coefficient order too large".into()));
        }
        let mut coeffs = vec![0.0; (max_m - h + 1) as usize];
        for (m, c) in entries {
            if m < h {
                return Err(Error::ExpansionFile(format!(
                    "coefficient order {m} below stated lowest order {h}"
                )));
            }
            coeffs[(m - h) as usize] = c;
        }
        QExpansion::from_coefficients(h, coeffs, invariant, label)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        let label = path.file_stem().and_then(|s| s.to_str()).unwrap_or("user");
        Self::load_str(&text, label)
    }
}

/// Exact integer coefficients `c_{-1}, c_0, ..., c_M` of the j-invariant,
/// computed as `E4^3 / Delta`.
pub fn j_coefficients(m: usize) -> Vec<BigInt> {
    let len = m + 2; // orders 0..=M+1 of the auxiliary series
    let e4 = eisenstein_e4(len);
    let e4_cubed = series_mul(&series_mul(&e4, &e4, len), &e4, len);
    let delta_over_q = delta_coefficients(len);
    let inv = series_inv(&delta_over_q, len);
    series_mul(&e4_cubed, &inv, len)
}

/// `E4 = 1 + 240 sum sigma_3(n) q^n` up to `len` terms.
fn eisenstein_e4(len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); len];
    out[0] = BigInt::one();
    for n in 1..len {
        out[n] = BigInt::from(240) * sigma(n as u64, 3);
    }
    out
}

/// Divisor power sum `sigma_k(n)`.
pub(crate) fn sigma(n: u64, k: u32) -> BigInt {
    let mut out = BigInt::zero();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out += BigInt::from(d).pow(k);
            let e = n / d;
            if e != d {
                out += BigInt::from(e).pow(k);
            }
        }
        d += 1;
    }
    out
}

/// `Delta / q = prod (1-q^n)^24` via the pentagonal-number series.
fn delta_coefficients(len: usize) -> Vec<BigInt> {
    let mut euler = vec![BigInt::zero(); len];
    // prod (1-q^n) = sum_k (-1)^k q^{k(3k-1)/2} over all integers k.
    let mut k: i64 = 0;
    loop {
        let mut hit = false;
        for kk in [k, -k] {
            let e = kk * (3 * kk - 1) / 2;
            if e >= 0 && (e as usize) < len {
                let sign = if kk.rem_euclid(2) == 0 { 1 } else { -1 };
                euler[e as usize] += BigInt::from(sign);
                hit = true;
            }
            if k == 0 {
                break;
            }
        }
        if !hit && k > 0 {
            break;
        }
        k += 1;
    }
    // Raise to the 24th power by squaring: 24 = 8 + 16.
    let p2 = series_mul(&euler, &euler, len);
    let p4 = series_mul(&p2, &p2, len);
    let p8 = series_mul(&p4, &p4, len);
    let p16 = series_mul(&p8, &p8, len);
    series_mul(&p8, &p16, len)
}

fn series_mul(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); len];
    for (i, ai) in a.iter().enumerate().take(len) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(len - i) {
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

/// Inverse of a power series with leading coefficient +-1.
fn series_inv(a: &[BigInt], len: usize) -> Vec<BigInt> {
    assert!(a[0].is_one() || (-&a[0]).is_one());
    let lead = a[0].clone();
    let mut out = vec![BigInt::zero(); len];
    out[0] = lead.clone(); // 1/(+-1) = +-1
    for n in 1..len {
        let mut acc = BigInt::zero();
        for k in 1..=n.min(a.len() - 1) {
            if !a[k].is_zero() {
                acc += &a[k] * &out[n - k];
            }
        }
        out[n] = -acc * &lead;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_series_low_coefficients() {
        // First coefficients of j, frozen after agreeing with the
        // independent Eisenstein-E6 route (see the acceptance suite).
        let c = j_coefficients(5);
        let expected: Vec<BigInt> = [
            "1",
            "744",
            "196884",
            "21493760",
            "864299970",
            "20245856256",
            "333202640600",
        ]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
        assert_eq!(&c[..7], &expected[..]);
    }

    #[test]
    fn constant_function() {
        let one = QExpansion::one();
        let z = UpperHalfPoint::new(0.3, 0.8).unwrap();
        assert_eq!(one.eval(&z).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn j_at_special_points() {
        let j = QExpansion::j();
        let i = UpperHalfPoint::new(0.0, 1.0).unwrap();
        let v = j.eval(&i).unwrap();
        assert!((v.re - 1728.0).abs() < 1e-9, "j(i) = {v}");
        assert!(v.im.abs() < 1e-9);
        let corner = UpperHalfPoint::new(0.5, 3f64.sqrt() / 2.0).unwrap();
        let v = j.eval(&corner).unwrap();
        assert!(v.norm() < 1e-9, "j at the corner = {v}");
    }

    #[test]
    fn j_at_complex_multiplication_points() {
        // Classical integer values of j at imaginary quadratic points;
        // an evaluator check fully independent of the real quadratic
        // machinery. Tolerances scale with the value since f64 carries
        // ~16 digits.
        let j = QExpansion::j_with_truncation(40);
        let cases: [(f64, f64, f64); 7] = [
            (0.0, 2f64.sqrt(), 8000.0),            // 20^3
            (0.0, 2.0, 287496.0),                  // 66^3
            (0.0, 3f64.sqrt(), 54000.0),           // 2*30^3
            (0.5, 7f64.sqrt() / 2.0, -3375.0),     // -15^3
            (0.5, 11f64.sqrt() / 2.0, -32768.0),   // -32^3
            (0.5, 19f64.sqrt() / 2.0, -884736.0),  // -96^3
            (0.5, 43f64.sqrt() / 2.0, -884736000.0), // -960^3
        ];
        for (x, y, expected) in cases {
            let z = UpperHalfPoint::new(x, y).unwrap();
            let v = j.eval(&z).unwrap();
            let tol = 1e-9 * expected.abs().max(1.0);
            assert!(
                (v.re - expected).abs() < tol && v.im.abs() < tol,
                "j({x}+{y}i) = {v}, expected {expected}"
            );
        }
    }

    #[test]
    fn j1_shifts_constant_term() {
        let j = QExpansion::j();
        let j1 = QExpansion::j1();
        let z = UpperHalfPoint::new(0.1, 1.3).unwrap();
        let diff = j.eval(&z).unwrap() - j1.eval(&z).unwrap();
        assert!((diff - Complex64::new(744.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn reduction_examples() {
        let (z, g) = reduce_to_fundamental_domain(&UpperHalfPoint::new(0.0, 1.0).unwrap()).unwrap();
        assert!(g.is_identity());
        assert!((z.x()).abs() < 1e-15 && (z.y() - 1.0).abs() < 1e-15);

        let (z, g) =
            reduce_to_fundamental_domain(&UpperHalfPoint::new(5.0, 1.0).unwrap()).unwrap();
        assert_eq!(g, Mat2::from_i64(1, -5, 0, 1));
        assert!((z.x()).abs() < 1e-15 && (z.y() - 1.0).abs() < 1e-15);

        let start = UpperHalfPoint::new(0.1, 0.1).unwrap();
        let (z, g) = reduce_to_fundamental_domain(&start).unwrap();
        assert!(z.y() >= 3f64.sqrt() / 2.0 - 1e-12);
        assert!(z.x().abs() <= 0.5 + 1e-12);
        assert!(z.x() * z.x() + z.y() * z.y() >= 1.0 - 1e-12);
        // The returned matrix really maps the input to the output.
        let moved = start.moebius(&g).unwrap();
        assert!((moved.x() - z.x()).abs() < 1e-12);
        assert!((moved.y() - z.y()).abs() < 1e-12);
    }

    #[test]
    fn invariance_of_j() {
        // Smoke check; the calibrated 1e-9 criterion over seeded samples is
        // in the acceptance suite. Low points cost digits through the
        // Moebius magnification, hence the looser bound here.
        let j = QExpansion::j();
        let g = crate::word::EvenWord::new(vec![1, 2, 2, 1]).unwrap().gamma();
        for (x, y) in [(0.17, 0.6), (-0.4, 1.9), (2.3, 0.08)] {
            let z = UpperHalfPoint::new(x, y).unwrap();
            let gz = z.moebius(&g).unwrap();
            let d = (j.eval(&z).unwrap() - j.eval(&gz).unwrap()).norm();
            assert!(d < 1e-7, "invariance defect {d} at {z}");
        }
    }

    #[test]
    fn reality_and_symmetry() {
        let j = QExpansion::j();
        for k in 0..10 {
            let y = 1.0 + k as f64;
            let v = j.eval(&UpperHalfPoint::new(0.0, y).unwrap()).unwrap();
            assert!(v.im.abs() <= 1e-10 * v.re.abs().max(1.0));
        }
        let z = UpperHalfPoint::new(0.3, 1.1).unwrap();
        let zneg = UpperHalfPoint::new(-0.3, 1.1).unwrap();
        let d = (j.eval(&zneg).unwrap() - j.eval(&z).unwrap().conj()).norm();
        assert!(d < 1e-10);
    }

    #[test]
    fn load_round_trip_against_builtin() {
        let j = QExpansion::j();
        let mut text = String::from("h=-1\ninvariant=true\n");
        for m in -1..=j.truncation() {
            text.push_str(&format!("{}={:.0}\n", m, j.coefficient(m)));
        }
        let loaded = QExpansion::load_str(&text, "j-file").unwrap();
        for k in 0..100 {
            let x = (k as f64) / 100.0 - 0.5;
            let y = 0.9 + (k as f64) * 0.035;
            let z = UpperHalfPoint::new(x, y).unwrap();
            let d = (j.eval(&z).unwrap() - loaded.eval(&z).unwrap()).norm();
            assert!(d < 1e-9, "loaded j differs by {d}");
        }
    }

    #[test]
    fn load_rejects_bad_input() {
        assert!(matches!(
            QExpansion::load_str("h=-2\n-2=1\n", "t"),
            Err(Error::PoleOrderUnsupported(-2))
        ));
        assert!(QExpansion::load_str("0=1\n", "t").is_err());
        assert!(QExpansion::load_str("h=0\nx=1\n", "t").is_err());
        let one = QExpansion::load_str("h=0\n0=1\n", "one").unwrap();
        let z = UpperHalfPoint::new(0.0, 2.0).unwrap();
        assert_eq!(one.eval(&z).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(UpperHalfPoint::new(0.0, 0.0).is_err());
        assert!(UpperHalfPoint::new(0.0, -1.0).is_err());
        assert!(UpperHalfPoint::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn tail_bound_is_tiny_in_fundamental_domain() {
        let j = QExpansion::j();
        assert!(j.tail_bound(3f64.sqrt() / 2.0) < 1e-12);
        assert!(j.tail_bound(0.5).is_finite());
    }
}
