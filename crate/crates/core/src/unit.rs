//! Automorphs of real quadratic irrationals and the unit group they
//! generate.
//!
//! The stabilizer of `w` in `GL_2(Z)` is isomorphic to the unit group of
//! the order `Z[aw]`, a matrix `[[p,q],[r,s]]` mapping to `r w + s`. Units
//! are written `(x + y sqrt(D))/2` with `D` the discriminant of the
//! primitive minimal polynomial of `w`; the determinant corresponds to the
//! field norm.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::field::{isqrt, ln_bigint, QuadExt};
use crate::surd::{cocycle, moebius_apply, MinimalPolynomial, QuadraticSurd};
use crate::word::Mat2;
use crate::Error;

/// A unit `(x + y sqrt(d))/2` of the quadratic order attached to a surd;
/// `d` is the discriminant of the primitive minimal polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadUnit {
    pub x: BigInt,
    pub y: BigInt,
    pub d: BigInt,
}

impl QuadUnit {
    pub fn one(d: BigInt) -> Self {
        QuadUnit { x: BigInt::from(2), y: BigInt::zero(), d }
    }

    pub fn is_one(&self) -> bool {
        self.x == BigInt::from(2) && self.y.is_zero()
    }

    /// The unit as an exact field element over its discriminant.
    pub fn value(&self) -> QuadExt {
        QuadExt::new(
            BigRational::new(self.x.clone(), 2.into()),
            BigRational::new(self.y.clone(), 2.into()),
            self.d.clone(),
        )
    }

    /// Field norm `(x^2 - d y^2)/4`; +-1 for genuine units.
    pub fn norm(&self) -> Result<BigInt, Error> {
        let num = &self.x * &self.x - &self.d * &self.y * &self.y;
        let (q, r) = num.div_rem(&BigInt::from(4));
        if !r.is_zero() {
            return Err(Error::InvalidUnit(format!("norm of {self} is not an integer")));
        }
        Ok(q)
    }

    pub fn mul(&self, rhs: &QuadUnit) -> Result<QuadUnit, Error> {
        debug_assert_eq!(self.d, rhs.d);
        let two = BigInt::from(2);
        let xn = &self.x * &rhs.x + &self.d * &self.y * &rhs.y;
        let yn = &self.x * &rhs.y + &self.y * &rhs.x;
        let (x, rx) = xn.div_rem(&two);
        let (y, ry) = yn.div_rem(&two);
        if !rx.is_zero() || !ry.is_zero() {
            return Err(Error::InvalidUnit(format!(
                "product of {self} and {rhs} leaves the order"
            )));
        }
        Ok(QuadUnit { x, y, d: self.d.clone() })
    }

    pub fn pow(&self, n: u32) -> Result<QuadUnit, Error> {
        let mut out = QuadUnit::one(self.d.clone());
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Exact test for `value > 1`.
    pub fn exceeds_one(&self) -> bool {
        self.value().cmp_rational(&BigRational::one()) == std::cmp::Ordering::Greater
    }

    pub fn to_f64(&self) -> f64 {
        self.value().to_f64(1e-15)
    }

    /// Natural log of a positive unit, robust to values beyond f64 range.
    pub fn ln(&self) -> f64 {
        let shift = 64u64;
        let s = isqrt(&(&self.d << (2 * shift)));
        let num = (&self.x << shift) + &self.y * s;
        assert!(num.is_positive(), "ln of a non-positive unit");
        ln_bigint(&num) - (shift as f64 + 1.0) * std::f64::consts::LN_2
    }
}

impl fmt::Display for QuadUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}+{}*sqrt({}))/2", self.x, self.y, self.d)
    }
}

/// The distinguished generator of the stabilizer of a surd, together with
/// its cocycle value.
#[derive(Debug, Clone)]
pub struct Automorph {
    /// Generator of the stabilizer (up to sign) with `epsilon > 1`.
    pub gamma: Mat2,
    /// The unit `epsilon = c w + d > 1`.
    pub epsilon: QuadUnit,
}

impl Automorph {
    /// `2 log(epsilon)`, the length of the associated closed geodesic.
    pub fn geodesic_length(&self) -> f64 {
        2.0 * self.epsilon.ln()
    }
}

/// Computes the automorph of `w` from its evenized periodic form: with
/// `w = [V; overline(W0)]` and `W0` primitive, the automorph is
/// `gamma_V gamma_{W0} gamma_V^{-1}`.
pub fn automorph(w: &QuadraticSurd) -> Result<Automorph, Error> {
    let pf = w.periodic_form()?;
    let (root, _) = pf.word.primitive_decomposition()?;
    let gv = pf.prefix_gamma();
    let gamma = gv.mul(&root.gamma()).mul(&gv.inverse()?);
    let epsilon = unit_from_cocycle(&gamma, w)?;
    debug_assert!(epsilon.exceeds_one(), "automorph cocycle must exceed 1");
    Ok(Automorph { gamma, epsilon })
}

/// Sends a stabilizer matrix to the unit `r w + s`.
pub fn unit_from_matrix(g: &Mat2, w: &QuadraticSurd) -> Result<QuadUnit, Error> {
    if moebius_apply(g, w)? != *w {
        return Err(Error::NotStabilizer);
    }
    unit_from_cocycle(g, w)
}

fn unit_from_cocycle(g: &Mat2, w: &QuadraticSurd) -> Result<QuadUnit, Error> {
    let j = cocycle(g, w);
    let disc = w.minimal_polynomial().discriminant();
    // The surd's stored D is either the discriminant or a quarter of it.
    let four_d = BigInt::from(4) * w.d();
    let (x_rat, y_rat) = if *w.d() == disc {
        (&j.a * BigInt::from(2), &j.b * BigInt::from(2))
    } else if four_d == disc {
        (&j.a * BigInt::from(2), j.b.clone())
    } else {
        unreachable!("canonical surd D is disc or disc/4");
    };
    let to_int = |r: &BigRational| -> Result<BigInt, Error> {
        if r.is_integer() {
            Ok(r.to_integer())
        } else {
            Err(Error::InvalidUnit(format!("cocycle {r} is not in the order")))
        }
    };
    Ok(QuadUnit { x: to_int(&x_rat)?, y: to_int(&y_rat)?, d: disc })
}

/// Sends a unit back to its stabilizer matrix
/// `[[(x-by)/2, -cy], [ay, (x+by)/2]]`.
pub fn matrix_from_unit(u: &QuadUnit, mp: &MinimalPolynomial) -> Result<Mat2, Error> {
    debug_assert_eq!(u.d, mp.discriminant());
    let by = &mp.b * &u.y;
    if (&u.x - &by).is_odd() {
        return Err(Error::UnitParity);
    }
    let two = BigInt::from(2);
    Ok(Mat2::new(
        (&u.x - &by) / &two,
        -&mp.c * &u.y,
        &mp.a * &u.y,
        (&u.x + &by) / &two,
    ))
}
