//! Cycle integrals of modular functions along closed geodesics.
//!
//! For a real quadratic irrational `w` with conjugate `w'`, the value
//! `f(w)` is the ratio of two contour integrals of `f` against
//! `eta_w = (1/(z-w') - 1/(z-w)) dz` from a base point `z0` to its
//! translate under the automorph of `w`. The contour is the geodesic
//! half-circle through the endpoints, parametrized by hyperbolic arc
//! length `u = log tan(theta/2)`, along which the self-form pulls back to
//! a constant.
//!
//! Two refinements keep double precision honest on hard inputs:
//!
//! * long contours are split into short segments carried back to the base
//!   point with exactly transformed differentials, so no evaluation ever
//!   happens at a floating point starved of significant digits;
//! * across high arcs, where a pole at infinity makes the integrand huge
//!   and violently oscillatory, the principal part `c_{-1} q^{-1} + c_0`
//!   is integrated in closed form or over the straight chord between the
//!   crossing points (valid by holomorphy), and only the decaying tail of
//!   the q-series is summed on the arc itself.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::json;

use crate::field::{ln_bigint, rat_to_f64};
use crate::modular::{QExpansion, UpperHalfPoint};
use crate::quadrature::{integrate_adaptive, integrate_tanh_sinh, QuadResult};
use crate::surd::{fixed_point, moebius_apply, QuadraticSurd};
use crate::unit::{automorph, unit_from_matrix};
use crate::word::{rotate_blocks, EvenWord, Mat2};
use crate::Error;

/// A boundary point of the upper half plane: a pole location of an eta
/// differential. Kept exact so pullbacks stay exact.
#[derive(Debug, Clone, PartialEq)]
pub enum Foot {
    Infinity,
    Rational(BigRational),
    Surd(QuadraticSurd),
}

impl Foot {
    pub fn approx(&self) -> Option<f64> {
        match self {
            Foot::Infinity => None,
            Foot::Rational(r) => Some(rat_to_f64(r)),
            Foot::Surd(s) => Some(s.approx()),
        }
    }

    /// Exact Moebius image of the foot.
    fn moebius(&self, g: &Mat2) -> Result<Foot, Error> {
        Ok(match self {
            Foot::Infinity => {
                if g.c.is_zero() {
                    Foot::Infinity
                } else {
                    Foot::Rational(BigRational::new(g.a.clone(), g.c.clone()))
                }
            }
            Foot::Rational(r) => {
                let den = BigRational::new(g.c.clone(), 1.into()) * r
                    + BigRational::new(g.d.clone(), 1.into());
                if den.is_zero() {
                    Foot::Infinity
                } else {
                    let num = BigRational::new(g.a.clone(), 1.into()) * r
                        + BigRational::new(g.b.clone(), 1.into());
                    Foot::Rational(num / den)
                }
            }
            Foot::Surd(s) => Foot::Surd(moebius_apply(g, s)?),
        })
    }
}

impl From<QuadraticSurd> for Foot {
    fn from(s: QuadraticSurd) -> Self {
        Foot::Surd(s)
    }
}

/// The differential `eta_{x', x} = (1/(z-x') - 1/(z-x)) dz` with exact feet.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaForm {
    pub x_prime: Foot,
    pub x: Foot,
}

impl EtaForm {
    pub fn new(x_prime: Foot, x: Foot) -> Self {
        EtaForm { x_prime, x }
    }

    /// The form `eta_w` with poles at the conjugate pair of `w`.
    pub fn of_surd(w: &QuadraticSurd) -> Self {
        EtaForm {
            x_prime: Foot::Surd(w.conjugate()),
            x: Foot::Surd(w.clone()),
        }
    }

    /// Coefficient of `dz` at `z`, with `1/(z - infinity) = 0`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let term = |foot: &Foot| match foot.approx() {
            Some(a) => 1.0 / (z - a),
            None => Complex64::new(0.0, 0.0),
        };
        term(&self.x_prime) - term(&self.x)
    }

    /// Pullback under `g`: the feet move by `g^{-1}`.
    pub fn pullback(&self, g: &Mat2) -> Result<EtaForm, Error> {
        let ginv = g.inverse()?;
        Ok(EtaForm {
            x_prime: self.x_prime.moebius(&ginv)?,
            x: self.x.moebius(&ginv)?,
        })
    }
}

/// Residual of the pullback identity `g* eta_{x',x} = eta_{g^{-1}x', g^{-1}x}`
/// at the point `z`: zero in exact arithmetic.
pub fn pullback_residual(g: &Mat2, form: &EtaForm, z: &UpperHalfPoint) -> Result<f64, Error> {
    let [a, b, c, d] = g.to_f64()?;
    let zc = z.to_complex();
    let den = c * zc + d;
    let gz = (a * zc + b) / den;
    let lhs = form.eval(gz) / (den * den);
    let rhs = form.pullback(g)?.eval(zc);
    Ok((lhs - rhs).norm())
}

/// The geodesic half-circle attached to a surd, with floating foot data.
#[derive(Debug, Clone)]
pub struct Geodesic {
    pub w: QuadraticSurd,
    pub w_conj: QuadraticSurd,
    pub center: f64,
    pub radius: f64,
}

impl Geodesic {
    pub fn of(w: &QuadraticSurd) -> Self {
        let center = rat_to_f64(&BigRational::new(w.p().clone(), w.q().clone()));
        // radius = sqrt(D)/|Q| > 0.
        let radius = crate::field::QuadExt::new(
            BigRational::zero(),
            BigRational::new(1.into(), w.q().abs()),
            w.d().clone(),
        )
        .to_f64(1e-15);
        Geodesic { w: w.clone(), w_conj: w.conjugate(), center, radius }
    }

    pub fn apex(&self) -> UpperHalfPoint {
        UpperHalfPoint::new(self.center, self.radius).expect("radius is positive")
    }
}

/// Quadrature method for the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    GaussLegendre,
    TanhSinh,
}

/// Contour policy: `Auto` splits long contours into exactly-transformed
/// short segments; `Direct` always integrates the single contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    Auto,
    Direct,
}

/// Options shared by all cycle-integral operations.
#[derive(Debug, Clone, Copy)]
pub struct IntegralOptions {
    /// Absolute error target per integral.
    pub tol: f64,
    pub method: Method,
    pub split: SplitMode,
    /// Contours longer than this (in hyperbolic length) are split in Auto.
    pub split_length: f64,
    /// Height above which the principal part is handled separately.
    pub y_split: f64,
    pub max_panels: usize,
}

impl Default for IntegralOptions {
    fn default() -> Self {
        IntegralOptions {
            tol: 1e-9,
            method: Method::GaussLegendre,
            split: SplitMode::Auto,
            split_length: 9.0,
            y_split: 1.5,
            max_panels: 1 << 14,
        }
    }
}

impl IntegralOptions {
    pub fn with_tol(tol: f64) -> Self {
        IntegralOptions { tol, ..Default::default() }
    }

    pub fn direct(tol: f64) -> Self {
        IntegralOptions { tol, split: SplitMode::Direct, ..Default::default() }
    }
}

/// Base point of the contour.
#[derive(Debug, Clone, Copy)]
pub enum BasePoint {
    /// A point on the geodesic placed so both contour endpoints sit at the
    /// same height (one translation length apart, centered on the apex).
    Auto,
    At(UpperHalfPoint),
}

/// A contour integral value with its accumulated error estimate.
#[derive(Debug, Clone, Copy)]
pub struct TildeValue {
    pub value: Complex64,
    pub error_estimate: f64,
    pub base_point: UpperHalfPoint,
}

// ---------------------------------------------------------------------------
// Arc geometry
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum ArcGeom {
    /// Half-circle centered at `m` with radius `r`; `u = log tan(theta/2)`,
    /// so `z(u) = m + r(-tanh u + i sech u)` and `u` is hyperbolic arc
    /// length. `u -> -inf` is the right foot `m + r`.
    Circle { m: f64, r: f64 },
    /// Vertical line `x = const`, `u = log y`.
    Vertical { x: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Arc {
    geom: ArcGeom,
    u_a: f64,
    u_b: f64,
}

impl Arc {
    fn point(&self, u: f64) -> Complex64 {
        match self.geom {
            ArcGeom::Circle { m, r } => {
                let sech = 1.0 / u.cosh();
                Complex64::new(m - r * u.tanh(), r * sech)
            }
            ArcGeom::Vertical { x } => Complex64::new(x, u.exp()),
        }
    }

    fn dz_du(&self, u: f64) -> Complex64 {
        match self.geom {
            ArcGeom::Circle { m: _, r } => {
                let sech = 1.0 / u.cosh();
                Complex64::new(-r * sech * sech, -r * sech * u.tanh())
            }
            ArcGeom::Vertical { x: _ } => Complex64::new(0.0, u.exp()),
        }
    }

    fn height(&self, u: f64) -> f64 {
        match self.geom {
            ArcGeom::Circle { m: _, r } => r / u.cosh(),
            ArcGeom::Vertical { x: _ } => u.exp(),
        }
    }

    fn max_height(&self) -> f64 {
        match self.geom {
            ArcGeom::Circle { .. } => {
                let lo = self.u_a.min(self.u_b);
                let hi = self.u_a.max(self.u_b);
                if lo <= 0.0 && 0.0 <= hi {
                    self.height(0.0)
                } else {
                    self.height(self.u_a).max(self.height(self.u_b))
                }
            }
            ArcGeom::Vertical { .. } => self.height(self.u_a).max(self.height(self.u_b)),
        }
    }

    /// Stable parameter of a point on (or near) the circle.
    fn param_on_circle(m: f64, r: f64, z: Complex64) -> f64 {
        let dx = z.re - m;
        if dx >= 0.0 {
            z.im.ln() - (r + dx).ln()
        } else {
            (r - dx).ln() - z.im.ln()
        }
    }

    /// Geodesic through two points of the upper half plane.
    fn through(za: Complex64, zb: Complex64) -> Result<Arc, Error> {
        let scale = za.norm().max(zb.norm()).max(1.0);
        if (za.re - zb.re).abs() <= 1e-12 * scale {
            let x = 0.5 * (za.re + zb.re);
            return Ok(Arc {
                geom: ArcGeom::Vertical { x },
                u_a: za.im.ln(),
                u_b: zb.im.ln(),
            });
        }
        let m = (zb.norm_sqr() - za.norm_sqr()) / (2.0 * (zb.re - za.re));
        let r = (za.re - m).hypot(za.im);
        Ok(Arc {
            geom: ArcGeom::Circle { m, r },
            u_a: Self::param_on_circle(m, r, za),
            u_b: Self::param_on_circle(m, r, zb),
        })
    }
}

// ---------------------------------------------------------------------------
// Integrand assembly
// ---------------------------------------------------------------------------

/// How the eta coefficient restricts to the integration arc.
#[derive(Debug, Clone, Copy)]
enum FormOnArc {
    /// The form's feet are the arc's own feet: `eta dz = sign * du` exactly.
    SelfForm { sign: f64 },
    /// Generic feet (None encodes infinity).
    General { xp: Option<f64>, x: Option<f64> },
}

impl FormOnArc {
    /// Generic restriction of the form to an arbitrary arc.
    fn general(form: &EtaForm) -> FormOnArc {
        FormOnArc::General { xp: form.x_prime.approx(), x: form.x.approx() }
    }

    /// Exact classification for a contour built on the axis of `w`: the
    /// form restricts to a constant precisely when its feet are the
    /// conjugate pair of `w`. Float proximity is never trusted here; a
    /// block translate can shadow the circle to within any tolerance.
    fn on_axis_of(w: &QuadraticSurd, form: &EtaForm) -> FormOnArc {
        let (Foot::Surd(xp), Foot::Surd(x)) = (&form.x_prime, &form.x) else {
            return FormOnArc::general(form);
        };
        if *x == *w && *xp == w.conjugate() {
            // x is the attracting foot; w > w' means it sits at m + r.
            let sign = if w.q().is_positive() { -1.0 } else { 1.0 };
            FormOnArc::SelfForm { sign }
        } else if *xp == *w && *x == w.conjugate() {
            let sign = if w.q().is_positive() { 1.0 } else { -1.0 };
            FormOnArc::SelfForm { sign }
        } else {
            FormOnArc::general(form)
        }
    }

    fn feet_on(&self, arc: &Arc) -> (Option<f64>, Option<f64>) {
        match (self, arc.geom) {
            (FormOnArc::SelfForm { sign }, ArcGeom::Circle { m, r }) => {
                if *sign < 0.0 {
                    (Some(m - r), Some(m + r))
                } else {
                    (Some(m + r), Some(m - r))
                }
            }
            (FormOnArc::General { xp, x }, _) => (*xp, *x),
            (FormOnArc::SelfForm { .. }, ArcGeom::Vertical { .. }) => {
                unreachable!("self form never classifies on a vertical line")
            }
        }
    }
}

fn eta_coeff(xp: Option<f64>, x: Option<f64>, z: Complex64) -> Complex64 {
    let term = |a: Option<f64>| match a {
        Some(a) => 1.0 / (z - a),
        None => Complex64::new(0.0, 0.0),
    };
    term(xp) - term(x)
}

fn run_quadrature<F>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    opts: &IntegralOptions,
) -> Result<QuadResult, Error>
where
    F: Fn(f64) -> Complex64,
{
    match opts.method {
        Method::GaussLegendre => integrate_adaptive(f, a, b, tol, opts.max_panels),
        Method::TanhSinh => Ok(integrate_tanh_sinh(f, a, b, tol)),
    }
}

/// Integral of `f * eta` over one arc piece, full q-sum at each node.
fn arc_piece_full(
    f: &QExpansion,
    arc: &Arc,
    kind: &FormOnArc,
    u0: f64,
    u1: f64,
    tol: f64,
    opts: &IntegralOptions,
) -> Result<QuadResult, Error> {
    match kind {
        FormOnArc::SelfForm { sign } => {
            let s = *sign;
            let integrand = |u: f64| {
                let z = arc.point(u);
                f.eval_fast(z.re, z.im) * s
            };
            run_quadrature(&integrand, u0, u1, tol, opts)
        }
        FormOnArc::General { xp, x } => {
            let (xp, x) = (*xp, *x);
            let integrand = |u: f64| {
                let z = arc.point(u);
                f.eval_fast(z.re, z.im) * eta_coeff(xp, x, z) * arc.dz_du(u)
            };
            run_quadrature(&integrand, u0, u1, tol, opts)
        }
    }
}

/// Closed form of `c0 * integral of eta` over an arc piece.
fn constant_term_exact(
    c0: f64,
    arc: &Arc,
    kind: &FormOnArc,
    u0: f64,
    u1: f64,
) -> Complex64 {
    if c0 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    match kind {
        FormOnArc::SelfForm { sign } => Complex64::new(c0 * sign * (u1 - u0), 0.0),
        FormOnArc::General { xp, x } => {
            let z0 = arc.point(u0);
            let z1 = arc.point(u1);
            // Antiderivative Log(z - x') - Log(z - x); the principal branch
            // is continuous since z - a stays in the upper half plane.
            let term = |a: Option<f64>, z: Complex64| match a {
                Some(a) => (z - a).ln(),
                None => Complex64::new(0.0, 0.0),
            };
            (term(*xp, z1) - term(*x, z1) - term(*xp, z0) + term(*x, z0)) * c0
        }
    }
}

/// `c_{-1} * integral of q^{-1} eta` over a high arc piece, computed on the
/// straight chord between the piece endpoints. Deformation is valid because
/// the integrand is holomorphic between chord and arc (poles are real).
fn pole_term_chord(
    cm1: f64,
    arc: &Arc,
    kind: &FormOnArc,
    u0: f64,
    u1: f64,
    tol: f64,
    opts: &IntegralOptions,
) -> Result<QuadResult, Error> {
    if cm1 == 0.0 {
        return Ok(QuadResult { value: Complex64::new(0.0, 0.0), error_estimate: 0.0, panels: 0 });
    }
    let (xp, x) = kind.feet_on(arc);
    let z0 = arc.point(u0);
    let z1 = arc.point(u1);
    let dz = z1 - z0;
    let integrand = |t: f64| {
        let z = z0 + dz * t;
        let qinv = (Complex64::new(0.0, -2.0 * std::f64::consts::PI) * z).exp();
        qinv * eta_coeff(xp, x, z) * dz
    };
    let mut out = run_quadrature(&integrand, 0.0, 1.0, tol / cm1.abs().max(1.0), opts)?;
    out.value *= cm1;
    out.error_estimate *= cm1.abs();
    Ok(out)
}

/// Tail of the q-series (`m >= 1` only) over a high arc piece, summed
/// directly: no reduction needed where the tail is small.
fn positive_part_piece(
    f: &QExpansion,
    arc: &Arc,
    kind: &FormOnArc,
    u0: f64,
    u1: f64,
    tol: f64,
    opts: &IntegralOptions,
) -> Result<QuadResult, Error> {
    match kind {
        FormOnArc::SelfForm { sign } => {
            let s = *sign;
            let integrand = |u: f64| {
                let z = arc.point(u);
                f.positive_part_xy(z.re, z.im) * s
            };
            run_quadrature(&integrand, u0, u1, tol, opts)
        }
        FormOnArc::General { xp, x } => {
            let (xp, x) = (*xp, *x);
            let integrand = |u: f64| {
                let z = arc.point(u);
                f.positive_part_xy(z.re, z.im) * eta_coeff(xp, x, z) * arc.dz_du(u)
            };
            run_quadrature(&integrand, u0, u1, tol, opts)
        }
    }
}

/// Integrates `f * eta` over the whole arc, splitting off the principal
/// part above `y_split` when `f` has a pole at infinity.
fn integrate_segment(
    f: &QExpansion,
    arc: &Arc,
    kind: FormOnArc,
    opts: &IntegralOptions,
    tol: f64,
) -> Result<(Complex64, f64), Error> {
    let needs_split = f.has_pole()
        && matches!(arc.geom, ArcGeom::Circle { .. })
        && arc.max_height() > opts.y_split;
    if !needs_split {
        let r = arc_piece_full(f, arc, &kind, arc.u_a, arc.u_b, tol, opts)?;
        return Ok((r.value, r.error_estimate));
    }
    let ArcGeom::Circle { m: _, r } = arc.geom else { unreachable!() };
    // The region above y_split is |u| <= uc on the circle.
    let ratio = r / opts.y_split;
    let uc = (ratio + (ratio * ratio - 1.0).max(0.0).sqrt()).ln();
    let dir = if arc.u_b >= arc.u_a { 1.0 } else { -1.0 };
    // Walk from u_a to u_b, collecting pieces split at -uc and +uc.
    let mut cuts = vec![arc.u_a];
    for c in if dir > 0.0 { [-uc, uc] } else { [uc, -uc] } {
        if (c - arc.u_a) * dir > 1e-12 && (arc.u_b - c) * dir > 1e-12 {
            cuts.push(c);
        }
    }
    cuts.push(arc.u_b);

    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let piece_tol = tol / (cuts.len() as f64 + 1.0);
    for pair in cuts.windows(2) {
        let (u0, u1) = (pair[0], pair[1]);
        let umid = 0.5 * (u0 + u1);
        let is_high = umid.abs() < uc && arc.height(umid) > opts.y_split * 0.999;
        if is_high {
            value += constant_term_exact(f.coefficient(0), arc, &kind, u0, u1);
            let pole = pole_term_chord(f.coefficient(-1), arc, &kind, u0, u1, piece_tol, opts)?;
            value += pole.value;
            err += pole.error_estimate;
            let tail = positive_part_piece(f, arc, &kind, u0, u1, piece_tol, opts)?;
            value += tail.value;
            err += tail.error_estimate;
        } else {
            let low = arc_piece_full(f, arc, &kind, u0, u1, piece_tol, opts)?;
            value += low.value;
            err += low.error_estimate;
        }
    }
    Ok((value, err))
}

// ---------------------------------------------------------------------------
// Contours
// ---------------------------------------------------------------------------

/// Natural log of the large eigenvalue of a hyperbolic matrix.
fn ln_translation(g: &Mat2) -> f64 {
    let tr = g.trace();
    let tr_abs = tr.abs();
    if tr_abs.bits() > 500 {
        return ln_bigint(&tr_abs);
    }
    let t = crate::field::bigint_to_f64(&tr_abs);
    ((t + (t * t - 4.0).max(0.0).sqrt()) / 2.0).ln()
}

/// Circle data and starting parameter of the symmetric auto placement:
/// half a translation length before the apex, so both contour endpoints
/// share the same moderate height.
fn auto_placement(g: &Mat2) -> Result<(f64, f64, f64), Error> {
    let w = fixed_point(g)?;
    let geo = Geodesic::of(&w);
    let ln_eps = ln_translation(g);
    // The attracting foot of the matrix is w itself; w > w' puts it at
    // u -> -inf, so the contour runs downward in u.
    let toward_neg = w.approx() > geo.w_conj.approx();
    let u_a = if toward_neg { ln_eps } else { -ln_eps };
    Ok((geo.center, geo.radius, u_a))
}

/// The base point the engine chooses for `BasePoint::Auto` on this word's
/// contour; useful for constructing nearby alternate base points.
pub fn auto_base_point(word: &EvenWord) -> Result<UpperHalfPoint, Error> {
    let (m, r, u_a) = auto_placement(&word.gamma())?;
    let z = Arc { geom: ArcGeom::Circle { m, r }, u_a, u_b: 0.0 }.point(u_a);
    UpperHalfPoint::from_complex(z)
}

/// Moebius image of an exact f64 point through exact rational arithmetic.
/// Near the repelling fixed point the float denominator `c x + d` cancels
/// catastrophically; f64 inputs are exact rationals, so the image is not.
fn exact_moebius_point(g: &Mat2, z: &UpperHalfPoint) -> Result<UpperHalfPoint, Error> {
    let x = BigRational::from_float(z.x()).ok_or(Error::ContourCollapsed)?;
    let y = BigRational::from_float(z.y()).ok_or(Error::ContourCollapsed)?;
    let [a, b, c, d] = [&g.a, &g.b, &g.c, &g.d].map(|v| BigRational::from_integer(v.clone()));
    let re_num = &a * &x + &b;
    let re_den = &c * &x + &d;
    let norm = &re_den * &re_den + &c * &c * &y * &y;
    if norm.is_zero() {
        return Err(Error::ContourCollapsed);
    }
    let det = BigRational::from_integer(g.det());
    let x1 = (&re_num * &re_den + &a * &c * &y * &y) / &norm;
    let y1 = &y * &det / &norm;
    UpperHalfPoint::new(rat_to_f64(&x1), rat_to_f64(&y1))
}

/// Single-contour integral of `f * form` from `z0` to `g z0`.
fn direct_contour(
    f: &QExpansion,
    g: &Mat2,
    form: &EtaForm,
    base: BasePoint,
    opts: &IntegralOptions,
) -> Result<TildeValue, Error> {
    let (arc, z0, kind) = match base {
        BasePoint::Auto => {
            let w = fixed_point(g)?;
            let (m, r, u_a) = auto_placement(g)?;
            let z0c = Arc { geom: ArcGeom::Circle { m, r }, u_a, u_b: 0.0 }.point(u_a);
            let z0 = UpperHalfPoint::from_complex(z0c)?;
            let z1 = exact_moebius_point(g, &z0)?;
            let u_b = Arc::param_on_circle(m, r, z1.to_complex());
            if !u_b.is_finite() {
                return Err(Error::ContourCollapsed);
            }
            // The arc lies on the axis of w, so the form restricts to a
            // constant exactly when its feet are the conjugate pair of w.
            let kind = FormOnArc::on_axis_of(&w, form);
            (Arc { geom: ArcGeom::Circle { m, r }, u_a, u_b }, z0, kind)
        }
        BasePoint::At(z0) => {
            let z1 = exact_moebius_point(g, &z0)?;
            let arc = Arc::through(z0.to_complex(), z1.to_complex())?;
            (arc, z0, FormOnArc::general(form))
        }
    };
    let (value, err) = integrate_segment(f, &arc, kind, opts, opts.tol)?;
    let slop = 1e-14 * (1.0 + (arc.u_a - arc.u_b).abs());
    Ok(TildeValue { value, error_estimate: err + slop, base_point: z0 })
}

/// Greedy split of a word into even-length blocks of bounded translation
/// length.
fn split_blocks(word: &EvenWord) -> Vec<EvenWord> {
    const BLOCK_LN: f64 = 4.0;
    const BLOCK_MAX: usize = 8;
    let mut blocks = Vec::new();
    let mut current: Vec<u64> = Vec::new();
    let mut weight = 0.0;
    for pair in word.entries().chunks(2) {
        current.extend_from_slice(pair);
        weight += ((pair[0] + 1) as f64).ln() + ((pair[1] + 1) as f64).ln();
        if weight >= BLOCK_LN || current.len() >= BLOCK_MAX {
            blocks.push(EvenWord::new(std::mem::take(&mut current)).expect("even block"));
            weight = 0.0;
        }
    }
    if !current.is_empty() {
        blocks.push(EvenWord::new(current).expect("even block"));
    }
    blocks
}

/// Splits the contour of a long word along the prefix translates of its
/// blocks; each segment is carried back to the shared base point with the
/// exactly transformed differential.
fn block_split_integral(
    f: &QExpansion,
    word: &EvenWord,
    form: &EtaForm,
    base: BasePoint,
    opts: &IntegralOptions,
) -> Result<TildeValue, Error> {
    let blocks = split_blocks(word);
    if blocks.len() < 2 {
        // Nothing to split: the plain contour with its balanced endpoint
        // placement is strictly better than an apex-anchored single block.
        return direct_contour(f, &word.gamma(), form, base, opts);
    }
    let z0 = match base {
        BasePoint::Auto => Geodesic::of(&fixed_point(&word.gamma())?).apex(),
        BasePoint::At(z) => z,
    };
    let mut current_form = form.clone();
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let piece_opts = IntegralOptions {
        tol: opts.tol / blocks.len() as f64,
        ..*opts
    };
    for block in &blocks {
        let seg = direct_contour(f, &block.gamma(), &current_form, BasePoint::At(z0), &piece_opts)?;
        value += seg.value;
        err += seg.error_estimate;
        current_form = current_form.pullback(&block.gamma())?;
    }
    Ok(TildeValue { value, error_estimate: err, base_point: z0 })
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// The contour integral of `f * form` from `z0` to `gamma_W z0`.
///
/// For the form `eta_W` this equals `N(W)` times the cycle integral of the
/// primitive word. Long contours are split unless `Direct` is requested;
/// splitting requires an invariant `f`.
pub fn tilde_integral(
    f: &QExpansion,
    word: &EvenWord,
    form: &EtaForm,
    base: BasePoint,
    opts: &IntegralOptions,
) -> Result<TildeValue, Error> {
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    let gamma = word.gamma();
    let long = 2.0 * ln_translation(&gamma) > opts.split_length;
    if matches!(opts.split, SplitMode::Auto) && long && f.is_invariant() {
        block_split_integral(f, word, form, base, opts)
    } else {
        direct_contour(f, &gamma, form, base, opts)
    }
}

/// The cycle integral of `f` at `w`: the contour integral along the
/// geodesic of the primitive even word of `w`.
pub fn tilde_f(
    f: &QExpansion,
    w: &QuadraticSurd,
    opts: &IntegralOptions,
) -> Result<TildeValue, Error> {
    let pf = w.periodic_form()?;
    let (root, _) = pf.word.primitive_decomposition()?;
    let w0 = fixed_point(&root.gamma())?;
    tilde_integral(f, &root, &EtaForm::of_surd(&w0), BasePoint::Auto, opts)
}

/// Closed form of the geodesic length: `2 log(epsilon_w)`.
pub fn tilde_one_closed_form(w: &QuadraticSurd) -> Result<f64, Error> {
    Ok(automorph(w)?.geodesic_length())
}

/// The value `f(w) = tilde f(w) / tilde 1(w)` with numerical data.
#[derive(Debug, Clone)]
pub struct CycleIntegralResult {
    pub f_tilde: Complex64,
    pub one_tilde: f64,
    pub value: Complex64,
    pub quadrature_error_estimate: f64,
    pub base_point: UpperHalfPoint,
    /// Closed-form geodesic length `2 log(epsilon_w)` for cross-checking.
    pub epsilon_w_log: f64,
    pub word: Option<EvenWord>,
    pub surd: QuadraticSurd,
}

impl CycleIntegralResult {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "f_tilde_re": self.f_tilde.re,
            "f_tilde_im": self.f_tilde.im,
            "one_tilde": self.one_tilde,
            "value_re": self.value.re,
            "value_im": self.value.im,
            "err_estimate": self.quadrature_error_estimate,
            "epsilon_w_log": self.epsilon_w_log,
            "word": self.word.as_ref().map(|w| w.to_string()),
            "surd": self.surd.to_json_fields(),
        })
    }
}

/// Computes `f(w)` for a surd, deriving its primitive word from the
/// continued fraction.
pub fn value(
    f: &QExpansion,
    w: &QuadraticSurd,
    opts: &IntegralOptions,
) -> Result<CycleIntegralResult, Error> {
    let pf = w.periodic_form()?;
    let (root, _) = pf.word.primitive_decomposition()?;
    value_with_root(f, w, &root, opts)
}

/// Computes `f(w)` for the fixed surd of a word, without re-deriving the
/// continued fraction: the word itself is the expansion.
pub fn value_of_word(
    f: &QExpansion,
    word: &EvenWord,
    opts: &IntegralOptions,
) -> Result<CycleIntegralResult, Error> {
    let (root, _) = word.primitive_decomposition()?;
    let w = fixed_point(&root.gamma())?;
    value_with_root(f, &w, &root, opts)
}

fn value_with_root(
    f: &QExpansion,
    w: &QuadraticSurd,
    root: &EvenWord,
    opts: &IntegralOptions,
) -> Result<CycleIntegralResult, Error> {
    let w0 = fixed_point(&root.gamma())?;
    let form = EtaForm::of_surd(&w0);
    let f_tilde = tilde_integral(f, root, &form, BasePoint::Auto, opts)?;
    let one = QExpansion::one();
    let one_tilde = tilde_integral(&one, root, &form, BasePoint::Auto, opts)?;
    // The length has an exact closed form; fold the discrepancy into the
    // error estimate as a consistency check.
    let eps = unit_from_matrix(&root.gamma(), &w0)?;
    let epsilon_w_log = 2.0 * eps.ln();
    let one_num = one_tilde.value.re;
    let closed_gap = (one_num - epsilon_w_log).abs();
    let value = f_tilde.value / one_num;
    let err = f_tilde.error_estimate / one_num
        + value.norm() * (one_tilde.error_estimate + closed_gap) / one_num;
    Ok(CycleIntegralResult {
        f_tilde: f_tilde.value,
        one_tilde: one_num,
        value,
        quadrature_error_estimate: err,
        base_point: f_tilde.base_point,
        epsilon_w_log,
        word: Some(root.clone()),
        surd: w.clone(),
    })
}

/// Segment integrals of `f tilde(W_1 ... W_k)`: the `i`-th entry integrates
/// `f` against the differential of the rotated concatenation from the
/// shared base point to `gamma_{W_i} z0`; the entries sum to the integral
/// of the full concatenation.
pub fn decompose_integral(
    f: &QExpansion,
    words: &[EvenWord],
    base: BasePoint,
    opts: &IntegralOptions,
) -> Result<Vec<TildeValue>, Error> {
    if words.is_empty() || words.iter().any(|w| w.is_empty()) {
        return Err(Error::EmptyWord);
    }
    let full = EvenWord::concat(words);
    let z0 = match base {
        BasePoint::Auto => Geodesic::of(&fixed_point(&full.gamma())?).apex(),
        BasePoint::At(z) => z,
    };
    let mut out = Vec::with_capacity(words.len());
    for i in 1..=words.len() {
        let rotated = EvenWord::concat(&rotate_blocks(words, i)?);
        let v = fixed_point(&rotated.gamma())?;
        let seg = tilde_integral(
            f,
            &words[i - 1],
            &EtaForm::of_surd(&v),
            BasePoint::At(z0),
            opts,
        )?;
        out.push(seg);
    }
    Ok(out)
}

/// The bound `2^{2-n} / y0^2` on `|1/(z-v) - 1/(z-w)|` for surds sharing
/// the first `n` continued-fraction terms, valid for `Im z >= y0`.
pub fn proximity_bound(
    v: &QuadraticSurd,
    w: &QuadraticSurd,
    n: usize,
    y0: f64,
) -> Result<f64, Error> {
    if y0 <= 0.0 {
        return Err(Error::NonPositiveImaginary(y0));
    }
    if v.cf_expand(n) != w.cf_expand(n) {
        return Err(Error::PrefixMismatch(n));
    }
    Ok(2f64.powi(2 - n as i32) / (y0 * y0))
}
