//! Values of modular functions at real quadratic irrationals.
//!
//! A holomorphic modular function `f` can be assigned a "value" at a real
//! quadratic irrational `w` by integrating `f` against the differential
//! `eta_w = (1/(z-w') - 1/(z-w)) dz` along the closed geodesic attached to
//! `w`, normalized by the geodesic length. This crate provides:
//!
//! * exact combinatorics of even continued-fraction words and their
//!   matrices ([`word`], [`wordexpr`]);
//! * exact arithmetic of real quadratic irrationals: continued fractions,
//!   periodicity, Galois conjugation, automorphs and units ([`surd`],
//!   [`mod@unit`], [`field`]);
//! * evaluation of modular functions from q-expansions with fundamental
//!   domain reduction ([`modular`]);
//! * numerical cycle integrals along closed geodesics ([`cycle`],
//!   [`quadrature`]);
//! * an experiment harness for limits of values along sequences of
//!   periodic continued fractions ([`lab`]), plus named verification
//!   suites ([`verify`]).
//!
//! ```
//! use modular_cycles::{value, IntegralOptions, QExpansion, QuadraticSurd};
//!
//! // The value of j at the golden ratio.
//! let phi = QuadraticSurd::new(1, 2, 5)?;
//! let result = value(&QExpansion::j(), &phi, &IntegralOptions::default())?;
//! assert!((result.value.re - 706.3248135408).abs() < 1e-6);
//! // The geodesic length matches its closed form 2 log((3+sqrt(5))/2).
//! assert!((result.one_tilde - result.epsilon_w_log).abs() < 1e-9);
//! # Ok::<(), modular_cycles::Error>(())
//! ```

#![forbid(unsafe_code)]

pub mod cycle;
pub mod field;
pub mod lab;
pub mod modular;
pub mod quadrature;
pub mod surd;
pub mod unit;
pub mod verify;
pub mod word;
pub mod wordexpr;

pub use cycle::{
    decompose_integral, proximity_bound, pullback_residual, tilde_f, tilde_integral,
    tilde_one_closed_form, value, value_of_word, BasePoint, CycleIntegralResult, EtaForm, Foot,
    Geodesic, IntegralOptions, Method, SplitMode, TildeValue,
};
pub use modular::{reduce_to_fundamental_domain, QExpansion, UpperHalfPoint};
pub use surd::{fixed_point, MinimalPolynomial, PeriodicForm, QuadraticSurd};
pub use unit::{Automorph, QuadUnit};
pub use word::{rotate_blocks, EvenWord, Mat2};
pub use wordexpr::{Exponent, WordExpr};

/// Errors across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("word length {0} is odd; even words have even length")]
    OddWordLength(usize),
    #[error("word entry {0} out of range; entries must be >= 1")]
    WordEntryOutOfRange(u64),
    #[error("operation requires a non-empty word")]
    EmptyWord,
    #[error("rotation index {index} out of range 1..={len}")]
    RotationIndex { index: usize, len: usize },
    #[error("syntax error at byte {position}: expected {expected}, found {found}")]
    WordSyntax { position: usize, expected: String, found: String },
    #[error("unbound exponent symbol `{0}`")]
    UnboundSymbol(String),
    #[error("matrix has determinant {0}, not +-1")]
    NotUnimodular(String),
    #[error("matrix entries exceed floating-point range")]
    MatrixTooLarge,
    #[error("division by zero in quadratic field")]
    DivisionByZero,
    #[error("invalid quadratic surd: {0}")]
    InvalidSurd(String),
    #[error("matrix is not hyperbolic (|trace| <= 2): {0}")]
    NotHyperbolic(String),
    #[error("fixed point lies at infinity (lower-left entry is zero)")]
    FixedPointAtInfinity,
    #[error("matrix does not stabilize the given surd")]
    NotStabilizer,
    #[error("unit parity violated: x and b*y must agree mod 2")]
    UnitParity,
    #[error("element is not in the unit group: {0}")]
    InvalidUnit(String),
    #[error("continued-fraction entry {0} does not fit a word entry")]
    PeriodEntryTooLarge(String),
    #[error("no period found within {steps} continued-fraction steps")]
    PeriodSearchExhausted { steps: usize },
    #[error("invalid upper-half-plane point: imaginary part {0} is not positive")]
    NonPositiveImaginary(f64),
    #[error("fundamental-domain reduction did not terminate")]
    ReductionDiverged,
    #[error("coefficient file: {0}")]
    ExpansionFile(String),
    #[error("pole order {0} at infinity unsupported; only h >= -1")]
    PoleOrderUnsupported(i32),
    #[error("quadrature budget exhausted; achieved error estimate {achieved:.3e} > tol {tol:.3e}")]
    QuadratureBudget { achieved: f64, tol: f64 },
    #[error("contour endpoint collapsed onto the real axis; word too long for evaluation")]
    ContourCollapsed,
    #[error("surds do not share the first {0} continued-fraction terms")]
    PrefixMismatch(usize),
    #[error("experiment config: {0}")]
    Config(String),
    #[error("experiment word for n={n} is empty")]
    EmptyExperimentWord { n: u64 },
    #[error("experiment word guard exceeded: {entries} entries > limit {limit}")]
    GuardExceeded { entries: usize, limit: usize },
    #[error("no rows to emit")]
    EmptyRows,
    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),
    #[error("unknown modular function `{0}`; expected one, j, j1 or a file path")]
    UnknownFunction(String),
    #[error("sequence index {0} out of range; n >= 3 required")]
    PapckeRange(u64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
