//! Named verification suites behind the `verify` CLI command.
//!
//! Each suite runs a batch of identity checks with a seeded generator and
//! reports one machine-readable result per check, including a
//! counterexample dump on failure. Identical seed and budget give
//! byte-identical reports.

use num_complex::Complex64;
use num_rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cycle::{
    decompose_integral, pullback_residual, tilde_integral, tilde_one_closed_form, BasePoint,
    EtaForm, Foot, IntegralOptions,
};
use crate::modular::{QExpansion, UpperHalfPoint};
use crate::surd::{cocycle, fixed_point, moebius_apply};
use crate::unit::{automorph, matrix_from_unit, unit_from_matrix};
use crate::word::{enumerate_words, EvenWord, Mat2};
use crate::Error;

/// Outcome of one named check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub suite: String,
    pub check: String,
    pub passed: bool,
    /// Worst observed defect, when the check is numeric.
    pub defect: Option<f64>,
    /// Counterexample description on failure.
    pub counterexample: Option<String>,
}

impl CheckResult {
    fn pass(suite: &str, check: &str, defect: Option<f64>) -> Self {
        CheckResult {
            suite: suite.into(),
            check: check.into(),
            passed: true,
            defect,
            counterexample: None,
        }
    }

    fn fail(suite: &str, check: &str, defect: Option<f64>, dump: String) -> Self {
        CheckResult {
            suite: suite.into(),
            check: check.into(),
            passed: false,
            defect,
            counterexample: Some(dump),
        }
    }
}

/// Tracks a worst case over a batch of samples.
struct Worst {
    defect: f64,
    dump: Option<String>,
}

impl Worst {
    fn new() -> Self {
        Worst { defect: 0.0, dump: None }
    }

    fn observe(&mut self, defect: f64, describe: impl FnOnce() -> String) {
        if defect > self.defect || self.dump.is_none() {
            self.defect = defect;
            self.dump = Some(describe());
        }
    }

    fn into_result(self, suite: &str, check: &str, tol: f64) -> CheckResult {
        if self.defect <= tol {
            CheckResult::pass(suite, check, Some(self.defect))
        } else {
            CheckResult::fail(
                suite,
                check,
                Some(self.defect),
                self.dump.unwrap_or_else(|| "no sample".into()),
            )
        }
    }
}

fn random_word(rng: &mut ChaCha8Rng, max_entry: u64, max_pairs: usize) -> EvenWord {
    let pairs = rng.gen_range(1..=max_pairs);
    let entries: Vec<u64> = (0..2 * pairs).map(|_| rng.gen_range(1..=max_entry)).collect();
    EvenWord::new(entries).expect("generated word is even and positive")
}

/// Exact checks on word algebra: matrix multiplicativity, primitive
/// powers, parser round trips.
pub fn suite_words(seed: u64, budget: usize) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let words = enumerate_words(3, 4);
    let mut ok = true;
    let mut dump = String::new();
    for a in &words {
        for b in words.iter().take(12) {
            let joined = EvenWord::concat([a, b]);
            if joined.gamma() != a.gamma().mul(&b.gamma()) {
                ok = false;
                dump = format!("gamma multiplicativity fails at {a}, {b}");
            }
        }
    }
    out.push(if ok {
        CheckResult::pass("words", "gamma_multiplicative", None)
    } else {
        CheckResult::fail("words", "gamma_multiplicative", None, dump)
    });

    let mut ok = true;
    let mut dump = String::new();
    for w in &words {
        let (_, n) = w.primitive_decomposition().expect("non-empty");
        for k in 1..=3u32 {
            let (_, m) = w.repeat(k).primitive_decomposition().expect("non-empty");
            if m != k * n {
                ok = false;
                dump = format!("power multiplicity fails at {w}^{k}: {m} != {k}*{n}");
            }
        }
    }
    out.push(if ok {
        CheckResult::pass("words", "primitive_power_multiplicity", None)
    } else {
        CheckResult::fail("words", "primitive_power_multiplicity", None, dump)
    });

    let mut ok = true;
    let mut dump = String::new();
    for _ in 0..budget {
        let w = random_word(&mut rng, 5, 4);
        let n = rng.gen_range(0..4u32);
        let text = format!("{w}^{n}");
        let expanded = crate::wordexpr::WordExpr::parse(&text)
            .and_then(|e| e.expand(&Default::default()));
        match expanded {
            Ok(e) if e == w.repeat(n) => {}
            other => {
                ok = false;
                dump = format!("parse/expand of `{text}` gave {other:?}");
            }
        }
    }
    out.push(if ok {
        CheckResult::pass("words", "parse_expand_power", None)
    } else {
        CheckResult::fail("words", "parse_expand_power", None, dump)
    });

    out
}

/// Exact checks on surd arithmetic and stabilizers.
pub fn suite_surds(seed: u64, budget: usize) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    // Fixed points are genuinely fixed, reduced, and have matching words.
    let mut ok = true;
    let mut dump = String::new();
    for _ in 0..budget {
        let w = random_word(&mut rng, 4, 3);
        let g = w.gamma();
        let fp = fixed_point(&g).expect("hyperbolic");
        if moebius_apply(&g, &fp).expect("unimodular") != fp {
            ok = false;
            dump = format!("fixed point of {w} not fixed");
        }
        if !fp.is_reduced() {
            ok = false;
            dump = format!("fixed point of {w} not reduced");
        }
        let m = w.len();
        let cf = fp.cf_expand(2 * m);
        let expected: Vec<_> = w
            .entries()
            .iter()
            .chain(w.entries())
            .map(|&k| num_bigint::BigInt::from(k))
            .collect();
        if cf != expected {
            ok = false;
            dump = format!("cf of fixed point of {w} does not repeat the word");
        }
    }
    out.push(if ok {
        CheckResult::pass("surds", "fixed_point_reduced_periodic", None)
    } else {
        CheckResult::fail("surds", "fixed_point_reduced_periodic", None, dump)
    });

    // gamma_W = gamma_w^{N(W)} exactly.
    let mut ok = true;
    let mut dump = String::new();
    for _ in 0..budget {
        let root = random_word(&mut rng, 3, 2);
        let k = rng.gen_range(1..=3u32);
        let w = root.repeat(k);
        let g = w.gamma();
        let fp = fixed_point(&g).expect("hyperbolic");
        let aut = automorph(&fp).expect("automorph");
        let (_, n) = w.primitive_decomposition().expect("non-empty");
        if aut.gamma.pow(n) != g {
            ok = false;
            dump = format!("gamma_W != gamma_w^N at W = {w}, N = {n}");
        }
    }
    out.push(if ok {
        CheckResult::pass("surds", "automorph_power_identity", None)
    } else {
        CheckResult::fail("surds", "automorph_power_identity", None, dump)
    });

    // Conjugation: gamma_V gamma_W gamma_V^{-1} = automorph(gamma_V w)^{N}.
    let mut ok = true;
    let mut dump = String::new();
    for _ in 0..budget {
        let v = random_word(&mut rng, 3, 2);
        let wword = random_word(&mut rng, 3, 2);
        let w0 = fixed_point(&wword.gamma()).expect("hyperbolic");
        let moved = moebius_apply(&v.gamma(), &w0).expect("unimodular");
        let aut = automorph(&moved).expect("automorph");
        let (_, n) = wword.primitive_decomposition().expect("non-empty");
        let lhs = v.gamma().mul(&wword.gamma()).mul(&v.gamma().inverse().expect("det 1"));
        if lhs != aut.gamma.pow(n) {
            ok = false;
            dump = format!("conjugation identity fails at V = {v}, W = {wword}");
        }
    }
    out.push(if ok {
        CheckResult::pass("surds", "conjugation_identity", None)
    } else {
        CheckResult::fail("surds", "conjugation_identity", None, dump)
    });

    // Cocycle property j(gh, w) = j(g, hw) j(h, w), exactly.
    let mut ok = true;
    let mut dump = String::new();
    for _ in 0..budget {
        let g = random_word(&mut rng, 3, 2).gamma();
        let h = random_word(&mut rng, 3, 2).gamma();
        let w = fixed_point(&random_word(&mut rng, 3, 2).gamma()).expect("hyperbolic");
        let hw = moebius_apply(&h, &w).expect("unimodular");
        let lhs = cocycle(&g.mul(&h), &w);
        let rhs = cocycle(&g, &hw).mul(&cocycle(&h, &w));
        // Compare as exact field elements: same minimal data after clearing.
        let diff = lhs.sub(&rhs);
        if diff.sign() != 0 || !diff.is_zero() {
            ok = false;
            dump = format!("cocycle property fails at g*h on {w}");
        }
    }
    out.push(if ok {
        CheckResult::pass("surds", "cocycle_property", None)
    } else {
        CheckResult::fail("surds", "cocycle_property", None, dump)
    });

    // Unit isomorphism: norm = det, and the matrix round-trips.
    let mut ok = true;
    let mut dump = String::new();
    for _ in 0..budget {
        let word = random_word(&mut rng, 3, 2);
        let w = fixed_point(&word.gamma()).expect("hyperbolic");
        let aut = automorph(&w).expect("automorph");
        for k in 1..=3u32 {
            let gk = aut.gamma.pow(k);
            let u = match unit_from_matrix(&gk, &w) {
                Ok(u) => u,
                Err(e) => {
                    ok = false;
                    dump = format!("unit_from_matrix failed at {word}^{k}: {e}");
                    continue;
                }
            };
            let norm_ok = u.norm().map(|n| n == gk.det()).unwrap_or(false);
            let round = matrix_from_unit(&u, &w.minimal_polynomial())
                .map(|m| m == gk)
                .unwrap_or(false);
            let powers = aut.epsilon.pow(k).map(|p| p == u).unwrap_or(false);
            if !(norm_ok && round && powers) {
                ok = false;
                dump = format!("isomorphism diagram fails at {word}, k = {k}");
            }
        }
        if !aut.epsilon.exceeds_one() {
            ok = false;
            dump = format!("epsilon <= 1 at {word}");
        }
    }
    out.push(if ok {
        CheckResult::pass("surds", "unit_isomorphism_diagram", None)
    } else {
        CheckResult::fail("surds", "unit_isomorphism_diagram", None, dump)
    });

    out
}

fn random_form(rng: &mut ChaCha8Rng) -> EtaForm {
    match rng.gen_range(0..3) {
        0 => {
            let w = fixed_point(&random_word(rng, 3, 2).gamma()).expect("hyperbolic");
            EtaForm::of_surd(&w)
        }
        1 => EtaForm::new(
            Foot::Infinity,
            Foot::Rational(BigRational::new(
                rng.gen_range(-6i64..6).into(),
                rng.gen_range(1i64..4).into(),
            )),
        ),
        _ => EtaForm::new(
            Foot::Rational(BigRational::new(
                rng.gen_range(-6i64..6).into(),
                rng.gen_range(1i64..4).into(),
            )),
            Foot::Surd(fixed_point(&random_word(rng, 3, 2).gamma()).expect("hyperbolic")),
        ),
    }
}

/// Pullback identity of the eta differentials at random triples.
pub fn suite_pullback(seed: u64, budget: usize) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Worst::new();
    for _ in 0..budget {
        let g = match rng.gen_range(0..4) {
            0 => Mat2::from_i64(1, rng.gen_range(-3..=3), 0, 1),
            1 => Mat2::from_i64(0, -1, 1, 0),
            _ => random_word(&mut rng, 3, 2).gamma(),
        };
        let form = random_form(&mut rng);
        let z = UpperHalfPoint::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(0.5..2.5),
        )
        .expect("positive height");
        let r = pullback_residual(&g, &form, &z).expect("finite entries");
        worst.observe(r, || format!("g = {g}, form = {form:?}, z = {z}"));
    }
    vec![worst.into_result("pullback", "eta_pullback_residual", 1e-11)]
}

/// Numeric geodesic length against the closed form `2 log eps_w`.
pub fn suite_closedform(seed: u64, budget: usize) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = QExpansion::one();
    let opts = IntegralOptions::default();
    let mut worst = Worst::new();
    for _ in 0..budget.min(64) {
        let word = random_word(&mut rng, 5, 3);
        let w = fixed_point(&word.gamma()).expect("hyperbolic");
        let form = EtaForm::of_surd(&w);
        let numeric = tilde_integral(&one, &word, &form, BasePoint::Auto, &opts)
            .expect("quadrature")
            .value;
        let (_, n) = word.primitive_decomposition().expect("non-empty");
        let closed = n as f64 * tilde_one_closed_form(&w).expect("automorph");
        let defect = (numeric.re - closed).abs().max(numeric.im.abs());
        worst.observe(defect, || format!("word = {word}, numeric = {numeric}, closed = {closed}"));
    }
    vec![worst.into_result("closedform", "one_tilde_vs_2_log_eps", 1e-9)]
}

/// Segment decomposition sums against direct integrals.
pub fn suite_decompose(seed: u64, budget: usize) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = QExpansion::j();
    let opts = IntegralOptions::direct(1e-9);
    // Blocks kept short so the direct reference stays well within double
    // precision on the concatenated contour.
    let pool = [
        EvenWord::new(vec![1, 1]).expect("even"),
        EvenWord::new(vec![1, 2]).expect("even"),
        EvenWord::new(vec![2, 1]).expect("even"),
    ];
    let mut worst = Worst::new();
    for _ in 0..budget.min(12) {
        let k = rng.gen_range(2..=3usize);
        let words: Vec<EvenWord> =
            (0..k).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
        let parts = decompose_integral(&j, &words, BasePoint::Auto, &opts).expect("segments");
        let sum: Complex64 = parts.iter().map(|p| p.value).sum();
        let full = EvenWord::concat(words.iter());
        let wf = fixed_point(&full.gamma()).expect("hyperbolic");
        // The full-word integral is base-point independent, so the direct
        // reference may use its own best placement.
        let direct = tilde_integral(&j, &full, &EtaForm::of_surd(&wf), BasePoint::Auto, &opts)
            .expect("quadrature")
            .value;
        let defect = (sum - direct).norm();
        worst.observe(defect, || {
            let ws: Vec<String> = words.iter().map(|w| w.to_string()).collect();
            format!("words = {}, sum = {sum}, direct = {direct}", ws.join(" "))
        });
    }
    vec![worst.into_result("decompose", "segment_sum_vs_direct", 4e-9)]
}

/// Base-point independence of the contour integral.
pub fn suite_basepoint(seed: u64, budget: usize) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = QExpansion::j();
    let opts = IntegralOptions::default();
    let mut worst = Worst::new();
    for _ in 0..budget.min(10) {
        // Entries kept small: the off-axis contour pushes its far endpoint
        // deep, and the bound below has to hold for every seed.
        let word = random_word(&mut rng, 2, 2);
        let w = fixed_point(&word.gamma()).expect("hyperbolic");
        let form = EtaForm::of_surd(&w);
        let a = tilde_integral(&j, &word, &form, BasePoint::Auto, &opts).expect("quadrature");
        // A distinct base point off the geodesic, near the symmetric
        // placement so both endpoints keep moderate heights.
        let auto = crate::cycle::auto_base_point(&word).expect("placement");
        let z1 = UpperHalfPoint::new(auto.x(), auto.y() * 1.3).expect("positive");
        let b = tilde_integral(&j, &word, &form, BasePoint::At(z1), &opts).expect("quadrature");
        let defect = (a.value - b.value).norm();
        worst.observe(defect, || format!("word = {word}, auto = {}, moved = {}", a.value, b.value));
    }
    vec![worst.into_result("basepoint", "tilde_f_base_independence", 2e-9)]
}

/// Runs a suite by name; `all` concatenates every suite.
pub fn run_suite(name: &str, seed: u64, budget: usize) -> Result<Vec<CheckResult>, Error> {
    match name {
        "words" => Ok(suite_words(seed, budget)),
        "surds" => Ok(suite_surds(seed, budget)),
        "pullback" => Ok(suite_pullback(seed, budget)),
        "closedform" => Ok(suite_closedform(seed, budget)),
        "decompose" => Ok(suite_decompose(seed, budget)),
        "basepoint" => Ok(suite_basepoint(seed, budget)),
        "all" => {
            let mut out = suite_words(seed, budget);
            out.extend(suite_surds(seed, budget));
            out.extend(suite_pullback(seed, budget));
            out.extend(suite_closedform(seed, budget));
            out.extend(suite_decompose(seed, budget));
            out.extend(suite_basepoint(seed, budget));
            Ok(out)
        }
        other => Err(Error::UnknownSuite(other.to_string())),
    }
}
