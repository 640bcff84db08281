//! Acceptance suite: every release criterion as one test, each printing a
//! pass/fail line with its runtime (visible under `--nocapture`).
//!
//! Expected values marked as derived were computed by independent routes
//! (closed forms, a second Eisenstein-series construction of j, a second
//! quadrature method, varied contour decompositions) and then frozen.

use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use modular_cycles::lab::{papcke_sequence, run_experiment, FunctionSpec, Schedule, TheoremConfig};
use modular_cycles::surd::fixed_point;
use modular_cycles::unit::{automorph, matrix_from_unit, unit_from_matrix};
use modular_cycles::word::enumerate_words;
use modular_cycles::{
    cycle, decompose_integral, pullback_residual, tilde_integral, value_of_word, BasePoint,
    EtaForm, EvenWord, IntegralOptions, QExpansion, UpperHalfPoint,
};

fn word(entries: &[u64]) -> EvenWord {
    EvenWord::new(entries.to_vec()).unwrap()
}

fn report(criterion: &str, started: Instant, ok: bool, detail: String) {
    let secs = started.elapsed().as_secs_f64();
    println!(
        "{} {criterion} [{secs:.2}s] {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "{criterion}: {detail}");
}

fn random_word(rng: &mut ChaCha8Rng, max_entry: u64, max_pairs: usize) -> EvenWord {
    let pairs = rng.gen_range(1..=max_pairs);
    EvenWord::new((0..2 * pairs).map(|_| rng.gen_range(1..=max_entry)).collect()).unwrap()
}

/// Criterion 1: the value of the constant function is 1 to 1e-10 on twenty
/// random words with entries <= 5 and length <= 8.
#[test]
fn criterion_01_constant_function_value() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let one = QExpansion::one();
    let opts = IntegralOptions::default();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let w = random_word(&mut rng, 5, 4);
        let r = value_of_word(&one, &w, &opts).unwrap();
        worst = worst.max((r.value - Complex64::new(1.0, 0.0)).norm());
    }
    report(
        "criterion 01: value(1, w) = 1",
        started,
        worst <= 1e-10,
        format!("worst defect {worst:.3e} over 20 words (tol 1e-10)"),
    );
}

/// Criterion 2: numeric geodesic length against 2 log(eps_w), exhaustive
/// over words with entries <= 4 and length <= 6.
#[test]
fn criterion_02_geodesic_length_closed_form() {
    let started = Instant::now();
    let one = QExpansion::one();
    let opts = IntegralOptions::default();
    let mut worst: f64 = 0.0;
    let mut worst_word = String::new();
    let words = enumerate_words(4, 6);
    for w in &words {
        let g = w.gamma();
        let wf = fixed_point(&g).unwrap();
        let numeric = tilde_integral(&one, w, &EtaForm::of_surd(&wf), BasePoint::Auto, &opts)
            .unwrap()
            .value;
        let (_, n) = w.primitive_decomposition().unwrap();
        // The closed form through the unit group; the word contour covers
        // the primitive geodesic N(W) times.
        let closed = 2.0 * unit_from_matrix(&g, &wf).unwrap().ln();
        let defect = ((numeric.re - closed) / n as f64).abs().max(numeric.im.abs());
        if defect > worst {
            worst = defect;
            worst_word = w.to_string();
        }
    }
    report(
        "criterion 02: one-tilde equals 2 log eps",
        started,
        worst <= 1e-9,
        format!(
            "worst defect {worst:.3e} at {worst_word} over {} words (tol 1e-9)",
            words.len()
        ),
    );
}

/// Criterion 3: exact matrix identities. Multiplicativity over all splits,
/// the primitive-power identity, and the conjugation identity.
#[test]
fn criterion_03_exact_matrix_identities() {
    let started = Instant::now();
    let words6 = enumerate_words(3, 6);
    let mut checked = 0usize;

    for w in &words6 {
        // gamma is multiplicative across every even split point.
        let entries = w.entries();
        for cut in (2..w.len()).step_by(2) {
            let left = word(&entries[..cut]);
            let right = word(&entries[cut..]);
            assert_eq!(
                w.gamma(),
                left.gamma().mul(&right.gamma()),
                "multiplicativity at {w} cut {cut}"
            );
            checked += 1;
        }
        // gamma_W = gamma_w^{N(W)} exactly.
        let g = w.gamma();
        let aut = automorph(&fixed_point(&g).unwrap()).unwrap();
        let (_, n) = w.primitive_decomposition().unwrap();
        assert_eq!(aut.gamma.pow(n), g, "automorph power at {w}");
        checked += 1;
    }

    // Conjugation: gamma_V gamma_W gamma_V^{-1} is the automorph power of
    // the moved surd.
    let words4 = enumerate_words(3, 4);
    for v in &words4 {
        let gv = v.gamma();
        let gv_inv = gv.inverse().unwrap();
        for w in &words6 {
            let w0 = fixed_point(&w.gamma()).unwrap();
            let moved = modular_cycles::surd::moebius_apply(&gv, &w0).unwrap();
            let aut = automorph(&moved).unwrap();
            let (_, n) = w.primitive_decomposition().unwrap();
            assert_eq!(
                gv.mul(&w.gamma()).mul(&gv_inv),
                aut.gamma.pow(n),
                "conjugation at V = {v}, W = {w}"
            );
            checked += 1;
        }
    }
    report(
        "criterion 03: exact matrix identities",
        started,
        true,
        format!("{checked} exact identities verified"),
    );
}

/// Criterion 4: pullback residuals of eta under unimodular matrices stay
/// below 1e-11 on 1000 random triples.
#[test]
fn criterion_04_eta_pullback() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let g = match rng.gen_range(0..5) {
            0 => modular_cycles::Mat2::from_i64(1, rng.gen_range(-4..=4), 0, 1),
            1 => modular_cycles::Mat2::from_i64(0, -1, 1, 0),
            _ => random_word(&mut rng, 3, 2).gamma(),
        };
        let form = match rng.gen_range(0..3) {
            0 => EtaForm::new(
                modular_cycles::Foot::Infinity,
                modular_cycles::Foot::Rational(num_rational::BigRational::new(
                    rng.gen_range(-8i64..8).into(),
                    rng.gen_range(1i64..5).into(),
                )),
            ),
            _ => EtaForm::of_surd(&fixed_point(&random_word(&mut rng, 3, 2).gamma()).unwrap()),
        };
        let z = UpperHalfPoint::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.4..2.5)).unwrap();
        worst = worst.max(pullback_residual(&g, &form, &z).unwrap());
    }
    report(
        "criterion 04: eta pullback residual",
        started,
        worst <= 1e-11,
        format!("worst residual {worst:.3e} over 1000 triples (tol 1e-11)"),
    );
}

/// Criterion 5: contour multiplicativity: the integral over the contour of
/// W^k is k times the integral over the contour of W, for f in {1, j}.
#[test]
fn criterion_05_contour_multiplicativity() {
    let started = Instant::now();
    let opts = IntegralOptions::direct(1e-9);
    let words: Vec<EvenWord> = [
        &[1u64, 1][..],
        &[1, 2],
        &[2, 1],
        &[2, 2],
        &[1, 1, 1, 1],
        &[1, 1, 1, 2],
        &[1, 1, 2, 1],
        &[2, 1, 1, 1],
        &[1, 2, 1, 2],
        &[2, 2, 1, 1],
    ]
    .iter()
    .map(|e| word(e))
    .collect();
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    for f in [QExpansion::one(), QExpansion::j()] {
        for w in &words {
            let wf = fixed_point(&w.gamma()).unwrap();
            let form = EtaForm::of_surd(&wf);
            let base = tilde_integral(&f, w, &form, BasePoint::Auto, &opts).unwrap().value;
            for k in 1..=3u32 {
                let vk = tilde_integral(&f, &w.repeat(k), &form, BasePoint::Auto, &opts)
                    .unwrap()
                    .value;
                let defect = (vk - base * k as f64).norm();
                let budget = (k as f64 + 1.0) * 1e-9;
                let scaled = defect / budget;
                if scaled > worst {
                    worst = scaled;
                    worst_at = format!("{} at {w}^{k}", f.label());
                }
            }
        }
    }
    report(
        "criterion 05: contour multiplicativity",
        started,
        worst <= 1.0,
        format!("worst defect {worst:.3} of budget (k+1)*1e-9, at {worst_at}"),
    );
}

/// Criterion 6: segment decomposition against the direct integral for ten
/// random 2- and 3-block splits with f = j.
#[test]
fn criterion_06_integral_decomposition() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let j = QExpansion::j();
    let opts = IntegralOptions::direct(1e-9);
    let pool = [word(&[1, 1]), word(&[1, 2]), word(&[2, 1]), word(&[2, 2])];
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    for _ in 0..10 {
        let k = rng.gen_range(2..=3usize);
        let blocks: Vec<EvenWord> =
            (0..k).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
        let parts = decompose_integral(&j, &blocks, BasePoint::Auto, &opts).unwrap();
        let sum: Complex64 = parts.iter().map(|p| p.value).sum();
        let full = EvenWord::concat(blocks.iter());
        let wf = fixed_point(&full.gamma()).unwrap();
        let direct = tilde_integral(&j, &full, &EtaForm::of_surd(&wf), BasePoint::Auto, &opts)
            .unwrap()
            .value;
        let scaled = (sum - direct).norm() / ((k as f64 + 1.0) * 1e-9);
        if scaled > worst {
            worst = scaled;
            worst_at = blocks.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" ");
        }
    }
    report(
        "criterion 06: integral decomposition",
        started,
        worst <= 1.0,
        format!("worst defect {worst:.3} of budget (k+1)*1e-9, blocks {worst_at}"),
    );
}

/// Criterion 7: the proximity bound 2^{2-n}/y0^2 holds pointwise for surds
/// sharing n continued-fraction terms, and |v - w| <= 2^{2-n}.
#[test]
fn criterion_07_proximity_bound() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0usize;
    for n in [4usize, 8, 12] {
        for _ in 0..4 {
            let prefix: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
            let mut a = prefix.clone();
            a.extend_from_slice(&[1, 1]);
            let mut b = prefix.clone();
            b.extend_from_slice(&[3, 2]);
            let v = fixed_point(&word(&a).gamma()).unwrap();
            let w = fixed_point(&word(&b).gamma()).unwrap();
            assert!(
                (v.approx() - w.approx()).abs() <= 2f64.powi(2 - n as i32),
                "surd separation at n = {n}"
            );
            for &y0 in &[0.5, 1.0] {
                let bound = modular_cycles::proximity_bound(&v, &w, n, y0).unwrap();
                assert!((bound - 2f64.powi(2 - n as i32) / (y0 * y0)).abs() < 1e-15);
                let vf = v.approx();
                let wf = w.approx();
                for _ in 0..100 {
                    let z = Complex64::new(
                        rng.gen_range(-4.0..4.0),
                        y0 + rng.gen_range(0.0..3.0f64),
                    );
                    let lhs = (1.0 / (z - vf) - 1.0 / (z - wf)).norm();
                    assert!(
                        lhs <= bound,
                        "pointwise bound fails at n = {n}, y0 = {y0}, z = {z}"
                    );
                    checked += 1;
                }
            }
        }
    }
    report(
        "criterion 07: proximity bound",
        started,
        true,
        format!("{checked} pointwise checks at n in {{4, 8, 12}}"),
    );
}

/// Criterion 8: the stabilizer-to-unit isomorphism round-trips and matches
/// determinant with norm, over automorph powers of ten surds.
#[test]
fn criterion_08_unit_isomorphism() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0usize;
    for _ in 0..10 {
        let w = fixed_point(&random_word(&mut rng, 4, 3).gamma()).unwrap();
        let mp = w.minimal_polynomial();
        let aut = automorph(&w).unwrap();
        for k in 1..=3u32 {
            let gk = aut.gamma.pow(k);
            let u = unit_from_matrix(&gk, &w).unwrap();
            assert_eq!(u.norm().unwrap(), gk.det(), "norm vs det");
            assert_eq!(matrix_from_unit(&u, &mp).unwrap(), gk, "round trip");
            assert_eq!(u, aut.epsilon.pow(k).unwrap(), "unit power");
            checked += 3;
        }
    }
    report(
        "criterion 08: unit isomorphism",
        started,
        true,
        format!("{checked} exact identities over 10 surds"),
    );
}

fn remark2_config(n_values: Vec<u64>) -> TheoremConfig {
    TheoremConfig {
        separators: vec![EvenWord::empty(), EvenWord::empty(), EvenWord::empty()],
        repeated: vec![word(&[1, 1]), word(&[2, 2])],
        schedules: vec![Schedule { c: 1, d: 0 }, Schedule { c: 1, d: 0 }],
        n_values,
        function: FunctionSpec::J,
        tol: 1e-9,
    }
}

/// Criterion 9, trend part: deviations from the predicted limit decrease
/// strictly along n in {2,4,8,12}, with frozen regression bounds derived
/// from the pipeline itself (the decay follows C/n with C ~ 0.46).
#[test]
fn criterion_09_limit_experiment_trend() {
    let started = Instant::now();
    let rows = run_experiment(&remark2_config(vec![2, 4, 8, 12])).unwrap();
    let dev: Vec<f64> = rows.iter().map(|r| r.deviation).collect();
    let decreasing = dev.windows(2).all(|p| p[1] < p[0]);
    // Frozen regression bounds from the derivation runs.
    let frozen = dev[0] > 0.20
        && dev[0] < 0.25
        && dev[3] > 0.034
        && dev[3] < 0.043
        && dev[3] / dev[0] < 0.18;
    report(
        "criterion 09: limit-experiment trend",
        started,
        decreasing && frozen,
        format!("deviations {dev:?}"),
    );
}

/// Criterion 9, ratio part, as stated: deviation(12) <= 0.1 deviation(2).
///
/// The experiment converges at first order like C/n with the same C at
/// both ends, so the true ratio is 2/12 = 0.167; a 0.1 target would need
/// faster-than-1/n decay, which this configuration does not have. The
/// check is kept as stated and is expected to fail; the measured ratio is
/// reported alongside.
#[test]
fn criterion_09_deviation_ratio_as_stated() {
    let started = Instant::now();
    let rows = run_experiment(&remark2_config(vec![2, 12])).unwrap();
    let ratio = rows[1].deviation / rows[0].deviation;
    report(
        "criterion 09 (ratio clause): deviation(12) <= 0.1 deviation(2)",
        started,
        ratio <= 0.1,
        format!(
            "measured ratio {ratio:.4}; first-order decay C/n gives 2/12 = 0.167, \
             so the 0.1 target is unattainable for this configuration"
        ),
    );
}

/// Criterion 10: |j1| at the limit-sequence surds decreases along
/// n = 5, 10, 30, with frozen regression values from the cross-validated
/// engine (two quadrature methods, varied split heights agree to ~1e-9).
#[test]
fn criterion_10_limit_sequence_values() {
    let started = Instant::now();
    let j1 = QExpansion::j1();
    let vals = papcke_sequence(&j1, &[5, 10, 30], 1e-9).unwrap();
    let mags: Vec<f64> = vals.iter().map(|(_, v)| v.norm()).collect();
    let ordered = mags[2] < mags[1] && mags[1] < mags[0];
    let frozen = (vals[0].1.re - -30.753862728).abs() < 1e-6
        && (vals[1].1.re - -22.235963196).abs() < 1e-6
        && (vals[2].1.re - -14.962111479).abs() < 1e-6;
    report(
        "criterion 10: limit-sequence values decrease",
        started,
        ordered && frozen,
        format!("|j1| at n = 5, 10, 30: {mags:?}"),
    );
}

/// Criterion 11: two distinct base points give the same contour integral
/// for f = j within 2e-9, over ten words.
#[test]
fn criterion_11_base_point_independence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let j = QExpansion::j();
    let opts = IntegralOptions::default();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let w = random_word(&mut rng, 3, 2);
        let wf = fixed_point(&w.gamma()).unwrap();
        let form = EtaForm::of_surd(&wf);
        let a = tilde_integral(&j, &w, &form, BasePoint::Auto, &opts).unwrap();
        // A second base point off the geodesic near the same height.
        let auto = cycle::auto_base_point(&w).unwrap();
        let z1 = UpperHalfPoint::new(auto.x(), auto.y() * 1.3).unwrap();
        let b = tilde_integral(&j, &w, &form, BasePoint::At(z1), &opts).unwrap();
        worst = worst.max((a.value - b.value).norm());
    }
    report(
        "criterion 11: base-point independence",
        started,
        worst <= 2e-9,
        format!("worst disagreement {worst:.3e} over 10 words (tol 2e-9)"),
    );
}

// ---------------------------------------------------------------------------
// Independent series oracle for criterion 12: j built through E6 and
// Delta = (E4^3 - E6^2)/1728, with its own small series arithmetic.
// ---------------------------------------------------------------------------

fn oracle_sigma(n: u64, k: u32) -> BigInt {
    let mut out = BigInt::zero();
    for d in 1..=n {
        if n % d == 0 {
            out += BigInt::from(d).pow(k);
        }
    }
    out
}

fn oracle_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let len = a.len();
    let mut out = vec![BigInt::zero(); len];
    for i in 0..len {
        for j in 0..len - i {
            out[i + j] += &a[i] * &b[j];
        }
    }
    out
}

/// j-coefficients `c_{-1}..c_{m}` via `E4^3 / ((E4^3 - E6^2)/1728)`,
/// dividing power series by long division.
fn oracle_j_coefficients(m: usize) -> Vec<BigInt> {
    // One guard term: the divisor's top coefficient needs E4^3 one order
    // beyond the requested truncation.
    let len = m + 3;
    let mut e4 = vec![BigInt::zero(); len];
    let mut e6 = vec![BigInt::zero(); len];
    e4[0] = BigInt::one();
    e6[0] = BigInt::one();
    for n in 1..len {
        e4[n] = BigInt::from(240) * oracle_sigma(n as u64, 3);
        e6[n] = BigInt::from(-504) * oracle_sigma(n as u64, 5);
    }
    let e4_3 = oracle_mul(&oracle_mul(&e4, &e4), &e4);
    let e6_2 = oracle_mul(&e6, &e6);
    // Delta/q has coefficients ((E4^3 - E6^2)/1728)[n+1].
    let mut delta = vec![BigInt::zero(); len];
    for n in 0..len - 1 {
        let num = &e4_3[n + 1] - &e6_2[n + 1];
        let (q, r) = num_integer::Integer::div_rem(&num, &BigInt::from(1728));
        assert!(r.is_zero(), "1728 divides E4^3 - E6^2 coefficient {n}");
        delta[n] = q;
    }
    assert!(delta[0].is_one());
    // Long division of E4^3 by Delta/q.
    let mut rem = e4_3;
    let mut out = Vec::with_capacity(m + 2);
    for n in 0..m + 2 {
        let c = rem[n].clone();
        for k in 0..len - n {
            let t = &c * &delta[k];
            rem[n + k] -= t;
        }
        out.push(c);
    }
    out
}

fn oracle_eval(coeffs: &[BigInt], z: Complex64) -> Complex64 {
    // Direct sum c_{-1} q^{-1} + c_0 + ..., no reduction: callers pass
    // points already inside the fundamental domain.
    let q = (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * z).exp();
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        let cf = modular_cycles::field::bigint_to_f64(c);
        acc = acc * q + cf;
    }
    acc / q
}

/// Criterion 12: the evaluator is modular-invariant to 1e-9 on 100 sampled
/// pairs, and matches the classical special values, cross-checked by the
/// independent high-truncation oracle.
#[test]
fn criterion_12_evaluator_invariance_and_special_values() {
    let started = Instant::now();
    let j = QExpansion::j();

    // The two series constructions agree exactly, coefficient by
    // coefficient, at the default truncation.
    let ours = modular_cycles::modular::j_coefficients(QExpansion::DEFAULT_TRUNCATION);
    let oracle = oracle_j_coefficients(QExpansion::DEFAULT_TRUNCATION);
    assert_eq!(ours, oracle, "the two j-series constructions disagree");

    // Special values against the oracle at high truncation.
    let oracle60 = oracle_j_coefficients(60);
    let i = UpperHalfPoint::new(0.0, 1.0).unwrap();
    let corner = UpperHalfPoint::new(0.5, 3f64.sqrt() / 2.0).unwrap();
    let ji = j.eval(&i).unwrap();
    let jc = j.eval(&corner).unwrap();
    assert!((ji - Complex64::new(1728.0, 0.0)).norm() <= 1e-9, "j(i) = {ji}");
    assert!(jc.norm() <= 1e-9, "j at the corner = {jc}");
    assert!((oracle_eval(&oracle60, i.to_complex()) - ji).norm() <= 1e-9);
    assert!((oracle_eval(&oracle60, corner.to_complex()) - jc).norm() <= 1e-9);

    // Invariance on 100 sampled pairs. Points are drawn as translates of
    // fundamental-domain points so that both z and gz sit at heights
    // >= 0.05 where the absolute 1e-9 claim is meaningful in doubles.
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 100 {
        let zeta = UpperHalfPoint::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.87..1.5)).unwrap();
        let g0 = random_word(&mut rng, 3, 2).gamma();
        let g = random_word(&mut rng, 3, 2).gamma();
        let z = zeta.moebius(&g0).unwrap();
        let gz = z.moebius(&g).unwrap();
        if z.y() < 0.05 || gz.y() < 0.05 {
            continue;
        }
        count += 1;
        worst = worst.max((j.eval(&z).unwrap() - j.eval(&gz).unwrap()).norm());
    }
    report(
        "criterion 12: evaluator invariance and special values",
        started,
        worst <= 1e-9,
        format!("worst invariance defect {worst:.3e} over 100 pairs (tol 1e-9)"),
    );
}
