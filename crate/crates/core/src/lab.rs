//! Experiment harness: values along sequences of periodic continued
//! fractions and their predicted limits.
//!
//! A configuration fixes separator words `V_0..V_k`, repeated non-empty
//! words `W_1..W_k` and affine schedules `a_i(n) = c_i n + d_i`. For each
//! `n` the word `V_0 W_1^{a_1(n)} V_1 ... W_k^{a_k(n)} V_k` is built and
//! the value of `f` at its fixed surd is computed; the predicted limit is
//! the schedule-weighted ratio of the per-word cycle integrals.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cycle::{
    tilde_integral, value_of_word, BasePoint, EtaForm, IntegralOptions,
};
use crate::modular::QExpansion;
use crate::surd::fixed_point;
use crate::word::EvenWord;
use crate::wordexpr::WordExpr;
use crate::Error;

/// Affine schedule `a(n) = c n + d` with `c >= 1`, so it diverges.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Schedule {
    pub c: u64,
    #[serde(default)]
    pub d: u64,
}

impl Schedule {
    pub fn at(&self, n: u64) -> u64 {
        self.c * n + self.d
    }
}

/// Which modular function an experiment evaluates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunctionSpec {
    One,
    J,
    J1,
    File(String),
}

impl FunctionSpec {
    pub fn parse(name: &str) -> FunctionSpec {
        match name {
            "1" | "one" => FunctionSpec::One,
            "j" => FunctionSpec::J,
            "j1" => FunctionSpec::J1,
            other => FunctionSpec::File(other.to_string()),
        }
    }

    pub fn resolve(&self) -> Result<QExpansion, Error> {
        match self {
            FunctionSpec::One => Ok(QExpansion::one()),
            FunctionSpec::J => Ok(QExpansion::j()),
            FunctionSpec::J1 => Ok(QExpansion::j1()),
            FunctionSpec::File(path) => {
                let p = Path::new(path);
                if !p.exists() {
                    return Err(Error::UnknownFunction(path.clone()));
                }
                QExpansion::load(p)
            }
        }
    }

    pub fn name(&self) -> &str {
        match self {
            FunctionSpec::One => "one",
            FunctionSpec::J => "j",
            FunctionSpec::J1 => "j1",
            FunctionSpec::File(p) => p,
        }
    }
}

/// A full experiment configuration.
#[derive(Debug, Clone)]
pub struct TheoremConfig {
    /// Separator words `V_0..V_k`; may be empty words.
    pub separators: Vec<EvenWord>,
    /// Repeated words `W_1..W_k`; must be non-empty.
    pub repeated: Vec<EvenWord>,
    pub schedules: Vec<Schedule>,
    pub n_values: Vec<u64>,
    pub function: FunctionSpec,
    pub tol: f64,
}

/// Wire format of the configuration file.
#[derive(Debug, Serialize, Deserialize)]
struct RawConfig {
    v: Vec<String>,
    w: Vec<String>,
    schedules: Vec<Schedule>,
    n_values: Vec<u64>,
    f: String,
    #[serde(default = "default_tol")]
    tol: f64,
}

fn default_tol() -> f64 {
    1e-9
}

impl TheoremConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let raw: RawConfig = serde_json::from_str(text)?;
        let parse_word = |s: &str| -> Result<EvenWord, Error> {
            WordExpr::parse(s)?.expand(&BTreeMap::new())
        };
        let separators = raw.v.iter().map(|s| parse_word(s)).collect::<Result<Vec<_>, _>>()?;
        let repeated = raw.w.iter().map(|s| parse_word(s)).collect::<Result<Vec<_>, _>>()?;
        let cfg = TheoremConfig {
            separators,
            repeated,
            schedules: raw.schedules,
            n_values: raw.n_values,
            function: FunctionSpec::parse(&raw.f),
            tol: raw.tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let k = self.repeated.len();
        if k == 0 {
            return Err(Error::Config("at least one repeated word W_i is required".into()));
        }
        if self.separators.len() != k + 1 {
            return Err(Error::Config(format!(
                "expected {} separator words (k+1), got {}",
                k + 1,
                self.separators.len()
            )));
        }
        if self.schedules.len() != k {
            return Err(Error::Config(format!(
                "expected {} schedules, got {}",
                k,
                self.schedules.len()
            )));
        }
        if self.repeated.iter().any(|w| w.is_empty()) {
            return Err(Error::Config("repeated words W_i must be non-empty".into()));
        }
        if self.schedules.iter().any(|s| s.c < 1) {
            return Err(Error::Config("schedules must diverge: c >= 1".into()));
        }
        if self.n_values.is_empty() {
            return Err(Error::Config("n_values must be non-empty".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("tol must be positive".into()));
        }
        Ok(())
    }

    /// The word `V_0 W_1^{a_1(n)} V_1 ... W_k^{a_k(n)} V_k`.
    pub fn word_at(&self, n: u64) -> Result<EvenWord, Error> {
        let mut parts: Vec<EvenWord> = Vec::new();
        parts.push(self.separators[0].clone());
        for (i, w) in self.repeated.iter().enumerate() {
            let a = self.schedules[i].at(n);
            let a32 = u32::try_from(a)
                .map_err(|_| Error::Config(format!("schedule value {a} too large")))?;
            parts.push(w.repeat(a32));
            parts.push(self.separators[i + 1].clone());
        }
        let word = EvenWord::concat(parts.iter());
        if word.is_empty() {
            return Err(Error::EmptyExperimentWord { n });
        }
        Ok(word)
    }
}

/// One computed row of an experiment.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentRow {
    pub n: u64,
    pub word_len: usize,
    pub value_re: f64,
    pub value_im: f64,
    pub limit_re: f64,
    pub limit_im: f64,
    pub deviation: f64,
    pub one_tilde: f64,
    pub err_estimate: f64,
    pub runtime_ms: f64,
}

/// The predicted limit: the schedule-weighted ratio
/// `sum a_i N(W_i) f~(w_i) / sum a_i N(W_i) 1~(w_i)`, where the weights are
/// the normalized leading coefficients of the schedules.
pub fn theorem_limit(cfg: &TheoremConfig, f: &QExpansion) -> Result<Complex64, Error> {
    cfg.validate()?;
    let opts = IntegralOptions::with_tol(cfg.tol);
    let one = QExpansion::one();
    let total: f64 = cfg.schedules.iter().map(|s| s.c as f64).sum();
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (i, w) in cfg.repeated.iter().enumerate() {
        let weight = cfg.schedules[i].c as f64 / total;
        let wi = fixed_point(&w.gamma())?;
        let form = EtaForm::of_surd(&wi);
        // The word-level integral is N(W_i) times the primitive one, which
        // is exactly the factor the limit formula carries.
        let ft = tilde_integral(f, w, &form, BasePoint::Auto, &opts)?;
        let ot = tilde_integral(&one, w, &form, BasePoint::Auto, &opts)?;
        num += ft.value * weight;
        den += ot.value.re * weight;
    }
    Ok(num / den)
}

/// Guard on the total entry count of an experiment word.
pub const WORD_GUARD: usize = 10_000;

/// Runs the experiment: one row per `n`, in order.
pub fn run_experiment(cfg: &TheoremConfig) -> Result<Vec<ExperimentRow>, Error> {
    cfg.validate()?;
    let f = cfg.function.resolve()?;
    let limit = theorem_limit(cfg, &f)?;
    let opts = IntegralOptions::with_tol(cfg.tol);
    let mut rows = Vec::with_capacity(cfg.n_values.len());
    for &n in &cfg.n_values {
        let word = cfg.word_at(n)?;
        if word.len() > WORD_GUARD {
            return Err(Error::GuardExceeded { entries: word.len(), limit: WORD_GUARD });
        }
        let start = Instant::now();
        let result = value_of_word(&f, &word, &opts)?;
        let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        rows.push(ExperimentRow {
            n,
            word_len: word.len(),
            value_re: result.value.re,
            value_im: result.value.im,
            limit_re: limit.re,
            limit_im: limit.im,
            deviation: (result.value - limit).norm(),
            one_tilde: result.one_tilde,
            err_estimate: result.quadrature_error_estimate,
            runtime_ms,
        });
    }
    Ok(rows)
}

/// Values `f(w_n)` for `w_n = (n + sqrt(n^2-4))/2`, the sequence whose
/// values of `j1` tend to zero. Requires `n >= 3` so the discriminant is a
/// positive nonsquare.
pub fn papcke_sequence(
    f: &QExpansion,
    n_values: &[u64],
    tol: f64,
) -> Result<Vec<(u64, Complex64)>, Error> {
    let opts = IntegralOptions::with_tol(tol);
    let mut out = Vec::with_capacity(n_values.len());
    for &n in n_values {
        out.push((n, papcke_value(f, n, &opts)?));
    }
    Ok(out)
}

/// The surd `(n + sqrt(n^2-4))/2` of the limit sequence.
pub fn papcke_surd(n: u64) -> Result<crate::surd::QuadraticSurd, Error> {
    if n < 3 {
        return Err(Error::PapckeRange(n));
    }
    let n = n as i64;
    crate::surd::QuadraticSurd::new(n, 2, n * n - 4)
}

fn papcke_value(f: &QExpansion, n: u64, opts: &IntegralOptions) -> Result<Complex64, Error> {
    let w = papcke_surd(n)?;
    Ok(crate::cycle::value(f, &w, opts)?.value)
}

/// Least-squares exponent `p` of a fitted decay `deviation ~ C n^{-p}`,
/// over rows with `n >= 4`. `None` when fewer than two usable rows.
pub fn fit_decay_exponent(rows: &[ExperimentRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n >= 4 && r.deviation > 0.0)
        .map(|r| ((r.n as f64).ln(), r.deviation.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Some(-slope)
}

/// Output format for emitted tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
}

/// Writes rows in a deterministic column order. CSV always carries a
/// header row; JSON is an array that parses back to identical rows.
pub fn emit<W: Write>(rows: &[ExperimentRow], format: EmitFormat, out: W) -> Result<(), Error> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    match format {
        EmitFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "n",
                "word_len",
                "value_re",
                "value_im",
                "limit_re",
                "limit_im",
                "deviation",
                "one_tilde",
                "err_estimate",
                "runtime_ms",
            ])?;
            for r in rows {
                w.write_record([
                    r.n.to_string(),
                    r.word_len.to_string(),
                    format_float(r.value_re),
                    format_float(r.value_im),
                    format_float(r.limit_re),
                    format_float(r.limit_im),
                    format_float(r.deviation),
                    format_float(r.one_tilde),
                    format_float(r.err_estimate),
                    format!("{:.3}", r.runtime_ms),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
        EmitFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
            Ok(())
        }
    }
}

/// Locale-independent float formatting with full round-trip precision.
pub fn format_float(x: f64) -> String {
    format!("{:.17e}", x)
}
