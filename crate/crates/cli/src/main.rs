//! `mcycle`: command-line front end for cycle-integral values of modular
//! functions at real quadratic irrationals.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

use modular_cycles::lab::{
    emit, fit_decay_exponent, papcke_surd, run_experiment, theorem_limit, EmitFormat,
    FunctionSpec, TheoremConfig,
};
use modular_cycles::surd::fixed_point;
use modular_cycles::unit::automorph;
use modular_cycles::verify::run_suite;
use modular_cycles::{
    value, value_of_word, CycleIntegralResult, Error, EvenWord, IntegralOptions, QuadraticSurd,
    WordExpr,
};

#[derive(Parser)]
#[command(
    name = "mcycle",
    version,
    about = "Cycle-integral values of modular functions at real quadratic irrationals",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Absolute tolerance for all quadrature (default 1e-9; for the limit
    /// command an explicit flag overrides the config file's tol).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Output format for tabular results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Inspect a word expression: matrix, primitive root, fixed surd, unit.
    Word {
        /// Word expression, e.g. "(1,2,1,2)" or "(1,1)^n (2,2)".
        expr: String,
        /// Exponent bindings, e.g. -b n=3. Repeatable.
        #[arg(short = 'b', long = "bind")]
        bind: Vec<String>,
    },
    /// Compute the value f(w) at a word's fixed surd or a surd literal.
    Eval {
        /// Modular function: one, j, j1, or a coefficient file path.
        #[arg(short = 'f', long = "function", default_value = "j")]
        function: String,
        /// Target: a word expression or a surd literal (P+sqrt(D))/Q.
        target: Option<String>,
        /// Evaluate at (N+sqrt(N^2-4))/2 instead of an explicit target.
        #[arg(long, value_name = "N")]
        papcke: Option<u64>,
        #[arg(short = 'b', long = "bind")]
        bind: Vec<String>,
    },
    /// Run a named verification suite.
    Verify {
        /// One of: words, surds, pullback, closedform, decompose, basepoint, all.
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Number of random samples per check.
        #[arg(long, default_value_t = 32)]
        budget: usize,
    },
    /// Run a limit experiment from a JSON config file and emit the table.
    Limit {
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = std::io::stdout().write_all(e.to_string().as_bytes());
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", first_line(&e.to_string()));
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            let result = match &cli.out {
                Some(path) => std::fs::write(path, &outcome.text).map_err(Error::from),
                None => std::io::stdout().write_all(outcome.text.as_bytes()).map_err(Error::from),
            };
            match result {
                Ok(()) if outcome.failed => {
                    eprintln!("verification failed");
                    ExitCode::from(2)
                }
                Ok(()) => ExitCode::SUCCESS,
                // A closed pipe on the read side is not our failure.
                Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => {
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("{}", first_line(&e.to_string()));
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Buffered command output; nothing reaches stdout until the command has
/// fully succeeded.
struct Outcome {
    text: String,
    /// Set when a verification suite ran to completion but found failures.
    failed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, failed: false }
    }
}

fn first_line(s: &str) -> &str {
    s.lines().next().unwrap_or(s)
}

/// Usage problems exit 1; computation failures exit 2.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::WordSyntax { .. }
        | Error::OddWordLength(_)
        | Error::WordEntryOutOfRange(_)
        | Error::EmptyWord
        | Error::UnboundSymbol(_)
        | Error::InvalidSurd(_)
        | Error::UnknownSuite(_)
        | Error::UnknownFunction(_)
        | Error::Config(_)
        | Error::PapckeRange(_)
        | Error::RotationIndex { .. } => 1,
        _ => 2,
    }
}

fn parse_bindings(pairs: &[String]) -> Result<BTreeMap<String, u64>, Error> {
    let mut out = BTreeMap::new();
    for p in pairs {
        let (name, value) = p
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("binding `{p}` is not of the form sym=int")))?;
        let value: u64 = value
            .parse()
            .map_err(|_| Error::Config(format!("binding `{p}` has a non-integer value")))?;
        out.insert(name.to_string(), value);
    }
    Ok(out)
}

fn expand_word(expr: &str, bind: &[String]) -> Result<EvenWord, Error> {
    let ast = WordExpr::parse(expr)?;
    let bindings = parse_bindings(bind)?;
    ast.expand(&bindings)
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    if let Some(tol) = cli.tol {
        if !(tol > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
    }
    match &cli.cmd {
        Cmd::Word { expr, bind } => cmd_word(expr, bind).map(Outcome::ok),
        Cmd::Eval { function, target, papcke, bind } => {
            cmd_eval(cli, function, target.as_deref(), *papcke, bind).map(Outcome::ok)
        }
        Cmd::Verify { suite, seed, budget } => cmd_verify(suite, *seed, *budget),
        Cmd::Limit { config } => cmd_limit(cli, config).map(Outcome::ok),
    }
}

fn cmd_word(expr: &str, bind: &[String]) -> Result<String, Error> {
    let word = expand_word(expr, bind)?;
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    let gamma = word.gamma();
    let (root, n) = word.primitive_decomposition()?;
    let w = fixed_point(&gamma)?;
    let aut = automorph(&w)?;
    let eps = &aut.epsilon;
    let mut out = String::new();
    out.push_str(&format!("word: {word}\n"));
    out.push_str(&format!("length: {}\n", word.len()));
    out.push_str(&format!("gamma: {gamma}\n"));
    out.push_str(&format!("det: {}\n", gamma.det()));
    out.push_str(&format!("trace: {}\n", gamma.trace()));
    out.push_str(&format!("multiplicity: {n}\n"));
    out.push_str(&format!("root: {root}\n"));
    out.push_str(&format!("surd: {w}\n"));
    out.push_str(&format!("surd_value: {:.15}\n", w.approx()));
    out.push_str(&format!("conjugate: {}\n", w.conjugate()));
    out.push_str(&format!("conjugate_value: {:.15}\n", w.conjugate().approx()));
    out.push_str(&format!("epsilon: {eps}\n"));
    out.push_str(&format!("epsilon_value: {:.15}\n", eps.to_f64()));
    out.push_str(&format!("two_log_epsilon: {:.15}\n", aut.geodesic_length()));
    Ok(out)
}

fn cmd_eval(
    cli: &Cli,
    function: &str,
    target: Option<&str>,
    papcke: Option<u64>,
    bind: &[String],
) -> Result<String, Error> {
    let f = FunctionSpec::parse(function).resolve()?;
    let opts = IntegralOptions::with_tol(cli.tol.unwrap_or(1e-9));
    let result: CycleIntegralResult = match (papcke, target) {
        (Some(n), _) => {
            let w = papcke_surd(n)?;
            value(&f, &w, &opts)?
        }
        (None, Some(text)) => {
            if text.contains("sqrt") {
                let w = QuadraticSurd::from_str(text)?;
                value(&f, &w, &opts)?
            } else {
                let word = expand_word(text, bind)?;
                value_of_word(&f, &word, &opts)?
            }
        }
        (None, None) => {
            return Err(Error::Config("eval needs a target or --papcke N".into()));
        }
    };
    match cli.format {
        Format::Json => Ok(format!("{:#}\n", result.to_json())),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "f_tilde_re",
                "f_tilde_im",
                "one_tilde",
                "value_re",
                "value_im",
                "err_estimate",
                "epsilon_w_log",
                "word",
                "surd",
            ])
            .map_err(Error::from)?;
            w.write_record([
                fmt(result.f_tilde.re),
                fmt(result.f_tilde.im),
                fmt(result.one_tilde),
                fmt(result.value.re),
                fmt(result.value.im),
                fmt(result.quadrature_error_estimate),
                fmt(result.epsilon_w_log),
                result.word.map(|w| w.to_string()).unwrap_or_default(),
                result.surd.to_string(),
            ])
            .map_err(Error::from)?;
            let bytes = w.into_inner().expect("flushed vec");
            Ok(String::from_utf8(bytes).expect("csv is utf-8"))
        }
    }
}

fn fmt(x: f64) -> String {
    modular_cycles::lab::format_float(x)
}

fn cmd_verify(suite: &str, seed: u64, budget: usize) -> Result<Outcome, Error> {
    let results = run_suite(suite, seed, budget)?;
    let mut text = String::new();
    let mut all_passed = true;
    for r in &results {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
        all_passed &= r.passed;
    }
    text.push_str(&format!(
        "{}: {} checks\n",
        if all_passed { "PASS" } else { "FAIL" },
        results.len()
    ));
    Ok(Outcome { text, failed: !all_passed })
}

fn cmd_limit(cli: &Cli, config: &PathBuf) -> Result<String, Error> {
    let text = std::fs::read_to_string(config)?;
    let mut cfg = TheoremConfig::from_json(&text)?;
    if let Some(tol) = cli.tol {
        cfg.tol = tol;
    }
    let f = cfg.function.resolve()?;
    let limit = theorem_limit(&cfg, &f)?;
    let rows = run_experiment(&cfg)?;
    let exponent = fit_decay_exponent(&rows);
    match cli.format {
        Format::Csv => {
            let mut buf = Vec::new();
            emit(&rows, EmitFormat::Csv, &mut buf)?;
            let mut out = format!(
                "# limit_re={} limit_im={} fitted_decay_exponent={}\n",
                fmt(limit.re),
                fmt(limit.im),
                exponent.map(fmt).unwrap_or_else(|| "none".into()),
            );
            out.push_str(&String::from_utf8(buf).expect("csv is utf-8"));
            Ok(out)
        }
        Format::Json => {
            let rows_json = serde_json::to_value(&rows)?;
            let doc = serde_json::json!({
                "limit_re": limit.re,
                "limit_im": limit.im,
                "fitted_decay_exponent": exponent,
                "function": cfg.function.name(),
                "tol": cfg.tol,
                "rows": rows_json,
            });
            Ok(format!("{doc:#}\n"))
        }
    }
}
