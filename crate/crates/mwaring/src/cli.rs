//! Command-line frontend.
//!
//! Exit codes: 0 success, 1 bad input or failed selftest, 2 matrix not
//! decomposed (reason on stdout as JSON), 3 certificate rejected by `verify`.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mwaring_core::diageq::{
    census_assemble, census_partial, constants, count_by_convolution, enumeration_work, DEFAULT_CENSUS_BUDGET,
};
use mwaring_core::waring::{verify, Engine, Options, DEFAULT_BUDGET};
use mwaring_core::{Elem, Error, FieldCtx, Matrix};
use serde::Serialize;

use crate::format::{parse_field, to_json, CensusDoc, CertificateDoc, ConstantsDoc, MatrixDoc};
use crate::selftest::{self, Level};

#[derive(Debug, Parser)]
#[command(name = "mwaring", version, about = "Write square matrices over finite fields as A^k + B^k")]
struct Cli {
    /// Seed for factorization and randomized searches.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Cap for fallback searches and enumerations.
    #[arg(long, global = true)]
    budget: Option<u128>,
    /// Worker threads for census and selftest.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=256))]
    jobs: u64,
    /// Indent width of JSON output; 0 prints one line.
    #[arg(long, global = true, default_value_t = 2)]
    json_indent: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decompose a matrix and print a certificate.
    Decompose {
        /// Matrix JSON: a path, `-` for stdin, or the document itself.
        matrix: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        /// Field for documents without a "field" key.
        #[arg(long)]
        field: Option<String>,
    },
    /// Check a certificate against a matrix.
    Verify {
        matrix: String,
        certificate: String,
        /// Overrides the exponent stored in the certificate.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: Option<u64>,
        #[arg(long)]
        field: Option<String>,
    },
    /// Count solutions of x_1^k + ... + x_n^k = lambda.
    Census {
        #[arg(long)]
        field: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Field element, or `g` for the primitive element.
        #[arg(long, default_value = "1")]
        lambda: String,
    },
    /// Field-size thresholds for given k and n.
    Constants {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Run the oracle suites and print a pass/fail table.
    Selftest {
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Serialize)]
struct NotDecomposedDoc {
    error: &'static str,
    block: usize,
    reason: String,
}

#[derive(Serialize)]
struct VerifiedDoc {
    verified: bool,
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
    indent: usize,
}

impl Io<'_> {
    fn emit<T: Serialize>(&mut self, value: &T) -> Result<()> {
        writeln!(self.stdout, "{}", to_json(value, self.indent))?;
        Ok(())
    }

    fn read_source(&mut self, source: &str) -> Result<String> {
        if source == "-" {
            let mut text = String::new();
            self.stdin.read_to_string(&mut text).context("reading stdin")?;
            Ok(text)
        } else if source.trim_start().starts_with('{') {
            Ok(source.to_string())
        } else {
            std::fs::read_to_string(source).with_context(|| format!("reading {source}"))
        }
    }

    fn read_matrix(&mut self, source: &str, field: Option<&str>) -> Result<Matrix> {
        let mut doc = MatrixDoc::parse(&self.read_source(source)?)?;
        if doc.field.is_empty() {
            doc.field = field.ok_or_else(|| anyhow!("matrix has no \"field\"; pass --field"))?.to_string();
        }
        doc.to_matrix()
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run(
    args: impl IntoIterator<Item = OsString>,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    binary: Option<PathBuf>,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    let mut io = Io { stdin, stdout, indent: cli.json_indent };
    match dispatch(&cli, &mut io, binary) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            1
        }
    }
}

fn dispatch(cli: &Cli, io: &mut Io<'_>, binary: Option<PathBuf>) -> Result<i32> {
    let jobs = cli.jobs as usize;
    match &cli.command {
        Command::Decompose { matrix, k, field } => {
            let z = io.read_matrix(matrix, field.as_deref())?;
            let opts = Options { seed: cli.seed, budget: cli.budget.unwrap_or(DEFAULT_BUDGET) };
            match Engine::new(opts).decompose(&z, *k) {
                Ok(d) => {
                    let verified = verify(&z, &d.a, &d.b, *k)?;
                    io.emit(&CertificateDoc::from_decomposition(&d, verified))?;
                    Ok(if verified { 0 } else { 2 })
                }
                Err(Error::NotDecomposed { block, reason }) => {
                    io.emit(&NotDecomposedDoc { error: "not-decomposed", block, reason })?;
                    Ok(2)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Verify { matrix, certificate, k, field } => {
            let z = io.read_matrix(matrix, field.as_deref())?;
            let cert: CertificateDoc =
                serde_json::from_str(&io.read_source(certificate)?).context("certificate JSON")?;
            let (a, b) = cert.summands()?;
            let verified = matches!(verify(&z, &a, &b, k.unwrap_or(cert.k)), Ok(true));
            io.emit(&VerifiedDoc { verified })?;
            Ok(if verified { 0 } else { 3 })
        }
        Command::Census { field, k, n, lambda } => {
            let ctx = parse_field(field, None)?;
            let lambda = match lambda.as_str() {
                "g" => ctx.generator(),
                text => ctx.parse_elem(text)?,
            };
            let report = run_census(&ctx, *k, *n as usize, lambda, cli.budget.unwrap_or(DEFAULT_CENSUS_BUDGET), jobs)?;
            io.emit(&report)?;
            Ok(0)
        }
        Command::Constants { k, n } => {
            io.emit(&ConstantsDoc::new(*k, *n, &constants(*k, *n)))?;
            Ok(0)
        }
        Command::Selftest { level } => {
            let level = match level {
                LevelArg::Quick => Level::Quick,
                LevelArg::Full => Level::Full,
            };
            let outcomes = selftest::run(level, jobs, binary.as_deref());
            for o in &outcomes {
                writeln!(io.stdout, "{}", o.line())?;
                for d in &o.details {
                    writeln!(io.stdout, "    {d}")?;
                }
            }
            let passed = outcomes.iter().filter(|o| o.passed).count();
            writeln!(io.stdout, "{passed}/{} suites passed", outcomes.len())?;
            Ok(if passed == outcomes.len() { 0 } else { 1 })
        }
    }
}

/// Census with the enumeration split over `jobs` threads by the first value.
fn run_census(ctx: &FieldCtx, k: u64, n: usize, lambda: Elem, budget: u128, jobs: usize) -> Result<CensusDoc> {
    if n == 0 || k == 0 {
        return Err(anyhow!("census needs n >= 1 and k >= 1"));
    }
    let solutions = count_by_convolution(ctx, k, n, lambda, budget)?;
    let partial = match enumeration_work(ctx, k, n) {
        Some(w) if w <= budget => {
            let s = ctx.kth_power_set(k).len();
            let chunk = s.div_ceil(jobs);
            let ranges: Vec<_> = (0..s).step_by(chunk).map(|a| a..(a + chunk).min(s)).collect();
            let parts = selftest::parallel_map(&ranges, jobs, |r| census_partial(ctx, k, n, lambda, r.clone()));
            let merged = parts.into_iter().reduce(|a, b| a.merge(b)).expect("at least one range");
            if merged.solutions != solutions {
                return Err(anyhow!("census enumeration disagrees with convolution"));
            }
            Some(merged)
        }
        _ => None,
    };
    Ok(CensusDoc::new(ctx, &census_assemble(ctx, k, n, lambda, solutions, partial)))
}
