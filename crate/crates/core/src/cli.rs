//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::braid::{close_braid, parse_braid};
use crate::error::{Error, Result};
use crate::export::{Comparison, PageExport};
use crate::homfly::homfly_reduced;
use crate::spectral::{compute_e1, compute_e2, euler_characteristic, expected_euler, truncate_q, Variant};
use crate::verify::{all_pass, run_suite, Budget, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "floer-cube", version, about = "E1/E2 pages of the oriented cube of resolutions of a braid closure")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Run a verification suite instead of a subcommand.
    #[arg(long, value_name = "SUITE")]
    pub verify: Option<String>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute a page and compare its Euler characteristic with HOMFLY-PT.
    Compute(ComputeArgs),
    /// Run a verification suite (skein, dsquared, euler, invariance, umodule, reduction-edge, all).
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Reduced,
    Middle,
    Unreduced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StageArg {
    E1,
    E2,
}

#[derive(Args, Debug, Clone)]
pub struct ComputeArgs {
    /// Braid word: signed generator indices separated by spaces, e.g. "1 -2 1 -2".
    #[arg(long, allow_hyphen_values = true, conflicts_with = "words_file")]
    pub word: Option<String>,
    /// One `strands: word` or `word` per line (strands then comes from --strands).
    #[arg(long)]
    pub words_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub strands: usize,
    #[arg(long, value_enum, default_value_t = VariantArg::Reduced)]
    pub variant: VariantArg,
    /// Edge whose variable the reduced variant cones off.
    #[arg(long, default_value_t = 0)]
    pub reduce_edge: usize,
    /// Starting Alexander window depth below the top.
    #[arg(long)]
    pub window: Option<i64>,
    #[arg(long, value_enum, default_value_t = StageArg::E2)]
    pub stage: StageArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file (default: stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    pub suite: String,
    /// Longest word for the dsquared enumeration.
    #[arg(long, default_value_t = 4)]
    pub max_letters: usize,
    /// Random words for the skein suite.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.jobs {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match (&cli.verify, &cli.command) {
        (Some(s), None) => run_verify(&VerifyArgs { suite: s.clone(), max_letters: 4, samples: 100, seed: 7 }, out),
        (None, Some(Command::Verify(v))) => run_verify(v, out),
        (None, Some(Command::Compute(c))) => run_compute(c, out),
        (Some(_), Some(_)) => Err(Error::Config("--verify cannot be combined with a subcommand".into())),
        (None, None) => Err(Error::Config("nothing to do; see --help".into())),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn variant_of(args: &ComputeArgs) -> Variant {
    match args.variant {
        VariantArg::Reduced => Variant::Reduced { edge: args.reduce_edge },
        VariantArg::Middle => Variant::Middle,
        VariantArg::Unreduced => Variant::Unreduced,
    }
}

/// Compute one word; returns the export and whether the Euler characteristic matched.
pub fn compute_one(text: &str, strands: usize, args: &ComputeArgs) -> Result<PageExport> {
    if strands == 0 {
        return Err(Error::Config("--strands must be at least 1".into()));
    }
    let word = parse_braid(text, strands)?;
    let d = close_braid(&word);
    let variant = variant_of(args);
    let page = match args.stage {
        StageArg::E2 => compute_e2(&d, variant, args.window)?.1,
        StageArg::E1 => {
            let depth = args.window.unwrap_or(((d.crossing_count() + d.strand_count()) as i64 + 1) / 2);
            compute_e1(&d, variant, depth)?.1
        }
    };
    let comparison = if args.stage == StageArg::E2 {
        let oracle = homfly_reduced(&word)?;
        let lo = page.exact_from_i();
        let chi = euler_characteristic(&page)?;
        let (chi, expected) = match variant {
            Variant::Reduced { .. } => (chi, oracle),
            _ => (truncate_q(&chi, lo), expected_euler(&oracle, variant, lo)),
        };
        Some(Comparison { matched: chi == expected, euler: chi, expected })
    } else {
        None
    };
    Ok(PageExport::new(text, strands, &page, comparison))
}

fn parse_words_file(path: &PathBuf, default_strands: usize) -> Result<Vec<(String, usize)>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.starts_with('#')) {
        if line.is_empty() {
            continue;
        }
        match line.split_once(':') {
            Some((b, w)) => {
                let b = b.trim().parse().map_err(|_| Error::MalformedWord(format!("bad strand count in {line:?}")))?;
                out.push((w.trim().to_string(), b));
            }
            None => out.push((line.to_string(), default_strands)),
        }
    }
    Ok(out)
}

fn run_compute(args: &ComputeArgs, out: &mut dyn Write) -> Result<i32> {
    let jobs = match (&args.word, &args.words_file) {
        (Some(w), None) => vec![(w.clone(), args.strands)],
        (None, Some(p)) => parse_words_file(p, args.strands)?,
        _ => return Err(Error::Config("give exactly one of --word and --words-file".into())),
    };
    let mut text = String::new();
    let mut code = EXIT_OK;
    for (i, (w, b)) in jobs.iter().enumerate() {
        let export = compute_one(w, *b, args)?;
        if export.comparison.as_ref().is_some_and(|c| !c.matched) {
            code = EXIT_MISMATCH;
        }
        match args.format {
            Format::Json => {
                text.push_str(&export.to_json()?);
                text.push('\n');
            }
            Format::Csv => {
                let csv = export.to_csv()?;
                // header once
                let body = if i == 0 { csv.as_str() } else { csv.split_once('\n').map_or("", |x| x.1) };
                text.push_str(body);
            }
        }
    }
    match &args.output {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(code)
}

fn run_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let suites = if args.suite == "all" { Suite::ALL.to_vec() } else { vec![args.suite.parse()?] };
    let budget = Budget { samples: args.samples, max_letters: args.max_letters, seed: args.seed };
    let mut reports = Vec::new();
    for s in suites {
        reports.extend(run_suite(s, &budget)?);
    }
    for r in &reports {
        writeln!(out, "{}", serde_json::to_string(r)?)?;
    }
    Ok(if all_pass(&reports) { EXIT_OK } else { EXIT_MISMATCH })
}
