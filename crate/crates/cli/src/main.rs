mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use minfib::universe::DEFAULT_KAPPA;
use minfib::{Error, ShapeKind};

use commands::Options;
use report::{Report, Status};

/// Finite truncated presheaves: fibrations, minimal models and the
/// classifying universe.
///
/// Inputs are presheaf files, morphism files, or `fixture:<name>` for a
/// built-in corpus object. Exit status: 0 pass, 1 checked failure,
/// 2 usage or parse error, 3 boundary-limited.
#[derive(Parser, Debug)]
#[command(name = "minfib", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Truncate inputs to this dimension (for verify-ez, the largest dimension).
    #[arg(long, global = true)]
    truncation: Option<usize>,
    /// Strict bound on fiber sizes for the classifier.
    #[arg(long, global = true, default_value_t = DEFAULT_KAPPA)]
    kappa: usize,
    /// Small-object passes allowed by `factor`.
    #[arg(long, global = true, default_value_t = 8)]
    budget: usize,
    /// Require inputs of this shape kind (simplex, cube, cube_conn).
    #[arg(long, global = true)]
    shape: Option<ShapeKind>,
    /// Directory for output files and a copy of the report.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Parse and check functoriality or naturality.
    Validate { input: String },
    /// Right lifting against open boxes or horns.
    CheckFib { input: String },
    /// Right lifting against boundary inclusions.
    CheckTrivfib { input: String },
    /// Factor a map as anodyne cells followed by a fibration.
    Factor { input: String },
    /// Boundary equivalence of two sections, or the classes in each dimension.
    Bdeq { input: String, sections: Vec<String> },
    /// Search a homotopy inverse.
    Weq { input: String },
    /// Minimal model of a fibrant presheaf.
    MinimalModel { input: String },
    /// Factor a fibration as a trivial fibration and a minimal fibration.
    MinFactor { input: String },
    /// Extend an equivalence along a cofibration (reads j, p1prime, p1, i1, p0, w from a directory).
    Glue { dir: String },
    /// Classify a family.
    Classify { input: String },
    /// Realize the classifier of a family and compare.
    Realize { input: String },
    /// The equivalence subobject of the relative Hom.
    Eq { p: String, q: String },
    /// Extend classifiers and an equivalence (reads p0, j, p1prime and optionally e from a directory).
    Univalence { dir: String },
    /// Exhaustive check of the Eilenberg-Zilber axioms.
    VerifyEz { kind: Option<ShapeKind>, dim: Option<usize> },
    /// Summarize every presheaf and morphism file in a directory.
    Report { dir: PathBuf },
}

fn run(cli: &Cli) -> Result<Report, Error> {
    let opts = Options {
        truncation: cli.truncation,
        kappa: cli.kappa,
        budget: cli.budget,
        shape: cli.shape,
        out: cli.out.clone(),
    };
    match &cli.verb {
        Verb::Validate { input } => commands::validate(input, &opts),
        Verb::CheckFib { input } => commands::check_fib(input, &opts),
        Verb::CheckTrivfib { input } => commands::check_trivfib(input, &opts),
        Verb::Factor { input } => commands::factor(input, &opts),
        Verb::Bdeq { input, sections } => match sections.as_slice() {
            [] => commands::bdeq(input, None, &opts),
            [a, b] => commands::bdeq(input, Some((a, b)), &opts),
            _ => Err(Error::Domain("bdeq takes zero or two section names".into())),
        },
        Verb::Weq { input } => commands::weq(input, &opts),
        Verb::MinimalModel { input } => commands::minimal(input, &opts),
        Verb::MinFactor { input } => commands::min_factor(input, &opts),
        Verb::Glue { dir } => commands::glue(dir, &opts),
        Verb::Classify { input } => commands::classify(input, &opts),
        Verb::Realize { input } => commands::realize_cmd(input, &opts),
        Verb::Eq { p, q } => commands::eq(p, q, &opts),
        Verb::Univalence { dir } => commands::univalence(dir, &opts),
        Verb::VerifyEz { kind, dim } => {
            let kind = kind.or(cli.shape).ok_or_else(|| Error::Domain("verify-ez needs a shape kind".into()))?;
            Ok(commands::verify_ez(kind, dim.or(cli.truncation).unwrap_or(3)))
        }
        Verb::Report { dir } => batch(dir, &opts),
    }
}

fn batch(dir: &PathBuf, opts: &Options) -> Result<Report, Error> {
    let io = |e: std::io::Error| Error::Io { path: dir.display().to_string(), message: e.to_string() };
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()).map_err(io))
        .collect::<Result<_, _>>()?;
    files.retain(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("psh" | "map")));
    files.sort();
    let lines: Vec<(String, Status)> = files.par_iter().map(|p| commands::summarize(p, opts)).collect();
    let mut r = Report::new("report", &[dir.display().to_string()]);
    r.field("files", lines.len());
    for (line, status) in lines {
        r.status = r.status.max(status);
        r.witness(line);
    }
    Ok(r)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(report) => {
            print!("{}", report.render());
            println!("--");
            println!("elapsed: {:.1} ms (not certified)", start.elapsed().as_secs_f64() * 1e3);
            ExitCode::from(report.status as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Status::Usage as u8)
        }
    }
}
