//! `schatten-perturb`: verify, bound, construct and experiment subcommands.
//!
//! Exit status: 0 on success, 1 when a bound or ordering check fails, 2 on
//! usage, parse or shape errors. Machine-readable output goes to stdout and
//! diagnostics to stderr.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{bound_report, BoundReport, PerturbationInstance};
use crate::constructions::{
    decaying_noise, minimax_pair, tightness_instance, write_instance, write_metadata, NoiseSpectrum, TightnessParams,
};
use crate::error::{Error, Result};
use crate::experiment::{emit_csv, ordering_checks, parse_grid, parse_switch, run_sweep, ExperimentConfig, Study};
use crate::matrix::io::{parse_metadata, read_matrix, save_matrix, Metadata};
use crate::matrix::{Matrix, RngSeed};
use crate::norms::SchattenIndex;
use crate::verify::{self, Fault, Profile, Scope, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "schatten-perturb",
    version,
    about = "Schatten-q perturbation bounds for truncated SVD"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the randomized theorem and lemma suites.
    Verify(VerifyArgs),
    /// Evaluate every bound on B = A + Z read from CSV files.
    Bound(BoundArgs),
    /// Write an adversarial instance to a directory.
    Construct(ConstructArgs),
    /// Run a Monte Carlo sweep and write its averages as CSV.
    Experiment(ExperimentArgs),
}

fn parse_q(s: &str) -> std::result::Result<SchattenIndex, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value = "all", value_parser = |s: &str| s.parse::<Scope>().map_err(|e| e.to_string()))]
    scope: Scope,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "ci", value_parser = |s: &str| s.parse::<Profile>().map_err(|e| e.to_string()))]
    profile: Profile,
    /// Test hook: deliberately break a constant.
    #[arg(long, hide = true, value_parser = |s: &str| s.parse::<Fault>().map_err(|e| e.to_string()))]
    inject_fault: Option<Fault>,
}

#[derive(Args, Debug)]
struct BoundArgs {
    /// CSV file holding the rank-r truth A.
    #[arg(long = "matrix-a", visible_alias = "a")]
    matrix_a: PathBuf,
    /// CSV file holding the perturbation Z.
    #[arg(long = "matrix-z", visible_alias = "z")]
    matrix_z: PathBuf,
    #[arg(long)]
    r: usize,
    /// Comma-separated exponents, each a number >= 1 or `inf`.
    #[arg(long, default_value = "2", value_delimiter = ',', value_parser = parse_q)]
    q: Vec<SchattenIndex>,
    /// Label for the first CSV column.
    #[arg(long, default_value = "instance")]
    id: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConstructKind {
    Tightness,
    Minimax,
    Example1,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(value_enum)]
    kind: ConstructKind,
    #[arg(long, default_value_t = 1)]
    r: usize,
    #[arg(long, default_value = "2", value_parser = parse_q)]
    q: SchattenIndex,
    /// Tightness perturbation size.
    #[arg(long)]
    eta: Option<f64>,
    /// Minimax norm budget.
    #[arg(long)]
    xi: Option<f64>,
    /// Rows; defaults to 2r+1 for tightness, 2r for minimax, 100 for example1.
    #[arg(long)]
    m: Option<usize>,
    /// Columns; same defaults as `--m`.
    #[arg(long)]
    n: Option<usize>,
    /// Required for example1.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(value_parser = |s: &str| s.parse::<Study>().map_err(|e| e.to_string()))]
    study: Study,
    /// `key=value` file with defaults; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dimensions, e.g. `100` or `100,300`.
    #[arg(long)]
    n: Option<String>,
    /// Ranks, e.g. `4:16:2` or `4,8,12`.
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    sigma: Option<f64>,
    /// `on` or `off`.
    #[arg(long)]
    spike: Option<String>,
    /// `polynomial` or `exponential`.
    #[arg(long)]
    decay: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run trials on the rayon thread pool.
    #[arg(long)]
    parallel: bool,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Construct(args) => cmd_construct(args),
        Command::Experiment(args) => cmd_experiment(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let options = VerifyOptions {
        fault: args.inject_fault,
        ..VerifyOptions::new(args.scope, RngSeed(args.seed), args.profile)
    };
    let report = verify::run(&options)?;
    println!("{report}");
    if report.passed() {
        Ok(EXIT_OK)
    } else {
        for check in report.failed() {
            eprintln!("violated: {}", check.name);
        }
        Ok(EXIT_VIOLATION)
    }
}

fn cmd_bound(args: BoundArgs) -> Result<i32> {
    let a = read_matrix(&args.matrix_a)?;
    let z = read_matrix(&args.matrix_z)?;
    if a.shape() != z.shape() {
        return Err(Error::Shape(format!(
            "{} is {}x{} but {} is {}x{}",
            args.matrix_a.display(),
            a.nrows(),
            a.ncols(),
            args.matrix_z.display(),
            z.nrows(),
            z.ncols()
        )));
    }
    let inst = PerturbationInstance::from_parts(a, z, args.r)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "{}", BoundReport::csv_header())?;
    let mut violated = false;
    for q in args.q {
        let report = bound_report(&inst, q)?;
        writeln!(out, "{}", report.csv_row(&args.id))?;
        for name in &report.violations {
            eprintln!("violation at q={q}: {name}");
            violated = true;
        }
    }
    out.flush()?;
    Ok(if violated { EXIT_VIOLATION } else { EXIT_OK })
}

fn cmd_construct(args: ConstructArgs) -> Result<i32> {
    let mut meta = Metadata::new();
    meta.insert("r".into(), args.r.to_string());
    meta.insert("q".into(), args.q.to_string());
    let dims = |default: usize| (args.m.unwrap_or(default), args.n.unwrap_or(default));
    match args.kind {
        ConstructKind::Tightness => {
            let eta = args.eta.ok_or_else(|| crate::error::domain("tightness needs --eta"))?;
            let (m, n) = dims(2 * args.r + 1);
            let params = TightnessParams::new(args.r, args.q, eta, m, n)?;
            let inst = tightness_instance(&params)?;
            write_instance(&args.out, "", &inst)?;
            meta.insert("kind".into(), "tightness".into());
            meta.insert("eta".into(), eta.to_string());
            meta.insert("epsilon".into(), format!("{:?}", params.implied_epsilon()));
            meta.insert("m".into(), m.to_string());
            meta.insert("n".into(), n.to_string());
        }
        ConstructKind::Minimax => {
            let xi = args.xi.ok_or_else(|| crate::error::domain("minimax needs --xi"))?;
            let (m, n) = dims(2 * args.r);
            let pair = minimax_pair(args.r, args.q, xi, m, n)?;
            write_instance(&args.out, "1", &pair.first)?;
            write_instance(&args.out, "2", &pair.second)?;
            meta.insert("kind".into(), "minimax".into());
            meta.insert("xi".into(), xi.to_string());
            meta.insert("lower_bound".into(), format!("{:?}", pair.lower_bound()));
            meta.insert("m".into(), m.to_string());
            meta.insert("n".into(), n.to_string());
        }
        ConstructKind::Example1 => {
            let seed = args.seed.ok_or_else(|| crate::error::domain("example1 needs --seed"))?;
            let (m, n) = dims(100);
            let kind = NoiseSpectrum::Example1 { q: args.q };
            let z = decaying_noise(&kind, m, n, RngSeed(seed))?;
            let spectrum = kind.values(m.min(n))?;
            fs::create_dir_all(&args.out)?;
            save_matrix(&Matrix::zeros(m, n), &args.out.join("A.csv"))?;
            save_matrix(&z, &args.out.join("Z.csv"))?;
            save_matrix(&z, &args.out.join("B.csv"))?;
            let column: Vec<Vec<f64>> = spectrum.iter().map(|&s| vec![s]).collect();
            save_matrix(&Matrix::from_rows(&column)?, &args.out.join("spectrum.csv"))?;
            meta.insert("kind".into(), "example1".into());
            meta.insert("seed".into(), seed.to_string());
            meta.insert("m".into(), m.to_string());
            meta.insert("n".into(), n.to_string());
        }
    }
    write_metadata(&args.out, &meta)?;
    eprintln!("wrote {}", args.out.display());
    Ok(EXIT_OK)
}

fn load_config(path: &Path) -> Result<Metadata> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_metadata(&text).map_err(|message| Error::Parse {
        path: path.to_path_buf(),
        message,
    })
}

fn cmd_experiment(args: ExperimentArgs) -> Result<i32> {
    let mut file = match &args.config {
        Some(path) => load_config(path)?,
        None => Metadata::new(),
    };
    if !file.contains_key("seed") && args.seed.is_none() {
        return Err(crate::error::domain(
            "experiments need --seed (or seed= in the config file)",
        ));
    }
    let mut cfg = ExperimentConfig::new(RngSeed(0));
    if let Some(path) = &args.config {
        file.remove("study");
        cfg.apply(&file).map_err(|e| Error::Parse {
            path: path.clone(),
            message: e.to_string(),
        })?;
    }
    if let Some(n) = &args.n {
        cfg.n_grid = parse_grid(n)?;
    }
    if let Some(r) = &args.r {
        cfg.r_grid = parse_grid(r)?;
    }
    if let Some(sigma) = args.sigma {
        cfg.sigma = sigma;
    }
    if let Some(spike) = &args.spike {
        cfg.spike = parse_switch(spike)?;
    }
    if let Some(decay) = &args.decay {
        cfg.decay = decay.parse()?;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(q) = &args.q {
        cfg.q = q.parse()?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = RngSeed(seed);
    }
    cfg.parallel |= args.parallel;
    cfg.validate()?;

    let result = run_sweep(args.study, &cfg)?;
    match &args.out {
        Some(path) => emit_csv(&result, io::BufWriter::new(fs::File::create(path)?))?,
        None => emit_csv(&result, io::stdout().lock())?,
    }
    let checks = ordering_checks(&result);
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
    for check in &failed {
        eprintln!("ordering failed: {}", check.description);
    }
    eprintln!(
        "{} sweep: {} rows, {} trial violations, ordering checks {}/{} passed ({}), {:.1}s",
        args.study,
        result.rows.len(),
        result.violations,
        checks.len() - failed.len(),
        checks.len(),
        if failed.is_empty() { "pass" } else { "fail" },
        result.wall_time.as_secs_f64()
    );
    Ok(if failed.is_empty() && result.violations == 0 {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}
