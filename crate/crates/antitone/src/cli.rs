//! `antitone classify | solve | iterate | sweep | ingest`

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use antitone_core::iterate::{bracket_system, fit, Verdict, DEFAULT_BUDGET};
use antitone_core::matclass::{is_m_matrix, is_p0_matrix, is_p_matrix, is_z_matrix, MAX_EXHAUSTIVE_DIM};
use antitone_core::solve::{self, EnumerateOptions, SearchBox, Seeding, AUTO_BOX_FLOOR};
use antitone_core::system::{AntitoneMap, CrossedReflection, ScalarReflection};
use antitone_core::vecorder::PositiveVector;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::format::{parse_box, parse_classify_input, parse_start, read_source, Loaded, SystemFile};
use crate::trace::{sibling, write_trace_file};
use crate::{report, CliError, EXIT_INVALID, EXIT_NUMERICAL};

#[derive(Debug, Parser)]
#[command(name = "antitone", version, about = "Steady states of antitone systems y = k + M(1/y)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Z, M, P and P0 verdicts for M, with witnesses and boundary flags
    Classify {
        /// System file, bare matrix file, or `-` for stdin
        file: String,
    },
    /// Certificate and fixed points
    Solve {
        file: String,
        /// Iteration budget for positive offsets
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        /// Newton seeds per axis (default depends on n)
        #[arg(long)]
        seeds: Option<usize>,
        /// Explicit search box `lo1,..,lon:hi1,..,hin`
        #[arg(long = "box")]
        search_box: Option<String>,
        /// Positive floor of the automatic search box
        #[arg(long, default_value_t = AUTO_BOX_FLOOR)]
        floor: f64,
    },
    /// Fixed-point iteration with CSV trace
    Iterate {
        /// System file or `-`; omit when using --map
        #[arg(required_unless_present = "map", conflicts_with = "map")]
        file: Option<String>,
        /// Built-in piecewise map
        #[arg(long, value_enum)]
        map: Option<MapName>,
        /// Start point `y1,..,yn` (defaults to k when k is positive)
        #[arg(long)]
        start: Option<String>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        /// CSV trace path; bracketing traces go next to it when k > 0
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Root counts while one entry of M varies
    Sweep {
        file: String,
        /// 1-based entry `i,j`
        #[arg(long)]
        entry: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        step: f64,
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long, default_value_t = AUTO_BOX_FLOOR)]
        floor: f64,
    },
    /// Reduce a grid block to (k, M) and classify it
    Ingest { file: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapName {
    #[value(name = "example-4.1")]
    Reflection,
    #[value(name = "example-4.2")]
    Crossed,
}

/// Parses `args` and runs the command, writing JSON to `stdout`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<u8, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            if code == 0 {
                write!(stdout, "{e}")?;
                return Ok(0);
            }
            let msg = e.to_string();
            return Err(CliError::Usage(msg.strip_prefix("error: ").unwrap_or(&msg).trim_end().to_string()));
        }
    };
    let (value, code) = match cli.command {
        Command::Classify { file } => (classify(&read_source(&file, stdin)?)?, 0),
        Command::Solve { file, budget, seeds, search_box, floor } => {
            let loaded = SystemFile::parse(&read_source(&file, stdin)?)?.into_system()?;
            (solve_cmd(loaded, budget, seeds, search_box.as_deref(), floor)?, 0)
        }
        Command::Iterate { file, map, start, budget, trace } => {
            let text = file.as_deref().map(|f| read_source(f, stdin)).transpose()?;
            iterate_cmd(text.as_deref(), map, start.as_deref(), budget, trace)?
        }
        Command::Sweep { file, entry, from, to, step, seeds, floor } => {
            let loaded = SystemFile::parse(&read_source(&file, stdin)?)?.into_system()?;
            (sweep_cmd(loaded, &entry, from, to, step, seeds, floor)?, 0)
        }
        Command::Ingest { file } => ingest_cmd(&read_source(&file, stdin)?)?,
    };
    serde_json::to_writer_pretty(&mut *stdout, &value)?;
    writeln!(stdout)?;
    Ok(code)
}

fn classify(text: &str) -> Result<Value, CliError> {
    let m = parse_classify_input(text)?;
    let n = m.dim();
    let minor_class = |r: antitone_core::Result<_>| match r {
        Ok(c) => report::class_certificate(&c),
        Err(_) => report::undecided_class(&format!("n = {n} exceeds the exhaustive limit {MAX_EXHAUSTIVE_DIM}")),
    };
    Ok(json!({
        "command": "classify",
        "n": n,
        "classes": {
            "Z": report::class_certificate(&is_z_matrix(&m)),
            "M": report::class_certificate(&is_m_matrix(&m)),
            "P": minor_class(is_p_matrix(&m)),
            "P0": minor_class(is_p0_matrix(&m)),
        },
    }))
}

fn options(loaded: &Loaded, seeds: Option<usize>, search_box: Option<&str>, floor: f64) -> Result<EnumerateOptions, CliError> {
    let n = loaded.system.dim();
    let mut opts = EnumerateOptions::for_dim(n);
    if let Some(per_axis) = seeds {
        opts.seeding = Seeding::Grid { per_axis };
    }
    opts.search_box = match (search_box, &loaded.search_box) {
        (Some(s), _) => parse_box(s, n)?,
        (None, Some(b)) => b.clone(),
        (None, None) => SearchBox::Auto { floor },
    };
    Ok(opts)
}

fn solve_cmd(loaded: Loaded, budget: usize, seeds: Option<usize>, search_box: Option<&str>, floor: f64) -> Result<Value, CliError> {
    let opts = options(&loaded, seeds, search_box, floor)?;
    let r = solve::solve(&loaded.system, budget, &opts)?;
    Ok(report::solve(loaded.system.dim(), &r))
}

fn iterate_cmd(
    text: Option<&str>,
    map: Option<MapName>,
    start: Option<&str>,
    budget: usize,
    trace: Option<PathBuf>,
) -> Result<(Value, u8), CliError> {
    let loaded = text.map(|t| SystemFile::parse(t)?.into_system()).transpose()?;
    let (source, map_ref): (&str, &dyn AntitoneMap) = match (&loaded, map) {
        (Some(l), _) => ("file", &l.system),
        (None, Some(MapName::Reflection)) => ("example-4.1", &ScalarReflection),
        (None, Some(MapName::Crossed)) => ("example-4.2", &CrossedReflection),
        (None, None) => return Err(CliError::Usage("give a system file or --map".into())),
    };
    let n = map_ref.dim();
    let y0 = match (start, &loaded) {
        (Some(s), _) => parse_start(s, n)?,
        (None, Some(l)) => PositiveVector::try_from(l.system.k().clone())
            .map_err(|_| CliError::Usage("k is not strictly positive; pass --start".into()))?,
        (None, None) => return Err(CliError::Usage("--start is required with --map".into())),
    };
    let t = fit(map_ref, &y0, budget)?;

    let bracket = match &loaded {
        Some(l) if l.system.has_positive_offset() => Some(bracket_system(&l.system, budget)?),
        _ => None,
    };
    let mut paths = Value::Null;
    if let Some(path) = &trace {
        write_trace_file(path, &t.iterates)?;
        let mut p = json!({ "main": path.display().to_string(), "lower": Value::Null, "upper": Value::Null });
        if let Some(b) = &bracket {
            let (lo, hi) = (sibling(path, "lower"), sibling(path, "upper"));
            write_trace_file(&lo, &b.lower_trace.iterates)?;
            write_trace_file(&hi, &b.upper_trace.iterates)?;
            p["lower"] = json!(lo.display().to_string());
            p["upper"] = json!(hi.display().to_string());
        }
        paths = p;
    }
    let code = if t.verdict == Verdict::BudgetExhausted { EXIT_NUMERICAL } else { 0 };
    let bracket = bracket.as_ref().map_or(Value::Null, report::bracket);
    Ok((report::iterate(source, &t, bracket, paths), code))
}

fn sweep_values(from: f64, to: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(CliError::Field { field: "step", msg: "must be positive".into() });
    }
    if from > to {
        return Ok(Vec::new());
    }
    let count = ((to - from) / step + 1e-9).floor() as usize;
    // round away accumulated binary noise such as 0.30000000000000004
    Ok((0..=count).map(|i| ((from + i as f64 * step) * 1e12).round() / 1e12).collect())
}

fn sweep_cmd(loaded: Loaded, entry: &str, from: f64, to: f64, step: f64, seeds: Option<usize>, floor: f64) -> Result<Value, CliError> {
    let bad = || CliError::Field { field: "entry", msg: format!("expected 1-based `i,j`, got `{entry}`") };
    let (i, j) = entry.split_once(',').ok_or_else(bad)?;
    let i: usize = i.trim().parse().map_err(|_| bad())?;
    let j: usize = j.trim().parse().map_err(|_| bad())?;
    if i == 0 || j == 0 {
        return Err(bad());
    }
    let values = sweep_values(from, to, step)?;
    let opts = options(&loaded, seeds, None, floor)?;
    let r = solve::sweep_parameter(&loaded.system, (i - 1, j - 1), &values, &opts)?;
    Ok(report::sweep(&r))
}

fn ingest_cmd(text: &str) -> Result<(Value, u8), CliError> {
    let file = SystemFile::parse(text)?;
    let (spec, red) = file.reduce()?;
    let code = if red.class == antitone_core::system::GridClass::Antitone { 0 } else { EXIT_INVALID };
    Ok((report::ingest(spec.v_star.as_slice(), &red), code))
}
