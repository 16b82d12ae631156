//! Command-line front end.
//!
//! Exit codes: 0 success, 1 monotonicity falsified or numerical failure,
//! 2 usage or parse error, 3 certificate depth cap, 4 oracle guard.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::algebra::{Alphabet, InteractionSystem};
use crate::analysis::{
    bracket_report, emit_dataset, format_base, format_significant, linear_grid, log_grid, sweep,
    verify_limits_with_width, Format, SweepSpec,
};
use crate::error::{Error, Result};
use crate::oracle::{class_partition, omega_counts, pressure_sequence};
use crate::pressure::{check_d, pressure_certificate};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_GUARD: i32 = 4;

/// Parses the line-oriented system format:
///
/// ```text
/// # golden mean
/// alphabet: 0 1
/// E:
/// 1 1
/// 1 0
/// w: 1 1
/// ```
///
/// `#` starts a comment, blank lines are ignored and the `w:` line is optional.
pub fn parse_system(text: &str) -> Result<InteractionSystem> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, message: String| Error::Parse { line, message };

    let (line, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty file; expected `alphabet:` line".into()))?;
    let symbols = header.strip_prefix("alphabet:").ok_or_else(|| {
        err(
            line,
            format!("expected `alphabet:` header, found `{header}`"),
        )
    })?;
    let alphabet =
        Alphabet::new(symbols.split_whitespace()).map_err(|e| err(line, e.to_string()))?;
    let k = alphabet.len();

    let (e_line, e_header) = lines
        .next()
        .ok_or_else(|| err(line + 1, "missing `E:` line".into()))?;
    if e_header != "E:" {
        return Err(err(
            e_line,
            format!("expected `E:` header, found `{e_header}`"),
        ));
    }

    let parse_numbers = |line: usize, body: &str, what: &str| -> Result<Vec<f64>> {
        body.split_whitespace()
            .enumerate()
            .map(|(j, tok)| {
                let value: f64 = tok
                    .parse()
                    .map_err(|_| err(line, format!("{what} {}: `{tok}` is not a number", j + 1)))?;
                if !value.is_finite() {
                    return Err(err(
                        line,
                        format!("{what} {}: `{tok}` is not finite", j + 1),
                    ));
                }
                if value < 0.0 {
                    return Err(err(line, format!("{what} {}: `{tok}` is negative", j + 1)));
                }
                Ok(value)
            })
            .collect()
    };

    let mut rows = Vec::with_capacity(k);
    let mut last = e_line;
    for r in 0..k {
        let (line, body) = lines
            .next()
            .ok_or_else(|| err(last + 1, format!("expected {k} matrix rows, found {r}")))?;
        let row = parse_numbers(line, body, &format!("row {}, entry", r + 1))?;
        if row.len() != k {
            return Err(err(
                line,
                format!("row {} has {} entries, expected {k}", r + 1, row.len()),
            ));
        }
        rows.push(row);
        last = line;
    }

    let mut weights = None;
    if let Some((line, body)) = lines.next() {
        let values = body.strip_prefix("w:").ok_or_else(|| {
            err(
                line,
                format!("unexpected line `{body}`; only `w:` may follow E"),
            )
        })?;
        let w = parse_numbers(line, values, "weight")?;
        if w.len() != k {
            return Err(err(
                line,
                format!("{} weights given, expected {k}", w.len()),
            ));
        }
        weights = Some(w);
        if let Some((line, body)) = lines.next() {
            return Err(err(line, format!("unexpected line `{body}` after weights")));
        }
    }

    InteractionSystem::new(alphabet, &rows, weights).map_err(|e| match e {
        Error::AssumptionViolated(report) => err(
            e_line,
            format!("matrix violates the positivity assumption: {report}"),
        ),
        other => err(e_line, other.to_string()),
    })
}

/// Canonical text form, always with a `w:` line.
pub fn render_system(sys: &InteractionSystem) -> String {
    let join = |xs: &[f64]| {
        xs.iter()
            .map(|x| format!("{x}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut s = format!("alphabet: {}\nE:\n", sys.alphabet().symbols().join(" "));
    for row in sys.rows() {
        s.push_str(&join(&row));
        s.push('\n');
    }
    let _ = writeln!(s, "w: {}", join(sys.weights()));
    s
}

fn parse_base(s: &str) -> std::result::Result<f64, String> {
    let base = if s == "e" {
        std::f64::consts::E
    } else {
        s.parse::<f64>()
            .map_err(|_| format!("`{s}` is not a number or `e`"))?
    };
    if base > 1.0 && base.is_finite() {
        Ok(base)
    } else {
        Err(format!("log base must exceed 1 (got {s})"))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hom-pressure",
    version,
    about = "Topological pressure of hom tree-shifts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certified pressure at one branching factor.
    Pressure(PressureArgs),
    /// Certified pressures over a grid of branching factors.
    Sweep(SweepArgs),
    /// Brute-force partition functions and brackets on finite trees.
    Oracle(OracleArgs),
    /// Pressures near d = 1 and at large d against the closed-form limits.
    Limits(LimitsArgs),
}

#[derive(Debug, Args)]
struct SystemArg {
    /// Interaction system file.
    #[arg(long)]
    system: PathBuf,
}

#[derive(Debug, Args)]
struct PressureArgs {
    #[command(flatten)]
    system: SystemArg,
    #[arg(long, allow_hyphen_values = true)]
    d: f64,
    #[arg(long, default_value_t = 1e-6)]
    width: f64,
    /// Logarithm base for output; a number above 1 or `e`.
    #[arg(long, default_value = "10", value_parser = parse_base)]
    base: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Svg,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    system: SystemArg,
    #[arg(long)]
    d_min: f64,
    #[arg(long)]
    d_max: f64,
    #[arg(long)]
    points: usize,
    /// Geometric spacing instead of linear.
    #[arg(long)]
    log_grid: bool,
    #[arg(long, default_value_t = 1e-6)]
    width: f64,
    #[arg(long, default_value = "10", value_parser = parse_base)]
    base: f64,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Output file; the dataset goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    system: SystemArg,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    depth: usize,
    /// Compare recursion lower bounds with the oracle sequence.
    #[arg(long)]
    bracket: bool,
    #[arg(long, default_value_t = 20)]
    kmax: usize,
    /// Class partition summary on levels 0..=depth.
    #[arg(long)]
    classes: bool,
    /// Distinct distribution and transition sequences on levels 0..=depth.
    #[arg(long)]
    omega: bool,
}

#[derive(Debug, Args)]
struct LimitsArgs {
    #[command(flatten)]
    system: SystemArg,
    #[arg(long, default_value_t = 1.001)]
    d_low: f64,
    #[arg(long, default_value_t = 256.0)]
    d_high: f64,
    #[arg(long, default_value = "10", value_parser = parse_base)]
    base: f64,
    #[arg(long, default_value_t = 1e-6)]
    width: f64,
    /// Tolerance, in nats, at the d -> 1 end.
    #[arg(long, default_value_t = 0.02)]
    tol_low: f64,
    /// Tolerance, in nats, at the large-d end.
    #[arg(long, default_value_t = 0.01)]
    tol_high: f64,
}

enum Failure {
    Lib(Error),
    Io(String),
    Falsified,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::InvalidBranching(_)
        | Error::InvalidParameter(_)
        | Error::InvalidAlphabet(_)
        | Error::InvalidEntry { .. }
        | Error::AssumptionViolated(_)
        | Error::DimensionMismatch { .. } => EXIT_USAGE,
        Error::CertificateCap { .. } => EXIT_CAP,
        Error::GuardExceeded { .. } => EXIT_GUARD,
        _ => EXIT_FAILURE,
    }
}

/// Runs the command line `args` (program name first), writing reports to
/// `out` and diagnostics to `err`; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match &cli.command {
        Command::Pressure(a) => cmd_pressure(a, out),
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Limits(a) => cmd_limits(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Falsified) => EXIT_FAILURE,
    }
}

fn load(arg: &SystemArg) -> std::result::Result<InteractionSystem, Failure> {
    let text = std::fs::read_to_string(&arg.system)
        .map_err(|e| Failure::Io(format!("{}: {e}", arg.system.display())))?;
    parse_system(&text).map_err(|e| Failure::Io(format!("{}: {e}", arg.system.display())))
}

fn sig6(x: f64) -> String {
    format_significant(x, 6)
}

fn cmd_pressure(a: &PressureArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    check_d(a.d)?;
    let sys = load(&a.system)?;
    let c = pressure_certificate(&sys, a.d, a.width)?;
    let s = a.base.ln();
    writeln!(out, "d        {}", sig6(a.d))?;
    writeln!(out, "k        {}", c.k)?;
    writeln!(out, "lo       {}", sig6(c.lo / s))?;
    writeln!(out, "pressure {}", sig6(c.p_k / s))?;
    writeln!(out, "hi       {}", sig6(c.hi / s))?;
    writeln!(out, "width    {}", sig6(c.width() / s))?;
    writeln!(out, "base     {}", format_base(a.base))?;
    Ok(())
}

fn cmd_sweep(
    a: &SweepArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    check_d(a.d_min)?;
    check_d(a.d_max)?;
    if a.points == 0 {
        return Err(Error::InvalidParameter("--points must be at least 1".into()).into());
    }
    if a.points > 1 && a.d_max <= a.d_min {
        return Err(Error::InvalidParameter("--d-max must exceed --d-min".into()).into());
    }
    let sys = load(&a.system)?;
    let grid = if a.log_grid {
        log_grid(a.d_min, a.d_max, a.points)
    } else {
        linear_grid(a.d_min, a.d_max, a.points)
    };
    let result = sweep(&SweepSpec::new(sys, grid, a.width, a.base)?)?;
    let format = match a.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Svg => Format::Svg,
    };
    let bytes = emit_dataset(&result, format)?;
    let summary: &mut dyn Write = match &a.out {
        Some(path) => {
            std::fs::write(path, &bytes)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            &mut *out
        }
        None => {
            out.write_all(&bytes)?;
            &mut *err
        }
    };
    let capped = result.rows.iter().filter(|r| !r.reached_width).count();
    writeln!(summary, "points             {}", result.rows.len())?;
    writeln!(summary, "monotone_certified {}", result.monotone_certified)?;
    if capped > 0 {
        writeln!(
            summary,
            "capped points      {capped} (depth cap reached, enclosure wider than requested)"
        )?;
    }
    for &(i, j) in &result.point_drops {
        writeln!(
            summary,
            "note: point value drops by more than 2x width between d = {} and d = {}",
            sig6(result.rows[i].d),
            sig6(result.rows[j].d)
        )?;
    }
    for &(i, j) in &result.violations {
        writeln!(
            summary,
            "violation: enclosure at d = {} lies above enclosure at d = {}",
            sig6(result.rows[i].d),
            sig6(result.rows[j].d)
        )?;
    }
    if result.monotone_certified {
        Ok(())
    } else {
        Err(Failure::Falsified)
    }
}

fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    if a.d < 1 {
        return Err(Error::InvalidParameter("--d must be at least 1".into()).into());
    }
    let sys = load(&a.system)?;
    let seq = pressure_sequence(&sys, a.d, a.depth)?;
    writeln!(out, "n  a_n (nats)")?;
    for (n, x) in seq.iter().enumerate() {
        writeln!(out, "{n:<2} {}", sig6(*x))?;
    }
    if a.classes {
        let p = class_partition(&sys, a.d, 0, a.depth)?;
        let (_, max) = p.max_class().ok_or(Error::EmptyResult)?;
        writeln!(out, "classes            {}", p.len())?;
        writeln!(out, "total weight       {}", sig6(p.total()))?;
        writeln!(out, "max class weight   {}", sig6(max))?;
    }
    if a.omega {
        let o = omega_counts(&sys, a.d, 0, a.depth)?;
        writeln!(
            out,
            "distribution seqs  {} (bound {})",
            o.distributions,
            sig6(o.distribution_bound)
        )?;
        writeln!(
            out,
            "transition seqs    {} (bound {})",
            o.transitions,
            sig6(o.transition_bound)
        )?;
    }
    if a.bracket {
        let r = bracket_report(&sys, a.d, a.kmax, a.depth)?;
        writeln!(out, "k  lower (nats)")?;
        for (k, x) in &r.lower {
            writeln!(out, "{k:<2} {}", sig6(*x))?;
        }
        let (k, lo) = r.best_lower();
        let (n, hi) = r.best_upper();
        writeln!(
            out,
            "bracket  [{}, {}] (k = {k}, n = {n})",
            sig6(lo),
            sig6(hi)
        )?;
        writeln!(out, "width    {}", sig6(r.width()))?;
    }
    Ok(())
}

fn cmd_limits(a: &LimitsArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let sys = load(&a.system)?;
    let r = verify_limits_with_width(&sys, a.d_low, a.d_high, a.tol_low, a.tol_high, a.width)?;
    let s = a.base.ln();
    let verdict = |ok: bool| {
        if ok {
            "within tolerance"
        } else {
            "OUTSIDE tolerance"
        }
    };
    writeln!(out, "base              {}", format_base(a.base))?;
    writeln!(out, "log rho(E)        {}", sig6(r.log_rho / s))?;
    writeln!(out, "log r_E           {}", sig6(r.log_r / s))?;
    writeln!(
        out,
        "pressure at d_low  = {}: {}",
        sig6(a.d_low),
        sig6(r.low.p_k / s)
    )?;
    writeln!(
        out,
        "pressure at d_high = {}: {}",
        sig6(a.d_high),
        sig6(r.high.p_k / s)
    )?;
    writeln!(
        out,
        "gap low           {} ({}, tol {} nats)",
        sig6(r.gap_low / s),
        verdict(r.low_ok()),
        sig6(a.tol_low)
    )?;
    writeln!(
        out,
        "gap high          {} ({}, tol {} nats)",
        sig6(r.gap_high / s),
        verdict(r.high_ok()),
        sig6(a.tol_high)
    )?;
    Ok(())
}
