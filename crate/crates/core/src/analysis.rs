//! Sweeps over the branching factor, limit checks, oracle brackets and
//! dataset output.
//!
//! Everything is computed in nats; [`SweepResult`] rows are converted to the
//! requested presentation base once, so the CSV carries exactly what the
//! rows hold.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::algebra::InteractionSystem;
use crate::error::{Error, Result};
use crate::oracle::pressure_sequence;
use crate::pressure::{
    certificate_at_depth, check_d, pressure_certificate, r_e, spectral_radius, PressureCertificate,
};

/// Enclosure width used when a caller does not pick one.
pub const DEFAULT_WIDTH: f64 = 1e-6;

/// Slack for comparisons between the two sides of a bracket.
pub const BRACKET_SLACK: f64 = 1e-9;

/// `points` evenly spaced values in `[min, max]`.
pub fn linear_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let step = (max - min) / (points - 1) as f64;
            (0..points)
                .map(|i| {
                    if i + 1 == points {
                        max
                    } else {
                        min + step * i as f64
                    }
                })
                .collect()
        }
    }
}

/// `points` geometrically spaced values in `[min, max]`.
pub fn log_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    linear_grid(min.ln(), max.ln(), points)
        .into_iter()
        .enumerate()
        .map(|(i, x)| match i {
            0 => min,
            _ if i + 1 == points => max,
            _ => x.exp(),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    sys: InteractionSystem,
    d_grid: Vec<f64>,
    target_width: f64,
    log_base: f64,
}

impl SweepSpec {
    pub fn new(
        sys: InteractionSystem,
        d_grid: Vec<f64>,
        target_width: f64,
        log_base: f64,
    ) -> Result<Self> {
        if d_grid.is_empty() {
            return Err(Error::InvalidParameter("empty d grid".into()));
        }
        for &d in &d_grid {
            check_d(d)?;
        }
        if let Some(w) = d_grid.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(format!(
                "d grid must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if !(target_width > 0.0 && target_width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "target width must be positive (got {target_width})"
            )));
        }
        if !(log_base > 1.0 && log_base.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "log base must exceed 1 (got {log_base})"
            )));
        }
        Ok(Self {
            sys,
            d_grid,
            target_width,
            log_base,
        })
    }

    pub fn system(&self) -> &InteractionSystem {
        &self.sys
    }

    pub fn d_grid(&self) -> &[f64] {
        &self.d_grid
    }

    pub fn target_width(&self) -> f64 {
        self.target_width
    }

    pub fn log_base(&self) -> f64 {
        self.log_base
    }
}

/// One grid point, values in the sweep's log base.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub d: f64,
    pub k: usize,
    pub lo: f64,
    pub pressure: f64,
    pub hi: f64,
    /// False when the depth cap stopped the certificate short of the target
    /// width; the enclosure is still valid, only wider.
    pub reached_width: bool,
}

impl SweepRow {
    fn from_certificate(c: &PressureCertificate, scale: f64, reached_width: bool) -> Self {
        Self {
            d: c.d,
            k: c.k,
            lo: c.lo / scale,
            pressure: c.p_k / scale,
            hi: c.hi / scale,
            reached_width,
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub log_base: f64,
    pub rows: Vec<SweepRow>,
    /// No consecutive pair has disjoint enclosures in the decreasing direction.
    pub monotone_certified: bool,
    /// Grid indices `(i, i + 1)` with `hi(d_{i+1}) < lo(d_i)`.
    pub violations: Vec<(usize, usize)>,
    /// Grid indices where the point values drop by more than twice the
    /// wider of the two enclosure widths. Informational; not a falsification.
    pub point_drops: Vec<(usize, usize)>,
}

impl SweepResult {
    fn assemble(log_base: f64, rows: Vec<SweepRow>) -> Self {
        let mut violations = Vec::new();
        let mut point_drops = Vec::new();
        for (i, pair) in rows.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            if b.hi < a.lo {
                violations.push((i, i + 1));
            }
            if b.pressure < a.pressure - 2.0 * a.width().max(b.width()) {
                point_drops.push((i, i + 1));
            }
        }
        Self {
            log_base,
            rows,
            monotone_certified: violations.is_empty(),
            violations,
            point_drops,
        }
    }
}

/// Certifies every grid point, in parallel, keeping grid order.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let scale = spec.log_base.ln();
    let rows = spec
        .d_grid
        .par_iter()
        .map(
            |&d| match pressure_certificate(&spec.sys, d, spec.target_width) {
                Ok(c) => Ok(SweepRow::from_certificate(&c, scale, true)),
                Err(Error::CertificateCap { best, .. }) => {
                    Ok(SweepRow::from_certificate(&best, scale, false))
                }
                Err(e) => Err(e),
            },
        )
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::assemble(spec.log_base, rows))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    /// `log ρ(E)`, the `d → 1+` limit.
    pub log_rho: f64,
    /// `log r_E`, the `d → ∞` limit.
    pub log_r: f64,
    pub low: PressureCertificate,
    pub high: PressureCertificate,
    /// `P^(k)(d_low) − log ρ(E)`
    pub gap_low: f64,
    /// `P^(k)(d_high) − log r_E`
    pub gap_high: f64,
    pub tol_low: f64,
    pub tol_high: f64,
}

impl LimitReport {
    pub fn low_ok(&self) -> bool {
        self.gap_low.abs() <= self.tol_low
    }

    pub fn high_ok(&self) -> bool {
        self.gap_high.abs() <= self.tol_high
    }
}

/// Certified pressures near both ends of the `d` range against the two
/// closed-form limits, at [`DEFAULT_WIDTH`].
pub fn verify_limits(
    sys: &InteractionSystem,
    d_low: f64,
    d_high: f64,
    tol_low: f64,
    tol_high: f64,
) -> Result<LimitReport> {
    verify_limits_with_width(sys, d_low, d_high, tol_low, tol_high, DEFAULT_WIDTH)
}

pub fn verify_limits_with_width(
    sys: &InteractionSystem,
    d_low: f64,
    d_high: f64,
    tol_low: f64,
    tol_high: f64,
    width: f64,
) -> Result<LimitReport> {
    check_d(d_low)?;
    check_d(d_high)?;
    if d_low >= d_high {
        return Err(Error::InvalidParameter(format!(
            "d_low ({d_low}) must be below d_high ({d_high})"
        )));
    }
    let log_rho = spectral_radius(sys, 1e-13)?.ln();
    let log_r = r_e(sys).ln();
    let low = pressure_certificate(sys, d_low, width)?;
    let high = pressure_certificate(sys, d_high, width)?;
    Ok(LimitReport {
        log_rho,
        log_r,
        gap_low: low.p_k - log_rho,
        gap_high: high.p_k - log_r,
        low,
        high,
        tol_low,
        tol_high,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BracketReport {
    pub d: usize,
    /// `(k, lower end of the depth-k enclosure)` for `k = 1..=k_max`.
    pub lower: Vec<(usize, f64)>,
    /// `(n, a_n)` for `n = 0..=n_max`.
    pub upper: Vec<(usize, f64)>,
}

impl BracketReport {
    pub fn best_lower(&self) -> (usize, f64) {
        self.lower
            .iter()
            .copied()
            .fold((0, f64::NEG_INFINITY), |b, x| if x.1 > b.1 { x } else { b })
    }

    pub fn best_upper(&self) -> (usize, f64) {
        self.upper
            .iter()
            .copied()
            .fold((0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b })
    }

    /// Best upper minus best lower.
    pub fn width(&self) -> f64 {
        self.best_upper().1 - self.best_lower().1
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.best_upper().1 + self.best_lower().1)
    }
}

/// Recursion lower bounds against the oracle sequence `a_n`; fails with
/// [`Error::BracketViolation`] if any lower bound exceeds any upper one by
/// more than [`BRACKET_SLACK`].
pub fn bracket_report(
    sys: &InteractionSystem,
    d: usize,
    k_max: usize,
    n_max: usize,
) -> Result<BracketReport> {
    if d < 2 {
        return Err(Error::InvalidBranching(d as f64));
    }
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    let lower = (1..=k_max)
        .map(|k| Ok((k, certificate_at_depth(sys, d as f64, k)?.lo)))
        .collect::<Result<Vec<_>>>()?;
    let upper: Vec<(usize, f64)> = pressure_sequence(sys, d, n_max)?
        .into_iter()
        .enumerate()
        .collect();
    let report = BracketReport { d, lower, upper };
    let (k, lo) = report.best_lower();
    let (n, up) = report.best_upper();
    if lo > up + BRACKET_SLACK {
        return Err(Error::BracketViolation {
            k,
            lower: lo,
            n,
            upper: up,
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svg,
}

pub const CSV_HEADER: &str = "d,k,pressure_lo,pressure,pressure_hi,log_base";

/// `digits` significant digits, fixed-point for moderate magnitudes and
/// scientific otherwise.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let exponent: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..digits as i32).contains(&exponent) {
        format!("{:.*}", (digits as i32 - 1 - exponent) as usize, x)
    } else {
        sci
    }
}

/// The CSV number format.
pub fn format_sig17(x: f64) -> String {
    format_significant(x, 17)
}

pub fn emit_dataset(result: &SweepResult, format: Format) -> Result<Vec<u8>> {
    if result.rows.is_empty() {
        return Err(Error::EmptyResult);
    }
    Ok(match format {
        Format::Csv => emit_csv(result),
        Format::Svg => emit_svg(result),
    }
    .into_bytes())
}

fn emit_csv(result: &SweepResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let base = format_sig17(result.log_base);
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            format_sig17(r.d),
            r.k,
            format_sig17(r.lo),
            format_sig17(r.pressure),
            format_sig17(r.hi),
            base
        );
    }
    out
}

/// One parsed CSV data row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub d: f64,
    pub k: usize,
    pub lo: f64,
    pub pressure: f64,
    pub hi: f64,
    pub log_base: f64,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `{CSV_HEADER}`"),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(err(format!("expected 6 fields, found {}", fields.len())));
            }
            let num = |j: usize| {
                fields[j]
                    .parse::<f64>()
                    .map_err(|_| err(format!("field {} is not a number: `{}`", j + 1, fields[j])))
            };
            Ok(CsvRow {
                d: num(0)?,
                k: fields[1]
                    .parse()
                    .map_err(|_| err(format!("field 2 is not a depth: `{}`", fields[1])))?,
                lo: num(2)?,
                pressure: num(3)?,
                hi: num(4)?,
                log_base: num(5)?,
            })
        })
        .collect()
}

fn emit_svg(result: &SweepResult) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 30.0;
    const BOTTOM: f64 = 50.0;

    let rows = &result.rows;
    let (x_min, x_max) = (rows[0].d.ln(), rows[rows.len() - 1].d.ln());
    let y_min = rows.iter().map(|r| r.lo).fold(f64::INFINITY, f64::min);
    let y_max = rows.iter().map(|r| r.hi).fold(f64::NEG_INFINITY, f64::max);
    let pad = |lo: f64, hi: f64| {
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x_min, x_max) = pad(x_min, x_max);
    let (y_min, y_max) = pad(y_min, y_max);
    let px = |d: f64| LEFT + (d.ln() - x_min) / (x_max - x_min) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y_min) / (y_max - y_min) * (H - TOP - BOTTOM);

    let upper = rows
        .iter()
        .map(|r| format!("{:.2},{:.2}", px(r.d), py(r.hi)));
    let lower = rows
        .iter()
        .rev()
        .map(|r| format!("{:.2},{:.2}", px(r.d), py(r.lo)));
    let band: Vec<String> = upper.chain(lower).collect();
    let line: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.2},{:.2}", px(r.d), py(r.pressure)))
        .collect();

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{LEFT},{TOP} V{} H{}" fill="none" stroke="black"/>"#,
        H - BOTTOM,
        W - RIGHT
    );
    let _ = writeln!(
        s,
        r##"<polygon points="{}" fill="#9ecae1" fill-opacity="0.6" stroke="none"/>"##,
        band.join(" ")
    );
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#08519c" stroke-width="1.5"/>"##,
        line.join(" ")
    );
    for r in rows {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2" fill="#08519c"/>"##,
            px(r.d),
            py(r.pressure)
        );
    }
    let label = |x: f64, y: f64, anchor: &str, text: String| {
        format!(
            r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{text}</text>"#
        )
    };
    let first = &rows[0];
    let last = &rows[rows.len() - 1];
    let _ = writeln!(
        s,
        "{}",
        label(LEFT, H - BOTTOM + 16.0, "middle", format!("{:.4}", first.d))
    );
    let _ = writeln!(
        s,
        "{}",
        label(
            W - RIGHT,
            H - BOTTOM + 16.0,
            "end",
            format!("{:.4}", last.d)
        )
    );
    let _ = writeln!(
        s,
        "{}",
        label(LEFT - 6.0, py(y_min) + 4.0, "end", format!("{y_min:.4}"))
    );
    let _ = writeln!(
        s,
        "{}",
        label(LEFT - 6.0, py(y_max) + 4.0, "end", format!("{y_max:.4}"))
    );
    let _ = writeln!(
        s,
        "{}",
        label(
            (LEFT + W - RIGHT) / 2.0,
            H - 12.0,
            "middle",
            "d (log scale)".into()
        )
    );
    let _ = writeln!(
        s,
        "{}",
        label(
            (LEFT + W - RIGHT) / 2.0,
            18.0,
            "middle",
            format!("pressure, log base {}", format_base(result.log_base))
        )
    );
    s.push_str("</svg>\n");
    s
}

/// `e` for Euler's number, otherwise the shortest round-trip form.
pub fn format_base(base: f64) -> String {
    if base == std::f64::consts::E {
        "e".into()
    } else {
        format!("{base}")
    }
}
