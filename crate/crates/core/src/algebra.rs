//! Alphabet-indexed vectors and matrices.
//!
//! [`ProbVector`] lives in the probability simplex over the alphabet and
//! [`StochMatrix`] is a left (column) stochastic matrix acting on it, so
//! `M p` is again a probability vector. Entry `(a, b)` of a stochastic
//! matrix is the probability of target symbol `a` given source symbol `b`.
//!
//! [`InteractionSystem`] bundles the alphabet with the nonnegative
//! interaction matrix `E` (entry `(a, b)` weights child `a` under parent `b`)
//! and the ambient field weights `w`.

use std::fmt;

use crate::error::{Error, Result};

/// Tolerance for simplex and column-sum checks.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Constructors renormalize sums that are off by at most this much.
pub const RENORMALIZE_TOL: f64 = 1e-9;

/// Max-shifted `log Σ exp(x_i)`. Returns `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Ordered set of distinct symbol labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet is empty".into()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || s.chars().any(char::is_whitespace) {
                return Err(Error::InvalidAlphabet(format!("bad symbol label {s:?}")));
            }
            if symbols[..i].contains(s) {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol {s:?}")));
            }
        }
        Ok(Self { symbols })
    }

    /// Alphabet `{0, 1, ..., k-1}` labelled by the decimal indices.
    pub fn indexed(k: usize) -> Self {
        Self {
            symbols: (0..k).map(|i| i.to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn label(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == label)
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }
}

fn check_entry(row: usize, col: usize, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidEntry { row, col, value })
    }
}

/// A probability vector indexed by the alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Validates nonnegativity and renormalizes a sum within [`RENORMALIZE_TOL`] of 1.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::NotProbability("empty vector".into()));
        }
        for (i, &x) in entries.iter().enumerate() {
            check_entry(i, 0, x)?;
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_TOL {
            return Err(Error::NotProbability(format!("entries sum to {sum}")));
        }
        Ok(Self(entries.into_iter().map(|x| x / sum).collect()))
    }

    /// Normalizes an arbitrary nonnegative vector with positive mass.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        for (i, &x) in weights.iter().enumerate() {
            check_entry(i, 0, x)?;
        }
        let sum: f64 = weights.iter().sum();
        if sum.is_nan() || sum <= 0.0 {
            return Err(Error::NotProbability("zero total mass".into()));
        }
        Ok(Self(weights.into_iter().map(|x| x / sum).collect()))
    }

    /// Standard unit vector `e_a`.
    pub fn unit(len: usize, a: usize) -> Self {
        let mut v = vec![0.0; len];
        v[a] = 1.0;
        Self(v)
    }

    pub fn uniform(len: usize) -> Self {
        Self(vec![1.0 / len as f64; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, a: usize) -> f64 {
        self.0[a]
    }

    pub fn dot(&self, values: &[f64]) -> f64 {
        self.0.iter().zip(values).map(|(p, v)| p * v).sum()
    }
}

/// Left stochastic matrix, stored dense and row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StochMatrix {
    n: usize,
    data: Vec<f64>,
}

impl StochMatrix {
    /// Builds from a row-major buffer. Columns within [`RENORMALIZE_TOL`] of
    /// summing to one are renormalized; anything further off is rejected.
    pub fn from_row_major(n: usize, mut data: Vec<f64>) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        for (idx, &x) in data.iter().enumerate() {
            check_entry(idx / n, idx % n, x)?;
        }
        for b in 0..n {
            let sum: f64 = (0..n).map(|a| data[a * n + b]).sum();
            if (sum - 1.0).abs() > RENORMALIZE_TOL {
                return Err(Error::NotStochastic { column: b, sum });
            }
            for a in 0..n {
                data[a * n + b] /= sum;
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(n, data)
    }

    /// Builds from columns, `columns[b][a]` being the entry `(a, b)`.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.len();
        let mut data = vec![0.0; n * n];
        for (b, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: col.len(),
                });
            }
            for (a, &x) in col.iter().enumerate() {
                data[a * n + b] = x;
            }
        }
        Self::from_row_major(n, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for a in 0..n {
            data[a * n + a] = 1.0;
        }
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.n + b]
    }

    pub fn column(&self, b: usize) -> Vec<f64> {
        (0..self.n).map(|a| self.get(a, b)).collect()
    }

    fn check_size(&self, found: usize) -> Result<()> {
        if found == self.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n,
                found,
            })
        }
    }

    /// `M p`.
    pub fn apply(&self, p: &ProbVector) -> Result<ProbVector> {
        self.check_size(p.len())?;
        let n = self.n;
        let out = (0..n)
            .map(|a| (0..n).map(|b| self.get(a, b) * p.get(b)).sum())
            .collect();
        ProbVector::new(out)
    }

    /// `self · other`.
    pub fn compose(&self, other: &StochMatrix) -> Result<StochMatrix> {
        self.check_size(other.n)?;
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for a in 0..n {
            for c in 0..n {
                let x = self.get(a, c);
                if x == 0.0 {
                    continue;
                }
                for b in 0..n {
                    data[a * n + b] += x * other.get(c, b);
                }
            }
        }
        StochMatrix::from_row_major(n, data)
    }
}

/// Variational distance `½ Σ_a |p_a − q_a|`.
pub fn variational_distance(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    Ok(half_l1(p.entries(), q.entries()))
}

fn half_l1(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Largest column-wise variational distance.
pub fn matrix_distance(m: &StochMatrix, n: &StochMatrix) -> Result<f64> {
    m.check_size(n.n)?;
    Ok((0..m.n)
        .map(|b| half_l1(&m.column(b), &n.column(b)))
        .fold(0.0, f64::max))
}

/// Distance between (vector, matrix) pairs: the larger of the two parts.
pub fn pair_distance(
    first: (&ProbVector, &StochMatrix),
    second: (&ProbVector, &StochMatrix),
) -> Result<f64> {
    let dv = variational_distance(first.0, second.0)?;
    let dm = matrix_distance(first.1, second.1)?;
    Ok(dv.max(dm))
}

/// Rows and columns of a nonnegative matrix with zero sum.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssumptionReport {
    pub zero_rows: Vec<usize>,
    pub zero_columns: Vec<usize>,
}

impl AssumptionReport {
    pub fn is_ok(&self) -> bool {
        self.zero_rows.is_empty() && self.zero_columns.is_empty()
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "every row and column has positive sum");
        }
        let mut parts = Vec::new();
        if !self.zero_rows.is_empty() {
            parts.push(format!("zero row sums at {:?}", self.zero_rows));
        }
        if !self.zero_columns.is_empty() {
            parts.push(format!("zero column sums at {:?}", self.zero_columns));
        }
        write!(f, "{}", parts.join("; "))
    }
}

/// Lists every zero row sum and zero column sum of a square matrix given by rows.
pub fn check_assumption_a(rows: &[Vec<f64>]) -> AssumptionReport {
    let n = rows.len();
    let zero_rows = (0..n)
        .filter(|&a| rows[a].iter().sum::<f64>() <= 0.0)
        .collect();
    let zero_columns = (0..n)
        .filter(|&b| {
            rows.iter()
                .map(|r| r.get(b).copied().unwrap_or(0.0))
                .sum::<f64>()
                <= 0.0
        })
        .collect();
    AssumptionReport {
        zero_rows,
        zero_columns,
    }
}

/// Alphabet, interaction matrix `E` and field weights `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionSystem {
    alphabet: Alphabet,
    n: usize,
    e: Vec<f64>,
    w: Vec<f64>,
}

impl InteractionSystem {
    /// `weights` defaults to all ones.
    pub fn new(alphabet: Alphabet, rows: &[Vec<f64>], weights: Option<Vec<f64>>) -> Result<Self> {
        let n = alphabet.len();
        if rows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rows.len(),
            });
        }
        let mut e = Vec::with_capacity(n * n);
        for (a, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (b, &x) in row.iter().enumerate() {
                check_entry(a, b, x)?;
            }
            e.extend_from_slice(row);
        }
        let report = check_assumption_a(rows);
        if !report.is_ok() {
            return Err(Error::AssumptionViolated(report));
        }
        let w = weights.unwrap_or_else(|| vec![1.0; n]);
        if w.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: w.len(),
            });
        }
        for (a, &x) in w.iter().enumerate() {
            check_entry(a, 0, x)?;
        }
        Ok(Self { alphabet, n, e, w })
    }

    /// System over the indexed alphabet `{0, ..., k-1}` with unit weights.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Alphabet::indexed(rows.len()), rows, None)
    }

    /// The golden-mean matrix `[[1, 1], [1, 0]]`.
    pub fn golden_mean() -> Self {
        Self::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).expect("valid system")
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// `E_{a,b}`: weight of child `a` under parent `b`.
    pub fn e(&self, a: usize, b: usize) -> f64 {
        self.e[a * self.n + b]
    }

    pub fn allows(&self, child: usize, parent: usize) -> bool {
        self.e(child, parent) > 0.0
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.e.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|b| (0..self.n).map(|a| self.e(a, b)).sum())
            .collect()
    }

    pub fn check_assumption_a(&self) -> AssumptionReport {
        check_assumption_a(&self.rows())
    }

    /// Column `b` of `E` normalized to a probability vector.
    pub fn normalized_column(&self, b: usize) -> Vec<f64> {
        let sum: f64 = (0..self.n).map(|a| self.e(a, b)).sum();
        (0..self.n).map(|a| self.e(a, b) / sum).collect()
    }

    /// True when every entry of `E` is 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.e.iter().all(|&x| x == 0.0 || x == 1.0)
    }
}
