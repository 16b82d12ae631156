//! Finite-horizon pressure via optimal transitions.
//!
//! The value vectors `λ^(i)` obey
//!
//! ```text
//! λ^(0) = 0
//! λ^(i)_a = (1/s_i) · log Σ_{b : E_{b,a} > 0} exp(s_i · λ^(i-1)_b) · E_{b,a},   s_i = d^i / (d - 1)
//! ```
//!
//! and the optimal transition used at depth `i - 1` is the tilted column
//! softmax `Π_{b,a} = exp(s_i λ^(i-1)_b) E_{b,a} / exp(s_i λ^(i)_a)`.
//! Everything is evaluated in log space: the equivalent linear iteration
//! `x ↦ (Eᵀ x)^d` overflows after a handful of steps.
//!
//! `P^(k)(d, E) = max_a λ^(k)_a`, and the infinite-horizon pressure is
//! enclosed by `P^(k) + [tail_lo(k), tail_hi(k)]` with tails built from
//! the constants `γ ≤ β` of [`TailConstants`].

use crate::algebra::{log_sum_exp, InteractionSystem, ProbVector, StochMatrix};
use crate::error::{Error, Result};

/// Default depth cap for [`pressure_certificate`].
pub const DEFAULT_DEPTH_CAP: usize = 100_000;

/// Log min/max column sum of `E` and log of its smallest positive entry, in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailConstants {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

pub fn alpha_beta_gamma(sys: &InteractionSystem) -> TailConstants {
    let sums = sys.column_sums();
    let alpha = sums.iter().copied().fold(f64::INFINITY, f64::min).ln();
    let beta = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max).ln();
    let n = sys.size();
    let min_positive = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .map(|(a, b)| sys.e(a, b))
        .filter(|&x| x > 0.0)
        .fold(f64::INFINITY, f64::min);
    TailConstants {
        alpha,
        beta,
        gamma: min_positive.ln(),
    }
}

/// Largest column sum of `E` (linear scale); `log r_E` is the `d → ∞` limit.
pub fn r_e(sys: &InteractionSystem) -> f64 {
    sys.column_sums()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Stopping rule for power iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            max_iterations: 1_000_000,
        }
    }
}

/// Which Perron vector to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `E x = ρ x`
    Right,
    /// `uᵀ E = ρ uᵀ`
    Left,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerronPair {
    pub radius: f64,
    /// Sup-norm normalized, nonnegative.
    pub vector: Vec<f64>,
}

fn mat_vec(sys: &InteractionSystem, side: Side, x: &[f64]) -> Vec<f64> {
    let n = sys.size();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match side {
                    Side::Right => sys.e(i, j) * x[j],
                    Side::Left => sys.e(j, i) * x[j],
                })
                .sum()
        })
        .collect()
}

/// Collatz–Wielandt bracket `[min (Ex)_i / x_i, max (Ex)_i / x_i]`, valid for `x > 0`.
fn collatz_wielandt(x: &[f64], ex: &[f64]) -> Option<(f64, f64)> {
    if x.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let ratios = ex.iter().zip(x).map(|(y, v)| y / v);
    let (lo, hi) = ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r), hi.max(r))
    });
    Some((lo, hi))
}

/// Power iteration on `E + I` from the all-ones vector.
///
/// The unit shift makes the Perron root strictly dominant in modulus, so
/// periodic supports converge as well. Stops once successive Rayleigh
/// quotients of `E` differ by less than `opts.tol` and the sup-normalized
/// iterate moves by less than `100 · opts.tol`, or once the Collatz–Wielandt
/// bracket is narrower than `opts.tol`.
pub fn perron(sys: &InteractionSystem, side: Side, opts: PowerIteration) -> Result<PerronPair> {
    let n = sys.size();
    let mut x = vec![1.0; n];
    let mut previous = f64::NAN;
    let sums = sys.column_sums();
    let mut bracket = (
        sums.iter().copied().fold(f64::INFINITY, f64::min),
        sums.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    for _ in 0..opts.max_iterations {
        let ex = mat_vec(sys, side, &x);
        let norm_sq: f64 = x.iter().map(|v| v * v).sum();
        let rayleigh = x.iter().zip(&ex).map(|(a, b)| a * b).sum::<f64>() / norm_sq;
        if let Some(cw) = collatz_wielandt(&x, &ex) {
            bracket = cw;
        }
        let mut next: Vec<f64> = ex.iter().zip(&x).map(|(y, v)| y + v).collect();
        let sup = next.iter().copied().fold(0.0, f64::max);
        for v in &mut next {
            *v /= sup;
        }
        // The quotient settles quadratically faster than the vector, so the
        // vector must settle as well.
        let step = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let converged = ((rayleigh - previous).abs() < opts.tol && step < 100.0 * opts.tol)
            || bracket.1 - bracket.0 < opts.tol;
        previous = rayleigh;
        if converged {
            return Ok(PerronPair {
                radius: rayleigh,
                vector: x,
            });
        }
        x = next;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        lower: bracket.0,
        upper: bracket.1,
    })
}

/// Perron root `ρ(E)`; `log ρ(E)` is the `d → 1+` limit.
pub fn spectral_radius(sys: &InteractionSystem, tol: f64) -> Result<f64> {
    let opts = PowerIteration {
        tol,
        ..PowerIteration::default()
    };
    Ok(perron(sys, Side::Right, opts)?.radius)
}

/// Symbols lying on a cycle of the support graph, and the least common return time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityData {
    /// `a` with `(E^n)_{a,a} > 0` for some `n ≥ 1`, ascending.
    pub recurrent: Vec<usize>,
    /// Least `n` with `(E^n)_{a,a} > 0` for every recurrent `a`.
    pub return_time: usize,
}

fn bool_mul(x: &[bool], y: &[bool], n: usize) -> Vec<bool> {
    let mut out = vec![false; n * n];
    for i in 0..n {
        for k in 0..n {
            if !x[i * n + k] {
                continue;
            }
            for j in 0..n {
                out[i * n + j] |= y[k * n + j];
            }
        }
    }
    out
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn reachability(sys: &InteractionSystem) -> Result<ReachabilityData> {
    let n = sys.size();
    let support: Vec<bool> = (0..n * n)
        .map(|idx| sys.e(idx / n, idx % n) > 0.0)
        .collect();
    let mut first_return = vec![None; n];
    let mut power = support.clone();
    for len in 1..=n {
        for a in 0..n {
            if first_return[a].is_none() && power[a * n + a] {
                first_return[a] = Some(len);
            }
        }
        power = bool_mul(&power, &support, n);
    }
    let recurrent: Vec<usize> = (0..n).filter(|&a| first_return[a].is_some()).collect();
    if recurrent.is_empty() {
        return Err(Error::EmptyRecurrentSet);
    }
    // Multiples of a return time are return times, so the lcm always qualifies.
    let lcm = recurrent
        .iter()
        .map(|&a| first_return[a].unwrap())
        .fold(1, |acc, r| acc / gcd(acc, r) * r);
    let mut power = support.clone();
    for len in 1..=lcm {
        if recurrent.iter().all(|&a| power[a * n + a]) {
            return Ok(ReachabilityData {
                recurrent,
                return_time: len,
            });
        }
        power = bool_mul(&power, &support, n);
    }
    unreachable!("the lcm of first return times is a common return time")
}

/// Rejects branching factors that are not finite and above 1.
pub fn check_d(d: f64) -> Result<()> {
    if d.is_finite() && d > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidBranching(d))
    }
}

/// `d^i / (d - 1)`.
fn tilt(d: f64, i: usize) -> Result<f64> {
    let s = (i as f64 * d.ln() - (d - 1.0).ln()).exp();
    if s.is_finite() {
        Ok(s)
    } else {
        Err(Error::InvalidParameter(format!(
            "d^{i} overflows at d = {d}; depth too large"
        )))
    }
}

fn log_matrix(sys: &InteractionSystem) -> Vec<f64> {
    let n = sys.size();
    (0..n * n).map(|idx| sys.e(idx / n, idx % n).ln()).collect()
}

/// One recursion step with precomputed `ln E` (entries `-inf` where `E` vanishes).
fn step(
    prev: &[f64],
    scale: f64,
    log_e: &[f64],
    n: usize,
    transition: Option<&mut Vec<f64>>,
) -> Vec<f64> {
    let mut next = vec![0.0; n];
    let mut exps = vec![f64::NEG_INFINITY; n];
    let mut out = transition;
    for a in 0..n {
        for b in 0..n {
            let le = log_e[b * n + a];
            exps[b] = if le == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                scale * prev[b] + le
            };
        }
        let norm = log_sum_exp(&exps);
        next[a] = norm / scale;
        if let Some(pi) = out.as_deref_mut() {
            // Normalized against the column's own sum: at deep levels the
            // exponents are large and `exps[b] - norm` carries their rounding.
            let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let total: f64 = exps.iter().map(|x| (x - top).exp()).sum();
            for b in 0..n {
                pi[b * n + a] = (exps[b] - top).exp() / total;
            }
        }
    }
    next
}

/// Computes `λ^(i)` from `prev = λ^(i-1)` together with the optimal transition
/// of depth `i - 1`.
pub fn lambda_step(
    prev: &[f64],
    i: usize,
    d: f64,
    sys: &InteractionSystem,
) -> Result<(Vec<f64>, StochMatrix)> {
    check_d(d)?;
    let n = sys.size();
    if prev.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: prev.len(),
        });
    }
    if i == 0 {
        return Err(Error::InvalidParameter(
            "recursion index starts at 1".into(),
        ));
    }
    let scale = tilt(d, i)?;
    let mut pi = vec![0.0; n * n];
    let next = step(prev, scale, &log_matrix(sys), n, Some(&mut pi));
    Ok((next, StochMatrix::from_row_major(n, pi)?))
}

/// Value vectors `λ^(0..=k)` and optimal transitions `Π^(0..k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSequence {
    pub d: f64,
    pub levels: Vec<Vec<f64>>,
    pub transitions: Vec<StochMatrix>,
}

impl LambdaSequence {
    pub fn depth(&self) -> usize {
        self.transitions.len()
    }

    pub fn last(&self) -> &[f64] {
        self.levels.last().expect("λ^(0) is always present")
    }
}

pub fn lambda_sequence(sys: &InteractionSystem, d: f64, k: usize) -> Result<LambdaSequence> {
    check_d(d)?;
    let mut levels = vec![vec![0.0; sys.size()]];
    let mut transitions = Vec::with_capacity(k);
    for i in 1..=k {
        let (next, pi) = lambda_step(&levels[i - 1], i, d, sys)?;
        levels.push(next);
        transitions.push(pi);
    }
    Ok(LambdaSequence {
        d,
        levels,
        transitions,
    })
}

/// Iterates the recursion without materializing transitions.
struct LambdaIter<'a> {
    log_e: Vec<f64>,
    sys: &'a InteractionSystem,
    d: f64,
    depth: usize,
    current: Vec<f64>,
}

impl<'a> LambdaIter<'a> {
    fn new(sys: &'a InteractionSystem, d: f64) -> Result<Self> {
        check_d(d)?;
        Ok(Self {
            log_e: log_matrix(sys),
            sys,
            d,
            depth: 0,
            current: vec![0.0; sys.size()],
        })
    }

    fn advance(&mut self) -> Result<()> {
        let scale = tilt(self.d, self.depth + 1)?;
        self.current = step(&self.current, scale, &self.log_e, self.sys.size(), None);
        self.depth += 1;
        Ok(())
    }
}

/// `λ^(k)` only.
pub fn lambda_at(sys: &InteractionSystem, d: f64, k: usize) -> Result<Vec<f64>> {
    let mut it = LambdaIter::new(sys, d)?;
    for _ in 0..k {
        it.advance()?;
    }
    Ok(it.current)
}

/// Largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        })
}

/// `P^(k)(d, E) = max_a λ^(k)_a` over the full alphabet.
pub fn finite_pressure(sys: &InteractionSystem, d: f64, k: usize) -> Result<f64> {
    Ok(argmax(&lambda_at(sys, d, k)?).1)
}

/// `D_KL(Π ‖ E)_b = Σ_a Π_{a,b} log(Π_{a,b} / E_{a,b})` with `0 log 0 = 0`.
pub fn kl_vector(pi: &StochMatrix, sys: &InteractionSystem, step: usize) -> Result<Vec<f64>> {
    let n = sys.size();
    if pi.size() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: pi.size(),
        });
    }
    (0..n)
        .map(|b| {
            (0..n).try_fold(0.0, |acc, a| {
                let p = pi.get(a, b);
                if p == 0.0 {
                    Ok(acc)
                } else if sys.e(a, b) == 0.0 {
                    Err(Error::SupportViolation {
                        step,
                        row: a,
                        col: b,
                    })
                } else {
                    Ok(acc + p * (p / sys.e(a, b)).ln())
                }
            })
        })
        .collect()
}

/// `F_k(p, Π) = −Σ_{j<k} (d−1)/d^{j+1} · D_KL(Π^(j) ‖ E)ᵀ Π^(j+1) ⋯ Π^(k−1) p`.
pub fn objective_fk(
    p: &ProbVector,
    transitions: &[StochMatrix],
    d: f64,
    sys: &InteractionSystem,
) -> Result<f64> {
    check_d(d)?;
    if p.len() != sys.size() {
        return Err(Error::DimensionMismatch {
            expected: sys.size(),
            found: p.len(),
        });
    }
    let mut v = p.clone();
    let mut total = 0.0;
    for (j, pi) in transitions.iter().enumerate().rev() {
        let kl = kl_vector(pi, sys, j)?;
        let weight = ((d - 1.0).ln() - (j as f64 + 1.0) * d.ln()).exp();
        total -= weight * v.dot(&kl);
        v = pi.apply(&v)?;
    }
    Ok(total)
}

/// `P^(k)` with a rigorous enclosure `[lo, hi]` of the infinite-horizon pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureCertificate {
    pub d: f64,
    pub k: usize,
    pub p_k: f64,
    /// Lowest-index maximizer of `λ^(k)`.
    pub argmax: usize,
    pub lo: f64,
    pub hi: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl PressureCertificate {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Distance from `x` to the enclosure, zero inside.
    pub fn distance_to(&self, x: f64) -> f64 {
        (self.lo - x).max(x - self.hi).max(0.0)
    }
}

/// `c_k = d^{-k} / (1 - d^{-1})`.
pub fn tail_coefficient(d: f64, k: usize) -> f64 {
    (-(k as f64) * d.ln()).exp() / (1.0 - 1.0 / d)
}

/// Offsets `(lo, hi)` with `P^(k) + lo ≤ P^(∞) ≤ P^(k) + hi`.
///
/// The tail weights of the omitted terms sum to exactly `d^{-k}`; `c_k` is
/// larger, so `c_k γ` and `c_k β` only bound the tail when `γ ≤ 0 ≤ β`.
/// Taking the looser of the two coefficients per side keeps the enclosure
/// valid for every sign.
pub fn tail_offsets(d: f64, k: usize, consts: &TailConstants) -> (f64, f64) {
    let c = tail_coefficient(d, k);
    let exact = (-(k as f64) * d.ln()).exp();
    let lo = (c * consts.gamma).min(exact * consts.gamma);
    let hi = (c * consts.beta).max(exact * consts.beta);
    (lo, hi)
}

fn certificate(d: f64, k: usize, lambda: &[f64], consts: &TailConstants) -> PressureCertificate {
    let (argmax, p_k) = argmax(lambda);
    let (lo, hi) = tail_offsets(d, k, consts);
    PressureCertificate {
        d,
        k,
        p_k,
        argmax,
        lo: p_k + lo,
        hi: p_k + hi,
        alpha: consts.alpha,
        beta: consts.beta,
        gamma: consts.gamma,
    }
}

/// Certificate at a fixed depth `k`.
pub fn certificate_at_depth(
    sys: &InteractionSystem,
    d: f64,
    k: usize,
) -> Result<PressureCertificate> {
    let lambda = lambda_at(sys, d, k)?;
    Ok(certificate(d, k, &lambda, &alpha_beta_gamma(sys)))
}

/// Certificate at the smallest depth `k ≥ 1` whose enclosure is at most `target_width` wide.
pub fn pressure_certificate(
    sys: &InteractionSystem,
    d: f64,
    target_width: f64,
) -> Result<PressureCertificate> {
    pressure_certificate_capped(sys, d, target_width, DEFAULT_DEPTH_CAP)
}

pub fn pressure_certificate_capped(
    sys: &InteractionSystem,
    d: f64,
    target_width: f64,
    cap: usize,
) -> Result<PressureCertificate> {
    check_d(d)?;
    if target_width.is_nan() || target_width <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "target width must be positive (got {target_width})"
        )));
    }
    let consts = alpha_beta_gamma(sys);
    let width = |k: usize| {
        let (lo, hi) = tail_offsets(d, k, &consts);
        hi - lo
    };
    let mut it = LambdaIter::new(sys, d)?;
    loop {
        it.advance()?;
        let k = it.depth;
        if width(k) <= target_width {
            return Ok(certificate(d, k, &it.current, &consts));
        }
        if k >= cap {
            return Err(Error::CertificateCap {
                cap,
                best: Box::new(certificate(d, k, &it.current, &consts)),
            });
        }
    }
}

/// Parry transition and its stationary vector.
///
/// With `u` the left Perron vector (`uᵀE = ρuᵀ`) and `x` the right one,
/// `Π_{a,b} = E_{a,b} u_a / (ρ u_b)` and `p_a ∝ u_a x_a`. `Π` is supported
/// exactly where `E` is, so the constant sequence `(p, Π, Π, …)` is
/// feasible for the optimization and scores `(1 − d^{-k}) log ρ(E)` at
/// every depth.
pub fn parry_transition(sys: &InteractionSystem, tol: f64) -> Result<(StochMatrix, ProbVector)> {
    let opts = PowerIteration {
        tol,
        ..PowerIteration::default()
    };
    let left = perron(sys, Side::Left, opts)?;
    let right = perron(sys, Side::Right, opts)?;
    let n = sys.size();
    let u = &left.vector;
    let floor = 1e-12 * u.iter().copied().fold(0.0, f64::max);
    if let Some(b) = (0..n).find(|&b| u[b] <= floor) {
        return Err(Error::ParryUndefined(format!(
            "left Perron vector vanishes at symbol {b}"
        )));
    }
    // Each column sums to (uᵀE)_b / (ρ u_b) = 1 up to the eigenvector error;
    // dividing by the computed sum removes that error.
    let mut data = vec![0.0; n * n];
    for b in 0..n {
        let total: f64 = (0..n).map(|a| sys.e(a, b) * u[a]).sum();
        for a in 0..n {
            data[a * n + b] = sys.e(a, b) * u[a] / total;
        }
    }
    let pi = StochMatrix::from_row_major(n, data)
        .map_err(|e| Error::ParryUndefined(format!("columns do not normalize: {e}")))?;
    let p = ProbVector::normalized(u.iter().zip(&right.vector).map(|(a, b)| a * b).collect())?;
    Ok((pi, p))
}
