//! Brute-force ground truth on finite pieces of the `d`-tree.
//!
//! A support `Δ_n^m` holds levels `n..=m` of the rooted `d`-tree; level `i`
//! has `d^i` nodes, node `j` of level `i` having children `j·d .. j·d + d`
//! on level `i + 1`. For `n > 0` the support is a forest of `d^n`
//! independent subtrees. A block's weight is the product of `w` over its
//! top level and `E_{child, parent}` over every edge inside the support.
//!
//! Two independent routes compute partition functions: raw enumeration of
//! admissible labelings ([`for_each_block`]) and a per-level dynamic program
//! over subtree sums (linear and log space). They are cross-checked in tests.

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::{log_sum_exp, InteractionSystem, ProbVector, StochMatrix};
use crate::error::{Error, Result};

/// Cap on `|A|^{nodes}` for anything that enumerates labelings.
pub const ENUMERATION_GUARD: f64 = 1e8;

/// Cap on the node count handled by the log-space dynamic program.
pub const DP_NODE_GUARD: f64 = 1e12;

/// Levels `top..=bottom` of the `d`-tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeSupport {
    d: usize,
    top: usize,
    bottom: usize,
}

impl TreeSupport {
    pub fn new(d: usize, top: usize, bottom: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter(
                "tree degree must be at least 1".into(),
            ));
        }
        if top > bottom {
            return Err(Error::InvalidParameter(format!(
                "top level {top} lies below bottom level {bottom}"
            )));
        }
        Ok(Self { d, top, bottom })
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    /// Number of levels, `m - n + 1`.
    pub fn depth(&self) -> usize {
        self.bottom - self.top + 1
    }

    /// `|L_i| = d^i` as a float, exact while below 2^53.
    pub fn level_size_f64(&self, level: usize) -> f64 {
        (self.d as f64).powi(level as i32)
    }

    /// `|L_i|`; panics on overflow, which the guards rule out.
    pub fn level_size(&self, level: usize) -> usize {
        self.d
            .checked_pow(level as u32)
            .expect("level size overflows usize")
    }

    /// `|Δ_n^m| = Σ_{i=n}^m d^i`.
    pub fn node_count(&self) -> f64 {
        (self.top..=self.bottom)
            .map(|i| self.level_size_f64(i))
            .sum()
    }

    /// `|A|^{|Δ_n^m|}`, the number of unconstrained labelings.
    pub fn labelings(&self, alphabet_size: usize) -> f64 {
        (alphabet_size as f64).powf(self.node_count())
    }

    fn guard(&self, alphabet_size: usize, what: &'static str) -> Result<()> {
        let required = self.labelings(alphabet_size);
        if required <= ENUMERATION_GUARD {
            Ok(())
        } else {
            Err(Error::GuardExceeded {
                what,
                required,
                guard: ENUMERATION_GUARD,
            })
        }
    }
}

/// A labeling of a support; `labels[i]` is level `top + i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeBlock {
    support: TreeSupport,
    labels: Vec<Vec<usize>>,
}

impl TreeBlock {
    pub fn new(support: TreeSupport, labels: Vec<Vec<usize>>) -> Result<Self> {
        if labels.len() != support.depth() {
            return Err(Error::DimensionMismatch {
                expected: support.depth(),
                found: labels.len(),
            });
        }
        for (offset, level) in labels.iter().enumerate() {
            let expected = support.level_size(support.top + offset);
            if level.len() != expected {
                return Err(Error::DimensionMismatch {
                    expected,
                    found: level.len(),
                });
            }
        }
        Ok(Self { support, labels })
    }

    /// Every node labelled `symbol`.
    pub fn constant(support: TreeSupport, symbol: usize) -> Self {
        let labels = (support.top..=support.bottom)
            .map(|i| vec![symbol; support.level_size(i)])
            .collect();
        Self { support, labels }
    }

    pub fn support(&self) -> TreeSupport {
        self.support
    }

    /// Labels on absolute level `level`.
    pub fn level(&self, level: usize) -> &[usize] {
        &self.labels[level - self.support.top]
    }

    pub fn check_admissible(&self, sys: &InteractionSystem) -> Result<()> {
        let k = sys.size();
        let d = self.support.d;
        for (offset, level) in self.labels.iter().enumerate() {
            if let Some(node) = level.iter().position(|&s| s >= k) {
                return Err(Error::Inadmissible {
                    level: self.support.top + offset,
                    node,
                });
            }
        }
        for offset in 1..self.labels.len() {
            let parents = &self.labels[offset - 1];
            for (node, &child) in self.labels[offset].iter().enumerate() {
                if !sys.allows(child, parents[node / d]) {
                    return Err(Error::Inadmissible {
                        level: self.support.top + offset,
                        node,
                    });
                }
            }
        }
        Ok(())
    }
}

/// `∏_{g ∈ L_n} w_{u_g} · ∏_{edges} E_{child, parent}`.
pub fn block_weight(block: &TreeBlock, sys: &InteractionSystem) -> Result<f64> {
    block.check_admissible(sys)?;
    let d = block.support.d;
    let w = sys.weights();
    let mut weight: f64 = block.labels[0].iter().map(|&s| w[s]).product();
    for offset in 1..block.labels.len() {
        let parents = &block.labels[offset - 1];
        for (node, &child) in block.labels[offset].iter().enumerate() {
            weight *= sys.e(child, parents[node / d]);
        }
    }
    Ok(weight)
}

struct Enumerator<'a, F> {
    sys: &'a InteractionSystem,
    block: TreeBlock,
    /// (level offset, node) in breadth-first order.
    order: Vec<(usize, usize)>,
    visit: F,
}

impl<F: FnMut(&TreeBlock, f64)> Enumerator<'_, F> {
    fn run(&mut self, pos: usize, weight: f64) {
        if pos == self.order.len() {
            (self.visit)(&self.block, weight);
            return;
        }
        let (offset, node) = self.order[pos];
        let d = self.block.support.d;
        for symbol in 0..self.sys.size() {
            let factor = if offset == 0 {
                self.sys.weights()[symbol]
            } else {
                let parent = self.block.labels[offset - 1][node / d];
                if !self.sys.allows(symbol, parent) {
                    continue;
                }
                self.sys.e(symbol, parent)
            };
            self.block.labels[offset][node] = symbol;
            self.run(pos + 1, weight * factor);
        }
    }
}

/// Visits every admissible block on `support` with its weight, in
/// lexicographic breadth-first label order.
pub fn for_each_block<F>(sys: &InteractionSystem, support: TreeSupport, visit: F) -> Result<()>
where
    F: FnMut(&TreeBlock, f64),
{
    support.guard(sys.size(), "enumeration")?;
    let block = TreeBlock::constant(support, 0);
    let order = (0..support.depth())
        .flat_map(|offset| (0..support.level_size(support.top + offset)).map(move |j| (offset, j)))
        .collect();
    let mut e = Enumerator {
        sys,
        block,
        order,
        visit,
    };
    e.run(0, 1.0);
    Ok(())
}

/// Partition function by raw enumeration.
pub fn enumerate_partition_function(
    sys: &InteractionSystem,
    d: usize,
    n: usize,
    m: usize,
) -> Result<f64> {
    let support = TreeSupport::new(d, n, m)?;
    let mut total = 0.0;
    for_each_block(sys, support, |_, w| total += w)?;
    Ok(total)
}

/// Partition function `‖B_n^m‖` by the per-level dynamic program.
///
/// With `Z_0(a) = 1` and `Z_h(a) = (Σ_b E_{b,a} Z_{h-1}(b))^d` the subtree
/// sums, `‖B_n^m‖ = (Σ_a w_a Z_{m-n}(a))^{d^n}`. Restricted to supports that
/// also pass the enumeration guard; see [`log_partition_function`] for depth.
pub fn partition_function(sys: &InteractionSystem, d: usize, n: usize, m: usize) -> Result<f64> {
    let support = TreeSupport::new(d, n, m)?;
    support.guard(sys.size(), "partition function")?;
    let k = sys.size();
    let mut z = vec![1.0; k];
    for _ in n..m {
        z = (0..k)
            .map(|a| {
                (0..k)
                    .map(|b| sys.e(b, a) * z[b])
                    .sum::<f64>()
                    .powi(d as i32)
            })
            .collect();
    }
    let top: f64 = sys.weights().iter().zip(&z).map(|(w, z)| w * z).sum();
    let total = top.powf(support.level_size_f64(n));
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::Overflow)
    }
}

/// `log Z_h(a)` for `h = height`.
fn log_subtree_sums(sys: &InteractionSystem, d: usize, height: usize) -> Vec<f64> {
    let k = sys.size();
    let log_e: Vec<f64> = (0..k * k).map(|i| sys.e(i / k, i % k).ln()).collect();
    let mut z = vec![0.0; k];
    let mut terms = vec![0.0; k];
    for _ in 0..height {
        z = (0..k)
            .map(|a| {
                for b in 0..k {
                    terms[b] = log_e[b * k + a] + z[b];
                }
                d as f64 * log_sum_exp(&terms)
            })
            .collect();
    }
    z
}

/// `log ‖B_n^m‖` by the dynamic program in log space.
pub fn log_partition_function(
    sys: &InteractionSystem,
    d: usize,
    n: usize,
    m: usize,
) -> Result<f64> {
    let support = TreeSupport::new(d, n, m)?;
    let nodes = support.node_count();
    if nodes > DP_NODE_GUARD {
        return Err(Error::GuardExceeded {
            what: "dynamic program",
            required: nodes,
            guard: DP_NODE_GUARD,
        });
    }
    let z = log_subtree_sums(sys, d, m - n);
    let terms: Vec<f64> = sys
        .weights()
        .iter()
        .zip(&z)
        .map(|(w, z)| w.ln() + z)
        .collect();
    Ok(support.level_size_f64(n) * log_sum_exp(&terms))
}

/// `a_n = log ‖B_0^n‖ / |Δ_0^n|` for `n = 0..=n_max`.
pub fn pressure_sequence(sys: &InteractionSystem, d: usize, n_max: usize) -> Result<Vec<f64>> {
    (0..=n_max)
        .map(|n| {
            let nodes = TreeSupport::new(d, 0, n)?.node_count();
            Ok(log_partition_function(sys, d, 0, n)? / nodes)
        })
        .collect()
}

/// Exact pattern statistics of a block: symbol counts per level and
/// child-given-parent counts between consecutive levels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatternKey {
    /// `level_counts[i][a]`: occurrences of `a` on level `top + i`.
    pub level_counts: Vec<Vec<u64>>,
    /// `transition_counts[j][a * |A| + b]`: children `a` of parents `b`
    /// between levels `top + j` and `top + j + 1`.
    pub transition_counts: Vec<Vec<u64>>,
}

impl PatternKey {
    pub fn of(block: &TreeBlock, alphabet_size: usize) -> Self {
        let k = alphabet_size;
        let d = block.support.d;
        let level_counts = block
            .labels
            .iter()
            .map(|level| {
                let mut c = vec![0u64; k];
                for &s in level {
                    c[s] += 1;
                }
                c
            })
            .collect();
        let transition_counts = block
            .labels
            .windows(2)
            .map(|pair| {
                let mut c = vec![0u64; k * k];
                for (node, &child) in pair[1].iter().enumerate() {
                    c[child * k + pair[0][node / d]] += 1;
                }
                c
            })
            .collect();
        Self {
            level_counts,
            transition_counts,
        }
    }

    /// Distribution vectors and transition matrices, with the normalized
    /// `E` column standing in for parent symbols absent from a level.
    pub fn to_pair(&self, sys: &InteractionSystem) -> Result<PatternPair> {
        let k = sys.size();
        let v = self
            .level_counts
            .iter()
            .map(|c| ProbVector::normalized(c.iter().map(|&x| x as f64).collect()))
            .collect::<Result<Vec<_>>>()?;
        let m = self
            .transition_counts
            .iter()
            .map(|c| {
                let columns: Vec<Vec<f64>> = (0..k)
                    .map(|b| {
                        let total: u64 = (0..k).map(|a| c[a * k + b]).sum();
                        if total == 0 {
                            sys.normalized_column(b)
                        } else {
                            (0..k).map(|a| c[a * k + b] as f64 / total as f64).collect()
                        }
                    })
                    .collect();
                StochMatrix::from_columns(&columns)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PatternPair { v, m })
    }
}

/// Distribution vectors `δ_n..δ_m` and transition matrices `M_n..M_{m-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternPair {
    pub v: Vec<ProbVector>,
    pub m: Vec<StochMatrix>,
}

impl PatternPair {
    /// Largest deviation from `v[i+1] = M[i] v[i]`.
    pub fn compatibility_error(&self) -> f64 {
        self.m
            .iter()
            .zip(self.v.windows(2))
            .map(|(m, pair)| {
                let image = m.apply(&pair[0]).expect("matching dimensions");
                image
                    .entries()
                    .iter()
                    .zip(pair[1].entries())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

pub fn pattern_stats(block: &TreeBlock, sys: &InteractionSystem) -> Result<PatternPair> {
    block.check_admissible(sys)?;
    PatternKey::of(block, sys.size()).to_pair(sys)
}

/// Admissible blocks of a support grouped by exact pattern, with summed weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPartition {
    pub support: TreeSupport,
    pub classes: BTreeMap<PatternKey, f64>,
}

impl ClassPartition {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.classes.values().sum()
    }

    /// Heaviest class; ties go to the smallest key.
    pub fn max_class(&self) -> Option<(&PatternKey, f64)> {
        self.classes.iter().fold(
            None,
            |best: Option<(&PatternKey, f64)>, (key, &w)| match best {
                Some((_, bw)) if bw >= w => best,
                _ => Some((key, w)),
            },
        )
    }
}

pub fn class_partition(
    sys: &InteractionSystem,
    d: usize,
    n: usize,
    m: usize,
) -> Result<ClassPartition> {
    let support = TreeSupport::new(d, n, m)?;
    let mut classes = BTreeMap::new();
    for_each_block(sys, support, |block, w| {
        *classes
            .entry(PatternKey::of(block, sys.size()))
            .or_insert(0.0) += w;
    })?;
    Ok(ClassPartition { support, classes })
}

/// Distinct distribution-vector and transition-matrix sequences over a
/// support, with their polynomial counting bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaCounts {
    pub distributions: usize,
    pub transitions: usize,
    /// `∏_{i=n}^m (|L_i| + 1)^{|A|}`
    pub distribution_bound: f64,
    /// `∏_{i=n}^m (|L_i| + 1)^{|A|(|A|+1)}`
    pub transition_bound: f64,
}

impl OmegaCounts {
    pub fn within_bounds(&self) -> bool {
        self.distributions as f64 <= self.distribution_bound
            && self.transitions as f64 <= self.transition_bound
    }
}

pub fn omega_counts(sys: &InteractionSystem, d: usize, n: usize, m: usize) -> Result<OmegaCounts> {
    let support = TreeSupport::new(d, n, m)?;
    let k = sys.size();
    let mut keys = BTreeSet::new();
    for_each_block(sys, support, |block, _| {
        keys.insert(PatternKey::of(block, k));
    })?;
    let distributions: BTreeSet<&Vec<Vec<u64>>> =
        keys.iter().map(|key| &key.level_counts).collect();
    // Matrices compare by value: different counts can give the same ratios,
    // and a fallback column can coincide with an observed one. Quotients of
    // equal rationals round to the same double.
    let mut transitions = BTreeSet::new();
    for key in &keys {
        let pair = key.to_pair(sys)?;
        let bits: Vec<u64> = pair
            .m
            .iter()
            .flat_map(|m| (0..k * k).map(move |i| m.get(i / k, i % k).to_bits()))
            .collect();
        transitions.insert(bits);
    }
    let k = k as f64;
    let levels = || (n..=m).map(|i| support.level_size_f64(i) + 1.0);
    Ok(OmegaCounts {
        distributions: distributions.len(),
        transitions: transitions.len(),
        distribution_bound: levels().map(|x| x.powf(k)).product(),
        transition_bound: levels().map(|x| x.powf(k * (k + 1.0))).product(),
    })
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Gap between the exact log-weight of the heaviest class on `Δ_n^{n+k}`
/// and its entropy approximation
///
/// ```text
/// (log ‖B_n^n(δ_n)‖ − Σ_j |L_{n+j+1}| · D_KL(M_j ‖ E)ᵀ δ_{n+j}) / |Δ_n^{n+k}|
/// ```
///
/// both normalized by the node count.
pub fn stirling_residual(sys: &InteractionSystem, d: usize, n: usize, k: usize) -> Result<f64> {
    let partition = class_partition(sys, d, n, n + k)?;
    let (key, weight) = partition.max_class().ok_or(Error::EmptyResult)?;
    let support = partition.support;
    let nodes = support.node_count();
    let exact = weight.ln() / nodes;

    let top_counts = &key.level_counts[0];
    let top_size: u64 = top_counts.iter().sum();
    let log_top = ln_factorial(top_size)
        + top_counts
            .iter()
            .zip(sys.weights())
            .map(|(&c, w)| c as f64 * w.ln() - ln_factorial(c))
            .sum::<f64>();
    let pair = key.to_pair(sys)?;
    let mut approx = log_top;
    for (j, m) in pair.m.iter().enumerate() {
        let kl = crate::pressure::kl_vector(m, sys, j)?;
        approx -= support.level_size_f64(n + j + 1) * pair.v[j].dot(&kl);
    }
    Ok((exact - approx / nodes).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> InteractionSystem {
        InteractionSystem::golden_mean()
    }

    fn e2() -> InteractionSystem {
        InteractionSystem::from_rows(&[vec![2.0, 2.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn support_sizes() {
        let s = TreeSupport::new(2, 0, 2).unwrap();
        assert_eq!(s.node_count(), 7.0);
        assert_eq!(TreeSupport::new(3, 1, 2).unwrap().node_count(), 12.0);
        assert!(TreeSupport::new(2, 3, 2).is_err());
    }

    #[test]
    fn weights_of_small_blocks() {
        let s = TreeSupport::new(2, 0, 1).unwrap();
        let b = TreeBlock::new(s, vec![vec![0], vec![0, 1]]).unwrap();
        assert_eq!(block_weight(&b, &g()).unwrap(), 1.0);
        assert_eq!(block_weight(&b, &e2()).unwrap(), 2.0);
        let single = TreeBlock::new(TreeSupport::new(2, 0, 0).unwrap(), vec![vec![1]]).unwrap();
        let weighted = InteractionSystem::new(
            crate::algebra::Alphabet::indexed(2),
            &[vec![1.0, 1.0], vec![1.0, 0.0]],
            Some(vec![2.0, 3.0]),
        )
        .unwrap();
        assert_eq!(block_weight(&single, &weighted).unwrap(), 3.0);
        let bad = TreeBlock::new(s, vec![vec![1], vec![0, 1]]).unwrap();
        assert!(matches!(
            block_weight(&bad, &g()),
            Err(Error::Inadmissible { level: 1, node: 1 })
        ));
    }

    #[test]
    fn golden_mean_counts() {
        for (m, expected) in [(0, 2.0), (1, 5.0), (2, 41.0)] {
            assert_eq!(partition_function(&g(), 2, 0, m).unwrap(), expected);
            assert_eq!(
                enumerate_partition_function(&g(), 2, 0, m).unwrap(),
                expected
            );
        }
        let weighted = InteractionSystem::new(
            crate::algebra::Alphabet::indexed(2),
            &[vec![1.0, 1.0], vec![1.0, 0.0]],
            Some(vec![2.0, 3.0]),
        )
        .unwrap();
        assert_eq!(partition_function(&weighted, 2, 0, 0).unwrap(), 5.0);
    }

    #[test]
    fn guards() {
        assert!(matches!(
            enumerate_partition_function(&g(), 2, 0, 5),
            Err(Error::GuardExceeded { .. })
        ));
        assert!(matches!(
            partition_function(&g(), 2, 0, 5),
            Err(Error::GuardExceeded { .. })
        ));
        assert!(log_partition_function(&g(), 2, 0, 30).is_ok());
        assert!(matches!(
            log_partition_function(&g(), 2, 0, 45),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn dp_agrees_with_enumeration() {
        let systems = [
            g(),
            e2(),
            InteractionSystem::from_rows(&[
                vec![0.5, 1.5, 0.0],
                vec![0.0, 1.0, 2.0],
                vec![1.0, 0.0, 0.7],
            ])
            .unwrap(),
        ];
        for sys in &systems {
            for d in 1..=3 {
                for n in 0..=2 {
                    for m in n..=4 {
                        let support = TreeSupport::new(d, n, m).unwrap();
                        if support.labelings(sys.size()) > 1e6 {
                            continue;
                        }
                        let dp = partition_function(sys, d, n, m).unwrap();
                        let raw = enumerate_partition_function(sys, d, n, m).unwrap();
                        assert!((dp - raw).abs() <= 1e-9 * raw.abs(), "d={d} n={n} m={m}");
                        let log = log_partition_function(sys, d, n, m).unwrap();
                        assert!((log - raw.ln()).abs() <= 1e-9 * raw.ln().abs().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn sequence_examples() {
        let a = pressure_sequence(&g(), 2, 2).unwrap();
        assert!((a[0] - 2f64.ln()).abs() < 1e-15);
        assert!((a[1] - 5f64.ln() / 3.0).abs() < 1e-15);
        assert!((a[2] - 41f64.ln() / 7.0).abs() < 1e-15);
        let ones =
            InteractionSystem::from_rows(&[vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]]).unwrap();
        for d in 2..=3 {
            for x in pressure_sequence(&ones, d, 6).unwrap() {
                assert!((x - 3f64.ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn golden_mean_sequence_is_nonincreasing() {
        for d in 2..=3 {
            let a = pressure_sequence(&g(), d, 12).unwrap();
            assert!(a.windows(2).all(|w| w[1] <= w[0] + 1e-12), "d={d}: {a:?}");
        }
    }

    #[test]
    fn rooted_sequence_can_increase() {
        // d = 4: ‖B_0^1‖ = 17, ‖B_0^2‖ = 17^4 + 16^4 = 149057.
        assert_eq!(partition_function(&g(), 4, 0, 2).unwrap(), 149057.0);
        let a = pressure_sequence(&g(), 4, 2).unwrap();
        assert!((a[1] - 17f64.ln() / 5.0).abs() < 1e-15);
        assert!(a[2] > a[1]);
    }

    #[test]
    fn sliding_window_power_relation() {
        for sys in [g(), e2()] {
            for k in 0..3 {
                for i in 0..3 {
                    let next = log_partition_function(&sys, 2, i + 1, i + k + 1).unwrap();
                    let this = log_partition_function(&sys, 2, i, i + k).unwrap();
                    assert!(next <= 2.0 * this + 1e-9 * this.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn pattern_stats_examples() {
        let s = TreeSupport::new(2, 0, 1).unwrap();
        let b = TreeBlock::new(s, vec![vec![0], vec![0, 1]]).unwrap();
        let pair = pattern_stats(&b, &g()).unwrap();
        assert_eq!(pair.v[0].entries(), &[1.0, 0.0]);
        assert_eq!(pair.v[1].entries(), &[0.5, 0.5]);
        assert_eq!(pair.m[0].column(0), vec![0.5, 0.5]);
        assert_eq!(pair.m[0].column(1), vec![1.0, 0.0]);

        let ones = InteractionSystem::from_rows(&[vec![1.0, 2.0], vec![1.0, 1.0]]).unwrap();
        let block = TreeBlock::constant(TreeSupport::new(3, 0, 2).unwrap(), 1);
        let pair = pattern_stats(&block, &ones).unwrap();
        for v in &pair.v {
            assert_eq!(v.entries(), &[0.0, 1.0]);
        }
        for m in &pair.m {
            assert_eq!(m.column(1), vec![0.0, 1.0]);
            assert_eq!(m.column(0), vec![0.5, 0.5]);
        }
    }

    #[test]
    fn every_block_is_compatible() {
        for sys in [g(), e2()] {
            for_each_block(&sys, TreeSupport::new(2, 0, 3).unwrap(), |block, _| {
                let pair = pattern_stats(block, &sys).unwrap();
                assert!(pair.compatibility_error() <= 1e-12);
            })
            .unwrap();
        }
    }

    #[test]
    fn classes_reconcile() {
        for sys in [g(), e2()] {
            for (n, m) in [(0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (0, 3)] {
                let p = class_partition(&sys, 2, n, m).unwrap();
                let total = partition_function(&sys, 2, n, m).unwrap();
                assert!((p.total() - total).abs() <= 1e-9 * total);
                let max = p.max_class().unwrap().1;
                assert!(max <= total && total <= p.len() as f64 * max);
            }
        }
        let p = class_partition(&g(), 2, 0, 1).unwrap();
        assert_eq!(p.total(), 5.0);
        // n = m: classes are the level-n frequency vectors.
        let p = class_partition(&g(), 2, 2, 2).unwrap();
        assert_eq!(p.len(), 5);
        assert!(p.classes.keys().all(|k| k.transition_counts.is_empty()));
    }

    #[test]
    fn omega_examples() {
        let o = omega_counts(&g(), 2, 0, 0).unwrap();
        assert_eq!(o.distributions, 2);
        assert_eq!(o.transitions, 1);
        assert_eq!(o.distribution_bound, 4.0);
        let ones =
            InteractionSystem::from_rows(&[vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]]).unwrap();
        let o = omega_counts(&ones, 2, 0, 0).unwrap();
        assert_eq!(o.distributions, 3);
        assert_eq!(o.distribution_bound, 8.0);
        for sys in [g(), e2()] {
            for d in 2..=3 {
                for (n, m) in [(0, 1), (0, 2), (1, 2), (1, 1)] {
                    let o = omega_counts(&sys, d, n, m).unwrap();
                    assert!(o.within_bounds(), "{o:?}");
                }
            }
        }
    }

    #[test]
    fn stirling_examples() {
        let r0 = stirling_residual(&g(), 2, 0, 1).unwrap();
        assert!(r0.is_finite() && r0 <= 1.0);
        // heaviest class: root 0 over children {0, 1}; exact ln 2 / 3, approximation 2 ln 2 / 3.
        assert!((r0 - 2f64.ln() / 3.0).abs() < 1e-12);
        let r1 = stirling_residual(&g(), 2, 1, 1).unwrap();
        let r2 = stirling_residual(&g(), 2, 2, 1).unwrap();
        assert!(r1 <= r0 + 0.1 && r2 <= r1 + 0.1, "{r0} {r1} {r2}");
        let single = InteractionSystem::from_rows(&[vec![1.7]]).unwrap();
        for n in 0..3 {
            assert!(stirling_residual(&single, 2, n, 2).unwrap() < 1e-12);
        }
    }
}
