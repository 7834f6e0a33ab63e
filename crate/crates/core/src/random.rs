//! Beta-splitting trees, leaf removal and the sampling consistency test.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_traits::Zero;
use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::measure::{q, MeasureTree, Q};
use crate::rng::{self, mix, open_unit};
use crate::sample::Sampler;
use crate::shapes::shape;
use crate::tree::{AlgebraicTree, Vertex};

/// The split parameter, including both limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Beta {
    Comb,
    Finite(f64),
    Symmetric,
}

impl Beta {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_nan() || beta < -2.0 {
            return Err(Error::InvalidParameter(format!("beta must lie in [-2, inf], got {beta}")));
        }
        Ok(if beta == -2.0 {
            Beta::Comb
        } else if beta == f64::INFINITY {
            Beta::Symmetric
        } else {
            Beta::Finite(beta)
        })
    }

    pub fn value(self) -> f64 {
        match self {
            Beta::Comb => -2.0,
            Beta::Finite(b) => b,
            Beta::Symmetric => f64::INFINITY,
        }
    }
}

impl std::str::FromStr for Beta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" | "infinity" => Ok(Beta::Symmetric),
            t => Beta::new(t.parse().map_err(|_| Error::Parse(format!("bad beta {t:?}")))?),
        }
    }
}

impl std::fmt::Display for Beta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Beta::Symmetric => write!(f, "inf"),
            b => write!(f, "{}", b.value()),
        }
    }
}

/// Probabilities `q(i)`, `i = 1..n-1`, of splitting `n` leaves into `i`
/// and `n - i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitLaw {
    pub n: usize,
    pub beta: Beta,
    q: Vec<f64>,
}

impl SplitLaw {
    pub fn q(&self, i: usize) -> f64 {
        if i == 0 || i >= self.n {
            0.0
        } else {
            self.q[i - 1]
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.q
    }

    /// Smallest `i` whose cumulative probability exceeds `u`.
    pub fn sample(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (k, p) in self.q.iter().enumerate() {
            acc += p;
            if u < acc {
                return k + 1;
            }
        }
        // rounding left a sliver at the top
        self.q.iter().rposition(|&p| p > 0.0).map_or(1, |k| k + 1)
    }
}

pub fn split_law(n: usize, beta: Beta) -> Result<SplitLaw> {
    if n < 2 {
        return Err(Error::InvalidParameter("a split needs n >= 2".into()));
    }
    let mut q = vec![0.0; n - 1];
    match beta {
        Beta::Comb => {
            q[0] += 0.5;
            q[n - 2] += 0.5;
        }
        Beta::Symmetric => {
            q[n / 2 - 1] += 0.5;
            q[n.div_ceil(2) - 1] += 0.5;
        }
        Beta::Finite(0.0) => q.fill(1.0 / (n - 1) as f64),
        Beta::Finite(b) => {
            let nf = n as f64;
            let half = n / 2;
            let logw: Vec<f64> = (1..=half)
                .map(|i| {
                    let i = i as f64;
                    ln_gamma(nf + 1.0) - ln_gamma(i + 1.0) - ln_gamma(nf - i + 1.0)
                        + ln_gamma(i + b + 1.0)
                        + ln_gamma(nf - i + b + 1.0)
                })
                .collect();
            let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for (k, lw) in logw.iter().enumerate() {
                let w = (lw - top).exp();
                q[k] = w;
                q[n - 2 - k] = w;
            }
            let total: f64 = q.iter().sum();
            for x in q.iter_mut() {
                *x /= total;
            }
            for k in 0..half {
                q[n - 2 - k] = q[k];
            }
        }
    }
    Ok(SplitLaw { n, beta, q })
}

/// A beta-splitting generator that computes each split law once.
pub struct BetaSplitting {
    beta: Beta,
    laws: Vec<OnceLock<SplitLaw>>,
}

impl BetaSplitting {
    pub fn new(beta: Beta, max_n: usize) -> Self {
        Self {
            beta,
            laws: (0..=max_n).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    fn split(&self, n: usize, seed: u64) -> usize {
        let u = open_unit(mix(seed, 0));
        match self.laws.get(n) {
            Some(cell) => cell
                .get_or_init(|| split_law(n, self.beta).expect("n >= 2"))
                .sample(u),
            None => split_law(n, self.beta).expect("n >= 2").sample(u),
        }
    }

    /// A tree with `n` leaves of mass `1/n` each.
    pub fn tree(&self, n: usize, seed: u64) -> Result<MeasureTree> {
        from_splits(n, seed, |k, s| self.split(k, s))
    }
}

/// Grows a rooted binary tree by recursive splits, then suppresses the
/// degree-2 root. Every node draws from its own seed and hands derived
/// seeds to its children.
fn from_splits<F: Fn(usize, u64) -> usize>(n: usize, seed: u64, split: F) -> Result<MeasureTree> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if n == 1 {
        return Ok(MeasureTree::uniform_leaves(AlgebraicTree::single()));
    }
    let mut edges: Vec<(Vertex, Vertex)> = Vec::with_capacity(2 * n);
    let mut next = 1;
    let mut stack = vec![(0usize, n, seed)];
    while let Some((id, size, s)) = stack.pop() {
        if size == 1 {
            continue;
        }
        let i = split(size, s);
        for (k, part) in [(1u64, i), (2, size - i)] {
            edges.push((id, next));
            stack.push((next, part, mix(s, k)));
            next += 1;
        }
    }
    // drop the root 0 and join its two children
    let mut kids = Vec::with_capacity(2);
    let mut out: Vec<(Vertex, Vertex)> = Vec::with_capacity(edges.len() - 1);
    for (a, b) in edges {
        if a == 0 {
            kids.push(b - 1);
        } else {
            out.push((a - 1, b - 1));
        }
    }
    out.push((kids[0], kids[1]));
    Ok(MeasureTree::uniform_leaves(AlgebraicTree::from_edges(next - 1, &out)?))
}

pub fn beta_splitting_tree(n: usize, beta: Beta, seed: u64) -> Result<MeasureTree> {
    BetaSplitting::new(beta, 0).tree(n, seed)
}

/// The caterpillar with `n` leaves.
pub fn comb_tree(n: usize) -> Result<MeasureTree> {
    from_splits(n, 0, |_, _| 1)
}

/// The symmetric binary tree with `2^k` leaves.
pub fn symmetric_binary(k: u32) -> Result<MeasureTree> {
    if k > 20 {
        return Err(Error::InvalidParameter("k must be at most 20".into()));
    }
    from_splits(1 << k, 0, |n, _| n / 2)
}

fn leaf_count_if_uniform(mt: &MeasureTree) -> Result<usize> {
    let leaves = mt.tree().leaves();
    let w = q(1, leaves.len() as i64);
    let uniform = (0..mt.len()).all(|v| {
        mt.arc(v).is_zero()
            && if mt.tree().is_leaf(v) {
                *mt.atom(v) == w
            } else {
                mt.atom(v).is_zero()
            }
    });
    if !uniform {
        return Err(Error::InvalidMeasure("expected uniform atoms on the leaves".into()));
    }
    Ok(leaves.len())
}

/// Removes a uniform leaf with the branch point it hangs from and joins
/// the two remaining neighbours of that branch point.
pub fn remove_random_leaf(mt: &MeasureTree, seed: u64) -> Result<MeasureTree> {
    let n = leaf_count_if_uniform(mt)?;
    if mt.len() == 1 {
        return Err(Error::InvalidParameter("a single leaf cannot be removed".into()));
    }
    let tree = mt.tree();
    let leaves = tree.leaves();
    let leaf = leaves[rng::stream(seed).gen_range(0..n)];
    if n == 2 {
        return Ok(MeasureTree::uniform_leaves(AlgebraicTree::single()));
    }
    let b = tree.neighbors(leaf)[0];
    if tree.degree(b) != 3 {
        return Err(Error::NotBinary(b));
    }
    let others: Vec<Vertex> = tree.neighbors(b).iter().copied().filter(|&w| w != leaf).collect();
    let keep: Vec<Vertex> = (0..mt.len()).filter(|&v| v != leaf && v != b).collect();
    let mut index = vec![usize::MAX; mt.len()];
    for (i, &v) in keep.iter().enumerate() {
        index[v] = i;
    }
    let mut edges: Vec<(Vertex, Vertex)> = tree
        .edges()
        .into_iter()
        .filter(|&(x, y)| index[x] != usize::MAX && index[y] != usize::MAX)
        .map(|(x, y)| (index[x], index[y]))
        .collect();
    edges.push((index[others[0]], index[others[1]]));
    Ok(MeasureTree::uniform_leaves(AlgebraicTree::from_edges(keep.len(), &edges)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    pub beta: Beta,
    pub n: usize,
    pub m: usize,
    pub replicas: usize,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub removed: BTreeMap<String, u64>,
    pub fresh: BTreeMap<String, u64>,
}

impl ConsistencyReport {
    pub fn rejects(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Categories with fewer joint counts than this are pooled.
pub const MIN_CELL: u64 = 10;

/// Chi-square test of homogeneity between the `m`-shapes of
/// `remove_random_leaf(T_n)` and of a fresh `T_{n-1}`, one shape per
/// replica.
pub fn sampling_consistency_test(
    beta: Beta,
    n: usize,
    m: usize,
    replicas: usize,
    seed: u64,
) -> Result<ConsistencyReport> {
    if replicas == 0 {
        return Err(Error::InvalidParameter("need at least one replica".into()));
    }
    if n < 2 || m == 0 {
        return Err(Error::InvalidParameter("need n >= 2 and m >= 1".into()));
    }
    let gen = BetaSplitting::new(beta, n);
    let draw_key = |mt: &MeasureTree, s: u64| -> Result<String> {
        let pts = Sampler::new(mt).draw_many(&mut rng::stream(s), m);
        Ok(shape(mt, &pts)?.key())
    };
    let pairs = rng::par_map(replicas, |r| -> Result<(String, String)> {
        let s = mix(seed, r as u64);
        let t = remove_random_leaf(&gen.tree(n, mix(s, 1))?, mix(s, 2))?;
        let a = draw_key(&t, mix(s, 3))?;
        let b = draw_key(&gen.tree(n - 1, mix(s, 4))?, mix(s, 5))?;
        Ok((a, b))
    });
    let mut removed = BTreeMap::new();
    let mut fresh = BTreeMap::new();
    for p in pairs {
        let (a, b) = p?;
        *removed.entry(a).or_insert(0u64) += 1;
        *fresh.entry(b).or_insert(0u64) += 1;
    }
    let (statistic, df) = chi_square_homogeneity(&removed, &fresh);
    let p_value = if df == 0 {
        1.0
    } else {
        let chi = ChiSquared::new(df as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        1.0 - chi.cdf(statistic)
    };
    Ok(ConsistencyReport {
        beta,
        n,
        m,
        replicas,
        statistic,
        df,
        p_value,
        removed,
        fresh,
    })
}

/// Two-sample chi-square statistic and degrees of freedom, pooling sparse
/// categories.
pub fn chi_square_homogeneity(a: &BTreeMap<String, u64>, b: &BTreeMap<String, u64>) -> (f64, usize) {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    let mut cells: Vec<(u64, u64)> = Vec::new();
    let mut pooled = (0u64, 0u64);
    let keys: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    for k in keys {
        let x = a.get(k).copied().unwrap_or(0);
        let y = b.get(k).copied().unwrap_or(0);
        if x + y < MIN_CELL {
            pooled.0 += x;
            pooled.1 += y;
        } else {
            cells.push((x, y));
        }
    }
    if pooled.0 + pooled.1 > 0 {
        cells.push(pooled);
    }
    if cells.len() < 2 || na == 0 || nb == 0 {
        return (0.0, 0);
    }
    let (na, nb) = (na as f64, nb as f64);
    let total = na + nb;
    let mut stat = 0.0;
    for (x, y) in &cells {
        let col = (x + y) as f64;
        let ea = na * col / total;
        let eb = nb * col / total;
        stat += (*x as f64 - ea).powi(2) / ea + (*y as f64 - eb).powi(2) / eb;
    }
    (stat, cells.len() - 1)
}

/// A uniform random tree on `n` labelled vertices from a Pruefer code.
pub fn random_tree(n: usize, seed: u64) -> Result<AlgebraicTree> {
    if n == 0 {
        return Err(Error::EmptyTree);
    }
    if n == 1 {
        return Ok(AlgebraicTree::single());
    }
    let mut r = rng::stream(seed);
    if n == 2 {
        return AlgebraicTree::from_edges(2, &[(0, 1)]);
    }
    let code: Vec<usize> = (0..n - 2).map(|_| r.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<usize>> =
        (0..n).filter(|&v| degree[v] == 1).map(std::cmp::Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &c in &code {
        let std::cmp::Reverse(leaf) = heap.pop().expect("a leaf remains");
        edges.push((leaf, c));
        degree[c] -= 1;
        if degree[c] == 1 {
            heap.push(std::cmp::Reverse(c));
        }
    }
    let std::cmp::Reverse(u) = heap.pop().expect("two vertices remain");
    let std::cmp::Reverse(v) = heap.pop().expect("two vertices remain");
    edges.push((u, v));
    AlgebraicTree::from_edges(n, &edges)
}

/// Random integer weights on a random subset of vertices, normalised.
pub fn random_atomic(tree: AlgebraicTree, seed: u64) -> MeasureTree {
    let mut r = rng::stream(seed);
    let n = tree.len();
    let mut w: Vec<i64> = (0..n)
        .map(|_| if r.gen_bool(0.7) { r.gen_range(1..10) } else { 0 })
        .collect();
    if w.iter().all(|&x| x == 0) {
        w[r.gen_range(0..n)] = 1;
    }
    let total: i64 = w.iter().sum();
    let atom = w.into_iter().map(|x| q(x, total)).collect();
    MeasureTree::atomic(tree, atom).expect("weights sum to one")
}

/// A random binary tree with `leaves` leaves carrying random masses, each
/// leaf diffuse, atomic, or both.
pub fn random_t2(leaves: usize, seed: u64) -> Result<MeasureTree> {
    let shape = beta_splitting_tree(leaves, Beta::Finite(0.0), seed)?;
    let tree = shape.tree().clone();
    let mut r = rng::stream(mix(seed, 7));
    let n = tree.len();
    let mut atom = vec![0i64; n];
    let mut arc = vec![0i64; n];
    for l in tree.leaves() {
        match if n == 1 { 0 } else { r.gen_range(0..3) } {
            0 => atom[l] = r.gen_range(1..8),
            1 => arc[l] = r.gen_range(1..8),
            _ => {
                atom[l] = r.gen_range(1..8);
                arc[l] = r.gen_range(1..8);
            }
        }
    }
    let total: i64 = atom.iter().chain(arc.iter()).sum();
    let to_q = |v: Vec<i64>| -> Vec<Q> { v.into_iter().map(|x| q(x, total)).collect() };
    MeasureTree::new(tree, to_q(atom), to_q(arc))
}
