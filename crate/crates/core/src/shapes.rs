//! Cladograms spanned by sampled points and their distributions.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::dist::{merge_counts, Distribution};
use crate::error::{Error, Result};
use crate::measure::{MeasureTree, Q};
use crate::rng;
use crate::sample::{enumerate_atom_tuples, Local, Node, SamplePoint, Sampler};

/// A finite tree whose leaves carry disjoint nonempty label sets covering
/// `1..=m`; inner vertices have degree three.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cladogram {
    pub adj: Vec<Vec<usize>>,
    pub labels: Vec<Vec<u32>>,
    pub m: usize,
}

impl Cladogram {
    pub fn new(adj: Vec<Vec<usize>>, mut labels: Vec<Vec<u32>>) -> Result<Self> {
        let n = adj.len();
        if n == 0 || labels.len() != n {
            return Err(Error::InvalidParameter("cladogram needs labelled vertices".into()));
        }
        let edges: usize = adj.iter().map(Vec::len).sum::<usize>() / 2;
        if edges + 1 != n {
            return Err(Error::InvalidParameter("cladogram is not a tree".into()));
        }
        let mut seen = Vec::new();
        for v in 0..n {
            let leaf = adj[v].len() <= 1;
            if leaf == labels[v].is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "vertex {v}: leaves must be labelled and inner vertices not"
                )));
            }
            if !leaf && adj[v].len() != 3 {
                return Err(Error::NotBinary(v));
            }
            labels[v].sort_unstable();
            seen.extend(labels[v].iter().copied());
        }
        seen.sort_unstable();
        let m = seen.len();
        if seen.iter().enumerate().any(|(i, &l)| l as usize != i + 1) {
            return Err(Error::InvalidParameter("labels must partition 1..=m".into()));
        }
        Ok(Self { adj, labels, m })
    }

    pub fn leaf_count(&self) -> usize {
        self.labels.iter().filter(|l| !l.is_empty()).count()
    }

    pub fn is_single_labelled(&self) -> bool {
        self.labels.iter().all(|l| l.len() <= 1)
    }

    /// Rooted at the leaf holding label 1: a leaf is its labels joined by
    /// `.`, an inner vertex is `(a,b)` with sorted parts.
    pub fn key(&self) -> String {
        let root = self
            .labels
            .iter()
            .position(|l| l.first() == Some(&1))
            .expect("label 1 is present");
        let own = join_labels(&self.labels[root]);
        if self.adj.len() == 1 {
            return own;
        }
        let child = self.adj[root][0];
        // iterative postorder
        let n = self.adj.len();
        let mut parent = vec![usize::MAX; n];
        parent[root] = root;
        parent[child] = root;
        let mut order = vec![child];
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            i += 1;
            for &w in &self.adj[v] {
                if parent[w] == usize::MAX {
                    parent[w] = v;
                    order.push(w);
                }
            }
        }
        let mut code = vec![String::new(); n];
        for &v in order.iter().rev() {
            if !self.labels[v].is_empty() {
                code[v] = join_labels(&self.labels[v]);
                continue;
            }
            let mut parts: Vec<String> = self.adj[v]
                .iter()
                .filter(|&&w| w != parent[v])
                .map(|&w| std::mem::take(&mut code[w]))
                .collect();
            parts.sort_unstable();
            code[v] = format!("({})", parts.join(","));
        }
        format!("{own}:{}", code[child])
    }

    /// Shape with the labels forgotten, as a centroid code; leaves keep
    /// the number of labels they carry.
    pub fn unlabelled_key(&self) -> String {
        let labels: Vec<String> = self.labels.iter().map(|l| l.len().to_string()).collect();
        crate::tree::centroid_code(&self.adj, &labels)
    }

    /// Label `i` becomes `perm[i - 1]`.
    pub fn relabel(&self, perm: &[u32]) -> Self {
        let labels = self
            .labels
            .iter()
            .map(|ls| {
                let mut out: Vec<u32> = ls.iter().map(|&l| perm[l as usize - 1]).collect();
                out.sort_unstable();
                out
            })
            .collect();
        Self {
            adj: self.adj.clone(),
            labels,
            m: self.m,
        }
    }
}

fn join_labels(ls: &[u32]) -> String {
    ls.iter().map(u32::to_string).collect::<Vec<_>>().join(".")
}

/// The cladogram spanned by `points`; label `i + 1` marks `points[i]`.
pub fn shape(mt: &MeasureTree, points: &[SamplePoint]) -> Result<Cladogram> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("shape needs at least one point".into()));
    }
    let tree = mt.tree();
    for p in points {
        if let SamplePoint::Atom { vertex } = *p {
            tree.check(vertex)?;
            if tree.degree(vertex) >= 3 {
                return Err(Error::SampleAtBranchPoint(vertex));
            }
        }
    }
    let local = Local::build(mt, points)?;
    let n = local.nodes.len();
    let mut adj = local.adj.clone();
    let mut labels: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, &node) in local.point_node.iter().enumerate() {
        labels[node].push(i as u32 + 1);
    }
    let mut alive = vec![true; n];

    let mut queue: Vec<usize> = (0..n).filter(|&v| adj[v].len() <= 1).collect();
    while let Some(v) = queue.pop() {
        if !alive[v] || !labels[v].is_empty() || adj[v].len() > 1 {
            continue;
        }
        alive[v] = false;
        if let Some(&p) = adj[v].first() {
            adj[p].retain(|&w| w != v);
            adj[v].clear();
            if adj[p].len() <= 1 {
                queue.push(p);
            }
        }
    }
    for v in 0..n {
        if alive[v] && labels[v].is_empty() && adj[v].len() == 2 {
            let (a, b) = (adj[v][0], adj[v][1]);
            adj[a].retain(|&w| w != v);
            adj[b].retain(|&w| w != v);
            adj[a].push(b);
            adj[b].push(a);
            adj[v].clear();
            alive[v] = false;
        }
    }
    for v in 0..n {
        if !alive[v] {
            continue;
        }
        let d = adj[v].len();
        if !labels[v].is_empty() && d >= 3 {
            return Err(match local.nodes[v] {
                Node::Real(x) => Error::SampleAtBranchPoint(x),
                Node::Inner { leaf, .. } => Error::SampleAtBranchPoint(leaf),
            });
        }
        if labels[v].is_empty() && d >= 4 {
            let x = match local.nodes[v] {
                Node::Real(x) => x,
                Node::Inner { leaf, .. } => leaf,
            };
            return Err(Error::NotBinary(x));
        }
    }
    // a sample inside the spanned subtree hangs off a new pendant leaf
    for v in 0..n {
        if alive[v] && !labels[v].is_empty() && adj[v].len() == 2 {
            let id = adj.len();
            adj.push(vec![v]);
            adj[v].push(id);
            let moved = std::mem::take(&mut labels[v]);
            labels.push(moved);
            alive.push(true);
        }
    }
    let ids: Vec<usize> = (0..adj.len()).filter(|&v| alive[v]).collect();
    let mut index = vec![usize::MAX; adj.len()];
    for (i, &v) in ids.iter().enumerate() {
        index[v] = i;
    }
    let new_adj = ids
        .iter()
        .map(|&v| adj[v].iter().map(|&w| index[w]).collect())
        .collect();
    let new_labels = ids.iter().map(|&v| std::mem::take(&mut labels[v])).collect();
    Cladogram::new(new_adj, new_labels)
}

pub fn canonical_key(c: &Cladogram) -> String {
    c.key()
}

/// Number of single-labelled cladograms on `m` leaves: `(2m-5)!!`.
pub fn count_cladograms(m: usize) -> BigUint {
    let mut out = BigUint::one();
    if m >= 3 {
        let mut k = 2 * m - 5;
        while k > 1 {
            out *= BigUint::from(k);
            k -= 2;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeDistribution {
    pub m: usize,
    pub dist: Distribution<String>,
}

impl ShapeDistribution {
    pub fn tv_distance(&self, other: &Self) -> Result<f64> {
        if self.m != other.m {
            return Err(Error::Mismatch(format!("m = {} vs m = {}", self.m, other.m)));
        }
        Ok(self.dist.tv_f64(&other.dist))
    }

    /// Exact total variation when both sides are exact.
    pub fn tv_exact(&self, other: &Self) -> Result<crate::measure::Q> {
        if self.m != other.m {
            return Err(Error::Mismatch(format!("m = {} vs m = {}", self.m, other.m)));
        }
        Ok(self.dist.tv(&other.dist))
    }
}

pub fn tv_distance(a: &ShapeDistribution, b: &ShapeDistribution) -> Result<f64> {
    a.tv_distance(b)
}

pub const EXACT_MAX_ATOMS: usize = 12;
pub const EXACT_MAX_M: usize = 6;

pub fn shape_distribution(mt: &MeasureTree, m: usize, mode: Mode) -> Result<ShapeDistribution> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let dist = match mode {
        Mode::Exact => {
            let atoms = mt.atoms().iter().filter(|a| !num_traits::Zero::is_zero(*a)).count();
            if atoms > EXACT_MAX_ATOMS || m > EXACT_MAX_M {
                return Err(Error::Infeasible(format!(
                    "exact shapes need at most {EXACT_MAX_ATOMS} atoms and m <= {EXACT_MAX_M}"
                )));
            }
            Distribution::exact(enumerate_atom_tuples(mt, m, u128::MAX, |pts| {
                shape(mt, pts).map(|c| c.key())
            })?)
        }
        Mode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidParameter("sample size must be positive".into()));
            }
            let sampler = Sampler::new(mt);
            let parts = rng::blocks(samples, seed, |r, range| {
                let mut acc: BTreeMap<String, u64> = BTreeMap::new();
                for _ in range {
                    let pts = sampler.draw_many(r, m);
                    let key = shape(mt, &pts).map(|c| c.key())?;
                    *acc.entry(key).or_insert(0) += 1;
                }
                Ok::<_, Error>(acc)
            });
            let parts: Result<Vec<_>> = parts.into_iter().collect();
            Distribution::from_counts(merge_counts(parts?))
        }
    };
    Ok(ShapeDistribution { m, dist })
}

/// Samples shapes from `trees` independent random trees, `per_tree`
/// samples from each.
pub fn annealed_shape_distribution<G>(
    m: usize,
    trees: usize,
    per_tree: usize,
    seed: u64,
    make_tree: G,
) -> Result<ShapeDistribution>
where
    G: Fn(u64) -> Result<MeasureTree> + Sync + Send,
{
    if m == 0 || trees == 0 || per_tree == 0 {
        return Err(Error::InvalidParameter("m, trees and per_tree must be positive".into()));
    }
    let parts = rng::blocks(trees, seed, |r, range| {
        let mut acc: BTreeMap<String, u64> = BTreeMap::new();
        for i in range {
            let mt = make_tree(rng::mix(seed, i as u64))?;
            let sampler = Sampler::new(&mt);
            for _ in 0..per_tree {
                let pts = sampler.draw_many(r, m);
                *acc.entry(shape(&mt, &pts)?.key()).or_insert(0) += 1;
            }
        }
        Ok::<_, Error>(acc)
    });
    let parts: Result<Vec<_>> = parts.into_iter().collect();
    Ok(ShapeDistribution {
        m,
        dist: Distribution::from_counts(merge_counts(parts?)),
    })
}

pub const DISTINCT_MAX_SUBSETS: u128 = 5_000_000;

/// Exact probability, for each unlabelled shape, that `m` i.i.d. samples
/// hit `m` distinct atoms spanning that shape. Summed over shapes this is
/// the probability that all samples differ.
pub fn distinct_shape_law(mt: &MeasureTree, m: usize) -> Result<BTreeMap<String, Q>> {
    if !mt.is_atomic() {
        return Err(Error::Infeasible("needs a purely atomic measure".into()));
    }
    let atoms: Vec<usize> = (0..mt.len()).filter(|&v| !mt.atom(v).is_zero()).collect();
    let k = atoms.len();
    if m == 0 || m > k {
        return Ok(BTreeMap::new());
    }
    let subsets = (0..m).fold(1u128, |acc, i| acc * (k - i) as u128 / (i + 1) as u128);
    if subsets > DISTINCT_MAX_SUBSETS {
        return Err(Error::Infeasible(format!("{subsets} subsets exceed the limit")));
    }
    let orderings: Q = Q::from_integer((1..=m as u64).product::<u64>().into());
    let mut out: BTreeMap<String, Q> = BTreeMap::new();
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let pts: Vec<SamplePoint> = idx.iter().map(|&i| SamplePoint::atom(atoms[i])).collect();
        let w = idx.iter().fold(orderings.clone(), |acc, &i| acc * mt.atom(atoms[i]));
        *out.entry(shape(mt, &pts)?.unlabelled_key()).or_insert_with(Q::zero) += w;
        let mut i = m;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if idx[i] < k - m + i {
                idx[i] += 1;
                for j in i + 1..m {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Keys of the single-labelled cladograms whose leaves are unlabelled
/// apart from being distinct; used to compare against the uniform law.
pub fn all_cladogram_keys(m: usize) -> Vec<String> {
    let mut keys: Vec<String> = enumerate_cladograms(m).iter().map(Cladogram::key).collect();
    keys.sort_unstable();
    keys.dedup();
    keys
}

/// All single-labelled cladograms on `m >= 1` leaves, by leaf insertion.
pub fn enumerate_cladograms(m: usize) -> Vec<Cladogram> {
    if m == 0 {
        return Vec::new();
    }
    if m == 1 {
        return vec![Cladogram::new(vec![vec![]], vec![vec![1]]).unwrap()];
    }
    let mut out = vec![Cladogram::new(vec![vec![1], vec![0]], vec![vec![1], vec![2]]).unwrap()];
    for label in 3..=m as u32 {
        let mut next = Vec::new();
        for c in &out {
            for (a, b) in edges(&c.adj) {
                let mut adj = c.adj.clone();
                let mut labels = c.labels.clone();
                let mid = adj.len();
                let leaf = mid + 1;
                adj[a].retain(|&w| w != b);
                adj[b].retain(|&w| w != a);
                adj[a].push(mid);
                adj[b].push(mid);
                adj.push(vec![a, b, leaf]);
                adj.push(vec![mid]);
                labels.push(Vec::new());
                labels.push(vec![label]);
                next.push(Cladogram::new(adj, labels).unwrap());
            }
        }
        out = next;
    }
    out
}

fn edges(adj: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for (v, list) in adj.iter().enumerate() {
        for &w in list {
            if v < w {
                e.push((v, w));
            }
        }
    }
    e
}

/// Uniform law on the single-labelled cladograms with `m` leaves.
pub fn uniform_cladogram_distribution(m: usize) -> ShapeDistribution {
    let keys = all_cladogram_keys(m);
    let w = crate::measure::q(1, keys.len() as i64);
    ShapeDistribution {
        m,
        dist: Distribution::exact(keys.into_iter().map(|k| (k, w.clone())).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{q, Q};
    use crate::tree::AlgebraicTree;
    use num_traits::Zero;

    fn star() -> MeasureTree {
        MeasureTree::uniform_leaves(AlgebraicTree::from_edges(4, &[(0, 1), (1, 2), (1, 3)]).unwrap())
    }

    fn line() -> MeasureTree {
        MeasureTree::uniform_arcs(AlgebraicTree::from_edges(2, &[(0, 1)]).unwrap()).unwrap()
    }

    #[test]
    fn three_leaves_of_a_star() {
        let c = shape(&star(), &[SamplePoint::atom(0), SamplePoint::atom(2), SamplePoint::atom(3)]).unwrap();
        assert_eq!(c.key(), "1:(2,3)");
        assert_eq!(c.leaf_count(), 3);
    }

    #[test]
    fn branch_point_samples_rejected() {
        let t = AlgebraicTree::from_edges(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let mt = MeasureTree::atomic(t, vec![q(1, 4), q(1, 4), q(1, 4), q(1, 4)]).unwrap();
        assert_eq!(
            shape(&mt, &[SamplePoint::atom(1), SamplePoint::atom(0)]).unwrap_err(),
            Error::SampleAtBranchPoint(1)
        );
    }

    #[test]
    fn interior_sample_gets_a_pendant_leaf() {
        // path 0-1-2-3-4 with 5 a spur at 3; atoms on 0, 2, 4, 5
        let t = AlgebraicTree::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (3, 5)]).unwrap();
        let w = q(1, 4);
        let mt = MeasureTree::atomic(
            t,
            vec![w.clone(), Q::zero(), w.clone(), Q::zero(), w.clone(), w],
        )
        .unwrap();
        let pts = [0, 2, 4, 5].map(SamplePoint::atom);
        let c = shape(&mt, &pts).unwrap();
        assert_eq!(c.leaf_count(), 4);
        assert_eq!(c.adj.len(), 6);
        // sample 2 sits between 1 and the rest
        assert_eq!(c.key(), "1:((3,4),2)");
    }

    #[test]
    fn linear_tree_gives_combs() {
        let mt = line();
        let pts = [0.9, 0.1, 0.5, 0.3].map(|p| SamplePoint::arc(1, p));
        let c = shape(&mt, &pts).unwrap();
        // order along the line: 2, 4, 3, 1
        assert_eq!(c.key(), "1:((2,4),3)");
        let c5 = shape(&mt, &[0.1, 0.2, 0.3, 0.4, 0.5].map(|p| SamplePoint::arc(1, p))).unwrap();
        assert_eq!(c5.key(), "1:(((4,5),3),2)");
    }

    #[test]
    fn coincident_atoms_merge() {
        let c = shape(&star(), &[SamplePoint::atom(0), SamplePoint::atom(0)]).unwrap();
        assert_eq!(c.key(), "1.2");
        let c = shape(&star(), &[SamplePoint::atom(0), SamplePoint::atom(2), SamplePoint::atom(0)]).unwrap();
        assert_eq!(c.key(), "1.3:2");
    }

    #[test]
    fn cladogram_counts() {
        assert_eq!(count_cladograms(1), BigUint::from(1u32));
        assert_eq!(count_cladograms(2), BigUint::from(1u32));
        for m in 1..=7 {
            assert_eq!(BigUint::from(all_cladogram_keys(m).len()), count_cladograms(m), "m = {m}");
        }
        assert_eq!(count_cladograms(5), BigUint::from(15u32));
    }

    #[test]
    fn exact_distributions() {
        let c = MeasureTree::atomic(AlgebraicTree::from_edges(2, &[(0, 1)]).unwrap(), vec![q(1, 2), q(1, 2)]).unwrap();
        let d = shape_distribution(&c, 2, Mode::Exact).unwrap();
        assert_eq!(d.dist.get(&"1:2".to_string()), q(1, 2));
        assert_eq!(d.dist.get(&"1.2".to_string()), q(1, 2));
        let s = shape_distribution(&star(), 3, Mode::Exact).unwrap();
        assert_eq!(s.dist.get(&"1:(2,3)".to_string()), q(6, 27));
        assert_eq!(s.dist.total(), Q::from_integer(1.into()));
        assert!(shape_distribution(&line(), 2, Mode::Exact).is_err());
    }

    #[test]
    fn sampled_is_reproducible_and_close() {
        let a = shape_distribution(&star(), 3, Mode::Sampled { samples: 20_000, seed: 5 }).unwrap();
        let b = shape_distribution(&star(), 3, Mode::Sampled { samples: 20_000, seed: 5 }).unwrap();
        assert_eq!(a, b);
        let e = shape_distribution(&star(), 3, Mode::Exact).unwrap();
        assert!(a.tv_distance(&e).unwrap() < 0.03);
        assert_eq!(a.tv_distance(&a).unwrap(), 0.0);
    }
}
