//! Subtree masses, empirical branch point distributions, distance
//! polynomials, VC shattering and Glivenko-Cantelli experiments.

use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::dist::{merge_counts, Distribution};
use crate::error::{Error, Result};
use crate::measure::{q_to_f64, MeasureTree, Q};
use crate::rng::{self, StreamRng};
use crate::sample::{enumerate_atom_tuples, Local, LocalQuery, Node, SamplePoint, Sampler};
use crate::shapes::Mode;
use crate::tree::{AlgebraicTree, Side, Vertex};

/// `1{u != c} * mu(S_c(u))` with `c = c(u, v, w)`.
pub fn eta(mt: &MeasureTree, u: SamplePoint, v: SamplePoint, w: SamplePoint) -> Result<Q> {
    let local = Local::build(mt, &[u, v, w])?;
    let lq = LocalQuery::new(&local);
    let [a, b, c] = [0, 1, 2].map(|i| local.point_node[i]);
    Ok(eta_nodes(mt, &lq, a, b, c))
}

fn eta_nodes(mt: &MeasureTree, lq: &LocalQuery, a: usize, b: usize, c: usize) -> Q {
    let med = lq.median(a, b, c);
    if med == a {
        Q::zero()
    } else {
        lq.side_mass(mt, med, lq.toward(med, a))
    }
}

/// Entries `(eta(u,v,w), eta(v,u,w), eta(w,u,v))` for all `i < j < k`,
/// flattened in lexicographic order of the triples.
pub type MassTensor = Vec<Q>;

pub fn mass_tensor(mt: &MeasureTree, points: &[SamplePoint]) -> Result<MassTensor> {
    let m = points.len();
    if m < 3 {
        for p in points {
            p.validate(mt)?;
        }
        return Ok(Vec::new());
    }
    let local = Local::build(mt, points)?;
    let lq = LocalQuery::new(&local);
    let node = &local.point_node;
    let mut out = Vec::with_capacity(m * (m - 1) * (m - 2) / 2);
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let (a, b, c) = (node[i], node[j], node[k]);
                out.push(eta_nodes(mt, &lq, a, b, c));
                out.push(eta_nodes(mt, &lq, b, a, c));
                out.push(eta_nodes(mt, &lq, c, a, b));
            }
        }
    }
    Ok(out)
}

pub const MASSDIST_MAX_TUPLES: u128 = 5_000_000;

/// Law of the subtree-mass tensor of `m` i.i.d. points.
pub fn massdist(mt: &MeasureTree, m: usize, mode: Mode) -> Result<Distribution<MassTensor>> {
    match mode {
        Mode::Exact => Ok(Distribution::exact(enumerate_atom_tuples(
            mt,
            m,
            MASSDIST_MAX_TUPLES,
            |pts| mass_tensor(mt, pts),
        )?)),
        Mode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidParameter("sample size must be positive".into()));
            }
            let sampler = Sampler::new(mt);
            let parts = rng::blocks(samples, seed, |r, range| {
                let mut acc: BTreeMap<MassTensor, u64> = BTreeMap::new();
                for _ in range {
                    let pts = sampler.draw_many(r, m);
                    *acc.entry(mass_tensor(mt, &pts)?).or_insert(0) += 1;
                }
                Ok::<_, Error>(acc)
            });
            let parts: Result<Vec<_>> = parts.into_iter().collect();
            Ok(Distribution::from_counts(merge_counts(parts?)))
        }
    }
}

/// The exact law of the 3-tensor, grouped by the branch point of the
/// triple: each sample falls either on the branch point itself or into one
/// of its components, no two into the same one.
pub fn massdist3_by_branch_point(mt: &MeasureTree) -> Result<Distribution<MassTensor>> {
    if !mt.is_atomic() {
        return Err(Error::Infeasible("grouping needs a purely atomic measure".into()));
    }
    let mut weights: BTreeMap<MassTensor, Q> = BTreeMap::new();
    for v in 0..mt.len() {
        // (probability, eta value, component id or None for v itself)
        let mut slots: Vec<(Q, Q, Option<usize>)> = mt
            .component_masses(v)
            .into_iter()
            .enumerate()
            .filter(|(_, m)| !m.is_zero())
            .map(|(i, m)| (m.clone(), m, Some(i)))
            .collect();
        if !mt.atom(v).is_zero() {
            slots.push((mt.atom(v).clone(), Q::zero(), None));
        }
        for a in &slots {
            for b in &slots {
                if a.2.is_some() && a.2 == b.2 {
                    continue;
                }
                for c in &slots {
                    if c.2.is_some() && (c.2 == a.2 || c.2 == b.2) {
                        continue;
                    }
                    let w = &a.0 * &b.0 * &c.0;
                    let key = vec![a.1.clone(), b.1.clone(), c.1.clone()];
                    *weights.entry(key).or_insert_with(Q::zero) += w;
                }
            }
        }
    }
    Ok(Distribution::exact(weights))
}

/// Where a sampled branch point sits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Location {
    Vertex { vertex: Vertex },
    Arc { leaf: Vertex, pos: f64 },
}

/// `(1/n) sum_k delta_{c(u_{3k+1}, u_{3k+2}, u_{3k+3})}` from `3n` points.
#[derive(Debug, Clone)]
pub struct EmpiricalBpd {
    pub points: Vec<SamplePoint>,
    pub branch_points: Vec<Location>,
}

impl EmpiricalBpd {
    pub fn n(&self) -> usize {
        self.branch_points.len()
    }

    /// Exact mass of each vertex; mass on arcs is left out.
    pub fn vertex_masses(&self, len: usize) -> Vec<Q> {
        let mut counts = vec![0u64; len];
        for b in &self.branch_points {
            if let Location::Vertex { vertex } = *b {
                counts[vertex] += 1;
            }
        }
        let n = self.n() as i64;
        counts
            .into_iter()
            .map(|c| Q::new((c as i64).into(), n.into()))
            .collect()
    }
}

pub fn empirical_bpd(mt: &MeasureTree, n: usize, seed: u64) -> Result<EmpiricalBpd> {
    let mut r = rng::stream(seed);
    empirical_bpd_with(mt, n, &Sampler::new(mt), &mut r)
}

fn empirical_bpd_with(
    mt: &MeasureTree,
    n: usize,
    sampler: &Sampler,
    r: &mut StreamRng,
) -> Result<EmpiricalBpd> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let points = sampler.draw_many(r, 3 * n);
    let local = Local::build(mt, &points)?;
    let lq = LocalQuery::new(&local);
    let branch_points = (0..n)
        .map(|k| {
            let [a, b, c] = [0, 1, 2].map(|i| local.point_node[3 * k + i]);
            match local.nodes[lq.median(a, b, c)] {
                Node::Real(v) => Location::Vertex { vertex: v },
                Node::Inner { leaf, pos, .. } => Location::Arc { leaf, pos },
            }
        })
        .collect();
    Ok(EmpiricalBpd {
        points,
        branch_points,
    })
}

/// A bounded function of a distance matrix with a declared Lipschitz
/// constant for the sup norm.
type BoxedMatrixFn = Box<dyn Fn(&[Vec<f64>]) -> f64 + Send + Sync>;

pub struct MatrixFn {
    pub f: BoxedMatrixFn,
    pub lipschitz: f64,
}

impl MatrixFn {
    pub fn new<F: Fn(&[Vec<f64>]) -> f64 + Send + Sync + 'static>(lipschitz: f64, f: F) -> Self {
        Self {
            f: Box::new(f),
            lipschitz,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(0.0, move |_| c)
    }

    /// Mean of the strictly upper triangular entries, Lipschitz constant 1.
    pub fn mean_offdiagonal() -> Self {
        Self::new(1.0, |m| {
            let k = m.len();
            if k < 2 {
                return 0.0;
            }
            let s: f64 = m.iter().enumerate().map(|(i, row)| row[i + 1..].iter().sum::<f64>()).sum();
            s / (k * (k - 1) / 2) as f64
        })
    }

    /// The single entry `(i, j)`.
    pub fn entry(i: usize, j: usize) -> Self {
        Self::new(1.0, move |m| m[i][j])
    }

    pub fn eval(&self, m: &[Vec<f64>]) -> f64 {
        (self.f)(m)
    }
}

/// Exact `E phi((r_nu(u_i, u_j))_{ij})` over `m` i.i.d. atoms.
pub fn distance_polynomial_exact(mt: &MeasureTree, m: usize, phi: &MatrixFn) -> Result<f64> {
    mt.nu()?;
    let dist = enumerate_atom_tuples(mt, m, MASSDIST_MAX_TUPLES, |pts| {
        let vs: Vec<Vertex> = pts
            .iter()
            .map(|p| match *p {
                SamplePoint::Atom { vertex } => vertex,
                SamplePoint::Arc { .. } => unreachable!("atomic enumeration"),
            })
            .collect();
        mt.distance_matrix(&vs)
    })?;
    Ok(dist
        .iter()
        .map(|(mat, w)| q_to_f64(w) * phi.eval(&to_f64_matrix(mat)))
        .sum())
}

fn to_f64_matrix(m: &[Vec<Q>]) -> Vec<Vec<f64>> {
    m.iter().map(|row| row.iter().map(q_to_f64).collect()).collect()
}

/// One draw of the empirical polynomial: `3n` points, the matrix of
/// `r_{nu_n}` over the first `m` of them, and, for atomic trees, the matrix
/// of `r_nu` over the same points and the interval deviation of `nu_n`.
#[derive(Debug, Clone, Serialize)]
pub struct PhiTrial {
    pub phi_empirical: f64,
    pub phi_true: Option<f64>,
    pub sup_interval_dev: Option<f64>,
}

impl PhiTrial {
    pub fn deviation(&self) -> Option<f64> {
        self.phi_true.map(|t| (t - self.phi_empirical).abs())
    }
}

pub fn phi_trial(
    mt: &MeasureTree,
    m: usize,
    n: usize,
    phi: &MatrixFn,
    sampler: &Sampler,
    r: &mut StreamRng,
) -> Result<PhiTrial> {
    if 3 * n < m {
        return Err(Error::InvalidParameter("need 3n >= m".into()));
    }
    let bpd = empirical_bpd_with(mt, n, sampler, r)?;
    let local = Local::build(mt, &bpd.points)?;
    let lq = LocalQuery::new(&local);
    let mut node_mass = vec![0.0f64; local.nodes.len()];
    for k in 0..n {
        let [a, b, c] = [0, 1, 2].map(|i| local.point_node[3 * k + i]);
        node_mass[lq.median(a, b, c)] += 1.0 / n as f64;
    }
    let nodes: Vec<usize> = local.point_node[..m].to_vec();
    let mut emp = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let d = lq.path_sum(nodes[i], nodes[j], &node_mass)
                - 0.5 * node_mass[nodes[i]]
                - 0.5 * node_mass[nodes[j]];
            emp[i][j] = d;
            emp[j][i] = d;
        }
    }
    let phi_empirical = phi.eval(&emp);
    if !mt.is_atomic() {
        return Ok(PhiTrial {
            phi_empirical,
            phi_true: None,
            sup_interval_dev: None,
        });
    }
    let vs: Vec<Vertex> = bpd.points[..m]
        .iter()
        .map(|p| match *p {
            SamplePoint::Atom { vertex } => vertex,
            SamplePoint::Arc { .. } => unreachable!("atomic tree"),
        })
        .collect();
    let exact = to_f64_matrix(&mt.distance_matrix(&vs)?);
    let nu: Vec<f64> = mt.nu()?.iter().map(q_to_f64).collect();
    let nu_n: Vec<f64> = bpd.vertex_masses(mt.len()).iter().map(q_to_f64).collect();
    let dev: Vec<f64> = nu.iter().zip(&nu_n).map(|(a, b)| a - b).collect();
    let zero = vec![0.0; mt.len()];
    Ok(PhiTrial {
        phi_empirical,
        phi_true: Some(phi.eval(&exact)),
        sup_interval_dev: Some(sup_over_intervals(mt.tree(), &dev, &zero)),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PhiEstimate {
    pub estimate: f64,
    pub trials: usize,
    pub std_error: f64,
}

/// Monte Carlo estimate of `Phi_n` from `trials` independent draws.
pub fn distance_polynomial_empirical(
    mt: &MeasureTree,
    m: usize,
    phi: &MatrixFn,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<(PhiEstimate, Vec<PhiTrial>)> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let sampler = Sampler::new(mt);
    let parts = rng::blocks(trials, seed, |r, range| {
        range
            .map(|_| phi_trial(mt, m, n, phi, &sampler, r))
            .collect::<Result<Vec<_>>>()
    });
    let mut all = Vec::with_capacity(trials);
    for p in parts {
        all.extend(p?);
    }
    let vals: Vec<f64> = all.iter().map(|t| t.phi_empirical).collect();
    let mean = vals.iter().sum::<f64>() / trials as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials.max(2) - 1) as f64;
    Ok((
        PhiEstimate {
            estimate: mean,
            trials,
            std_error: (var / trials as f64).sqrt(),
        },
        all,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Intervals,
    Components,
}

impl Family {
    pub fn vc_bound(self) -> f64 {
        match self {
            Family::Intervals => 2.0,
            Family::Components => 3.0,
        }
    }

    fn sets(self, tree: &AlgebraicTree) -> Vec<u64> {
        let n = tree.len();
        let mask = |vs: &[Vertex]| vs.iter().fold(0u64, |m, &v| m | 1 << v);
        let mut out = Vec::new();
        match self {
            Family::Intervals => {
                for u in 0..n {
                    for v in u..n {
                        out.push(mask(&tree.interval(u, v)));
                    }
                }
            }
            Family::Components => {
                for v in 0..n {
                    for &w in tree.neighbors(v) {
                        out.push(mask(&tree.component(v, w)));
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShatterReport {
    pub shattered: bool,
    pub witness: Option<Vec<Vertex>>,
    pub sets_checked: usize,
}

pub const SHATTER_MAX_VERTICES: usize = 24;

/// Whether some `k`-set of vertices is shattered by the family.
pub fn vc_shatter_check(tree: &AlgebraicTree, family: Family, k: usize) -> Result<ShatterReport> {
    let n = tree.len();
    if n > SHATTER_MAX_VERTICES || k > 6 {
        return Err(Error::Infeasible(format!(
            "shatter search limited to {SHATTER_MAX_VERTICES} vertices and k <= 6"
        )));
    }
    let sets = family.sets(tree);
    let mut subset: Vec<usize> = (0..k).collect();
    let mut checked = 0;
    if k > n {
        return Ok(ShatterReport {
            shattered: false,
            witness: None,
            sets_checked: 0,
        });
    }
    loop {
        checked += 1;
        let x = subset.iter().fold(0u64, |m, &v| m | 1 << v);
        let mut seen = vec![false; 1 << k];
        let mut distinct = 0;
        for s in &sets {
            let t = s & x;
            let mut code = 0usize;
            for (bit, &v) in subset.iter().enumerate() {
                if t >> v & 1 == 1 {
                    code |= 1 << bit;
                }
            }
            if !seen[code] {
                seen[code] = true;
                distinct += 1;
            }
        }
        if distinct == 1 << k {
            return Ok(ShatterReport {
                shattered: true,
                witness: Some(subset),
                sets_checked: checked,
            });
        }
        // next k-subset
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(ShatterReport {
                    shattered: false,
                    witness: None,
                    sets_checked: checked,
                });
            }
            i -= 1;
            if subset[i] < n - k + i {
                subset[i] += 1;
                for j in i + 1..k {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Largest `|sum over [u,v] of dev|` over all vertex intervals, where a
/// leaf edge's `arc_dev` counts when the interval contains the edge.
fn sup_over_intervals(tree: &AlgebraicTree, dev: &[f64], arc_dev: &[f64]) -> f64 {
    let n = tree.len();
    let mut best = 0.0f64;
    let mut stack: Vec<(Vertex, Vertex, f64)> = Vec::new();
    for u in 0..n {
        stack.clear();
        stack.push((u, usize::MAX, dev[u]));
        while let Some((x, from, s)) = stack.pop() {
            best = best.max(s.abs());
            for &y in tree.neighbors(x) {
                if y == from {
                    continue;
                }
                let mut t = s + dev[y];
                if tree.degree(y) == 1 {
                    t += arc_dev[y];
                }
                if tree.degree(x) == 1 {
                    t += arc_dev[x];
                }
                stack.push((y, x, t));
            }
        }
    }
    best
}

fn sup_over_components(tree: &AlgebraicTree, dev: &[f64], arc_dev: &[f64]) -> f64 {
    let mut sub: Vec<f64> = (0..tree.len()).map(|v| dev[v] + arc_dev[v]).collect();
    for &v in tree.preorder().iter().rev() {
        if let Some(p) = tree.parent(v) {
            sub[p] += sub[v];
        }
    }
    let total = sub[tree.root()];
    let mut best = 0.0f64;
    for v in 0..tree.len() {
        for &w in tree.neighbors(v) {
            let d = match tree.component_side(v, w) {
                Side::Below(c) => sub[c],
                Side::Above => total - sub[v] + arc_dev[v],
                Side::Itself => unreachable!("neighbors differ"),
            };
            best = best.max(d.abs());
        }
    }
    best
}

#[derive(Debug, Clone, Serialize)]
pub struct GcTrial {
    pub trial: usize,
    pub n: usize,
    pub sup_dev: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GcReport {
    pub family: Family,
    pub n: usize,
    pub trials: Vec<GcTrial>,
    pub mean_sup: f64,
    pub max_sup: f64,
    pub bound: f64,
}

impl GcReport {
    pub fn bound_holds(&self) -> bool {
        self.max_sup <= self.bound
    }
}

/// Exact `sup_S |mu(S) - mu_n(S)|` over the family, per trial.
pub fn glivenko_cantelli_sup(
    mt: &MeasureTree,
    family: Family,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<GcReport> {
    if n == 0 || trials == 0 {
        return Err(Error::InvalidParameter("n and trials must be positive".into()));
    }
    let tree = mt.tree();
    let len = tree.len();
    let atom: Vec<f64> = mt.atoms().iter().map(q_to_f64).collect();
    let arc: Vec<f64> = mt.arcs().iter().map(q_to_f64).collect();
    let sampler = Sampler::new(mt);
    let bound = 96.0 * (family.vc_bound() / n as f64).sqrt();
    let parts = rng::blocks(trials, seed, |r, range| {
        let mut out = Vec::with_capacity(range.len());
        for trial in range {
            let mut ca = vec![0u32; len];
            let mut cb = vec![0u32; len];
            for _ in 0..n {
                match sampler.draw(r) {
                    SamplePoint::Atom { vertex } => ca[vertex] += 1,
                    SamplePoint::Arc { leaf, .. } => cb[leaf] += 1,
                }
            }
            let inv = 1.0 / n as f64;
            let dev: Vec<f64> = (0..len).map(|v| atom[v] - ca[v] as f64 * inv).collect();
            let arc_dev: Vec<f64> = (0..len).map(|v| arc[v] - cb[v] as f64 * inv).collect();
            let sup_dev = match family {
                Family::Intervals => sup_over_intervals(tree, &dev, &arc_dev),
                Family::Components => sup_over_components(tree, &dev, &arc_dev),
            };
            out.push(GcTrial {
                trial,
                n,
                sup_dev,
                bound,
            });
        }
        out
    });
    let trials: Vec<GcTrial> = parts.into_iter().flatten().collect();
    let mean_sup = trials.iter().map(|t| t.sup_dev).sum::<f64>() / trials.len() as f64;
    let max_sup = trials.iter().map(|t| t.sup_dev).fold(0.0, f64::max);
    Ok(GcReport {
        family,
        n,
        trials,
        mean_sup,
        max_sup,
        bound,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportMethod {
    /// Optimal coupling from a min-cost flow.
    Exact,
    /// Largest one-dimensional distance over coordinates; a lower bound.
    CoordinateLowerBound,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Transport {
    pub distance: f64,
    pub method: TransportMethod,
}

pub const EXACT_TRANSPORT_MAX_SUPPORT: usize = 400;

/// 1-Wasserstein distance with the sup-norm ground metric.
pub fn wasserstein_linf(a: &Distribution<MassTensor>, b: &Distribution<MassTensor>) -> Result<Transport> {
    let pa = to_points(a);
    let pb = to_points(b);
    if pa.is_empty() || pb.is_empty() {
        return Err(Error::Mismatch("empty distribution".into()));
    }
    let dim = pa[0].0.len();
    if pa.iter().chain(pb.iter()).any(|p| p.0.len() != dim) {
        return Err(Error::Mismatch("tensors of different sizes".into()));
    }
    if pa.len() <= EXACT_TRANSPORT_MAX_SUPPORT && pb.len() <= EXACT_TRANSPORT_MAX_SUPPORT {
        let cost: Vec<Vec<f64>> = pa
            .iter()
            .map(|(x, _)| {
                pb.iter()
                    .map(|(y, _)| x.iter().zip(y).map(|(s, t)| (s - t).abs()).fold(0.0, f64::max))
                    .collect()
            })
            .collect();
        let supply: Vec<f64> = pa.iter().map(|p| p.1).collect();
        let demand: Vec<f64> = pb.iter().map(|p| p.1).collect();
        return Ok(Transport {
            distance: transport(&supply, &demand, &cost),
            method: TransportMethod::Exact,
        });
    }
    let mut best = 0.0f64;
    for d in 0..dim {
        let xa: Vec<(f64, f64)> = pa.iter().map(|(x, w)| (x[d], *w)).collect();
        let xb: Vec<(f64, f64)> = pb.iter().map(|(x, w)| (x[d], *w)).collect();
        best = best.max(w1_line(xa, xb));
    }
    Ok(Transport {
        distance: best,
        method: TransportMethod::CoordinateLowerBound,
    })
}

fn to_points(d: &Distribution<MassTensor>) -> Vec<(Vec<f64>, f64)> {
    let total = q_to_f64(&d.total());
    d.weights
        .iter()
        .map(|(k, w)| (k.iter().map(q_to_f64).collect(), w.to_f64().unwrap_or(0.0) / total))
        .collect()
}

/// `int |F - G|` for two weighted point sets on the line.
fn w1_line(mut a: Vec<(f64, f64)>, b: Vec<(f64, f64)>) -> f64 {
    a.extend(b.into_iter().map(|(x, w)| (x, -w)));
    a.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut acc = 0.0;
    let mut out = 0.0;
    for i in 0..a.len() {
        acc += a[i].1;
        if i + 1 < a.len() {
            out += acc.abs() * (a[i + 1].0 - a[i].0);
        }
    }
    out
}

/// Min-cost transportation by successive shortest paths with potentials.
fn transport(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> f64 {
    const EPS: f64 = 1e-12;
    let (na, nb) = (supply.len(), demand.len());
    let mut left = supply.to_vec();
    let mut right = demand.to_vec();
    // flow[i][j] on the edge a_i -> b_j; residual reverse edges have cost -c
    let mut flow = vec![vec![0.0f64; nb]; na];
    let mut pa = vec![0.0f64; na];
    let mut pb = vec![0.0f64; nb];
    let mut total = 0.0;
    loop {
        let remaining: f64 = left.iter().sum();
        if remaining <= EPS {
            break;
        }
        // Dijkstra from all sources with leftover supply over the residual graph
        let mut da = vec![f64::INFINITY; na];
        let mut db = vec![f64::INFINITY; nb];
        let mut prev_b = vec![usize::MAX; nb];
        let mut prev_a = vec![usize::MAX; na];
        let mut done_a = vec![false; na];
        let mut done_b = vec![false; nb];
        for i in 0..na {
            if left[i] > EPS {
                da[i] = 0.0;
            }
        }
        loop {
            // pick the closest unfinished node
            let mut best = f64::INFINITY;
            let mut pick: Option<(bool, usize)> = None;
            for i in 0..na {
                if !done_a[i] && da[i] < best {
                    best = da[i];
                    pick = Some((true, i));
                }
            }
            for j in 0..nb {
                if !done_b[j] && db[j] < best {
                    best = db[j];
                    pick = Some((false, j));
                }
            }
            let Some((is_a, x)) = pick else { break };
            if is_a {
                done_a[x] = true;
                for j in 0..nb {
                    let rc = cost[x][j] + pa[x] - pb[j];
                    let d = da[x] + rc.max(0.0);
                    if d < db[j] {
                        db[j] = d;
                        prev_b[j] = x;
                    }
                }
            } else {
                done_b[x] = true;
                for i in 0..na {
                    if flow[i][x] > EPS {
                        let rc = -cost[i][x] + pb[x] - pa[i];
                        let d = db[x] + rc.max(0.0);
                        if d < da[i] {
                            da[i] = d;
                            prev_a[i] = x;
                        }
                    }
                }
            }
        }
        let sink = (0..nb)
            .filter(|&j| right[j] > EPS && db[j].is_finite())
            .min_by(|&x, &y| db[x].total_cmp(&db[y]));
        let Some(sink) = sink else { break };
        for i in 0..na {
            if da[i].is_finite() {
                pa[i] += da[i];
            }
        }
        for j in 0..nb {
            if db[j].is_finite() {
                pb[j] += db[j];
            }
        }
        // walk back to find the bottleneck
        let mut amount = right[sink];
        let mut j = sink;
        loop {
            let i = prev_b[j];
            if prev_a[i] == usize::MAX {
                amount = amount.min(left[i]);
                break;
            }
            let jb = prev_a[i];
            amount = amount.min(flow[i][jb]);
            j = jb;
        }
        let mut j = sink;
        loop {
            let i = prev_b[j];
            flow[i][j] += amount;
            total += amount * cost[i][j];
            if prev_a[i] == usize::MAX {
                left[i] -= amount;
                break;
            }
            let jb = prev_a[i];
            flow[i][jb] -= amount;
            total -= amount * cost[i][jb];
            j = jb;
        }
        right[sink] -= amount;
    }
    total
}

impl LocalQuery<'_> {
    /// Sum of `mass` over the nodes on the path from `a` to `b`.
    pub(crate) fn path_sum(&self, a: usize, b: usize, mass: &[f64]) -> f64 {
        let w = self.lca(a, b);
        let mut s = mass[w];
        for start in [a, b] {
            let mut v = start;
            while v != w {
                s += mass[v];
                v = self.parent_of(v);
            }
        }
        s
    }
}

/// Draws `n` points and returns them, for callers running their own loops.
pub fn draw_points<R: Rng>(mt: &MeasureTree, n: usize, r: &mut R) -> Vec<SamplePoint> {
    Sampler::new(mt).draw_many(r, n)
}
