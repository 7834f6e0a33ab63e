//! Points drawn from a measure tree and the small trees they span.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{MeasureTree, Q};
use crate::rng::open_unit;
use crate::tree::Vertex;

/// A point of the tree: a vertex carrying an atom, or a point inside the
/// edge of a leaf carrying diffuse mass, `pos` running from the attachment
/// vertex (0) toward the leaf (1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SamplePoint {
    Atom { vertex: Vertex },
    Arc { leaf: Vertex, pos: f64 },
}

impl SamplePoint {
    pub fn atom(v: Vertex) -> Self {
        SamplePoint::Atom { vertex: v }
    }

    pub fn arc(leaf: Vertex, pos: f64) -> Self {
        SamplePoint::Arc { leaf, pos }
    }

    pub fn validate(&self, mt: &MeasureTree) -> Result<()> {
        match *self {
            SamplePoint::Atom { vertex } => {
                mt.tree().check(vertex)?;
                if mt.atom(vertex).is_zero() {
                    return Err(Error::InvalidSamplePoint(format!(
                        "vertex {vertex} carries no atom"
                    )));
                }
            }
            SamplePoint::Arc { leaf, pos } => {
                mt.tree().check(leaf)?;
                if mt.tree().degree(leaf) != 1 {
                    return Err(Error::InvalidSamplePoint(format!("{leaf} is not a leaf")));
                }
                if !(pos > 0.0 && pos < 1.0) {
                    return Err(Error::InvalidSamplePoint(format!(
                        "arc position {pos} outside (0,1)"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Draws i.i.d. points from the measure of a tree.
#[derive(Debug, Clone)]
pub struct Sampler {
    cum: Vec<f64>,
    outcome: Vec<(Vertex, bool)>,
}

impl Sampler {
    pub fn new(mt: &MeasureTree) -> Self {
        let mut cum = Vec::new();
        let mut outcome = Vec::new();
        let mut acc = 0.0;
        for v in 0..mt.len() {
            for (mass, is_arc) in [(mt.atom(v), false), (mt.arc(v), true)] {
                if !mass.is_zero() {
                    acc += mass.to_f64().unwrap_or(0.0);
                    cum.push(acc);
                    outcome.push((v, is_arc));
                }
            }
        }
        Self { cum, outcome }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> SamplePoint {
        let total = *self.cum.last().expect("a probability measure has support");
        let u = open_unit(rng.next_u64()) * total;
        let i = self.cum.partition_point(|&c| c <= u).min(self.cum.len() - 1);
        let (v, is_arc) = self.outcome[i];
        if is_arc {
            SamplePoint::arc(v, open_unit(rng.next_u64()))
        } else {
            SamplePoint::atom(v)
        }
    }

    /// `m` points; a repeated position inside one arc is redrawn.
    pub fn draw_many<R: Rng + ?Sized>(&self, rng: &mut R, m: usize) -> Vec<SamplePoint> {
        let mut out: Vec<SamplePoint> = Vec::with_capacity(m);
        while out.len() < m {
            let p = self.draw(rng);
            if matches!(p, SamplePoint::Arc { .. }) && out.contains(&p) {
                continue;
            }
            out.push(p);
        }
        out
    }
}

/// A node of the spanned tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Node {
    Real(Vertex),
    /// A point inside the edge from `attach` to the leaf `leaf`.
    Inner { leaf: Vertex, attach: Vertex, pos: f64 },
}

/// The tree spanned by a list of points, with edges of the original tree
/// compressed and leaf edges subdivided at the arc points.
#[derive(Debug, Clone)]
pub(crate) struct Local {
    pub nodes: Vec<Node>,
    pub adj: Vec<Vec<usize>>,
    pub point_node: Vec<usize>,
}

impl Local {
    pub fn build(mt: &MeasureTree, points: &[SamplePoint]) -> Result<Self> {
        let tree = mt.tree();
        for p in points {
            p.validate(mt)?;
        }
        let mut keys = Vec::with_capacity(2 * points.len());
        for p in points {
            match *p {
                SamplePoint::Atom { vertex } => keys.push(vertex),
                SamplePoint::Arc { leaf, .. } => {
                    keys.push(leaf);
                    keys.push(tree.neighbors(leaf)[0]);
                }
            }
        }
        let sk = tree.skeleton(&keys);
        let mut nodes: Vec<Node> = sk.nodes.iter().map(|&v| Node::Real(v)).collect();
        let mut adj = vec![Vec::new(); nodes.len()];
        let index = |v: Vertex| sk.nodes.iter().position(|&w| w == v).expect("key in skeleton");
        for (i, p) in sk.parent.iter().enumerate() {
            if let Some(p) = *p {
                adj[i].push(p);
                adj[p].push(i);
            }
        }

        let mut point_node = vec![usize::MAX; points.len()];
        let mut arcs: Vec<(Vertex, f64, usize)> = Vec::new();
        for (i, p) in points.iter().enumerate() {
            match *p {
                SamplePoint::Atom { vertex } => point_node[i] = index(vertex),
                SamplePoint::Arc { leaf, pos } => arcs.push((leaf, pos, i)),
            }
        }
        arcs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut k = 0;
        while k < arcs.len() {
            let leaf = arcs[k].0;
            let attach = tree.neighbors(leaf)[0];
            let (li, ai) = (index(leaf), index(attach));
            adj[li].retain(|&w| w != ai);
            adj[ai].retain(|&w| w != li);
            let mut prev = ai;
            let mut last_pos = f64::NAN;
            while k < arcs.len() && arcs[k].0 == leaf {
                let (_, pos, i) = arcs[k];
                if pos != last_pos {
                    nodes.push(Node::Inner { leaf, attach, pos });
                    adj.push(Vec::new());
                    let id = nodes.len() - 1;
                    adj[prev].push(id);
                    adj[id].push(prev);
                    prev = id;
                    last_pos = pos;
                }
                point_node[i] = prev;
                k += 1;
            }
            adj[prev].push(li);
            adj[li].push(prev);
        }
        Ok(Self {
            nodes,
            adj,
            point_node,
        })
    }

    /// Parent and depth arrays from a BFS at node 0.
    pub fn rooted(&self) -> (Vec<usize>, Vec<u32>) {
        let n = self.nodes.len();
        let mut parent = vec![usize::MAX; n];
        let mut depth = vec![0u32; n];
        let mut queue = vec![0usize];
        parent[0] = 0;
        let mut i = 0;
        while i < queue.len() {
            let v = queue[i];
            i += 1;
            for &w in &self.adj[v] {
                if parent[w] == usize::MAX {
                    parent[w] = v;
                    depth[w] = depth[v] + 1;
                    queue.push(w);
                }
            }
        }
        (parent, depth)
    }
}

/// Median and direction queries on a [`Local`] tree.
pub(crate) struct LocalQuery<'a> {
    pub local: &'a Local,
    parent: Vec<usize>,
    depth: Vec<u32>,
}

impl<'a> LocalQuery<'a> {
    pub fn new(local: &'a Local) -> Self {
        let (parent, depth) = local.rooted();
        Self {
            local,
            parent,
            depth,
        }
    }

    pub fn parent_of(&self, v: usize) -> usize {
        self.parent[v]
    }

    pub fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a];
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b];
        }
        while a != b {
            a = self.parent[a];
            b = self.parent[b];
        }
        a
    }

    pub fn median(&self, x: usize, y: usize, z: usize) -> usize {
        let mut best = self.lca(x, y);
        for c in [self.lca(y, z), self.lca(x, z)] {
            if self.depth[c] > self.depth[best] {
                best = c;
            }
        }
        best
    }

    /// The neighbor of `c` on the way to `u != c`.
    pub fn toward(&self, c: usize, u: usize) -> usize {
        if self.depth[u] > self.depth[c] {
            let mut w = u;
            while self.depth[w] > self.depth[c] + 1 {
                w = self.parent[w];
            }
            if self.parent[w] == c {
                return w;
            }
        }
        self.parent[c]
    }

    /// `mu` of the component of the tree minus node `c` containing node `g`,
    /// a neighbor of `c`.
    pub fn side_mass(&self, mt: &MeasureTree, c: usize, g: usize) -> Q {
        let nodes = &self.local.nodes;
        match nodes[c] {
            Node::Real(x) => {
                let target = match nodes[g] {
                    Node::Real(v) => v,
                    Node::Inner { leaf, attach, .. } => {
                        if x == leaf {
                            attach
                        } else {
                            leaf
                        }
                    }
                };
                mt.component_mass(x, target)
            }
            Node::Inner { leaf, pos, .. } => {
                let outward = match nodes[g] {
                    Node::Real(v) => v == leaf,
                    Node::Inner { pos: p2, .. } => p2 > pos,
                };
                let t = Q::from_float(pos).expect("finite position");
                let beyond = mt.arc(leaf) * (Q::from_integer(1.into()) - &t) + mt.atom(leaf);
                if outward {
                    beyond
                } else {
                    Q::from_integer(1.into()) - mt.atom(leaf) - mt.arc(leaf) + mt.arc(leaf) * t
                }
            }
        }
    }
}

/// Sums `f` over all ordered `m`-tuples of atoms, weighted by the product
/// of their masses, exactly.
pub(crate) fn enumerate_atom_tuples<K, F>(
    mt: &MeasureTree,
    m: usize,
    max_tuples: u128,
    f: F,
) -> Result<BTreeMap<K, Q>>
where
    K: Ord + Send,
    F: Fn(&[SamplePoint]) -> Result<K> + Sync + Send,
{
    if !mt.is_atomic() {
        return Err(Error::Infeasible(
            "exact enumeration needs a purely atomic measure".into(),
        ));
    }
    let atoms: Vec<Vertex> = (0..mt.len()).filter(|&v| !mt.atom(v).is_zero()).collect();
    let k = atoms.len();
    let tuples = (k as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if tuples > max_tuples {
        return Err(Error::Infeasible(format!(
            "{k} atoms and m = {m} give {tuples} tuples (limit {max_tuples})"
        )));
    }
    let mut lcm = BigInt::one();
    for &v in &atoms {
        lcm = lcm.lcm(mt.atom(v).denom());
    }
    let scale = lcm
        .to_u128()
        .and_then(|l| l.checked_pow(m as u32))
        .ok_or_else(|| Error::Infeasible("mass denominators too large".into()))?;
    let num: Vec<u128> = atoms
        .iter()
        .map(|&v| (mt.atom(v) * Q::from_integer(lcm.clone())).to_integer().to_u128().unwrap())
        .collect();

    let first = if m == 0 { 1 } else { k };
    let parts: Vec<Result<BTreeMap<K, u128>>> = crate::rng::par_map(first, |i0| {
        let mut acc: BTreeMap<K, u128> = BTreeMap::new();
        let mut idx = vec![0usize; m];
        if m > 0 {
            idx[0] = i0;
        }
        let mut pts: Vec<SamplePoint> = Vec::with_capacity(m);
        loop {
            pts.clear();
            pts.extend(idx.iter().map(|&i| SamplePoint::atom(atoms[i])));
            let w: u128 = idx.iter().map(|&i| num[i]).product();
            *acc.entry(f(&pts)?).or_insert(0) += w;
            let mut j = m;
            loop {
                if j <= 1 {
                    return Ok(acc);
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < k {
                    break;
                }
                idx[j] = 0;
            }
        }
    });
    let mut out: BTreeMap<K, u128> = BTreeMap::new();
    for part in parts {
        for (key, w) in part? {
            *out.entry(key).or_insert(0) += w;
        }
    }
    Ok(out
        .into_iter()
        .map(|(key, w)| (key, Q::new(BigInt::from(w), BigInt::from(scale))))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::q;
    use crate::rng;
    use crate::tree::AlgebraicTree;

    #[test]
    fn sampler_frequencies() {
        let t = AlgebraicTree::from_edges(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let mt = MeasureTree::atomic(t, vec![q(1, 2), Q::zero(), q(1, 4), q(1, 4)]).unwrap();
        let s = Sampler::new(&mt);
        let mut r = rng::stream(3);
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            if let SamplePoint::Atom { vertex } = s.draw(&mut r) {
                counts[vertex] += 1;
            }
        }
        assert_eq!(counts[1], 0);
        assert!((counts[0] as f64 / 40_000.0 - 0.5).abs() < 0.02);
    }

    #[test]
    fn arc_points_subdivide() {
        let t = AlgebraicTree::from_edges(2, &[(0, 1)]).unwrap();
        let mt = MeasureTree::uniform_arcs(t).unwrap();
        let pts = [SamplePoint::arc(1, 0.7), SamplePoint::arc(1, 0.25)];
        let local = Local::build(&mt, &pts).unwrap();
        assert_eq!(local.nodes.len(), 4);
        let lq = LocalQuery::new(&local);
        let (a, b) = (local.point_node[0], local.point_node[1]);
        assert_eq!(lq.toward(b, a), a);
        // from the inner point at 0.25, the side toward the leaf has mass 3/4
        assert_eq!(lq.side_mass(&mt, b, a), q(3, 4));
    }

    #[test]
    fn invalid_points() {
        let t = AlgebraicTree::from_edges(2, &[(0, 1)]).unwrap();
        let mt = MeasureTree::atomic(t, vec![q(1, 2), q(1, 2)]).unwrap();
        assert!(SamplePoint::arc(1, 1.5).validate(&mt).is_err());
        assert!(SamplePoint::atom(7).validate(&mt).is_err());
    }
}
