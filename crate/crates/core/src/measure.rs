//! Measure trees with exact rational masses.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::tree::{centroid_code, AlgebraicTree, CanonicalForm, Side, Vertex};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// An algebraic tree with atoms on vertices and diffuse mass on leaf edges.
///
/// `arc[l]` is spread uniformly along the edge ending at the leaf `l`. On a
/// two-vertex tree both leaves share that edge, so all arc mass is kept on
/// the leaf that is not the internal root.
#[derive(Debug, Clone)]
pub struct MeasureTree {
    tree: AlgebraicTree,
    atom: Vec<Q>,
    arc: Vec<Q>,
    sub: Vec<Q>,
    nu: OnceLock<Vec<Q>>,
}

/// Push-forward of three independent samples under the branch point map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchPointDistribution {
    pub mass: Vec<Q>,
}

impl BranchPointDistribution {
    pub fn total(&self) -> Q {
        self.mass.iter().fold(Q::zero(), |a, b| a + b)
    }
}

impl MeasureTree {
    pub fn new(tree: AlgebraicTree, atom: Vec<Q>, mut arc: Vec<Q>) -> Result<Self> {
        let n = tree.len();
        if atom.len() != n || arc.len() != n {
            return Err(Error::InvalidMeasure(format!(
                "expected {n} masses, got {} atoms and {} arcs",
                atom.len(),
                arc.len()
            )));
        }
        if let Some(v) = (0..n).find(|&v| atom[v].is_negative() || arc[v].is_negative()) {
            return Err(Error::InvalidMeasure(format!("negative mass at vertex {v}")));
        }
        if let Some(v) = (0..n).find(|&v| !arc[v].is_zero() && tree.degree(v) != 1) {
            return Err(Error::InvalidMeasure(format!(
                "arc mass at vertex {v}, which is not a leaf with an edge"
            )));
        }
        let total = atom.iter().chain(arc.iter()).fold(Q::zero(), |a, b| a + b);
        if !total.is_one() {
            return Err(Error::InvalidMeasure(format!("total mass is {total}, not 1")));
        }
        if n == 2 {
            let r = tree.root();
            let other = 1 - r;
            let moved = std::mem::take(&mut arc[r]);
            arc[other] += moved;
        }
        let mut sub: Vec<Q> = (0..n).map(|v| &atom[v] + &arc[v]).collect();
        for &v in tree.preorder().iter().rev() {
            if let Some(p) = tree.parent(v) {
                let s = sub[v].clone();
                sub[p] += s;
            }
        }
        Ok(Self {
            tree,
            atom,
            arc,
            sub,
            nu: OnceLock::new(),
        })
    }

    pub fn atomic(tree: AlgebraicTree, atom: Vec<Q>) -> Result<Self> {
        let n = tree.len();
        Self::new(tree, atom, vec![Q::zero(); n])
    }

    /// Mass `1/#leaves` on every leaf.
    pub fn uniform_leaves(tree: AlgebraicTree) -> Self {
        let leaves = tree.leaves();
        let w = q(1, leaves.len() as i64);
        let mut atom = vec![Q::zero(); tree.len()];
        for l in leaves {
            atom[l] = w.clone();
        }
        Self::atomic(tree, atom).expect("uniform leaf masses are a probability")
    }

    /// Diffuse mass `1/#leaves` on every leaf edge.
    pub fn uniform_arcs(tree: AlgebraicTree) -> Result<Self> {
        if tree.len() < 2 {
            return Err(Error::InvalidMeasure("a single vertex has no edges".into()));
        }
        let leaves = tree.leaves();
        let w = q(1, leaves.len() as i64);
        let mut arc = vec![Q::zero(); tree.len()];
        for l in leaves {
            arc[l] = w.clone();
        }
        let n = tree.len();
        Self::new(tree, vec![Q::zero(); n], arc)
    }

    pub fn tree(&self) -> &AlgebraicTree {
        &self.tree
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn atom(&self, v: Vertex) -> &Q {
        &self.atom[v]
    }

    pub fn arc(&self, v: Vertex) -> &Q {
        &self.arc[v]
    }

    pub fn atoms(&self) -> &[Q] {
        &self.atom
    }

    pub fn arcs(&self) -> &[Q] {
        &self.arc
    }

    pub fn is_atomic(&self) -> bool {
        self.arc.iter().all(Zero::is_zero)
    }

    /// Binary, with atoms only on leaves.
    pub fn in_t2(&self) -> bool {
        self.tree.is_binary()
            && (0..self.len()).all(|v| self.atom[v].is_zero() || self.tree.is_leaf(v))
    }

    /// Why the tree fails the binary leaf-atom condition, if it does.
    pub fn t2_violation(&self) -> Option<String> {
        if let Some(v) = (0..self.len()).find(|&v| self.tree.degree(v) > 3) {
            return Some(format!("vertex {v} has degree {}", self.tree.degree(v)));
        }
        (0..self.len())
            .find(|&v| !self.atom[v].is_zero() && !self.tree.is_leaf(v))
            .map(|v| format!("atom at inner vertex {v}"))
    }

    /// `mu(S_x(y))`.
    pub fn component_mass(&self, x: Vertex, y: Vertex) -> Q {
        match self.tree.component_side(x, y) {
            Side::Itself => self.atom[x].clone(),
            Side::Below(c) => self.sub[c].clone(),
            Side::Above => Q::one() - &self.sub[x] + &self.arc[x],
        }
    }

    pub fn checked_component_mass(&self, x: Vertex, y: Vertex) -> Result<Q> {
        self.tree.check(x)?;
        self.tree.check(y)?;
        Ok(self.component_mass(x, y))
    }

    /// Masses of all components of the tree minus `v`.
    pub fn component_masses(&self, v: Vertex) -> Vec<Q> {
        let mut out: Vec<Q> = self
            .tree
            .children(v)
            .iter()
            .map(|&c| self.sub[c].clone())
            .collect();
        if self.tree.parent(v).is_some() {
            out.push(Q::one() - &self.sub[v] + &self.arc[v]);
        }
        out
    }

    fn nu_closed_form(&self) -> Vec<Q> {
        let three = q(3, 1);
        let two = q(2, 1);
        (0..self.len())
            .map(|v| {
                let mut s = Q::one();
                for m in self.component_masses(v) {
                    s -= &m * &m * (&three - &two * &m);
                }
                s
            })
            .collect()
    }

    pub fn nu(&self) -> Result<&[Q]> {
        if !self.is_atomic() {
            return Err(Error::ArcMassPresent);
        }
        Ok(self.nu.get_or_init(|| self.nu_closed_form()))
    }

    pub fn branch_point_distribution(&self) -> Result<BranchPointDistribution> {
        Ok(BranchPointDistribution {
            mass: self.nu()?.to_vec(),
        })
    }

    /// Enumerates all ordered triples of atoms.
    pub fn branch_point_distribution_bruteforce(&self) -> Result<BranchPointDistribution> {
        const LIMIT: usize = 40;
        if !self.is_atomic() {
            return Err(Error::ArcMassPresent);
        }
        let atoms: Vec<Vertex> = (0..self.len()).filter(|&v| !self.atom[v].is_zero()).collect();
        if atoms.len() > LIMIT {
            return Err(Error::TooManyAtoms {
                got: atoms.len(),
                limit: LIMIT,
            });
        }
        let mut mass = vec![Q::zero(); self.len()];
        for &x in &atoms {
            for &y in &atoms {
                let xy = &self.atom[x] * &self.atom[y];
                for &z in &atoms {
                    mass[self.tree.branch_point(x, y, z)] += &xy * &self.atom[z];
                }
            }
        }
        Ok(BranchPointDistribution { mass })
    }

    fn nu_prefix(&self) -> Result<Vec<Q>> {
        let nu = self.nu()?;
        let mut p = vec![Q::zero(); self.len()];
        for &v in self.tree.preorder() {
            p[v] = match self.tree.parent(v) {
                Some(u) => &p[u] + &nu[v],
                None => nu[v].clone(),
            };
        }
        Ok(p)
    }

    /// `nu([x,y]) - nu{x}/2 - nu{y}/2`.
    pub fn r_nu(&self, x: Vertex, y: Vertex) -> Result<Q> {
        self.tree.check(x)?;
        self.tree.check(y)?;
        let nu = self.nu()?;
        let path = self
            .tree
            .interval(x, y)
            .into_iter()
            .fold(Q::zero(), |a, v| a + &nu[v]);
        let half = q(1, 2);
        Ok(path - (&nu[x] + &nu[y]) * half)
    }

    pub fn distance_matrix(&self, points: &[Vertex]) -> Result<Vec<Vec<Q>>> {
        for &p in points {
            self.tree.check(p)?;
        }
        let nu = self.nu()?;
        let pre = self.nu_prefix()?;
        let half = q(1, 2);
        let k = points.len();
        let mut m = vec![vec![Q::zero(); k]; k];
        for i in 0..k {
            for j in i + 1..k {
                let (x, y) = (points[i], points[j]);
                let l = self.tree.lca(x, y);
                let path = &pre[x] + &pre[y] - &pre[l] - &pre[l] + &nu[l];
                let d = path - (&nu[x] + &nu[y]) * &half;
                m[i][j] = d.clone();
                m[j][i] = d;
            }
        }
        Ok(m)
    }

    /// `1/2 * sum_v deg(v) nu{v}`.
    pub fn total_length(&self) -> Result<Q> {
        let nu = self.nu()?;
        let s = (0..self.len()).fold(Q::zero(), |a, v| a + &nu[v] * q(self.tree.degree(v) as i64, 1));
        Ok(s * q(1, 2))
    }

    /// Sum of `r_nu` over the edges of the tree.
    pub fn edge_length_sum(&self) -> Result<Q> {
        let mut s = Q::zero();
        for (a, b) in self.tree.edges() {
            s += self.r_nu(a, b)?;
        }
        Ok(s)
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        let r = reduce(self);
        let labels: Vec<String> = (0..r.adj.len())
            .map(|v| format!("{}|{}", r.atom[v], r.arc[v]))
            .collect();
        CanonicalForm(centroid_code(&r.adj, &labels))
    }

    pub fn equivalent(&self, other: &Self) -> bool {
        self.canonical_form() == other.canonical_form()
    }

    /// The tree with zero-mass decorations removed.
    pub fn reduced(&self) -> MeasureTree {
        let r = reduce(self);
        let mut edges = Vec::new();
        for (v, list) in r.adj.iter().enumerate() {
            for &w in list {
                if v < w {
                    edges.push((v, w));
                }
            }
        }
        let tree = AlgebraicTree::from_edges(r.adj.len(), &edges).expect("reduction keeps a tree");
        MeasureTree::new(tree, r.atom, r.arc).expect("reduction keeps the mass")
    }
}

struct Reduced {
    adj: Vec<Vec<Vertex>>,
    atom: Vec<Q>,
    arc: Vec<Q>,
}

fn reduce(mt: &MeasureTree) -> Reduced {
    let n = mt.len();
    let mut adj: Vec<Vec<Vertex>> = mt.tree.adjacency().to_vec();
    let atom = mt.atom.clone();
    let mut arc = mt.arc.clone();
    let mut alive = vec![true; n];
    let mut count = n;

    let detach = |adj: &mut Vec<Vec<Vertex>>, a: Vertex, b: Vertex| {
        adj[a].retain(|&w| w != b);
    };

    // prune massless leaves
    let mut queue: Vec<Vertex> = (0..n).filter(|&v| adj[v].len() == 1).collect();
    while let Some(l) = queue.pop() {
        if !alive[l] || adj[l].len() != 1 || !atom[l].is_zero() || !arc[l].is_zero() || count <= 1 {
            continue;
        }
        let p = adj[l][0];
        if count == 2 && !arc[p].is_zero() {
            continue;
        }
        detach(&mut adj, p, l);
        adj[l].clear();
        alive[l] = false;
        count -= 1;
        if adj[p].len() == 1 {
            queue.push(p);
        }
    }

    // suppress massless degree-2 vertices
    for v in 0..n {
        if alive[v] && adj[v].len() == 2 && atom[v].is_zero() {
            let (a, b) = (adj[v][0], adj[v][1]);
            detach(&mut adj, a, v);
            detach(&mut adj, b, v);
            adj[a].push(b);
            adj[b].push(a);
            adj[v].clear();
            alive[v] = false;
        }
    }

    let ids: Vec<Vertex> = (0..n).filter(|&v| alive[v]).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &v) in ids.iter().enumerate() {
        index[v] = i;
    }
    let mut new_adj: Vec<Vec<Vertex>> = ids
        .iter()
        .map(|&v| adj[v].iter().map(|&w| index[w]).collect())
        .collect();
    for list in &mut new_adj {
        list.sort_unstable();
    }
    let new_atom: Vec<Q> = ids.iter().map(|&v| atom[v].clone()).collect();
    let mut new_arc: Vec<Q> = ids.iter().map(|&v| std::mem::take(&mut arc[v])).collect();
    if ids.len() == 2 {
        let total = &new_arc[0] + &new_arc[1];
        let keep = if new_atom[0] <= new_atom[1] { 0 } else { 1 };
        new_arc[keep] = total;
        new_arc[1 - keep] = Q::zero();
    }
    Reduced {
        adj: new_adj,
        atom: new_atom,
        arc: new_arc,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cherry(a: Q, b: Q) -> MeasureTree {
        let t = AlgebraicTree::from_edges(2, &[(0, 1)]).unwrap();
        MeasureTree::atomic(t, vec![a, b]).unwrap()
    }

    fn star() -> MeasureTree {
        let t = AlgebraicTree::from_edges(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        MeasureTree::uniform_leaves(t)
    }

    #[test]
    fn rejects_bad_masses() {
        let t = AlgebraicTree::from_edges(2, &[(0, 1)]).unwrap();
        assert!(MeasureTree::atomic(t.clone(), vec![q(1, 3), q(1, 3)]).is_err());
        assert!(MeasureTree::atomic(t.clone(), vec![q(3, 2), q(-1, 2)]).is_err());
        let s = AlgebraicTree::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(MeasureTree::new(s, vec![Q::zero(); 3], vec![Q::zero(), Q::one(), Q::zero()]).is_err());
    }

    #[test]
    fn component_masses() {
        let c = cherry(q(1, 2), q(1, 2));
        assert_eq!(c.component_mass(0, 1), q(1, 2));
        let s = star();
        assert_eq!(s.component_mass(1, 0), q(1, 3));
        assert_eq!(s.component_mass(0, 1), q(2, 3));
        assert_eq!(s.component_mass(2, 2), q(1, 3));
    }

    #[test]
    fn arc_component_masses() {
        let t = AlgebraicTree::from_edges(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let mt = MeasureTree::uniform_arcs(t).unwrap();
        // the arc of leaf 0 lies between 0 and 1
        assert_eq!(mt.component_mass(0, 1), Q::one());
        assert_eq!(mt.component_mass(1, 0), q(1, 3));
        assert_eq!(mt.component_mass(2, 0), Q::one());
    }

    #[test]
    fn nu_small_cases() {
        let one = MeasureTree::atomic(AlgebraicTree::single(), vec![Q::one()]).unwrap();
        assert_eq!(one.nu().unwrap(), &[Q::one()]);
        let c = cherry(q(1, 2), q(1, 2));
        assert_eq!(c.nu().unwrap(), &[q(1, 2), q(1, 2)]);
        let s = star();
        assert_eq!(s.nu().unwrap(), &[q(7, 27), q(2, 9), q(7, 27), q(7, 27)]);
        assert_eq!(s.branch_point_distribution().unwrap(), s.branch_point_distribution_bruteforce().unwrap());
    }

    #[test]
    fn metric_small_cases() {
        let c = cherry(q(1, 2), q(1, 2));
        assert_eq!(c.r_nu(0, 1).unwrap(), q(1, 2));
        assert_eq!(c.r_nu(0, 0).unwrap(), Q::zero());
        assert_eq!(c.total_length().unwrap(), q(1, 2));
        let s = star();
        assert_eq!(s.r_nu(0, 2).unwrap(), q(13, 27));
        assert_eq!(s.total_length().unwrap(), q(13, 18));
        assert_eq!(s.edge_length_sum().unwrap(), q(13, 18));
        let m = s.distance_matrix(&[0, 2, 3]).unwrap();
        assert_eq!(m[0][1], q(13, 27));
        assert_eq!(s.distance_matrix(&[1]).unwrap(), vec![vec![Q::zero()]]);
        let one = MeasureTree::atomic(AlgebraicTree::single(), vec![Q::one()]).unwrap();
        assert_eq!(one.total_length().unwrap(), Q::zero());
    }

    #[test]
    fn arcs_block_closed_form() {
        let t = AlgebraicTree::from_edges(2, &[(0, 1)]).unwrap();
        let mt = MeasureTree::uniform_arcs(t).unwrap();
        assert_eq!(mt.nu().unwrap_err(), Error::ArcMassPresent);
    }

    #[test]
    fn equivalence() {
        let a = cherry(q(1, 3), q(2, 3));
        let b = cherry(q(2, 3), q(1, 3));
        assert!(a.equivalent(&a));
        assert!(a.equivalent(&b));
        assert!(!a.equivalent(&cherry(q(1, 2), q(1, 2))));
    }

    #[test]
    fn equivalence_ignores_unsupported_structure() {
        // path 0-1-2 with masses on the ends, plus a massless spur 3 at 1
        let t = AlgebraicTree::from_edges(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let mt = MeasureTree::atomic(t, vec![q(1, 3), Q::zero(), q(2, 3), Q::zero()]).unwrap();
        assert!(mt.equivalent(&cherry(q(1, 3), q(2, 3))));
        assert_eq!(mt.reduced().len(), 2);
    }

    #[test]
    fn linear_arc_trees_are_equivalent() {
        let t = AlgebraicTree::from_edges(2, &[(0, 1)]).unwrap();
        let a = MeasureTree::new(t.clone(), vec![Q::zero(); 2], vec![Q::one(), Q::zero()]).unwrap();
        let b = MeasureTree::new(t, vec![Q::zero(); 2], vec![Q::zero(), Q::one()]).unwrap();
        let p = AlgebraicTree::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let c = MeasureTree::new(p, vec![Q::zero(); 3], vec![q(1, 2), Q::zero(), q(1, 2)]).unwrap();
        assert!(a.equivalent(&b));
        assert!(a.equivalent(&c));
    }
}
