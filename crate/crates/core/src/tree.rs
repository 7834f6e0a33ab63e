//! Finite algebraic trees stored as graph trees with constant-time median queries.

use std::collections::HashSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

pub type Vertex = usize;

/// A finite tree on the vertices `0..n`.
///
/// The tree is rooted internally at a fixed vertex; lowest common ancestors
/// come from a sparse table over the preorder, and the branch point of three
/// vertices is the deepest of their three pairwise ancestors.
#[derive(Debug, Clone)]
pub struct AlgebraicTree {
    adj: Vec<Vec<Vertex>>,
    root: Vertex,
    parent: Vec<Vertex>,
    depth: Vec<u32>,
    tin: Vec<u32>,
    tout: Vec<u32>,
    order: Vec<Vertex>,
    children: Vec<Vec<Vertex>>,
    sparse: Vec<Vec<u64>>,
}

/// Where `S_x(y)` lies relative to the internal rooting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Itself,
    /// The subtree below this child of `x`.
    Below(Vertex),
    /// Everything outside the subtree of `x`.
    Above,
}

impl AlgebraicTree {
    pub fn single() -> Self {
        Self::from_edges(1, &[]).expect("one vertex is a tree")
    }

    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyTree);
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut dsu: Vec<usize> = (0..n).collect();
        fn find(d: &mut [usize], mut x: usize) -> usize {
            while d[x] != x {
                d[x] = d[d[x]];
                x = d[x];
            }
            x
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::VertexOutOfRange(a, b, n));
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::DuplicateEdge(a, b));
            }
            let (ra, rb) = (find(&mut dsu, a), find(&mut dsu, b));
            if ra == rb {
                return Err(Error::Cycle(a, b));
            }
            dsu[ra] = rb;
            adj[a].push(b);
            adj[b].push(a);
        }
        if edges.len() != n - 1 {
            return Err(Error::Disconnected {
                components: n - edges.len(),
            });
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Self::build(adj))
    }

    fn build(adj: Vec<Vec<Vertex>>) -> Self {
        let n = adj.len();
        let root = (0..n).find(|&v| adj[v].len() >= 2).unwrap_or(0);
        let mut parent = vec![root; n];
        let mut depth = vec![0u32; n];
        let mut tin = vec![0u32; n];
        let mut tout = vec![0u32; n];
        let mut order = Vec::with_capacity(n);
        let mut children = vec![Vec::new(); n];

        // iterative preorder; (vertex, next neighbor index)
        let mut stack = vec![(root, 0usize)];
        tin[root] = 0;
        order.push(root);
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if w == parent[v] && v != root {
                    continue;
                }
                parent[w] = v;
                depth[w] = depth[v] + 1;
                tin[w] = order.len() as u32;
                order.push(w);
                children[v].push(w);
                stack.push((w, 0));
            } else {
                tout[v] = order.len() as u32;
                stack.pop();
            }
        }

        let base: Vec<u64> = order
            .iter()
            .skip(1)
            .map(|&v| {
                let p = parent[v];
                ((depth[p] as u64) << 32) | p as u64
            })
            .collect();
        let mut sparse = vec![base];
        let mut span = 1;
        while 2 * span <= sparse[0].len() {
            let prev = sparse.last().unwrap();
            let next: Vec<u64> = (0..prev.len() - span)
                .map(|i| prev[i].min(prev[i + span]))
                .collect();
            sparse.push(next);
            span *= 2;
        }

        Self {
            adj,
            root,
            parent,
            depth,
            tin,
            tout,
            order,
            children,
            sparse,
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn check(&self, v: Vertex) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn adjacency(&self) -> &[Vec<Vertex>] {
        &self.adj
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        (v != self.root).then_some(self.parent[v])
    }

    pub fn children(&self, v: Vertex) -> &[Vertex] {
        &self.children[v]
    }

    pub fn depth(&self, v: Vertex) -> u32 {
        self.depth[v]
    }

    /// Vertices in preorder of the internal rooting.
    pub fn preorder(&self) -> &[Vertex] {
        &self.order
    }

    /// Vertices of the subtree hanging below `v` (internal rooting).
    pub fn subtree(&self, v: Vertex) -> &[Vertex] {
        &self.order[self.tin[v] as usize..self.tout[v] as usize]
    }

    pub fn is_ancestor(&self, a: Vertex, b: Vertex) -> bool {
        self.tin[a] <= self.tin[b] && self.tin[b] < self.tout[a]
    }

    pub fn lca(&self, u: Vertex, v: Vertex) -> Vertex {
        if u == v {
            return u;
        }
        let (mut l, mut r) = (self.tin[u] as usize, self.tin[v] as usize);
        if l > r {
            std::mem::swap(&mut l, &mut r);
        }
        // parents of preorder positions l+1..=r live at base indices l..r
        let len = r - l;
        let k = usize::BITS - 1 - len.leading_zeros();
        let row = &self.sparse[k as usize];
        let key = row[l].min(row[r - (1 << k)]);
        (key & 0xFFFF_FFFF) as Vertex
    }

    pub fn distance(&self, u: Vertex, v: Vertex) -> usize {
        let w = self.lca(u, v);
        (self.depth[u] + self.depth[v] - 2 * self.depth[w]) as usize
    }

    pub fn branch_point(&self, x: Vertex, y: Vertex, z: Vertex) -> Vertex {
        let a = self.lca(x, y);
        let b = self.lca(y, z);
        let c = self.lca(x, z);
        let mut best = a;
        if self.depth[b] > self.depth[best] {
            best = b;
        }
        if self.depth[c] > self.depth[best] {
            best = c;
        }
        best
    }

    pub fn checked_branch_point(&self, x: Vertex, y: Vertex, z: Vertex) -> Result<Vertex> {
        self.check(x)?;
        self.check(y)?;
        self.check(z)?;
        Ok(self.branch_point(x, y, z))
    }

    /// The path from `x` to `y`, both included.
    pub fn interval(&self, x: Vertex, y: Vertex) -> Vec<Vertex> {
        let w = self.lca(x, y);
        let mut path = Vec::with_capacity(self.distance(x, y) + 1);
        let mut v = x;
        while v != w {
            path.push(v);
            v = self.parent[v];
        }
        path.push(w);
        let mark = path.len();
        let mut v = y;
        while v != w {
            path.push(v);
            v = self.parent[v];
        }
        path[mark..].reverse();
        path
    }

    pub fn in_interval(&self, x: Vertex, y: Vertex, w: Vertex) -> bool {
        self.branch_point(x, y, w) == w
    }

    /// The child of `x` whose subtree contains the strict descendant `y`.
    pub fn child_toward(&self, x: Vertex, y: Vertex) -> Vertex {
        let ch = &self.children[x];
        let t = self.tin[y];
        let i = ch.partition_point(|&c| self.tin[c] <= t);
        ch[i - 1]
    }

    /// The neighbor of `x` on the path to `y`.
    pub fn step_toward(&self, x: Vertex, y: Vertex) -> Vertex {
        debug_assert_ne!(x, y);
        if self.is_ancestor(x, y) {
            self.child_toward(x, y)
        } else {
            self.parent[x]
        }
    }

    pub fn component_side(&self, x: Vertex, y: Vertex) -> Side {
        if x == y {
            Side::Itself
        } else if self.is_ancestor(x, y) {
            Side::Below(self.child_toward(x, y))
        } else {
            Side::Above
        }
    }

    /// `S_x(y)`: the component of the tree minus `x` containing `y`, sorted.
    pub fn component(&self, x: Vertex, y: Vertex) -> Vec<Vertex> {
        let mut out = match self.component_side(x, y) {
            Side::Itself => vec![x],
            Side::Below(c) => self.subtree(c).to_vec(),
            Side::Above => {
                let inside = self.subtree(x);
                let mut mark = vec![false; self.len()];
                for &v in inside {
                    mark[v] = true;
                }
                (0..self.len()).filter(|&v| !mark[v]).collect()
            }
        };
        out.sort_unstable();
        out
    }

    pub fn in_component(&self, x: Vertex, y: Vertex, w: Vertex) -> bool {
        match self.component_side(x, y) {
            Side::Itself => w == x,
            Side::Below(c) => self.is_ancestor(c, w),
            Side::Above => !self.is_ancestor(x, w),
        }
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn leaves(&self) -> Vec<Vertex> {
        (0..self.len()).filter(|&v| self.degree(v) <= 1).collect()
    }

    pub fn branch_points(&self) -> Vec<Vertex> {
        (0..self.len()).filter(|&v| self.degree(v) >= 3).collect()
    }

    pub fn is_leaf(&self, v: Vertex) -> bool {
        self.degree(v) <= 1
    }

    pub fn is_binary(&self) -> bool {
        self.adj.iter().all(|a| a.len() <= 3)
    }

    /// Edges as sorted pairs in lexicographic order.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut e: Vec<_> = (0..self.len())
            .filter(|&v| v != self.root)
            .map(|v| {
                let p = self.parent[v];
                (v.min(p), v.max(p))
            })
            .collect();
        e.sort_unstable();
        e
    }

    /// `x <=_rho y` iff `x` lies on the path from `rho` to `y`.
    pub fn is_le(&self, rho: Vertex, x: Vertex, y: Vertex) -> bool {
        self.in_interval(rho, y, x)
    }

    pub fn meet(&self, rho: Vertex, x: Vertex, y: Vertex) -> Vertex {
        self.branch_point(rho, x, y)
    }

    /// The branch point recovered as the largest of the three pairwise meets.
    pub fn branch_point_from_order(&self, rho: Vertex, x: Vertex, y: Vertex, z: Vertex) -> Vertex {
        let m = [self.meet(rho, x, y), self.meet(rho, y, z), self.meet(rho, z, x)];
        let mut best = m[0];
        for &c in &m[1..] {
            if self.is_le(rho, best, c) {
                best = c;
            }
        }
        best
    }

    /// The virtual tree spanned by `keys`: the keys plus all pairwise
    /// ancestors, each node paired with the index of its skeleton parent.
    pub fn skeleton(&self, keys: &[Vertex]) -> Skeleton {
        let mut nodes: Vec<Vertex> = keys.to_vec();
        nodes.sort_unstable_by_key(|&v| self.tin[v]);
        nodes.dedup();
        let k = nodes.len();
        for i in 1..k {
            let w = self.lca(nodes[i - 1], nodes[i]);
            nodes.push(w);
        }
        nodes.sort_unstable_by_key(|&v| self.tin[v]);
        nodes.dedup();
        let mut parent = vec![None; nodes.len()];
        let mut stack: Vec<usize> = Vec::new();
        for (i, &v) in nodes.iter().enumerate() {
            while let Some(&top) = stack.last() {
                if self.is_ancestor(nodes[top], v) {
                    break;
                }
                stack.pop();
            }
            parent[i] = stack.last().copied();
            stack.push(i);
        }
        Skeleton { nodes, parent }
    }
}

#[derive(Debug, Clone)]
pub struct Skeleton {
    pub nodes: Vec<Vertex>,
    pub parent: Vec<Option<usize>>,
}

/// Anything that behaves like a branch point map on `0..size()`.
pub trait BranchPointMap {
    fn size(&self) -> usize;
    fn median(&self, x: Vertex, y: Vertex, z: Vertex) -> Vertex;
}

impl BranchPointMap for AlgebraicTree {
    fn size(&self) -> usize {
        self.len()
    }

    fn median(&self, x: Vertex, y: Vertex, z: Vertex) -> Vertex {
        self.branch_point(x, y, z)
    }
}

/// A branch point map given by a closure, mostly for fault injection.
pub struct FnMap<F> {
    pub n: usize,
    pub f: F,
}

impl<F: Fn(Vertex, Vertex, Vertex) -> Vertex> BranchPointMap for FnMap<F> {
    fn size(&self) -> usize {
        self.n
    }

    fn median(&self, x: Vertex, y: Vertex, z: Vertex) -> Vertex {
        (self.f)(x, y, z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Axiom {
    Symmetry,
    TwoPoint,
    ThreePoint,
    FourPoint,
    IntervalIntersection,
    IntervalUnion,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub tuple: Vec<Vertex>,
}

#[derive(Debug, Clone, Copy)]
pub enum CheckMode {
    Exhaustive,
    Sampled { tuples: usize, seed: u64 },
}

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct AxiomReport {
    pub tuples_checked: u64,
    pub violation_count: u64,
    /// The first violations found (capped).
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    const KEEP: usize = 64;

    pub fn ok(&self) -> bool {
        self.violation_count == 0
    }

    fn push(&mut self, axiom: Axiom, tuple: &[Vertex]) {
        self.violation_count += 1;
        if self.violations.len() < Self::KEEP {
            self.violations.push(Violation {
                axiom,
                tuple: tuple.to_vec(),
            });
        }
    }
}

fn interval_mask<M: BranchPointMap>(c: &M, x: Vertex, y: Vertex) -> Vec<bool> {
    (0..c.size()).map(|w| c.median(x, y, w) == w).collect()
}

fn check_triple<M: BranchPointMap>(c: &M, t: [Vertex; 3], rep: &mut AxiomReport) {
    let [x, y, z] = t;
    let v = c.median(x, y, z);
    let perms = [
        c.median(x, z, y),
        c.median(y, x, z),
        c.median(y, z, x),
        c.median(z, x, y),
        c.median(z, y, x),
    ];
    if perms.iter().any(|&p| p != v) {
        rep.push(Axiom::Symmetry, &t);
    }
    if c.median(x, y, y) != y {
        rep.push(Axiom::TwoPoint, &[x, y]);
    }
    if v >= c.size() || c.median(x, y, v) != v {
        rep.push(Axiom::ThreePoint, &t);
        return;
    }
    let xy = interval_mask(c, x, y);
    let yz = interval_mask(c, y, z);
    let vy = interval_mask(c, v, y);
    let xz = interval_mask(c, x, z);
    let mut inter_ok = true;
    let mut union_ok = true;
    for w in 0..c.size() {
        if (xy[w] && yz[w]) != vy[w] {
            inter_ok = false;
        }
        let open = vy[w] && w != v;
        if (xy[w] || yz[w]) != (xz[w] || open) || (xz[w] && open) {
            union_ok = false;
        }
    }
    if !inter_ok {
        rep.push(Axiom::IntervalIntersection, &t);
    }
    if !union_ok {
        rep.push(Axiom::IntervalUnion, &t);
    }
}

fn check_quad<M: BranchPointMap>(c: &M, q: [Vertex; 4], rep: &mut AxiomReport) {
    let [a, b, d, e] = q;
    let v = c.median(a, b, d);
    if v != c.median(a, b, e) && v != c.median(a, d, e) && v != c.median(b, d, e) {
        rep.push(Axiom::FourPoint, &q);
    }
}

/// Checks the four branch point axioms and the interval identities.
pub fn verify_axioms<M: BranchPointMap>(c: &M, mode: CheckMode) -> AxiomReport {
    let n = c.size();
    let mut rep = AxiomReport::default();
    match mode {
        CheckMode::Exhaustive => {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        check_triple(c, [x, y, z], &mut rep);
                        rep.tuples_checked += 1;
                        for w in 0..n {
                            check_quad(c, [x, y, z, w], &mut rep);
                        }
                    }
                }
            }
        }
        CheckMode::Sampled { tuples, seed } => {
            let mut r = rng::stream(seed);
            for _ in 0..tuples {
                let q = [
                    r.gen_range(0..n),
                    r.gen_range(0..n),
                    r.gen_range(0..n),
                    r.gen_range(0..n),
                ];
                check_triple(c, [q[0], q[1], q[2]], &mut rep);
                check_quad(c, q, &mut rep);
                rep.tuples_checked += 1;
            }
        }
    }
    rep
}

/// Whether `f` commutes with the branch point maps on every triple.
pub fn is_homomorphism<S, T>(f: &[Vertex], source: &S, target: &T) -> Result<bool>
where
    S: BranchPointMap,
    T: BranchPointMap,
{
    let n = source.size();
    if f.len() != n {
        return Err(Error::MapNotTotal {
            expected: n,
            got: f.len(),
        });
    }
    if let Some(&bad) = f.iter().find(|&&v| v >= target.size()) {
        return Err(Error::UnknownVertex(bad));
    }
    for x in 0..n {
        for y in x..n {
            for z in y..n {
                if f[source.median(x, y, z)] != target.median(f[x], f[y], f[z]) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct CanonicalForm(pub String);

impl std::fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl CanonicalForm {
    /// 64-bit FNV-1a digest, for short display.
    pub fn digest(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.0.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

pub fn canonical_form(tree: &AlgebraicTree) -> CanonicalForm {
    let labels = vec![String::new(); tree.len()];
    CanonicalForm(centroid_code(tree.adjacency(), &labels))
}

/// Minimal rooted code over the centroid(s) of an unrooted labelled tree.
pub(crate) fn centroid_code(adj: &[Vec<Vertex>], labels: &[String]) -> String {
    centroids(adj)
        .into_iter()
        .map(|c| rooted_code(adj, labels, c))
        .min()
        .expect("nonempty tree has a centroid")
}

fn bfs_order(adj: &[Vec<Vertex>], root: Vertex) -> (Vec<Vertex>, Vec<Vertex>) {
    let n = adj.len();
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    parent[root] = root;
    order.push(root);
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        i += 1;
        for &w in &adj[v] {
            if parent[w] == usize::MAX {
                parent[w] = v;
                order.push(w);
            }
        }
    }
    (order, parent)
}

fn centroids(adj: &[Vec<Vertex>]) -> Vec<Vertex> {
    let n = adj.len();
    let (order, parent) = bfs_order(adj, 0);
    let mut size = vec![1usize; n];
    for &v in order.iter().skip(1).rev() {
        size[parent[v]] += size[v];
    }
    let mut best = usize::MAX;
    let mut out = Vec::new();
    for v in 0..n {
        let mut worst = n - size[v];
        for &w in &adj[v] {
            if parent[w] == v {
                worst = worst.max(size[w]);
            }
        }
        match worst.cmp(&best) {
            std::cmp::Ordering::Less => {
                best = worst;
                out.clear();
                out.push(v);
            }
            std::cmp::Ordering::Equal => out.push(v),
            std::cmp::Ordering::Greater => {}
        }
    }
    out
}

pub(crate) fn rooted_code(adj: &[Vec<Vertex>], labels: &[String], root: Vertex) -> String {
    let (order, parent) = bfs_order(adj, root);
    let mut code: Vec<String> = vec![String::new(); adj.len()];
    for &v in order.iter().rev() {
        let mut kids: Vec<String> = adj[v]
            .iter()
            .filter(|&&w| parent[w] == v)
            .map(|&w| std::mem::take(&mut code[w]))
            .collect();
        kids.sort_unstable();
        let mut s = String::with_capacity(2 + labels[v].len() + kids.iter().map(String::len).sum::<usize>());
        s.push('(');
        s.push_str(&labels[v]);
        for k in kids {
            s.push_str(&k);
        }
        s.push(')');
        code[v] = s;
    }
    std::mem::take(&mut code[root])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star() -> AlgebraicTree {
        AlgebraicTree::from_edges(4, &[(0, 1), (1, 2), (1, 3)]).unwrap()
    }

    fn path(n: usize) -> AlgebraicTree {
        let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        AlgebraicTree::from_edges(n, &e).unwrap()
    }

    // x1=0, x2=1, x3=2, x4=3, c1=4, c2=5
    fn four_point() -> AlgebraicTree {
        AlgebraicTree::from_edges(6, &[(0, 4), (1, 4), (4, 5), (5, 2), (5, 3)]).unwrap()
    }

    #[test]
    fn construction_errors() {
        assert_eq!(AlgebraicTree::from_edges(0, &[]).unwrap_err(), Error::EmptyTree);
        assert!(matches!(
            AlgebraicTree::from_edges(3, &[(0, 1), (1, 2), (2, 0)]),
            Err(Error::Cycle(..))
        ));
        assert!(matches!(
            AlgebraicTree::from_edges(3, &[(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge(..))
        ));
        assert!(matches!(
            AlgebraicTree::from_edges(4, &[(0, 1), (2, 3)]),
            Err(Error::Disconnected { components: 2 })
        ));
        assert!(matches!(
            AlgebraicTree::from_edges(2, &[(0, 5)]),
            Err(Error::VertexOutOfRange(..))
        ));
    }

    #[test]
    fn single_vertex() {
        let t = AlgebraicTree::single();
        assert_eq!(t.degree(0), 0);
        assert_eq!(t.leaves(), vec![0]);
        assert_eq!(t.branch_point(0, 0, 0), 0);
        assert_eq!(t.interval(0, 0), vec![0]);
        assert!(verify_axioms(&t, CheckMode::Exhaustive).ok());
    }

    #[test]
    fn star_queries() {
        let t = star();
        assert_eq!(t.branch_point(0, 2, 3), 1);
        assert_eq!(t.interval(0, 2), vec![0, 1, 2]);
        assert_eq!(t.component(1, 0), vec![0]);
        assert_eq!(t.component(0, 1), vec![1, 2, 3]);
        assert_eq!(t.component(2, 2), vec![2]);
        assert_eq!(t.degree(1), 3);
        assert_eq!(t.branch_points(), vec![1]);
        assert_eq!(t.meet(0, 2, 3), 1);
    }

    #[test]
    fn path_queries() {
        let t = path(4);
        assert_eq!(t.interval(0, 3), vec![0, 1, 2, 3]);
        assert_eq!(t.interval(3, 0), vec![3, 2, 1, 0]);
        assert_eq!(t.edges(), vec![(0, 1), (1, 2), (2, 3)]);
        let p = path(3);
        assert_eq!(p.component(1, 0), vec![0]);
        assert_eq!(p.meet(0, 1, 2), 1);
        assert!(p.is_le(0, 0, 2));
    }

    #[test]
    fn four_point_figure() {
        let t = four_point();
        assert_eq!(t.branch_point(0, 1, 2), 4);
        assert_eq!(t.branch_point(0, 1, 3), 4);
        assert_eq!(t.branch_point(0, 2, 3), 5);
        assert_eq!(t.branch_point(1, 2, 3), 5);
        assert_eq!(t.branch_point_from_order(3, 0, 1, 2), 4);
    }

    #[test]
    fn fault_injection_is_reported() {
        let t = star();
        let bad = FnMap {
            n: 4,
            f: |x, y, z| {
                if (x, y, z) == (0, 2, 3) {
                    0
                } else {
                    t.branch_point(x, y, z)
                }
            },
        };
        let rep = verify_axioms(&bad, CheckMode::Exhaustive);
        assert!(!rep.ok());
        assert!(rep.violations.iter().any(|v| v.axiom == Axiom::Symmetry));
    }

    #[test]
    fn homomorphisms() {
        let t = star();
        assert!(is_homomorphism(&[0, 1, 2, 3], &t, &t).unwrap());
        assert!(is_homomorphism(&[2, 2, 2, 2], &t, &t).unwrap());
        assert!(!is_homomorphism(&[1, 0, 2, 3], &t, &t).unwrap());
        assert!(is_homomorphism(&[0, 1], &t, &t).is_err());
    }

    #[test]
    fn canonical_forms() {
        // asymmetric tree with a cherry (3,4) under 2
        let a = AlgebraicTree::from_edges(5, &[(0, 1), (1, 2), (2, 3), (2, 4)]).unwrap();
        let b = AlgebraicTree::from_edges(5, &[(0, 1), (1, 2), (2, 4), (2, 3)]).unwrap();
        assert_eq!(canonical_form(&a), canonical_form(&b));
        assert_ne!(canonical_form(&a), canonical_form(&path(5)));
        let c = AlgebraicTree::from_edges(5, &[(4, 3), (3, 2), (2, 1), (2, 0)]).unwrap();
        assert_eq!(canonical_form(&a), canonical_form(&c));
    }

    #[test]
    fn skeleton_of_leaves() {
        let t = four_point();
        let s = t.skeleton(&[0, 2, 3]);
        for v in [0, 2, 3, 5] {
            assert!(s.nodes.contains(&v));
        }
        assert!(!s.nodes.contains(&1));
        assert_eq!(s.parent.iter().filter(|p| p.is_none()).count(), 1);
    }
}
