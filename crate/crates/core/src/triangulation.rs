//! Finite sub-triangulations of the circle and their coded trees.
//!
//! The circle has circumference 1 and boundary points are exact positions
//! in `[0, 1)`. A segment `[i, j]` is the region cut off by the chord from
//! point `i` to point `j` on the counterclockwise arc from `i` to `j`;
//! `[i, i]` is the whole disc. Segments and triangles are removed from the
//! disc, every other face is filled.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{q_to_f64, MeasureTree, Q};
use crate::rng;
use crate::tree::{rooted_code, AlgebraicTree, Vertex};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    pub boundary: Vec<Q>,
    pub triangles: Vec<[usize; 3]>,
    pub segments: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Filled,
    Triangle(usize),
    Segment(usize),
}

/// The faces cut out by the chords. Face `c` lies directly inside chord
/// `c`, the last face lies outside every chord.
struct Faces {
    chords: Vec<(usize, usize)>,
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
    kind: Vec<Kind>,
    length: Vec<Q>,
}

impl Faces {
    fn root(&self) -> usize {
        self.chords.len()
    }

    /// Faces across the chords bounding face `f`.
    fn neighbours(&self, f: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.children[f].len() + 1);
        if f != self.root() {
            out.push(self.parent[f]);
        }
        out.extend(self.children[f].iter().copied());
        out
    }
}

impl Triangulation {
    pub fn new(boundary: Vec<Q>, triangles: Vec<[usize; 3]>, segments: Vec<[usize; 2]>) -> Self {
        Self {
            boundary,
            triangles,
            segments,
        }
    }

    /// The regular `n`-gon positions `i/n` with the given triangles.
    pub fn polygon(n: usize, triangles: Vec<[usize; 3]>) -> Self {
        let boundary = (0..n).map(|i| Q::new(i.into(), n.into())).collect();
        Self::new(boundary, triangles, Vec::new())
    }

    /// All triangle sides and segment chords, sorted and deduplicated.
    pub fn chords(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for t in &self.triangles {
            let mut s = *t;
            s.sort_unstable();
            out.extend([(s[0], s[1]), (s[1], s[2]), (s[0], s[2])]);
        }
        for &[i, j] in &self.segments {
            if i != j {
                out.push((i.min(j), i.max(j)));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn basic_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let k = self.boundary.len();
        if k == 0 {
            v.push("no boundary points".to_string());
        }
        for (i, p) in self.boundary.iter().enumerate() {
            if *p < Q::zero() || *p >= Q::one() {
                v.push(format!("boundary point {i} lies outside [0, 1)"));
            }
            if i > 0 && self.boundary[i - 1] >= *p {
                v.push(format!("boundary points {} and {i} are not increasing", i - 1));
            }
        }
        for t in &self.triangles {
            if t.iter().any(|&x| x >= k) {
                v.push(format!("triangle {t:?} uses a missing boundary point"));
            } else if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                v.push(format!("triangle {t:?} is degenerate"));
            }
        }
        for s in &self.segments {
            if s.iter().any(|&x| x >= k) {
                v.push(format!("segment {s:?} uses a missing boundary point"));
            }
            if s[0] == s[1] && (self.segments.len() > 1 || !self.triangles.is_empty()) {
                v.push(format!("full segment {s:?} must be the only piece"));
            }
        }
        v
    }

    fn faces(&self) -> std::result::Result<Faces, Vec<String>> {
        let mut violations = Vec::new();
        let chords = self.chords();
        let root = chords.len();
        let pos = &self.boundary;
        let mut parent = vec![root; root];
        let mut children = vec![Vec::new(); root + 1];
        // chords sorted by start ascending, then end descending
        let mut order: Vec<usize> = (0..root).collect();
        order.sort_by(|&a, &b| chords[a].0.cmp(&chords[b].0).then(chords[b].1.cmp(&chords[a].1)));
        let mut stack: Vec<usize> = Vec::new();
        for &c in &order {
            let (i, j) = chords[c];
            while let Some(&top) = stack.last() {
                let (a, b) = chords[top];
                if a <= i && j <= b {
                    break;
                }
                if a < i && i < b && b < j {
                    violations.push(format!("chords {:?} and {:?} cross", (a, b), (i, j)));
                }
                stack.pop();
            }
            if let Some(&top) = stack.last() {
                parent[c] = top;
            }
            children[parent[c]].push(c);
            stack.push(c);
        }
        for list in children.iter_mut() {
            list.sort_by_key(|&c| chords[c]);
        }
        let span = |c: usize| &pos[chords[c].1] - &pos[chords[c].0];
        let length: Vec<Q> = (0..=root)
            .map(|f| {
                let outer = if f == root { Q::one() } else { span(f) };
                children[f].iter().fold(outer, |acc, &c| acc - span(c))
            })
            .collect();

        let index: BTreeMap<(usize, usize), usize> =
            chords.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut kind = vec![Kind::Filled; root + 1];
        let mut claim = |f: usize, k: Kind, what: String, violations: &mut Vec<String>| {
            if kind[f] != Kind::Filled {
                violations.push(format!("{what} is listed twice"));
            }
            kind[f] = k;
        };
        for (t, tri) in self.triangles.iter().enumerate() {
            let mut s = *tri;
            s.sort_unstable();
            let f = index[&(s[0], s[2])];
            let want = [index[&(s[0], s[1])], index[&(s[1], s[2])]];
            if children[f] != want {
                violations.push(format!("triangle {tri:?} is not a face"));
            }
            claim(f, Kind::Triangle(t), format!("triangle {tri:?}"), &mut violations);
        }
        for (s, &[i, j]) in self.segments.iter().enumerate() {
            let f = match i.cmp(&j) {
                std::cmp::Ordering::Less => index[&(i, j)],
                std::cmp::Ordering::Equal => root,
                std::cmp::Ordering::Greater => {
                    if children[root] != [index[&(j, i)]] {
                        violations.push(format!("segment {:?} is not a face", [i, j]));
                    }
                    root
                }
            };
            if i < j && !children[f].is_empty() {
                violations.push(format!("segment {:?} contains chords", [i, j]));
            }
            claim(f, Kind::Segment(s), format!("segment {:?}", [i, j]), &mut violations);
        }
        let faces = Faces {
            chords,
            parent,
            children,
            kind,
            length,
        };
        for f in 0..=root {
            if faces.kind[f] == Kind::Filled && faces.neighbours(f).len() >= 3 {
                violations.push(format!(
                    "a filled face meets {} pieces, so three of them have no middle triangle",
                    faces.neighbours(f).len()
                ));
            }
        }
        if violations.is_empty() {
            Ok(faces)
        } else {
            Err(violations)
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = self.basic_violations();
        if violations.is_empty() {
            if let Err(v) = self.faces() {
                violations = v;
            }
        }
        ValidationReport { violations }
    }

    fn checked_faces(&self) -> Result<Faces> {
        let basic = self.basic_violations();
        if !basic.is_empty() {
            return Err(Error::InvalidTriangulation(basic.join("; ")));
        }
        self.faces().map_err(|v| Error::InvalidTriangulation(v.join("; ")))
    }

    /// Arc length of each boundary gap `i -> i+1`, the last one wrapping.
    pub fn arc_lengths(&self) -> Vec<Q> {
        let k = self.boundary.len();
        (0..k)
            .map(|i| {
                if i + 1 < k {
                    &self.boundary[i + 1] - &self.boundary[i]
                } else {
                    Q::one() - &self.boundary[i] + &self.boundary[0]
                }
            })
            .collect()
    }

    /// The coded measure tree: triangles become branch points, segments
    /// atoms on leaves, filled boundary arcs diffuse mass on leaf edges.
    pub fn code(&self) -> Result<MeasureTree> {
        let faces = self.checked_faces()?;
        let root = faces.root();
        let mut id = vec![usize::MAX; root + 1];
        let mut n = 0;
        for (f, slot) in id.iter_mut().enumerate() {
            if faces.kind[f] != Kind::Filled {
                *slot = n;
                n += 1;
            }
        }
        if n == 0 {
            let t = AlgebraicTree::from_edges(2, &[(0, 1)])?;
            return MeasureTree::new(t, vec![Q::zero(); 2], vec![Q::zero(), Q::one()]);
        }
        let mut edges = Vec::new();
        let mut atom = vec![Q::zero(); n];
        let mut arc = vec![Q::zero(); n];
        for f in 0..=root {
            if let Kind::Segment(_) = faces.kind[f] {
                atom[id[f]] = faces.length[f].clone();
            }
        }
        for c in 0..root {
            let (a, b) = (c, faces.parent[c]);
            if faces.kind[a] != Kind::Filled && faces.kind[b] != Kind::Filled {
                edges.push((id[a], id[b]));
            }
        }
        for f in 0..=root {
            if faces.kind[f] != Kind::Filled {
                continue;
            }
            let nb = faces.neighbours(f);
            let len = faces.length[f].clone();
            match nb.as_slice() {
                [g] => {
                    edges.push((id[*g], n));
                    atom.push(Q::zero());
                    arc.push(len);
                    n += 1;
                }
                [g, h] => {
                    let (leaf, other) = match (faces.kind[*g], faces.kind[*h]) {
                        (Kind::Segment(_), _) => (*g, *h),
                        (_, Kind::Segment(_)) => (*h, *g),
                        _ => {
                            return Err(Error::UnsupportedTriangulation(
                                "diffuse mass between two triangles lies on an inner edge".into(),
                            ))
                        }
                    };
                    edges.push((id[leaf], id[other]));
                    arc[id[leaf]] += len;
                }
                _ => unreachable!("validated"),
            }
        }
        let tree = AlgebraicTree::from_edges(n, &edges)?;
        MeasureTree::new(tree, atom, arc)
    }
}

/// How the two subtrees at each branch point are laid out along the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanarChoice {
    /// Smaller mass first, ties broken by the subtree's code.
    Canonical,
    Random(u64),
}

/// A triangulation coding `mt`, read counterclockwise from the leaf `rho`
/// of the reduced tree (its first leaf by default).
pub fn decode(mt: &MeasureTree, rho: Option<Vertex>, choice: PlanarChoice) -> Result<Triangulation> {
    let mt = mt.reduced();
    if let Some(why) = mt.t2_violation() {
        return Err(Error::NotBinaryLeafAtom(why));
    }
    let tree = mt.tree();
    if mt.len() == 1 {
        return Ok(Triangulation::new(vec![Q::zero()], Vec::new(), vec![[0, 0]]));
    }
    let rho = match rho {
        Some(r) if r < mt.len() && tree.is_leaf(r) => r,
        Some(r) => return Err(Error::InvalidParameter(format!("{r} is not a leaf of the reduced tree"))),
        None => tree.leaves()[0],
    };
    // orientation away from rho
    let mut parent = vec![usize::MAX; mt.len()];
    let mut order = vec![rho];
    parent[rho] = rho;
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        i += 1;
        for &w in tree.neighbors(v) {
            if parent[w] == usize::MAX {
                parent[w] = v;
                order.push(w);
            }
        }
    }
    let mut mass = vec![Q::zero(); mt.len()];
    for &v in order.iter().rev() {
        mass[v] += mt.atom(v) + mt.arc(v);
        if v != rho {
            let m = mass[v].clone();
            mass[parent[v]] += m;
        }
    }
    let codes: Vec<String> = if choice == PlanarChoice::Canonical {
        let labels: Vec<String> = (0..mt.len()).map(|v| format!("{}|{}", mt.atom(v), mt.arc(v))).collect();
        rooted_code_all(tree.adjacency(), &labels, &order, &parent)
    } else {
        Vec::new()
    };
    let mut shuffle = match choice {
        PlanarChoice::Random(seed) => Some(rng::stream(seed)),
        PlanarChoice::Canonical => None,
    };

    let mut triangles: Vec<[Q; 3]> = Vec::new();
    let mut segments: Vec<[Q; 2]> = Vec::new();
    let mut t = Q::zero();
    if !mt.atom(rho).is_zero() {
        segments.push([Q::zero(), mt.atom(rho).clone()]);
    }
    t += mt.atom(rho) + mt.arc(rho);
    let first = tree.neighbors(rho)[0];
    let mut stack = vec![first];
    while let Some(v) = stack.pop() {
        let mut kids: Vec<Vertex> = tree.neighbors(v).iter().copied().filter(|&w| w != parent[v]).collect();
        if kids.is_empty() {
            t += mt.arc(v);
            if !mt.atom(v).is_zero() {
                let end = &t + mt.atom(v);
                segments.push([t.clone(), end.clone()]);
                t = end;
            }
            continue;
        }
        match shuffle.as_mut() {
            Some(r) => kids.shuffle(r),
            None => kids.sort_by(|&a, &b| mass[a].cmp(&mass[b]).then_with(|| codes[a].cmp(&codes[b]))),
        }
        let a = t.clone();
        let b = &a + &mass[kids[0]];
        let c = &b + &mass[kids[1]];
        triangles.push([a, b, c]);
        stack.push(kids[1]);
        stack.push(kids[0]);
    }
    debug_assert!(t.is_one());

    let wrap = |x: &Q| if x.is_one() { Q::zero() } else { x.clone() };
    let mut points: Vec<Q> = triangles
        .iter()
        .flat_map(|tr| tr.iter().map(wrap).collect::<Vec<_>>())
        .chain(segments.iter().flat_map(|s| s.iter().map(wrap).collect::<Vec<_>>()))
        .collect();
    points.sort();
    points.dedup();
    let index = |x: &Q| points.binary_search(&wrap(x)).expect("point listed");
    let tri = triangles
        .iter()
        .map(|tr| {
            let mut ids = [index(&tr[0]), index(&tr[1]), index(&tr[2])];
            ids.sort_unstable();
            ids
        })
        .collect();
    let seg = segments.iter().map(|s| [index(&s[0]), index(&s[1])]).collect();
    if points.is_empty() {
        points.push(Q::zero());
    }
    Ok(Triangulation::new(points, tri, seg))
}

fn rooted_code_all(adj: &[Vec<Vertex>], labels: &[String], order: &[Vertex], parent: &[Vertex]) -> Vec<String> {
    let mut codes = vec![String::new(); adj.len()];
    for &v in order.iter().rev() {
        let mut kids: Vec<&String> = adj[v]
            .iter()
            .filter(|&&w| w != parent[v] || v == parent[v])
            .filter(|&&w| parent[w] == v)
            .map(|&w| &codes[w])
            .collect();
        kids.sort();
        let mut s = format!("({}", labels[v]);
        for k in kids {
            s.push_str(k);
        }
        s.push(')');
        codes[v] = s;
    }
    codes
}

/// Whether the coded trees of two triangulations are equivalent.
pub fn equivalent(a: &Triangulation, b: &Triangulation) -> Result<bool> {
    Ok(a.code()?.equivalent(&b.code()?))
}

/// Samples uniform triangulations of regular polygons by choosing the
/// apex over each base with Catalan-weighted probabilities.
pub struct PolygonSampler {
    catalan: Vec<BigUint>,
    cumulative: Vec<OnceLock<Vec<BigUint>>>,
}

impl PolygonSampler {
    pub fn new(max_n: usize) -> Self {
        let mut catalan = vec![BigUint::one()];
        for k in 1..max_n.max(2) {
            let next = &catalan[k - 1] * BigUint::from(2 * (2 * k - 1)) / BigUint::from(k + 1);
            catalan.push(next);
        }
        Self {
            catalan,
            cumulative: (0..max_n.max(2)).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn catalan(&self, k: usize) -> &BigUint {
        &self.catalan[k]
    }

    /// Cumulative apex weights over a base spanning `gap` boundary steps.
    fn weights(&self, gap: usize) -> &[BigUint] {
        self.cumulative[gap].get_or_init(|| {
            let mut acc = BigUint::zero();
            (1..gap)
                .map(|j| {
                    acc += &self.catalan[j - 1] * &self.catalan[gap - j - 1];
                    acc.clone()
                })
                .collect()
        })
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<Triangulation> {
        if n < 3 {
            return Err(Error::InvalidParameter("a polygon needs n >= 3".into()));
        }
        if n > self.catalan.len() {
            return Err(Error::InvalidParameter(format!("sampler built for n <= {}", self.catalan.len())));
        }
        let mut r = rng::stream(seed);
        let mut triangles = Vec::with_capacity(n - 2);
        let mut stack = vec![(0usize, n - 1)];
        while let Some((a, b)) = stack.pop() {
            if b - a < 2 {
                continue;
            }
            let w = self.weights(b - a);
            let u = r.gen_biguint_below(w.last().expect("gap >= 2"));
            let j = a + 1 + w.partition_point(|c| *c <= u);
            triangles.push([a, j, b]);
            stack.push((a, j));
            stack.push((j, b));
        }
        Ok(Triangulation::polygon(n, triangles))
    }
}

pub fn uniform_triangulation(n: usize, seed: u64) -> Result<Triangulation> {
    PolygonSampler::new(n).sample(n, seed)
}

/// Every triangulation of the regular `n`-gon, for small `n`.
pub fn all_triangulations(n: usize) -> Result<Vec<Triangulation>> {
    if !(3..=12).contains(&n) {
        return Err(Error::Infeasible("enumeration supports 3 <= n <= 12".into()));
    }
    fn rec(a: usize, b: usize) -> Vec<Vec<[usize; 3]>> {
        if b - a < 2 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for j in a + 1..b {
            let left = rec(a, j);
            let right = rec(j, b);
            for l in &left {
                for r in &right {
                    let mut t = vec![[a, j, b]];
                    t.extend(l.iter().copied());
                    t.extend(r.iter().copied());
                    out.push(t);
                }
            }
        }
        out
    }
    Ok(rec(0, n - 1).into_iter().map(|t| Triangulation::polygon(n, t)).collect())
}

const RADIUS: f64 = 1.0 / (2.0 * PI);

fn point(pos: f64) -> (f64, f64) {
    let a = 2.0 * PI * pos;
    (RADIUS * a.cos(), RADIUS * a.sin())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Piece {
    Chord((f64, f64), (f64, f64)),
    /// Counterclockwise from the first position, of the given length.
    Arc(f64, f64),
}

impl Piece {
    fn at(&self, s: f64) -> (f64, f64) {
        match *self {
            Piece::Chord(p, q) => (p.0 + s * (q.0 - p.0), p.1 + s * (q.1 - p.1)),
            Piece::Arc(start, len) => point(start + s * len),
        }
    }

    fn extent(&self) -> f64 {
        match *self {
            Piece::Chord(p, q) => (q.0 - p.0).hypot(q.1 - p.1),
            Piece::Arc(_, len) => 2.0 * PI * RADIUS * len,
        }
    }

    fn distance(&self, x: (f64, f64)) -> f64 {
        match *self {
            Piece::Chord(p, q) => {
                let (dx, dy) = (q.0 - p.0, q.1 - p.1);
                let l2 = dx * dx + dy * dy;
                let s = if l2 == 0.0 {
                    0.0
                } else {
                    (((x.0 - p.0) * dx + (x.1 - p.1) * dy) / l2).clamp(0.0, 1.0)
                };
                (x.0 - p.0 - s * dx).hypot(x.1 - p.1 - s * dy)
            }
            Piece::Arc(start, len) => {
                let r = x.0.hypot(x.1);
                if r > 0.0 {
                    let turn = (x.1.atan2(x.0) / (2.0 * PI)).rem_euclid(1.0);
                    if (turn - start).rem_euclid(1.0) <= len {
                        return (r - RADIUS).abs();
                    }
                } else {
                    return RADIUS;
                }
                let a = point(start);
                let b = point(start + len);
                (x.0 - a.0).hypot(x.1 - a.1).min((x.0 - b.0).hypot(x.1 - b.1))
            }
        }
    }
}

impl Triangulation {
    /// Chords together with the boundary arcs that stay in the set.
    fn pieces(&self) -> Vec<Piece> {
        let pos: Vec<f64> = self.boundary.iter().map(q_to_f64).collect();
        let mut out: Vec<Piece> = self
            .chords()
            .into_iter()
            .map(|(i, j)| Piece::Chord(point(pos[i]), point(pos[j])))
            .collect();
        let k = pos.len();
        let mut removed = vec![false; k];
        for &[i, j] in &self.segments {
            if i == j {
                removed.fill(true);
                break;
            }
            let mut g = i;
            while g != j {
                removed[g] = true;
                g = (g + 1) % k;
            }
        }
        for (g, len) in self.arc_lengths().iter().enumerate() {
            if !removed[g] {
                out.push(Piece::Arc(pos[g], q_to_f64(len)));
            }
        }
        if out.is_empty() {
            let p = point(pos[0]);
            out.push(Piece::Chord(p, p));
        }
        out
    }
}

/// One-sided sup distance from points spaced at most `tol` apart along
/// `from` to the set `to`. The grid halves per level, so shrinking `tol`
/// only adds points.
fn directed(from: &[Piece], to: &[Piece], tol: f64) -> f64 {
    let mut best = 0.0f64;
    for p in from {
        if to.contains(p) {
            continue;
        }
        let mut steps = 1usize;
        while p.extent() / steps as f64 > tol && steps < 1 << 24 {
            steps *= 2;
        }
        for s in 0..=steps {
            let x = p.at(s as f64 / steps as f64);
            let d = to.iter().map(|q| q.distance(x)).fold(f64::INFINITY, f64::min);
            best = best.max(d);
        }
    }
    best
}

/// Hausdorff distance between the chord sets, accurate to within `tol`.
pub fn hausdorff_distance(a: &Triangulation, b: &Triangulation, tol: f64) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    for t in [a, b] {
        let r = t.validate();
        if !r.ok() {
            return Err(Error::InvalidTriangulation(r.violations.join("; ")));
        }
    }
    let (pa, pb) = (a.pieces(), b.pieces());
    Ok(directed(&pa, &pb, tol).max(directed(&pb, &pa, tol)))
}

/// SVG drawing: chords, shaded segments, light triangles and optionally
/// the coded tree.
pub fn render_svg(t: &Triangulation, dual: bool, comment: Option<&str>) -> Result<String> {
    let faces = t.checked_faces()?;
    let size = 400.0;
    let scale = size * 0.45 / RADIUS;
    let xy = |p: (f64, f64)| (size / 2.0 + scale * p.0, size / 2.0 - scale * p.1);
    let pos: Vec<f64> = t.boundary.iter().map(q_to_f64).collect();
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    if let Some(c) = comment {
        let _ = writeln!(s, "<!-- {} -->", c.replace("--", "- -"));
    }
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let (cx, cy) = xy((0.0, 0.0));
    let _ = writeln!(
        s,
        r##"<circle cx="{cx:.3}" cy="{cy:.3}" r="{:.3}" fill="none" stroke="#888" stroke-dasharray="2,3"/>"##,
        scale * RADIUS
    );
    let arc_path = |from: f64, len: f64| -> String {
        let steps = ((len * 180.0).ceil() as usize).max(2);
        let mut d = String::new();
        for k in 0..=steps {
            let (x, y) = xy(point(from + len * k as f64 / steps as f64));
            let _ = write!(d, "{}{x:.3},{y:.3} ", if k == 0 { "M" } else { "L" });
        }
        d
    };
    let lengths = t.arc_lengths();
    for &[i, j] in &t.segments {
        let len = if i == j {
            1.0
        } else {
            let mut l = 0.0;
            let mut g = i;
            while g != j {
                l += q_to_f64(&lengths[g]);
                g = (g + 1) % pos.len();
            }
            l
        };
        let _ = writeln!(
            s,
            r##"<path d="{}Z" fill="#9ecae1" fill-opacity="0.6" stroke="none"/>"##,
            arc_path(pos[i], len)
        );
    }
    for tri in &t.triangles {
        let mut d = String::new();
        for (k, &v) in tri.iter().enumerate() {
            let (x, y) = xy(point(pos[v]));
            let _ = write!(d, "{}{x:.3},{y:.3} ", if k == 0 { "M" } else { "L" });
        }
        let _ = writeln!(s, r##"<path d="{d}Z" fill="#fdd0a2" fill-opacity="0.5" stroke="none"/>"##);
    }
    for (i, j) in t.chords() {
        let (x1, y1) = xy(point(pos[i]));
        let (x2, y2) = xy(point(pos[j]));
        let _ = writeln!(
            s,
            r##"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="#222" stroke-width="1"/>"##
        );
    }
    if dual {
        let root = faces.root();
        // a point inside each face
        let centre = |f: usize| -> (f64, f64) {
            let mut ends: Vec<usize> = Vec::new();
            if f != root {
                ends.extend([faces.chords[f].0, faces.chords[f].1]);
            }
            for &c in &faces.children[f] {
                ends.extend([faces.chords[c].0, faces.chords[c].1]);
            }
            if let Kind::Segment(k) = faces.kind[f] {
                let [i, j] = t.segments[k];
                let mid = if i == j {
                    0.0
                } else {
                    pos[i] + q_to_f64(&faces.length[f]) / 2.0
                };
                let p = point(mid);
                return (p.0 * 0.9, p.1 * 0.9);
            }
            if ends.is_empty() {
                return (0.0, 0.0);
            }
            let k = ends.len() as f64;
            let (sx, sy) = ends.iter().fold((0.0, 0.0), |acc, &e| {
                let p = point(pos[e]);
                (acc.0 + p.0, acc.1 + p.1)
            });
            (sx / k, sy / k)
        };
        let mut line = |a: (f64, f64), b: (f64, f64)| {
            let (x1, y1) = xy(a);
            let (x2, y2) = xy(b);
            let _ = writeln!(
                s,
                r##"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="#c00" stroke-width="1" stroke-dasharray="4,2"/>"##
            );
        };
        for c in 0..root {
            let (a, b) = (c, faces.parent[c]);
            if faces.kind[a] != Kind::Filled && faces.kind[b] != Kind::Filled {
                line(centre(a), centre(b));
            }
        }
        for f in 0..=root {
            if faces.kind[f] != Kind::Filled {
                continue;
            }
            let nb = faces.neighbours(f);
            if let [g] = nb.as_slice() {
                // the leaf sits at the middle of the filled arc
                let (i, j) = faces.chords[*g.min(&f)];
                let mid = if f == root {
                    pos[j] + q_to_f64(&faces.length[f]) / 2.0
                } else {
                    pos[i] + q_to_f64(&faces.length[f]) / 2.0
                };
                line(centre(*g), point(mid));
            } else if let [g, h] = nb.as_slice() {
                line(centre(*g), centre(*h));
            }
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

impl Triangulation {
    /// Positions and triangles as `(i, j, k)` over the boundary, for tests
    /// and the command line.
    pub fn describe(&self) -> String {
        let b: Vec<String> = self.boundary.iter().map(|p| p.to_string()).collect();
        format!("boundary {:?} triangles {:?} segments {:?}", b, self.triangles, self.segments)
    }

    /// The tree coded by a triangulation after relabelling through
    /// `rooted_code`; exposed for shape checks.
    pub fn coded_shape(&self) -> Result<String> {
        let mt = self.code()?;
        let labels = vec![String::new(); mt.len()];
        Ok(rooted_code(mt.tree().adjacency(), &labels, 0))
    }
}
