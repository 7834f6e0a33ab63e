//! JSON and CSV file formats.
//!
//! Trees: `{"vertices":[{"id":0},...],"edges":[[0,1],...]}`; measure trees
//! add `"atom_mass"` and `"arc_mass"` maps from vertex id to an exact
//! rational string. Triangulations:
//! `{"boundary":["0","1/12",...],"triangles":[[0,4,11],...],"segments":[[2,3],...]}`.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::measure::{MeasureTree, Q};
use crate::shapes::ShapeDistribution;
use crate::stats::MassTensor;
use crate::tree::AlgebraicTree;
use crate::triangulation::Triangulation;

/// Parses `"p/q"`, an integer or a finite decimal like `"0.125"` exactly.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not an exact number: {s:?}"));
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole = BigInt::from_str(if whole.is_empty() || whole == "-" { "0" } else { whole }).map_err(|_| bad())?;
        let scale = BigInt::from(10).pow(frac.len() as u32);
        let f = BigInt::from_str(frac).map_err(|_| bad())?;
        let mag = whole.abs() * &scale + f;
        let num = if negative { -mag } else { mag };
        return Ok(Q::new(num, scale));
    }
    let q = Q::from_str(s).map_err(|_| bad())?;
    Ok(q)
}

#[derive(Debug, Serialize, Deserialize)]
struct VertexJson {
    id: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct TreeJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<Value>,
    vertices: Vec<VertexJson>,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    atom_mass: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    arc_mass: Option<BTreeMap<String, String>>,
}

fn tree_from_parts(t: &TreeJson) -> Result<AlgebraicTree> {
    let n = t.vertices.len();
    let mut seen = vec![false; n];
    for v in &t.vertices {
        if v.id >= n || std::mem::replace(&mut seen[v.id], true) {
            return Err(Error::Parse(format!("vertex ids must be 0..{n} without repeats")));
        }
    }
    let edges: Vec<(usize, usize)> = t.edges.iter().map(|e| (e[0], e[1])).collect();
    AlgebraicTree::from_edges(n, &edges)
}

fn mass_vec(map: &Option<BTreeMap<String, String>>, n: usize) -> Result<Vec<Q>> {
    let mut out = vec![Q::zero(); n];
    if let Some(map) = map {
        for (k, v) in map {
            let id: usize = k.parse().map_err(|_| Error::Parse(format!("bad vertex id {k:?}")))?;
            if id >= n {
                return Err(Error::UnknownVertex(id));
            }
            out[id] = parse_q(v)?;
        }
    }
    Ok(out)
}

pub fn tree_from_json(s: &str) -> Result<AlgebraicTree> {
    let t: TreeJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    tree_from_parts(&t)
}

/// Reads a measure tree; a file without masses gets uniform leaf atoms.
pub fn measure_tree_from_json(s: &str) -> Result<MeasureTree> {
    let t: TreeJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    let tree = tree_from_parts(&t)?;
    if t.atom_mass.is_none() && t.arc_mass.is_none() {
        return Ok(MeasureTree::uniform_leaves(tree));
    }
    let n = tree.len();
    MeasureTree::new(tree, mass_vec(&t.atom_mass, n)?, mass_vec(&t.arc_mass, n)?)
}

fn mass_map(v: &[Q]) -> BTreeMap<String, String> {
    v.iter()
        .enumerate()
        .filter(|(_, m)| !m.is_zero())
        .map(|(i, m)| (i.to_string(), m.to_string()))
        .collect()
}

pub fn measure_tree_to_json(mt: &MeasureTree, meta: Option<Value>) -> String {
    let t = TreeJson {
        meta,
        vertices: (0..mt.len()).map(|id| VertexJson { id }).collect(),
        edges: mt.tree().edges().into_iter().map(|(a, b)| [a, b]).collect(),
        atom_mass: Some(mass_map(mt.atoms())),
        arc_mass: if mt.is_atomic() { None } else { Some(mass_map(mt.arcs())) },
    };
    serde_json::to_string_pretty(&t).expect("plain data serialises")
}

pub fn tree_to_json(tree: &AlgebraicTree, meta: Option<Value>) -> String {
    let t = TreeJson {
        meta,
        vertices: (0..tree.len()).map(|id| VertexJson { id }).collect(),
        edges: tree.edges().into_iter().map(|(a, b)| [a, b]).collect(),
        atom_mass: None,
        arc_mass: None,
    };
    serde_json::to_string_pretty(&t).expect("plain data serialises")
}

#[derive(Debug, Serialize, Deserialize)]
struct TriangulationJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<Value>,
    boundary: Vec<String>,
    #[serde(default)]
    triangles: Vec<[usize; 3]>,
    #[serde(default)]
    segments: Vec<[usize; 2]>,
}

pub fn triangulation_from_json(s: &str) -> Result<Triangulation> {
    let t: TriangulationJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    let boundary = t.boundary.iter().map(|p| parse_q(p)).collect::<Result<Vec<_>>>()?;
    Ok(Triangulation::new(boundary, t.triangles, t.segments))
}

pub fn triangulation_to_json(t: &Triangulation, meta: Option<Value>) -> String {
    let j = TriangulationJson {
        meta,
        boundary: t.boundary.iter().map(|p| p.to_string()).collect(),
        triangles: t.triangles.clone(),
        segments: t.segments.clone(),
    };
    serde_json::to_string_pretty(&j).expect("plain data serialises")
}

/// `#`-prefixed lines carrying the configuration as JSON.
pub fn csv_header(meta: &Value) -> String {
    format!("# {}\n", serde_json::to_string(meta).expect("json value"))
}

/// `key,probability,count` rows, exact probability first.
pub fn shape_csv(d: &ShapeDistribution, meta: &Value) -> String {
    let mut s = csv_header(meta);
    s.push_str("key,probability,exact,count\n");
    for (k, w) in &d.dist.weights {
        let count = d.dist.samples.map(|_| d.dist.count(k).to_string()).unwrap_or_default();
        s.push_str(&format!("\"{}\",{},{},{}\n", k, d.dist.prob(k), w, count));
    }
    s
}

#[derive(Debug, Serialize, Deserialize)]
struct TensorRow {
    tensor: Vec<String>,
    weight: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct TensorJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<Value>,
    samples: Option<u64>,
    rows: Vec<TensorRow>,
}

pub fn tensor_distribution_to_json(d: &Distribution<MassTensor>, meta: Option<Value>) -> String {
    let j = TensorJson {
        meta,
        samples: d.samples,
        rows: d
            .weights
            .iter()
            .map(|(k, w)| TensorRow {
                tensor: k.iter().map(|x| x.to_string()).collect(),
                weight: w.to_string(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&j).expect("plain data serialises")
}

pub fn tensor_distribution_from_json(s: &str) -> Result<Distribution<MassTensor>> {
    let j: TensorJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    let mut weights = BTreeMap::new();
    for row in j.rows {
        let key = row.tensor.iter().map(|x| parse_q(x)).collect::<Result<Vec<_>>>()?;
        *weights.entry(key).or_insert_with(Q::zero) += parse_q(&row.weight)?;
    }
    Ok(Distribution {
        weights,
        samples: j.samples,
    })
}

/// Reads a shape distribution back from [`shape_csv`] output.
pub fn shape_csv_read(s: &str, m: usize) -> Result<ShapeDistribution> {
    let mut weights = BTreeMap::new();
    let mut samples = None;
    for line in s.lines().filter(|l| !l.starts_with('#')).skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let (key, rest) = line
            .strip_prefix('"')
            .and_then(|l| l.split_once("\","))
            .ok_or_else(|| Error::Parse(format!("bad row {line:?}")))?;
        let cols: Vec<&str> = rest.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Parse(format!("bad row {line:?}")));
        }
        weights.insert(key.to_string(), parse_q(cols[1])?);
        if let Ok(c) = cols[2].parse::<u64>() {
            samples = Some(samples.unwrap_or(0) + c);
        }
    }
    Ok(ShapeDistribution {
        m,
        dist: Distribution { weights, samples },
    })
}
