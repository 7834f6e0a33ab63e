//! Browser demo: random trees drawn as triangulations of the circle, and
//! sampled shape frequencies.

use amtree::random::{beta_splitting_tree, Beta};
use amtree::shapes::{shape_distribution, Mode};
use amtree::triangulation::{decode, render_svg, uniform_triangulation, PlanarChoice};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_LEAVES: usize = 2048;

fn leaves(n: usize) -> amtree::Result<usize> {
    if n > MAX_LEAVES {
        return Err(amtree::Error::InvalidParameter(format!("at most {MAX_LEAVES} leaves")));
    }
    Ok(n)
}

/// A β-splitting tree on `n` leaves, decoded to a triangulation.
pub fn beta_svg(n: usize, beta: &str, seed: u64, dual: bool) -> amtree::Result<String> {
    let beta: Beta = beta.parse()?;
    let mt = beta_splitting_tree(leaves(n)?, beta, seed)?;
    let t = decode(&mt, None, PlanarChoice::Canonical)?;
    render_svg(&t, dual, None)
}

pub fn triangulation_svg(n: usize, seed: u64, dual: bool) -> amtree::Result<String> {
    render_svg(&uniform_triangulation(leaves(n)?, seed)?, dual, None)
}

#[derive(Debug, Serialize, PartialEq)]
pub struct Frequency {
    pub shape: String,
    pub probability: f64,
    pub count: u64,
}

/// Shape frequencies of `samples` draws of `m` leaves from one β tree,
/// most frequent first.
pub fn frequencies(n: usize, beta: &str, m: usize, samples: usize, seed: u64) -> amtree::Result<Vec<Frequency>> {
    let beta: Beta = beta.parse()?;
    if m > 8 || samples > 1_000_000 {
        return Err(amtree::Error::InvalidParameter("m <= 8 and at most 10^6 samples".into()));
    }
    let mt = beta_splitting_tree(leaves(n)?, beta, seed)?;
    let d = shape_distribution(&mt, m, Mode::Sampled { samples, seed: amtree::rng::mix(seed, 1) })?;
    let mut rows: Vec<Frequency> = d
        .dist
        .weights
        .keys()
        .map(|k| Frequency {
            shape: k.clone(),
            probability: d.dist.prob(k),
            count: d.dist.count(k),
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.shape.cmp(&b.shape)));
    Ok(rows)
}

fn js(e: amtree::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn beta_tree_svg(n: usize, beta: &str, seed: u32, dual: bool) -> Result<String, JsError> {
    beta_svg(n, beta, seed.into(), dual).map_err(js)
}

#[wasm_bindgen]
pub fn uniform_triangulation_svg(n: usize, seed: u32, dual: bool) -> Result<String, JsError> {
    triangulation_svg(n, seed.into(), dual).map_err(js)
}

/// JSON array of `{shape, probability, count}`.
#[wasm_bindgen]
pub fn shape_frequencies(n: usize, beta: &str, m: usize, samples: usize, seed: u32) -> Result<String, JsError> {
    let rows = frequencies(n, beta, m, samples, seed.into()).map_err(js)?;
    Ok(serde_json::to_string(&rows).expect("plain rows"))
}
