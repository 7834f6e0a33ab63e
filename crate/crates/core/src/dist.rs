//! Finite distributions with exact rational weights.

use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::measure::Q;

/// A distribution over a finite support. Sampled distributions keep the
/// sample size, and their weights are exactly `count / samples`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution<K: Ord> {
    pub weights: BTreeMap<K, Q>,
    pub samples: Option<u64>,
}

impl<K: Ord> Default for Distribution<K> {
    fn default() -> Self {
        Self {
            weights: BTreeMap::new(),
            samples: None,
        }
    }
}

impl<K: Ord + Clone> Distribution<K> {
    pub fn exact(weights: BTreeMap<K, Q>) -> Self {
        Self {
            weights,
            samples: None,
        }
    }

    pub fn from_counts(counts: BTreeMap<K, u64>) -> Self {
        let total: u64 = counts.values().sum();
        let weights = counts
            .into_iter()
            .map(|(k, c)| (k, Q::new(c.into(), total.into())))
            .collect();
        Self {
            weights,
            samples: Some(total),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.samples.is_none()
    }

    pub fn total(&self) -> Q {
        self.weights.values().fold(Q::zero(), |a, b| a + b)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, k: &K) -> Q {
        self.weights.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn prob(&self, k: &K) -> f64 {
        self.weights.get(k).and_then(|w| w.to_f64()).unwrap_or(0.0)
    }

    /// Raw count of a key in a sampled distribution.
    pub fn count(&self, k: &K) -> u64 {
        match self.samples {
            Some(n) => (self.get(k) * Q::from_integer(n.into()))
                .to_integer()
                .to_u64()
                .unwrap_or(0),
            None => 0,
        }
    }

    /// Half the l1 distance, exactly.
    pub fn tv(&self, other: &Self) -> Q {
        let mut s = Q::zero();
        for (k, w) in &self.weights {
            s += (w - other.get(k)).abs();
        }
        for (k, w) in &other.weights {
            if !self.weights.contains_key(k) {
                s += w;
            }
        }
        s / Q::from_integer(2.into())
    }

    pub fn tv_f64(&self, other: &Self) -> f64 {
        let mut s = 0.0;
        for (k, w) in &self.weights {
            s += (w.to_f64().unwrap_or(0.0) - other.prob(k)).abs();
        }
        for (k, w) in &other.weights {
            if !self.weights.contains_key(k) {
                s += w.to_f64().unwrap_or(0.0);
            }
        }
        s / 2.0
    }

    pub fn map_keys<K2: Ord + Clone, F: Fn(&K) -> K2>(&self, f: F) -> Distribution<K2> {
        let mut weights: BTreeMap<K2, Q> = BTreeMap::new();
        for (k, w) in &self.weights {
            *weights.entry(f(k)).or_insert_with(Q::zero) += w;
        }
        Distribution {
            weights,
            samples: self.samples,
        }
    }
}

pub(crate) fn merge_counts<K: Ord>(parts: Vec<BTreeMap<K, u64>>) -> BTreeMap<K, u64> {
    let mut out = BTreeMap::new();
    for part in parts {
        for (k, c) in part {
            *out.entry(k).or_insert(0) += c;
        }
    }
    out
}
