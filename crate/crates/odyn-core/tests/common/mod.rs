//! Shared instance generators for the integration suites. Everything is
//! seeded ChaCha8 so failures reproduce exactly.

use odyn_core::{Graph, OpinionProfile};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi graph on exactly `n` nodes (resampled until no node is
/// isolated and node n-1 is present).
pub fn er_graph(n: usize, p_edge: f64, rng: &mut ChaCha8Rng) -> Graph {
    loop {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p_edge {
                    edges.push((u, v));
                }
            }
        }
        if edges.is_empty() {
            continue;
        }
        if let Ok(g) = Graph::from_edges(edges) {
            if g.node_count() == n {
                return g;
            }
        }
    }
}

/// Random graph with exactly `m` distinct edges on `n` nodes.
// Not every suite uses every generator; keep the unused-code lint quiet
// for the per-target compilations.
#[allow(dead_code)]
pub fn gnm_graph(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Graph {
    loop {
        let mut set = BTreeSet::new();
        while set.len() < m {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u != v {
                set.insert((u.min(v), u.max(v)));
            }
        }
        if let Ok(g) = Graph::from_edges(set.into_iter().collect::<Vec<_>>()) {
            if g.node_count() == n {
                return g;
            }
        }
    }
}

pub fn random_s(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

pub fn random_alpha(n: usize, lo: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..=1.0)).collect()
}

pub fn random_profile(n: usize, alpha_lo: f64, rng: &mut ChaCha8Rng) -> OpinionProfile {
    OpinionProfile::new(random_s(n, rng), random_alpha(n, alpha_lo, rng)).unwrap()
}

/// A small zoo of graph shapes keyed by an index, for instance sweeps.
pub fn shaped_graph(shape: usize, n: usize, rng: &mut ChaCha8Rng) -> Graph {
    match shape % 4 {
        0 => er_graph(n, 0.5, rng),
        1 => Graph::star(n).unwrap(),
        2 => Graph::path(n).unwrap(),
        _ => Graph::complete(n).unwrap(),
    }
}
