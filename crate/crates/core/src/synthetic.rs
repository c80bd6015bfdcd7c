//! Random and structured graphs for tests, benchmarks and calibration runs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{DirectedGraph, NodeId};

/// Node 0 points at nodes `1..=n_targets`.
pub fn hub(n_targets: usize) -> DirectedGraph {
    let edges = (1..=n_targets as NodeId).map(|v| (0, v));
    DirectedGraph::from_edges(n_targets + 1, edges)
        .expect("hub edges are in range")
        .0
}

/// Directed G(n, p) without self-loops.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for s in 0..n as NodeId {
        for d in 0..n as NodeId {
            if s != d && rng.gen_bool(p) {
                edges.push((s, d));
            }
        }
    }
    DirectedGraph::from_edges(n, edges)
        .expect("edges are in range")
        .0
}

/// Directed preferential attachment.
///
/// Starts from a complete digraph on `m + 1` nodes. Each later node links to
/// `m` distinct earlier nodes chosen with probability proportional to their
/// total degree, and each such link is reciprocated with probability
/// `reciprocity`.
pub fn preferential_attachment(n: usize, m: usize, reciprocity: f64, seed: u64) -> DirectedGraph {
    assert!(m >= 1 && n > m, "need n > m >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(n * m * 2);
    // one entry per edge endpoint
    let mut endpoints: Vec<NodeId> = Vec::with_capacity(n * m * 4);
    let core = (m + 1) as NodeId;
    for a in 0..core {
        for b in 0..core {
            if a != b {
                edges.push((a, b));
                endpoints.push(a);
                endpoints.push(b);
            }
        }
    }
    let mut targets: Vec<NodeId> = Vec::with_capacity(m);
    for v in core..n as NodeId {
        targets.clear();
        while targets.len() < m {
            let t = *endpoints.choose(&mut rng).expect("core is non-empty");
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((v, t));
            endpoints.push(v);
            endpoints.push(t);
            if rng.gen_bool(reciprocity) {
                edges.push((t, v));
                endpoints.push(t);
                endpoints.push(v);
            }
        }
    }
    DirectedGraph::from_edges(n, edges)
        .expect("edges are in range")
        .0
}

/// `k` distinct node ids drawn uniformly.
pub fn sample_nodes(n: usize, k: usize, seed: u64) -> Vec<NodeId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::index::sample(&mut rng, n, k)
        .into_iter()
        .map(|i| i as NodeId)
        .collect()
}
