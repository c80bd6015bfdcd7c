//! PageRank of the Google matrix `G = alpha * S + (1 - alpha) / N`, where
//! `S` is the column-stochastic transition matrix of the graph and dangling
//! columns are uniform.
//!
//! The iteration is matrix-free: each step pulls `p[j] / k_j` over the
//! in-CSR and spreads the dangling mass as one scalar. Writes are per node
//! and the reductions run in node order, so the result does not depend on
//! the size of the thread pool.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct PageRankOptions<T> {
    pub alpha: T,
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for PageRankOptions<T> {
    fn default() -> Self {
        PageRankOptions {
            alpha: T::from_f64_lossy(0.85),
            tol: T::from_f64_lossy(1e-12),
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankResult<T> {
    /// Stationary probability per node, summing to one.
    pub p: Vec<T>,
    /// Rank K per node: 1 for the largest probability, ties by node id.
    pub k_index: Vec<u32>,
    pub alpha: T,
    pub iterations: usize,
    /// L1 change of the last iteration.
    pub residual: T,
}

impl<T: Real> PageRankResult<T> {
    /// Node ids in increasing K.
    pub fn order(&self) -> Vec<NodeId> {
        let mut order = vec![0 as NodeId; self.k_index.len()];
        for (node, &k) in self.k_index.iter().enumerate() {
            order[k as usize - 1] = node as NodeId;
        }
        order
    }

    /// Writes `node_id,title,p,k_index` rows in node order.
    pub fn write_csv<W: Write>(&self, graph: &DirectedGraph, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::InvalidArgument(format!("csv write: {e}"));
        out.write_record(["node_id", "title", "p", "k_index"])
            .map_err(csv_err)?;
        for node in graph.nodes() {
            let i = node as usize;
            out.write_record([
                node.to_string(),
                graph.title(node).unwrap_or("").to_string(),
                self.p[i].to_string(),
                self.k_index[i].to_string(),
            ])
            .map_err(csv_err)?;
        }
        out.flush().map_err(|e| Error::InvalidArgument(format!("csv write: {e}")))
    }
}

pub fn compute_pagerank<T: Real>(
    graph: &DirectedGraph,
    options: &PageRankOptions<T>,
) -> Result<PageRankResult<T>> {
    let n = graph.n_nodes();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let start = vec![T::one() / T::from_usize_lossy(n); n];
    compute_pagerank_from(graph, start, options)
}

/// Power iteration from an arbitrary non-negative start vector, which is
/// normalized first.
pub fn compute_pagerank_from<T: Real>(
    graph: &DirectedGraph,
    start: Vec<T>,
    options: &PageRankOptions<T>,
) -> Result<PageRankResult<T>> {
    let n = graph.n_nodes();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if start.len() != n {
        return Err(Error::InvalidArgument(format!(
            "start vector has {} entries for {} nodes",
            start.len(),
            n
        )));
    }
    let alpha = options.alpha;
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} not in (0, 1)")));
    }
    if !(options.tol > T::zero()) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let total: T = start.iter().copied().sum();
    if !(total > T::zero()) || start.iter().any(|&x| x < T::zero() || !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "start vector must be non-negative with positive mass".into(),
        ));
    }

    let n_t = T::from_usize_lossy(n);
    let inv_degree: Vec<T> = graph
        .nodes()
        .map(|j| match graph.out_degree(j) {
            0 => T::zero(),
            k => T::one() / T::from_usize_lossy(k as usize),
        })
        .collect();
    let dangling: Vec<NodeId> = graph.nodes().filter(|&j| graph.out_degree(j) == 0).collect();

    let mut p: Vec<T> = start.into_iter().map(|x| x / total).collect();
    let mut share = vec![T::zero(); n];
    let mut next = vec![T::zero(); n];
    let mut residual = T::infinity();

    for iteration in 1..=options.max_iter {
        share
            .par_iter_mut()
            .zip(p.par_iter().zip(inv_degree.par_iter()))
            .for_each(|(s, (&pj, &inv))| *s = pj * inv);
        let dangling_mass: T = dangling.iter().map(|&j| p[j as usize]).sum();
        let mass: T = p.iter().copied().sum();
        let base = (alpha * dangling_mass + (T::one() - alpha) * mass) / n_t;

        next.par_iter_mut().enumerate().for_each(|(i, out)| {
            let pulled: T = graph
                .in_neighbors(i as NodeId)
                .iter()
                .map(|&j| share[j as usize])
                .sum();
            *out = alpha * pulled + base;
        });

        residual = p
            .iter()
            .zip(&next)
            .map(|(&a, &b)| (a - b).abs())
            .sum();
        std::mem::swap(&mut p, &mut next);

        if residual < options.tol {
            let mass: T = p.iter().copied().sum();
            p.iter_mut().for_each(|x| *x = *x / mass);
            let k_index = rank_index(&p);
            return Ok(PageRankResult {
                p,
                k_index,
                alpha,
                iterations: iteration,
                residual,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: options.max_iter,
        residual: residual.to_f64().unwrap_or(f64::NAN),
    })
}

/// Rank by decreasing value, ties broken by ascending node id.
pub fn rank_index<T: Real>(p: &[T]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| {
        p[b].partial_cmp(&p[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut k = vec![0u32; p.len()];
    for (pos, &node) in order.iter().enumerate() {
        k[node] = pos as u32 + 1;
    }
    k
}

/// One explicit product `G p`, pushing along out-edges. Used as an
/// independent check on the pull-based iteration.
pub fn google_multiply<T: Real>(graph: &DirectedGraph, p: &[T], alpha: T) -> Vec<T> {
    let n = graph.n_nodes();
    let n_t = T::from_usize_lossy(n);
    let mut out = vec![T::zero(); n];
    let mut spread = T::zero();
    for j in graph.nodes() {
        let pj = p[j as usize];
        spread = spread + (T::one() - alpha) * pj / n_t;
        let targets = graph.out_neighbors(j);
        if targets.is_empty() {
            spread = spread + alpha * pj / n_t;
        } else {
            let w = alpha * pj / T::from_usize_lossy(targets.len());
            for &i in targets {
                out[i as usize] = out[i as usize] + w;
            }
        }
    }
    out.iter_mut().for_each(|x| *x = *x + spread);
    out
}

/// `|| G p - p ||_1`.
pub fn stationarity_residual<T: Real>(graph: &DirectedGraph, p: &[T], alpha: T) -> T {
    google_multiply(graph, p, alpha)
        .iter()
        .zip(p)
        .map(|(&a, &b)| (a - b).abs())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(u32, u32)]) -> DirectedGraph {
        DirectedGraph::from_edges(n, edges.iter().copied()).unwrap().0
    }

    #[test]
    fn cycle_is_uniform() {
        let g = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        let r = compute_pagerank::<f64>(&g, &PageRankOptions::default()).unwrap();
        for &x in &r.p {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
        assert_eq!(r.k_index, vec![1, 2, 3]);
    }

    #[test]
    fn two_node_edge_matches_linear_solve() {
        // p0 = 0.425 p1 + 0.075 with p0 + p1 = 1  =>  p0 = 0.5 / 1.425
        let p0 = 0.5 / 1.425;
        let g = graph(2, &[(0, 1)]);
        let r = compute_pagerank::<f64>(&g, &PageRankOptions::default()).unwrap();
        assert!((r.p[0] - p0).abs() < 1e-12);
        assert!((r.p[0] - 0.35088).abs() < 1e-4);
        assert!((r.p[1] - 0.64912).abs() < 1e-4);
        assert_eq!(r.k_index, vec![2, 1]);
    }

    #[test]
    fn single_node() {
        let g = graph(1, &[]);
        let r = compute_pagerank::<f64>(&g, &PageRankOptions::default()).unwrap();
        assert_eq!(r.p, vec![1.0]);
        assert_eq!(r.k_index, vec![1]);
    }

    #[test]
    fn f32_instantiation() {
        let g = graph(2, &[(0, 1)]);
        let opts = PageRankOptions {
            tol: 1e-6f32,
            ..Default::default()
        };
        let r = compute_pagerank::<f32>(&g, &opts).unwrap();
        assert!((r.p[0] - 0.35088).abs() < 1e-4);
    }

    #[test]
    fn errors() {
        let empty = graph(0, &[]);
        assert!(matches!(
            compute_pagerank::<f64>(&empty, &PageRankOptions::default()),
            Err(Error::EmptyGraph)
        ));
        let g = graph(3, &[(0, 1), (1, 2)]);
        let opts = PageRankOptions {
            max_iter: 2,
            ..Default::default()
        };
        match compute_pagerank::<f64>(&g, &opts) {
            Err(Error::NotConverged { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 0.0);
            }
            other => panic!("{other:?}"),
        }
        let bad_alpha = PageRankOptions {
            alpha: 1.0,
            ..Default::default()
        };
        assert!(compute_pagerank::<f64>(&g, &bad_alpha).is_err());
    }

    #[test]
    fn ties_broken_by_node_id() {
        assert_eq!(rank_index(&[0.25, 0.5, 0.25]), vec![2, 1, 3]);
        let g = graph(4, &[]);
        let r = compute_pagerank::<f64>(&g, &PageRankOptions::default()).unwrap();
        assert_eq!(r.k_index, vec![1, 2, 3, 4]);
        assert_eq!(r.order(), vec![0, 1, 2, 3]);
    }
}
