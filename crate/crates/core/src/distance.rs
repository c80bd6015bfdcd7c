//! Hop distances from the fixed groups and the distance-resolved
//! polarization profile.
//!
//! `Forward` follows edges `src -> dst`, the direction in which a spin can
//! influence its out-neighbors. `Reverse` follows them backwards.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::scalar::Real;
use crate::stats::NodeStats;

pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Forward,
    Reverse,
}

/// Multi-source BFS. Group nodes get distance 0, unreachable nodes
/// [`UNREACHABLE`].
pub fn bfs_from_group(
    graph: &DirectedGraph,
    group: &[NodeId],
    direction: Direction,
) -> Result<Vec<u32>> {
    if group.is_empty() {
        return Err(Error::InvalidArgument("BFS source group is empty".into()));
    }
    let n = graph.n_nodes();
    let mut dist = vec![UNREACHABLE; n];
    let mut queue = VecDeque::new();
    for &s in group {
        let slot = dist
            .get_mut(s as usize)
            .ok_or_else(|| Error::InvalidArgument(format!("source {s} out of range")))?;
        if *slot != 0 {
            *slot = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let next = dist[u as usize] + 1;
        let neighbors = match direction {
            Direction::Forward => graph.out_neighbors(u),
            Direction::Reverse => graph.in_neighbors(u),
        };
        for &v in neighbors {
            if dist[v as usize] == UNREACHABLE {
                dist[v as usize] = next;
                queue.push_back(v);
            }
        }
    }
    Ok(dist)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub d_r: Vec<u32>,
    pub d_b: Vec<u32>,
}

impl DistanceField {
    pub fn compute(
        graph: &DirectedGraph,
        red: &[NodeId],
        blue: &[NodeId],
        direction: Direction,
    ) -> Result<Self> {
        Ok(DistanceField {
            d_r: bfs_from_group(graph, red, direction)?,
            d_b: bfs_from_group(graph, blue, direction)?,
        })
    }

    pub fn jointly_reachable(&self, node: usize) -> bool {
        self.d_r[node] != UNREACHABLE && self.d_b[node] != UNREACHABLE
    }

    /// `node_id,d_r,d_b`; unreachable written as an empty field.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let fmt = |d: u32| {
            if d == UNREACHABLE {
                String::new()
            } else {
                d.to_string()
            }
        };
        writeln!(w, "node_id,d_r,d_b")?;
        for (i, (&r, &b)) in self.d_r.iter().zip(&self.d_b).enumerate() {
            writeln!(w, "{i},{},{}", fmt(r), fmt(b))?;
        }
        Ok(())
    }
}

/// `(d_r, d_b) -> count` over nodes finite in both fields.
pub fn joint_distance_counts(d_r: &[u32], d_b: &[u32]) -> BTreeMap<(u32, u32), u64> {
    let mut counts = BTreeMap::new();
    for (&r, &b) in d_r.iter().zip(d_b) {
        if r != UNREACHABLE && b != UNREACHABLE {
            *counts.entry((r, b)).or_insert(0) += 1;
        }
    }
    counts
}

pub fn write_joint_counts<W: Write>(
    counts: &BTreeMap<(u32, u32), u64>,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "d_r,d_b,count")?;
    for (&(r, b), &c) in counts {
        writeln!(w, "{r},{b},{c}")?;
    }
    Ok(())
}

/// Share of the joint mass with `|d_r - d_b| <= 1`.
pub fn diagonal_fraction(counts: &BTreeMap<(u32, u32), u64>) -> f64 {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return 0.0;
    }
    let near: u64 = counts
        .iter()
        .filter(|(&(r, b), _)| r.abs_diff(b) <= 1)
        .map(|(_, &c)| c)
        .sum();
    near as f64 / total as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Diagonal {
    /// `d_r < d_b`
    CloserRed,
    Equal,
    /// `d_b < d_r`
    CloserBlue,
}

impl Diagonal {
    pub fn of(d_r: u32, d_b: u32) -> Self {
        match d_r.cmp(&d_b) {
            std::cmp::Ordering::Less => Diagonal::CloserRed,
            std::cmp::Ordering::Equal => Diagonal::Equal,
            std::cmp::Ordering::Greater => Diagonal::CloserBlue,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Diagonal::CloserRed => "CLOSER_RED",
            Diagonal::Equal => "EQUAL",
            Diagonal::CloserBlue => "CLOSER_BLUE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow<T> {
    pub d: u32,
    pub diagonal: Diagonal,
    pub mean_delta_mu: T,
    pub count: u64,
}

/// Mean `delta_mu` grouped by `(min(d_r, d_b), sign(d_b - d_r))` over
/// jointly reachable nodes that are not persistently white.
pub fn delta_mu_by_distance<T: Real>(
    d_r: &[u32],
    d_b: &[u32],
    stats: &NodeStats<T>,
) -> Result<Vec<ProfileRow<T>>> {
    if d_r.len() != d_b.len() || d_r.len() != stats.n_nodes() {
        return Err(Error::InvalidArgument(
            "distance fields and node stats differ in size".into(),
        ));
    }
    let mut groups: BTreeMap<(u32, Diagonal), (T, u64)> = BTreeMap::new();
    for i in 0..d_r.len() {
        let (r, b) = (d_r[i], d_b[i]);
        if r == UNREACHABLE || b == UNREACHABLE || stats.is_persistently_white(i) {
            continue;
        }
        let entry = groups
            .entry((r.min(b), Diagonal::of(r, b)))
            .or_insert((T::zero(), 0));
        entry.0 = entry.0 + stats.delta_mu[i];
        entry.1 += 1;
    }
    Ok(groups
        .into_iter()
        .map(|((d, diagonal), (sum, count))| ProfileRow {
            d,
            diagonal,
            mean_delta_mu: sum / T::from_f64_lossy(count as f64),
            count,
        })
        .collect())
}

pub fn write_profile<T: Real, W: Write>(rows: &[ProfileRow<T>], mut w: W) -> std::io::Result<()> {
    writeln!(w, "d,diagonal,mean_delta_mu,count")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.d, r.diagonal.name(), r.mean_delta_mu, r.count)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(u32, u32)]) -> DirectedGraph {
        DirectedGraph::from_edges(n, edges.iter().copied()).unwrap().0
    }

    #[test]
    fn chain_distances() {
        let g = graph(4, &[(0, 1), (1, 2)]);
        let d = bfs_from_group(&g, &[0], Direction::Forward).unwrap();
        assert_eq!(d, vec![0, 1, 2, UNREACHABLE]);
        let back = bfs_from_group(&g, &[2], Direction::Reverse).unwrap();
        assert_eq!(back, vec![2, 1, 0, UNREACHABLE]);
    }

    #[test]
    fn nearest_source_wins() {
        // 0 -> x directly, 1 -> a -> b -> x
        let g = graph(5, &[(0, 4), (1, 2), (2, 3), (3, 4)]);
        let d = bfs_from_group(&g, &[0, 1], Direction::Forward).unwrap();
        assert_eq!(d[4], 1);
        assert!(bfs_from_group(&g, &[], Direction::Forward).is_err());
    }

    #[test]
    fn hub_joint_counts() {
        let n = 10u32;
        let mut edges = Vec::new();
        for v in 2..n {
            edges.push((0, v));
            edges.push((1, v));
        }
        let g = graph(n as usize, &edges);
        let f = DistanceField::compute(&g, &[0], &[1], Direction::Forward).unwrap();
        let counts = joint_distance_counts(&f.d_r, &f.d_b);
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[&(1, 1)], u64::from(n - 2));
    }

    #[test]
    fn profile_zero_when_uniform() {
        let g = graph(4, &[(0, 2), (1, 3), (2, 3), (3, 2)]);
        let f = DistanceField::compute(&g, &[0], &[1], Direction::Forward).unwrap();
        let stats = NodeStats {
            mu: vec![1.0f64; 4],
            white_freq: vec![0.0; 4],
            delta_mu: vec![0.0; 4],
            mu_0: 1.0,
        };
        let rows = delta_mu_by_distance(&f.d_r, &f.d_b, &stats).unwrap();
        assert!(rows.iter().all(|r| r.mean_delta_mu == 0.0));
        assert_eq!(rows.iter().map(|r| r.count).sum::<u64>(), 2);
        let mut buf = Vec::new();
        write_profile(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("CLOSER_RED"));
    }

    fn arb_graph() -> impl Strategy<Value = (usize, Vec<(u32, u32)>)> {
        (4usize..30).prop_flat_map(|n| {
            (Just(n), proptest::collection::vec((0..n as u32, 0..n as u32), 0..120))
        })
    }

    proptest! {
        #[test]
        fn edges_relax_distances((n, edges) in arb_graph()) {
            let g = graph(n, &edges);
            let d = bfs_from_group(&g, &[0, 1], Direction::Forward).unwrap();
            for (u, v) in g.edges() {
                if d[u as usize] != UNREACHABLE {
                    prop_assert!(d[v as usize] <= d[u as usize] + 1);
                }
            }
        }

        #[test]
        fn mutual_groups_stay_on_three_diagonals((n, mut edges) in arb_graph()) {
            edges.push((0, 1));
            edges.push((1, 0));
            let g = graph(n, &edges);
            let f = DistanceField::compute(&g, &[0], &[1], Direction::Forward).unwrap();
            let counts = joint_distance_counts(&f.d_r, &f.d_b);
            let jointly = (0..n).filter(|&i| f.jointly_reachable(i)).count() as u64;
            prop_assert_eq!(counts.values().sum::<u64>(), jointly);
            prop_assert_eq!(diagonal_fraction(&counts), if jointly > 0 { 1.0 } else { 0.0 });
        }
    }
}
