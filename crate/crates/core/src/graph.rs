//! Immutable directed graph stored as CSR in both orientations.
//!
//! Node ids are dense `u32` in `[0, n_nodes)`. Edges are unweighted and
//! simple: duplicates are merged and self-loops dropped at construction, with
//! both events counted in the [`LoadReport`].
//!
//! # Binary cache layout (version 1, little-endian)
//!
//! ```text
//! magic      [u8; 4]  = b"INOF"
//! version    u32      = 1
//! n_nodes    u64
//! n_edges    u64
//! out_offsets [u64; n_nodes + 1]
//! out_targets [u32; n_edges]
//! in_offsets  [u64; n_nodes + 1]
//! in_sources  [u32; n_edges]
//! n_titles   u64      (0 or n_nodes)
//! titles     n_titles x { len: u32, bytes: [u8; len] }  (UTF-8)
//! ```

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub type NodeId = u32;

const MAGIC: &[u8; 4] = b"INOF";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    out_offsets: Vec<u64>,
    out_targets: Vec<NodeId>,
    in_offsets: Vec<u64>,
    in_sources: Vec<NodeId>,
    titles: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub n_nodes: u64,
    pub n_edges_kept: u64,
    pub n_self_loops_dropped: u64,
    pub n_duplicate_edges_merged: u64,
    pub n_dangling_nodes: u64,
    pub warnings: Vec<String>,
}

impl std::fmt::Display for LoadReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "nodes:              {}", self.n_nodes)?;
        writeln!(f, "edges kept:         {}", self.n_edges_kept)?;
        writeln!(f, "self-loops dropped: {}", self.n_self_loops_dropped)?;
        writeln!(f, "duplicates merged:  {}", self.n_duplicate_edges_merged)?;
        write!(f, "dangling nodes:     {}", self.n_dangling_nodes)?;
        for w in &self.warnings {
            write!(f, "\nwarning: {w}")?;
        }
        Ok(())
    }
}

impl DirectedGraph {
    /// Builds a graph from raw `(src, dst)` pairs. Every id must be below
    /// `n_nodes`.
    pub fn from_edges(
        n_nodes: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<(Self, LoadReport)> {
        let mut report = LoadReport::default();
        let mut kept = Vec::new();
        for (src, dst) in edges {
            if src as usize >= n_nodes || dst as usize >= n_nodes {
                return Err(Error::InvalidArgument(format!(
                    "edge ({src}, {dst}) out of range for {n_nodes} nodes"
                )));
            }
            if src == dst {
                report.n_self_loops_dropped += 1;
            } else {
                kept.push((src, dst));
            }
        }
        let graph = Self::from_clean_pairs(n_nodes, kept, &mut report);
        Ok((graph, report))
    }

    fn from_clean_pairs(
        n_nodes: usize,
        mut edges: Vec<(NodeId, NodeId)>,
        report: &mut LoadReport,
    ) -> Self {
        let before = edges.len();
        edges.sort_unstable();
        edges.dedup();
        report.n_duplicate_edges_merged += (before - edges.len()) as u64;

        let mut out_offsets = vec![0u64; n_nodes + 1];
        let mut in_offsets = vec![0u64; n_nodes + 1];
        for &(s, d) in &edges {
            out_offsets[s as usize + 1] += 1;
            in_offsets[d as usize + 1] += 1;
        }
        for i in 0..n_nodes {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        let out_targets: Vec<NodeId> = edges.iter().map(|&(_, d)| d).collect();

        // Edges are sorted by source, so each in-list comes out ascending.
        let mut cursor: Vec<u64> = in_offsets[..n_nodes].to_vec();
        let mut in_sources = vec![0; edges.len()];
        for &(s, d) in &edges {
            let slot = &mut cursor[d as usize];
            in_sources[*slot as usize] = s;
            *slot += 1;
        }

        let graph = DirectedGraph {
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
            titles: None,
        };
        report.n_nodes = n_nodes as u64;
        report.n_edges_kept = graph.n_edges() as u64;
        report.n_dangling_nodes = graph.count_dangling() as u64;
        graph
    }

    /// Attaches titles. Missing titles are padded with empty strings and
    /// reported; surplus titles are an error since they change `n_nodes`.
    pub fn with_titles(mut self, mut titles: Vec<String>, report: &mut LoadReport) -> Result<Self> {
        let n = self.n_nodes();
        if titles.len() > n {
            return Err(Error::InvalidArgument(format!(
                "{} titles for {} nodes",
                titles.len(),
                n
            )));
        }
        if titles.len() < n {
            report.warnings.push(format!(
                "titles file has {} lines but graph has {} nodes; missing titles left empty",
                titles.len(),
                n
            ));
            titles.resize(n, String::new());
        }
        self.titles = Some(titles);
        Ok(self)
    }

    pub fn n_nodes(&self) -> usize {
        self.out_offsets.len() - 1
    }

    pub fn n_edges(&self) -> usize {
        self.out_targets.len()
    }

    #[inline]
    pub fn out_neighbors(&self, node: NodeId) -> &[NodeId] {
        let i = node as usize;
        &self.out_targets[self.out_offsets[i] as usize..self.out_offsets[i + 1] as usize]
    }

    #[inline]
    pub fn in_neighbors(&self, node: NodeId) -> &[NodeId] {
        let i = node as usize;
        &self.in_sources[self.in_offsets[i] as usize..self.in_offsets[i + 1] as usize]
    }

    #[inline]
    pub fn out_degree(&self, node: NodeId) -> u32 {
        let i = node as usize;
        (self.out_offsets[i + 1] - self.out_offsets[i]) as u32
    }

    pub fn in_degree(&self, node: NodeId) -> u32 {
        let i = node as usize;
        (self.in_offsets[i + 1] - self.in_offsets[i]) as u32
    }

    pub fn out_degrees(&self) -> Vec<u32> {
        (0..self.n_nodes() as NodeId).map(|j| self.out_degree(j)).collect()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        0..self.n_nodes() as NodeId
    }

    /// All edges in `(src, dst)` order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes()
            .flat_map(move |s| self.out_neighbors(s).iter().map(move |&d| (s, d)))
    }

    pub fn count_dangling(&self) -> usize {
        self.nodes().filter(|&j| self.out_degree(j) == 0).count()
    }

    pub fn titles(&self) -> Option<&[String]> {
        self.titles.as_deref()
    }

    pub fn title(&self, node: NodeId) -> Option<&str> {
        self.titles.as_ref().map(|t| t[node as usize].as_str())
    }

    /// Title -> node id. The first node carrying a title wins.
    pub fn title_index(&self) -> HashMap<&str, NodeId> {
        let mut map = HashMap::new();
        if let Some(titles) = &self.titles {
            for (i, t) in titles.iter().enumerate() {
                map.entry(t.as_str()).or_insert(i as NodeId);
            }
        }
        map
    }

    /// Exact-match title lookup. Reports every unresolved name at once.
    pub fn resolve_titles<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<NodeId>> {
        let index = self.title_index();
        let mut ids = Vec::with_capacity(names.len());
        let mut missing = Vec::new();
        for name in names {
            match index.get(name.as_ref()) {
                Some(&id) => ids.push(id),
                None => missing.push(name.as_ref().to_string()),
            }
        }
        if missing.is_empty() {
            Ok(ids)
        } else {
            Err(Error::UnresolvedTitles(missing))
        }
    }

    /// Checks the structural invariants: monotone offsets, ids in range,
    /// and that both orientations hold the same edge set.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_nodes();
        let bad = |m: &str| Err(Error::BinaryFormat(m.to_string()));
        if self.in_offsets.len() != n + 1 {
            return bad("in/out offset tables differ in length");
        }
        for offs in [&self.out_offsets, &self.in_offsets] {
            if offs[0] != 0 || offs.windows(2).any(|w| w[0] > w[1]) {
                return bad("offsets are not monotone from zero");
            }
        }
        if self.out_offsets[n] as usize != self.out_targets.len()
            || self.in_offsets[n] as usize != self.in_sources.len()
        {
            return bad("offsets do not cover the neighbor arrays");
        }
        if self
            .out_targets
            .iter()
            .chain(&self.in_sources)
            .any(|&v| v as usize >= n)
        {
            return bad("node id out of range");
        }
        let mut forward: Vec<(NodeId, NodeId)> = self.edges().collect();
        let mut backward: Vec<(NodeId, NodeId)> = self
            .nodes()
            .flat_map(|d| self.in_neighbors(d).iter().map(move |&s| (s, d)))
            .collect();
        forward.sort_unstable();
        backward.sort_unstable();
        if forward != backward {
            return bad("in-CSR and out-CSR disagree");
        }
        if forward.windows(2).any(|w| w[0] == w[1]) || forward.iter().any(|(s, d)| s == d) {
            return bad("duplicate edge or self-loop");
        }
        if let Some(t) = &self.titles {
            if t.len() != n {
                return bad("title count differs from node count");
            }
        }
        Ok(())
    }

    pub fn save_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_binary(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.n_nodes() as u64).to_le_bytes())?;
        w.write_all(&(self.n_edges() as u64).to_le_bytes())?;
        for &o in &self.out_offsets {
            w.write_all(&o.to_le_bytes())?;
        }
        for &t in &self.out_targets {
            w.write_all(&t.to_le_bytes())?;
        }
        for &o in &self.in_offsets {
            w.write_all(&o.to_le_bytes())?;
        }
        for &s in &self.in_sources {
            w.write_all(&s.to_le_bytes())?;
        }
        match &self.titles {
            None => w.write_all(&0u64.to_le_bytes())?,
            Some(titles) => {
                w.write_all(&(titles.len() as u64).to_le_bytes())?;
                for t in titles {
                    w.write_all(&(t.len() as u32).to_le_bytes())?;
                    w.write_all(t.as_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn load_binary(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Self::from_binary(&bytes)
    }

    pub fn from_binary(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::BinaryFormat("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::BinaryFormat(format!(
                "unsupported version {version} (expected {VERSION})"
            )));
        }
        let n_nodes = r.len_u64()?;
        let n_edges = r.len_u64()?;
        let out_offsets = r.u64_vec(n_nodes + 1)?;
        let out_targets = r.u32_vec(n_edges)?;
        let in_offsets = r.u64_vec(n_nodes + 1)?;
        let in_sources = r.u32_vec(n_edges)?;
        let n_titles = r.len_u64()?;
        let titles = if n_titles == 0 {
            None
        } else {
            let mut titles = Vec::with_capacity(n_titles.min(n_nodes));
            for _ in 0..n_titles {
                let len = r.u32()? as usize;
                let raw = r.take(len)?;
                let s = std::str::from_utf8(raw)
                    .map_err(|_| Error::BinaryFormat("title is not UTF-8".into()))?;
                titles.push(s.to_string());
            }
            Some(titles)
        };
        if r.pos != bytes.len() {
            return Err(Error::BinaryFormat("trailing bytes".into()));
        }
        let graph = DirectedGraph {
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
            titles,
        };
        graph.validate()?;
        Ok(graph)
    }
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::BinaryFormat("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A count that must at least be addressable in memory.
    fn len_u64(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v)
            .ok()
            .filter(|&v| v <= self.bytes.len())
            .ok_or_else(|| Error::BinaryFormat(format!("count {v} exceeds file size")))
    }

    fn u64_vec(&mut self, n: usize) -> Result<Vec<u64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| Error::BinaryFormat("overflow".into()))?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn u32_vec(&mut self, n: usize) -> Result<Vec<u32>> {
        let raw = self.take(n.checked_mul(4).ok_or_else(|| Error::BinaryFormat("overflow".into()))?)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

/// Edges with self-loops removed, the number of self-loops dropped, and the
/// node count implied by the largest id.
pub type ParsedEdges = (Vec<(NodeId, NodeId)>, u64, usize);

/// Parses a whitespace-separated edge list. Blank lines and lines starting
/// with `#` or `%` are skipped.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<ParsedEdges> {
    let mut edges = Vec::new();
    let mut self_loops = 0u64;
    let mut max_index: Option<NodeId> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected \"src dst\", got {trimmed:?}"),
            });
        };
        let src = parse_index(a, lineno)?;
        let dst = parse_index(b, lineno)?;
        max_index = max_index.max(Some(src.max(dst)));
        if src == dst {
            self_loops += 1;
        } else {
            edges.push((src, dst));
        }
    }
    let n_nodes = max_index.map_or(0, |m| m as usize + 1);
    Ok((edges, self_loops, n_nodes))
}

fn parse_index(token: &str, line: usize) -> Result<NodeId> {
    let v: u64 = token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("{token:?} is not a non-negative integer"),
    })?;
    // u32::MAX is kept free so that `max + 1` still fits.
    if v >= u64::from(u32::MAX) {
        return Err(Error::IndexOverflow { line, index: v });
    }
    Ok(v as NodeId)
}

/// Reads an edge list and an optional titles file (one title per line, line
/// index = node id).
pub fn ingest_edge_list(
    path: impl AsRef<Path>,
    titles_path: Option<&Path>,
) -> Result<(DirectedGraph, LoadReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let (edges, self_loops, mut n_nodes) = parse_edge_list(BufReader::new(file))?;

    let titles = match titles_path {
        Some(tp) => {
            let text = std::fs::read_to_string(tp).map_err(|e| Error::io(tp, e))?;
            let titles: Vec<String> = text.lines().map(str::to_string).collect();
            n_nodes = n_nodes.max(titles.len());
            Some(titles)
        }
        None => None,
    };

    let mut report = LoadReport {
        n_self_loops_dropped: self_loops,
        ..LoadReport::default()
    };
    let mut graph = DirectedGraph::from_clean_pairs(n_nodes, edges, &mut report);
    if let Some(titles) = titles {
        graph = graph.with_titles(titles, &mut report)?;
    }
    Ok((graph, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> (DirectedGraph, LoadReport) {
        let (edges, loops, n) = parse_edge_list(text.as_bytes()).unwrap();
        let mut report = LoadReport {
            n_self_loops_dropped: loops,
            ..Default::default()
        };
        let g = DirectedGraph::from_clean_pairs(n, edges, &mut report);
        (g, report)
    }

    #[test]
    fn chain_counts_dangling() {
        let (g, r) = parse("0 1\n1 2\n");
        assert_eq!(g.n_nodes(), 3);
        assert_eq!(g.out_degrees(), vec![1, 1, 0]);
        assert_eq!(r.n_dangling_nodes, 1);
        assert_eq!(g.in_neighbors(2), &[1]);
    }

    #[test]
    fn self_loop_dropped() {
        let (g, r) = parse("0 0\n0 1\n");
        assert_eq!(r.n_self_loops_dropped, 1);
        assert_eq!(r.n_edges_kept, 1);
        assert_eq!(g.n_edges(), 1);
    }

    #[test]
    fn duplicate_merged() {
        let (g, r) = parse("0 1\n0 1\n");
        assert_eq!(r.n_duplicate_edges_merged, 1);
        assert_eq!(g.out_degree(0), 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_edge_list("0 1\n\n1 x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_edge_list("0 1 2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_edge_list("-1 2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn index_overflow() {
        let err = parse_edge_list("0 1\n0 99999999999\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::IndexOverflow { line: 2, .. }));
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let (g, _) = parse("# header\n\n% other\n0 1\n");
        assert_eq!(g.n_edges(), 1);
    }

    #[test]
    fn short_titles_warn() {
        let (g, mut r) = parse("0 1\n1 2\n");
        let g = g.with_titles(vec!["a".into()], &mut r).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(g.title(2), Some(""));
    }

    #[test]
    fn resolve_titles_lists_all_misses() {
        let (g, mut r) = parse("0 1\n1 2\n");
        let g = g
            .with_titles(vec!["a".into(), "b".into(), "c".into()], &mut r)
            .unwrap();
        assert_eq!(g.resolve_titles(&["c", "a"]).unwrap(), vec![2, 0]);
        match g.resolve_titles(&["a", "x", "A"]) {
            Err(Error::UnresolvedTitles(m)) => assert_eq!(m, vec!["x", "A"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn binary_rejects_bad_input() {
        let (g, _) = parse("0 1\n1 2\n");
        let mut buf = Vec::new();
        g.write_binary(&mut buf).unwrap();

        let mut bad_magic = buf.clone();
        bad_magic[0] = b'X';
        assert!(matches!(DirectedGraph::from_binary(&bad_magic), Err(Error::BinaryFormat(_))));

        let mut bad_version = buf.clone();
        bad_version[4] = 9;
        let err = DirectedGraph::from_binary(&bad_version).unwrap_err();
        assert!(err.to_string().contains("version"));

        for cut in [3, 10, 30, buf.len() - 1] {
            assert!(DirectedGraph::from_binary(&buf[..cut]).is_err());
        }

        let mut corrupt = buf.clone();
        // first out-target
        let first_target = 4 + 4 + 8 + 8 + 8 * 4;
        corrupt[first_target] = 2;
        assert!(DirectedGraph::from_binary(&corrupt).is_err());
    }

    #[test]
    fn empty_graph_round_trips() {
        let (g, r) = DirectedGraph::from_edges(0, []).unwrap();
        assert_eq!(r.n_nodes, 0);
        let mut buf = Vec::new();
        g.write_binary(&mut buf).unwrap();
        assert_eq!(DirectedGraph::from_binary(&buf).unwrap(), g);
    }

    fn arb_edges() -> impl Strategy<Value = (usize, Vec<(u32, u32)>)> {
        (1usize..40).prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec((0..n as u32, 0..n as u32), 0..200),
            )
        })
    }

    proptest! {
        #[test]
        fn csr_matches_input_and_round_trips((n, raw) in arb_edges(), titled in any::<bool>()) {
            let (mut g, mut report) = DirectedGraph::from_edges(n, raw.clone()).unwrap();
            if titled {
                g = g.with_titles((0..n).map(|i| format!("node é{i}")).collect(), &mut report).unwrap();
            }
            g.validate().unwrap();

            let mut expected: Vec<_> = raw.iter().copied().filter(|(s, d)| s != d).collect();
            expected.sort_unstable();
            expected.dedup();
            for i in 0..n as u32 {
                let want: Vec<u32> = expected.iter().filter(|e| e.1 == i).map(|e| e.0).collect();
                prop_assert_eq!(g.in_neighbors(i), want.as_slice());
            }
            let degree_sum: u64 = g.out_degrees().iter().map(|&k| u64::from(k)).sum();
            prop_assert_eq!(degree_sum, report.n_edges_kept);
            prop_assert_eq!(report.n_dangling_nodes as usize, g.count_dangling());

            let mut buf = Vec::new();
            g.write_binary(&mut buf).unwrap();
            prop_assert_eq!(DirectedGraph::from_binary(&buf).unwrap(), g);
        }
    }
}
