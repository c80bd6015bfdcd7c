use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use inof::{DirectedGraph, NodeId};
use sha2::{Digest, Sha256};

/// Graph cache plus the digest of its bytes.
pub struct LoadedGraph {
    pub graph: DirectedGraph,
    pub sha256: String,
}

pub fn load_graph(path: &Path) -> Result<LoadedGraph> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let sha256 = hex_digest(&bytes);
    let graph = DirectedGraph::from_binary(&bytes)
        .with_context(|| format!("loading graph cache {}", path.display()))?;
    Ok(LoadedGraph { graph, sha256 })
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Resolves a list of fixed-node names: `#123` is a node id, anything else is an
/// exact title. Every unresolved title is reported at once.
pub fn resolve_nodes(graph: &DirectedGraph, items: &[String], side: &str) -> Result<Vec<NodeId>> {
    let mut ids = Vec::with_capacity(items.len());
    let mut titles = Vec::new();
    let mut slots = Vec::new();
    for item in items {
        if let Some(raw) = item.strip_prefix('#') {
            let id: NodeId = raw
                .parse()
                .with_context(|| format!("{side}: {item:?} is not a node id"))?;
            if id as usize >= graph.n_nodes() {
                bail!("{side}: node {id} out of range for {} nodes", graph.n_nodes());
            }
            ids.push(Some(id));
        } else {
            slots.push(ids.len());
            ids.push(None);
            titles.push(item.as_str());
        }
    }
    if !titles.is_empty() {
        if graph.titles().is_none() {
            bail!("{side}: graph has no titles; use #id instead of {:?}", titles[0]);
        }
        let resolved = graph
            .resolve_titles(&titles)
            .with_context(|| format!("resolving {side} titles"))?;
        for (slot, id) in slots.into_iter().zip(resolved) {
            ids[slot] = Some(id);
        }
    }
    Ok(ids.into_iter().flatten().collect())
}

/// Splits `a,b,c` lists; `\,` keeps a literal comma inside a title.
pub fn split_list(values: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for value in values {
        let mut current = String::new();
        let mut chars = value.chars().peekable();
        while let Some(c) = chars.next() {
            match c {
                '\\' if chars.peek() == Some(&',') => current.push(chars.next().unwrap()),
                ',' => out.push(std::mem::take(&mut current)),
                _ => current.push(c),
            }
        }
        out.push(current);
    }
    out.into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

pub fn thread_count(requested: Option<usize>) -> usize {
    requested
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Writes through a sibling temporary file and renames it into place, so a
/// crashed run never leaves a truncated artifact behind.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> Result<()>,
{
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let file = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    let mut w = BufWriter::new(file);
    fill(&mut w)?;
    w.flush()?;
    w.get_ref().sync_all()?;
    drop(w);
    fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
