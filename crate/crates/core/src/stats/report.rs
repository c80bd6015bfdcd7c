//! Per-node tables, covariate joins and slot-to-slot correlators.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::scalar::Real;
use crate::stats::aggregate::NodeStats;
use crate::stats::correlation::{correlate, CorrelationMethod};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    TopK(usize),
    Ids(Vec<NodeId>),
    Titles(Vec<String>),
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRow<T> {
    pub node_id: NodeId,
    pub title: String,
    pub k_index: u32,
    pub mu: T,
    pub delta_mu: T,
    pub white_freq: T,
}

fn check_len(n: usize, what: &str, len: usize) -> Result<()> {
    if n == len {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{what} has {len} entries for {n} nodes"
        )))
    }
}

/// Rows for the selected nodes: [`Selection::All`] in node order, any other
/// selection in increasing K.
pub fn report_nodes<T: Real>(
    graph: &DirectedGraph,
    stats: &NodeStats<T>,
    k_index: &[u32],
    selection: &Selection,
) -> Result<Vec<NodeRow<T>>> {
    let n = graph.n_nodes();
    check_len(n, "node stats", stats.n_nodes())?;
    check_len(n, "rank index", k_index.len())?;
    let mut ids: Vec<NodeId> = match selection {
        Selection::All => graph.nodes().collect(),
        Selection::TopK(k) => {
            let mut by_rank: Vec<NodeId> = graph.nodes().collect();
            by_rank.sort_by_key(|&v| k_index[v as usize]);
            by_rank.truncate(*k);
            by_rank
        }
        Selection::Ids(ids) => {
            if let Some(bad) = ids.iter().find(|&&v| v as usize >= n) {
                return Err(Error::InvalidArgument(format!("node {bad} out of range")));
            }
            ids.clone()
        }
        Selection::Titles(titles) => graph.resolve_titles(titles)?,
    };
    if *selection != Selection::All {
        ids.sort_by_key(|&v| k_index[v as usize]);
        ids.dedup();
    }
    Ok(ids
        .into_iter()
        .map(|v| {
            let i = v as usize;
            NodeRow {
                node_id: v,
                title: graph.title(v).unwrap_or("").to_string(),
                k_index: k_index[i],
                mu: stats.mu[i],
                delta_mu: stats.delta_mu[i],
                white_freq: stats.white_freq[i],
            }
        })
        .collect())
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

/// `node_id,title,k_index,mu,delta_mu,white_freq`
pub fn write_node_csv<T: Real, W: Write>(rows: &[NodeRow<T>], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["node_id", "title", "k_index", "mu", "delta_mu", "white_freq"])
        .map_err(csv_error)?;
    for r in rows {
        out.write_record([
            r.node_id.to_string(),
            r.title.clone(),
            r.k_index.to_string(),
            r.mu.to_string(),
            r.delta_mu.to_string(),
            r.white_freq.to_string(),
        ])
        .map_err(csv_error)?;
    }
    out.flush().map_err(csv_error)
}

/// Reads per-node `mu` values back from a node CSV, in node-id order.
pub fn read_node_csv<R: Read>(r: R) -> Result<Vec<NodeRow<f64>>> {
    let mut reader = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let field = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| Error::Parse {
                line: line + 2,
                message: format!("missing column {i}"),
            })
        };
        let num = |i: usize| -> Result<f64> {
            field(i)?.parse().map_err(|_| Error::Parse {
                line: line + 2,
                message: format!("column {i} is not a number"),
            })
        };
        rows.push(NodeRow {
            node_id: num(0)? as NodeId,
            title: field(1)?.to_string(),
            k_index: num(2)? as u32,
            mu: num(3)?,
            delta_mu: num(4)?,
            white_freq: num(5)?,
        });
    }
    rows.sort_by_key(|r| r.node_id);
    Ok(rows)
}

/// `title,value` rows; a header line is allowed if its value column is not numeric.
pub fn read_covariates<R: Read>(r: R) -> Result<Vec<(String, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_reader(r);
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        if record.len() != 2 {
            return Err(Error::Parse {
                line: i + 1,
                message: "expected title,value".into(),
            });
        }
        match record[1].trim().parse::<f64>() {
            Ok(v) => out.push((record[0].to_string(), v)),
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("{:?} is not a number", &record[1]),
                })
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovariateReport<T> {
    pub n_matched: usize,
    pub unmatched: Vec<String>,
    pub pearson: T,
    pub spearman: T,
    pub kendall: T,
}

/// Correlates each matched node's `delta_mu` with its covariate value.
pub fn covariate_correlation<T: Real>(
    graph: &DirectedGraph,
    stats: &NodeStats<T>,
    covariates: &[(String, f64)],
) -> Result<CovariateReport<T>> {
    let index = graph.title_index();
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut unmatched = Vec::new();
    for (title, value) in covariates {
        match index.get(title.as_str()) {
            Some(&v) => {
                x.push(stats.delta_mu[v as usize]);
                y.push(T::from_f64_lossy(*value));
            }
            None => unmatched.push(title.clone()),
        }
    }
    Ok(CovariateReport {
        n_matched: x.len(),
        unmatched,
        pearson: correlate(&x, &y, CorrelationMethod::Pearson)?,
        spearman: correlate(&x, &y, CorrelationMethod::Spearman)?,
        kendall: correlate(&x, &y, CorrelationMethod::Kendall)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotPairCorrelation<T> {
    pub slot_a: usize,
    pub slot_b: usize,
    pub pearson: T,
    pub spearman: T,
    pub kendall: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanStd<T> {
    pub mean: T,
    pub std: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotCorrelators<T> {
    pub pairs: Vec<SlotPairCorrelation<T>>,
    pub summary: HashMap<&'static str, MeanStd<T>>,
}

/// Correlators between the `mu` vectors of every slot pair, restricted to
/// `nodes` when given. The summary holds mean and population std per method.
pub fn slot_correlators<T: Real>(
    slots: &[&[T]],
    nodes: Option<&[NodeId]>,
) -> Result<SlotCorrelators<T>> {
    if slots.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            got: slots.len(),
        });
    }
    let pick = |mu: &[T]| -> Vec<T> {
        match nodes {
            Some(ids) => ids.iter().map(|&v| mu[v as usize]).collect(),
            None => mu.to_vec(),
        }
    };
    let picked: Vec<Vec<T>> = slots.iter().map(|s| pick(s)).collect();
    let mut pairs = Vec::new();
    for a in 0..picked.len() {
        for b in a + 1..picked.len() {
            let (x, y) = (&picked[a], &picked[b]);
            pairs.push(SlotPairCorrelation {
                slot_a: a,
                slot_b: b,
                pearson: correlate(x, y, CorrelationMethod::Pearson)?,
                spearman: correlate(x, y, CorrelationMethod::Spearman)?,
                kendall: correlate(x, y, CorrelationMethod::Kendall)?,
            });
        }
    }
    let mut summary = HashMap::new();
    for method in CorrelationMethod::ALL {
        let values: Vec<T> = pairs
            .iter()
            .map(|p| match method {
                CorrelationMethod::Pearson => p.pearson,
                CorrelationMethod::Spearman => p.spearman,
                CorrelationMethod::Kendall => p.kendall,
            })
            .collect();
        let n = T::from_usize_lossy(values.len());
        let mean = values.iter().copied().sum::<T>() / n;
        let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
        summary.insert(method.name(), MeanStd { mean, std: var.sqrt() });
    }
    Ok(SlotCorrelators { pairs, summary })
}
