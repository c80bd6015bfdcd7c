use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use inof::stats::{
    covariate_correlation, fluctuations, read_covariates, read_node_csv, report_nodes,
    slot_correlators, write_node_csv, CorrelationMethod, Histogram, NodeStats, Selection,
    SlotSummary,
};
use inof::{DirectedGraph, NodeId};

use crate::common::{ensure_dir, load_graph, read_json, write_atomic, write_json};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HistogramKind {
    Fr,
    Mu,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Directory written by `inof simulate`
    #[arg(long)]
    pub results: PathBuf,
    /// Density table of the red fraction or of node polarization
    #[arg(long, value_enum)]
    pub histogram: Option<HistogramKind>,
    /// sigma_0 and sigma_mu across slots
    #[arg(long)]
    pub fluctuations: bool,
    /// Pairwise slot correlators of node polarization
    #[arg(long)]
    pub correlate_slots: bool,
    /// `title,value` CSV correlated against delta_mu
    #[arg(long, value_name = "CSV")]
    pub covariate: Option<PathBuf>,
    /// Restrict node tables and correlators to the N highest PageRank nodes
    #[arg(long, value_name = "N", conflicts_with = "select_titles")]
    pub top_k: Option<usize>,
    /// Restrict to the titles listed one per line
    #[arg(long, value_name = "FILE")]
    pub select_titles: Option<PathBuf>,
    /// Graph cache, if it moved since the run
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Output directory [default: RESULTS/analysis]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Slot {
    summary: SlotSummary<f64>,
    stats: NodeStats<f64>,
}

pub fn run(args: &AnalyzeArgs) -> Result<()> {
    let manifest = RunManifest::load(&args.results)?;
    let slots = load_slots(&args.results, &manifest)?;
    let out = args.out.clone().unwrap_or_else(|| args.results.join("analysis"));
    ensure_dir(&out)?;

    println!("slot,n_realizations,mu_0,mu_0_realization,isolated_fraction");
    for s in &slots {
        let m = &s.summary;
        println!(
            "{},{},{},{},{}",
            m.slot_index, m.n_realizations, m.mu_0, m.mu_0_realization, m.isolated_fraction
        );
    }

    if let Some(kind) = args.histogram {
        let name = match kind {
            HistogramKind::Fr => "histogram_fr.csv",
            HistogramKind::Mu => "histogram_mu.csv",
        };
        let hists: Vec<&Histogram<f64>> = slots
            .iter()
            .map(|s| match kind {
                HistogramKind::Fr => &s.summary.fr_histogram,
                HistogramKind::Mu => &s.summary.mu_histogram,
            })
            .collect();
        write_atomic(&out.join(name), |w| write_histograms(&hists, w))?;
        eprintln!("wrote {name}");
    }

    if args.fluctuations {
        let stats: Vec<NodeStats<f64>> = slots.iter().map(|s| s.stats.clone()).collect();
        let report = fluctuations(&stats).context("computing fluctuations")?;
        write_json(&out.join("fluctuations.json"), &report)?;
        eprintln!("sigma_0 = {}, sigma_mu = {}", report.sigma_0, report.sigma_mu);
    }

    let wants_graph = args.covariate.is_some() || args.top_k.is_some() || args.select_titles.is_some();
    let graph = if wants_graph {
        Some(open_graph(args, &manifest)?)
    } else {
        None
    };
    let selection = selection(args)?;
    let k_index = read_k_index(&args.results, &manifest)?;

    let selected_ids: Option<Vec<NodeId>> = match (&selection, &graph) {
        (Some(sel), Some(g)) => {
            let rows = report_nodes(g, &slots[0].stats, &k_index, sel)?;
            for s in &slots {
                let rows = report_nodes(g, &s.stats, &k_index, sel)?;
                let name = format!("slot_{:03}_selected.csv", s.summary.slot_index);
                write_atomic(&out.join(&name), |w| Ok(write_node_csv(&rows, w)?))?;
            }
            Some(rows.iter().map(|r| r.node_id).collect())
        }
        _ => None,
    };

    if args.correlate_slots {
        let mus: Vec<&[f64]> = slots.iter().map(|s| s.stats.mu.as_slice()).collect();
        let corr = slot_correlators(&mus, selected_ids.as_deref())
            .context("computing slot correlators")?;
        write_atomic(&out.join("slot_correlators.csv"), |w| {
            writeln!(w, "slot_a,slot_b,pearson,spearman,kendall")?;
            for p in &corr.pairs {
                writeln!(w, "{},{},{},{},{}", p.slot_a, p.slot_b, p.pearson, p.spearman, p.kendall)?;
            }
            Ok(())
        })?;
        write_json(&out.join("slot_correlators.json"), &corr)?;
        for m in CorrelationMethod::ALL {
            let s = &corr.summary[m.name()];
            eprintln!("{}: {} +- {}", m.name(), s.mean, s.std);
        }
    }

    if let (Some(path), Some(g)) = (&args.covariate, &graph) {
        let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let covariates = read_covariates(file)?;
        let reports = slots
            .iter()
            .map(|s| covariate_correlation(g, &s.stats, &covariates))
            .collect::<inof::Result<Vec<_>>>()?;
        if let Some(r) = reports.first() {
            if !r.unmatched.is_empty() {
                eprintln!("warning: {} covariate titles not in graph", r.unmatched.len());
            }
        }
        write_json(&out.join("covariate.json"), &reports)?;
    }

    eprintln!("wrote {}", out.display());
    Ok(())
}

fn load_slots(results: &Path, manifest: &RunManifest) -> Result<Vec<Slot>> {
    if manifest.slots.is_empty() {
        bail!("manifest lists no slots");
    }
    manifest
        .slots
        .iter()
        .map(|files| {
            let summary: SlotSummary<f64> = read_json(&results.join(&files.summary))?;
            let path = results.join(&files.nodes);
            let file = fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            let rows = read_node_csv(file).with_context(|| format!("reading {}", path.display()))?;
            if rows.len() != manifest.graph.n_nodes {
                bail!("{} has {} rows, expected {}", path.display(), rows.len(), manifest.graph.n_nodes);
            }
            let stats = NodeStats {
                mu: rows.iter().map(|r| r.mu).collect(),
                white_freq: rows.iter().map(|r| r.white_freq).collect(),
                delta_mu: rows.iter().map(|r| r.delta_mu).collect(),
                mu_0: summary.mu_0,
            };
            Ok(Slot { summary, stats })
        })
        .collect()
}

fn read_k_index(results: &Path, manifest: &RunManifest) -> Result<Vec<u32>> {
    let path = results.join(&manifest.pagerank);
    let mut reader = csv::Reader::from_path(&path).with_context(|| format!("opening {}", path.display()))?;
    let mut k = vec![0u32; manifest.graph.n_nodes];
    for record in reader.records() {
        let record = record?;
        let node: usize = record[0].parse()?;
        *k.get_mut(node).context("node id out of range in pagerank table")? = record[3].parse()?;
    }
    Ok(k)
}

fn open_graph(args: &AnalyzeArgs, manifest: &RunManifest) -> Result<DirectedGraph> {
    let path = args.graph.as_ref().unwrap_or(&manifest.graph.path);
    let loaded = load_graph(path)?;
    if loaded.sha256 != manifest.graph.sha256 {
        bail!("{} does not match the graph of this run (checksum differs)", path.display());
    }
    Ok(loaded.graph)
}

fn selection(args: &AnalyzeArgs) -> Result<Option<Selection>> {
    if let Some(k) = args.top_k {
        return Ok(Some(Selection::TopK(k)));
    }
    if let Some(path) = &args.select_titles {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let titles = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect();
        return Ok(Some(Selection::Titles(titles)));
    }
    Ok(None)
}

/// Per-slot rows plus a pooled `all` block when every slot shares one binning.
fn write_histograms(hists: &[&Histogram<f64>], w: &mut impl Write) -> Result<()> {
    writeln!(w, "slot,bin_lo,bin_hi,count,density")?;
    for (slot, h) in hists.iter().enumerate() {
        for i in 0..h.n_bins() {
            let lo = h.bin_lo(i);
            writeln!(w, "{slot},{lo},{},{},{}", lo + h.width, h.counts[i], h.density[i])?;
        }
    }
    let first = hists[0];
    let same_bins = hists
        .iter()
        .all(|h| h.n_bins() == first.n_bins() && h.width == first.width && h.lo == first.lo);
    if hists.len() > 1 && same_bins {
        let total: u64 = hists.iter().map(|h| h.total()).sum();
        for i in 0..first.n_bins() {
            let count: u64 = hists.iter().map(|h| h.counts[i]).sum();
            let lo = first.bin_lo(i);
            let density = count as f64 / (total as f64 * first.width);
            writeln!(w, "all,{lo},{},{count},{density}", lo + first.width)?;
        }
    }
    Ok(())
}
