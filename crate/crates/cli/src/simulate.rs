use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use inof::engine::{ExperimentConfig, FlipThreshold, MatrixMode, Simulator};
use inof::pagerank::{compute_pagerank, PageRankOptions};
use inof::stats::{report_nodes, write_node_csv, BinWidths, Selection, FR_BIN_WIDTH, MU_BIN_WIDTH};
use serde::Deserialize;

use crate::common::{
    ensure_dir, load_graph, read_json, resolve_nodes, split_list, thread_count, write_atomic,
    write_json,
};
use crate::manifest::{GraphInfo, RunManifest, SlotFiles, Timings, MANIFEST_FILE, PAGERANK_FILE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixArg {
    Adjacency,
    Stochastic,
}

impl From<MatrixArg> for MatrixMode {
    fn from(m: MatrixArg) -> Self {
        match m {
            MatrixArg::Adjacency => MatrixMode::Adjacency,
            MatrixArg::Stochastic => MatrixMode::Stochastic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdArg {
    Positive,
    AboveOne,
}

/// Experiment file accepted by `--config`. Command-line flags win over it.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub graph: Option<PathBuf>,
    pub red: Option<Vec<String>>,
    pub blue: Option<Vec<String>>,
    pub matrix: Option<MatrixArg>,
    pub tau: Option<usize>,
    pub realizations: Option<usize>,
    pub slots: Option<usize>,
    pub seed: Option<u64>,
    pub early_stop: Option<bool>,
    pub mu_bin_width: Option<f64>,
    pub flip_threshold: Option<ThresholdArg>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Binary graph cache from `inof ingest`
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Red fixed nodes: exact titles or `#id`, comma separated or repeated
    #[arg(long, value_name = "LIST")]
    pub red: Vec<String>,
    /// Blue fixed nodes, same syntax as --red
    #[arg(long, value_name = "LIST")]
    pub blue: Vec<String>,
    #[arg(long, value_enum)]
    pub matrix: Option<MatrixArg>,
    /// Sweeps per realization
    #[arg(long)]
    pub tau: Option<usize>,
    /// Realizations per slot
    #[arg(long)]
    pub realizations: Option<usize>,
    /// Independent slots
    #[arg(long)]
    pub slots: Option<usize>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Stop a realization after a sweep without flips
    #[arg(long)]
    pub early_stop: bool,
    /// Polarization histogram bin width
    #[arg(long)]
    pub mu_bin_width: Option<f64>,
    /// Also write one row per realization
    #[arg(long)]
    pub dump_realizations: bool,
    /// JSON experiment file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, env = "INOF_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, value_enum, hide = true)]
    pub flip_threshold: Option<ThresholdArg>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &SimulateArgs) -> Result<()> {
    let total = Instant::now();
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let file_config: ConfigFile = match &args.config {
        Some(path) => read_json(path)?,
        None => ConfigFile::default(),
    };

    let graph_path = args
        .graph
        .clone()
        .or(file_config.graph)
        .context("--graph is required (flag or config)")?;
    let red_requested = pick_list(&args.red, file_config.red);
    let blue_requested = pick_list(&args.blue, file_config.blue);

    eprintln!("loading {}", graph_path.display());
    let loaded = load_graph(&graph_path)?;
    let graph = &loaded.graph;
    let red = resolve_nodes(graph, &red_requested, "red")?;
    let blue = resolve_nodes(graph, &blue_requested, "blue")?;

    let mut config = ExperimentConfig::new(red, blue);
    config.matrix_mode = args.matrix.or(file_config.matrix).map_or(MatrixMode::Adjacency, Into::into);
    config.tau_max = args.tau.or(file_config.tau).unwrap_or(config.tau_max);
    config.n_realizations = args.realizations.or(file_config.realizations).unwrap_or(config.n_realizations);
    config.n_slots = args.slots.or(file_config.slots).unwrap_or(config.n_slots);
    config.master_seed = args.seed.or(file_config.seed).unwrap_or(0);
    config.early_stop = args.early_stop || file_config.early_stop.unwrap_or(false);
    config.flip_threshold = match args.flip_threshold.or(file_config.flip_threshold) {
        Some(ThresholdArg::AboveOne) => FlipThreshold::AboveOne,
        _ => FlipThreshold::Positive,
    };
    let widths = BinWidths {
        fr: FR_BIN_WIDTH,
        mu: args.mu_bin_width.or(file_config.mu_bin_width).unwrap_or(MU_BIN_WIDTH),
    };

    let threads = thread_count(args.threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building thread pool")?;
    let sim = Simulator::<f64>::new(graph, config.clone())?;
    ensure_dir(&args.out)?;

    let clock = Instant::now();
    let pagerank = pool.install(|| compute_pagerank::<f64>(graph, &PageRankOptions::default()))?;
    write_atomic(&args.out.join(PAGERANK_FILE), |w| Ok(pagerank.write_csv(graph, w)?))?;
    let pagerank_seconds = clock.elapsed().as_secs_f64();
    eprintln!("pagerank: {} iterations", pagerank.iterations);

    let mut slots = Vec::new();
    let mut slot_seconds = Vec::new();
    for slot in 0..config.n_slots as u64 {
        let clock = Instant::now();
        let acc = pool.install(|| sim.aggregate_slot(slot));
        let (stats, summary) = acc.finish(widths)?;
        let files = SlotFiles::new(slot, args.dump_realizations);

        write_json(&args.out.join(&files.summary), &summary)?;
        let rows = report_nodes(graph, &stats, &pagerank.k_index, &Selection::All)?;
        write_atomic(&args.out.join(&files.nodes), |w| Ok(write_node_csv(&rows, w)?))?;
        if let Some(name) = &files.realizations {
            write_atomic(&args.out.join(name), |w| {
                let mut out = csv::Writer::from_writer(w);
                for record in acc.records() {
                    out.serialize(record)?;
                }
                out.flush()?;
                Ok(())
            })?;
        }
        slot_seconds.push(clock.elapsed().as_secs_f64());
        eprintln!(
            "slot {slot}: {} realizations, mu_0 = {}, isolated = {}",
            summary.n_realizations, summary.mu_0, summary.isolated_fraction
        );
        slots.push(files);
    }

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        graph: GraphInfo {
            path: std::fs::canonicalize(&graph_path).unwrap_or(graph_path),
            sha256: loaded.sha256.clone(),
            n_nodes: graph.n_nodes(),
            n_edges: graph.n_edges(),
        },
        master_seed: config.master_seed,
        config,
        red_requested,
        blue_requested,
        fr_bin_width: widths.fr,
        mu_bin_width: widths.mu,
        pagerank: PAGERANK_FILE.into(),
        slots,
        timings: Timings {
            started_unix,
            pagerank_seconds,
            slot_seconds,
            total_seconds: total.elapsed().as_secs_f64(),
        },
    };
    write_json(&args.out.join(MANIFEST_FILE), &manifest)?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn pick_list(flag: &[String], from_config: Option<Vec<String>>) -> Vec<String> {
    if flag.is_empty() {
        split_list(&from_config.unwrap_or_default())
    } else {
        split_list(flag)
    }
}
