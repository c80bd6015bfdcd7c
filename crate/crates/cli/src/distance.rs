use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use inof::distance::{
    delta_mu_by_distance, diagonal_fraction, joint_distance_counts, write_joint_counts,
    write_profile, Direction, DistanceField,
};
use inof::stats::{read_node_csv, NodeStats, SlotSummary};

use crate::common::{ensure_dir, load_graph, read_json, resolve_nodes, split_list, write_atomic};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Forward,
    Reverse,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Reverse => Direction::Reverse,
        }
    }
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Red group: titles or `#id`; taken from --results when omitted
    #[arg(long, value_name = "LIST")]
    pub red: Vec<String>,
    #[arg(long, value_name = "LIST")]
    pub blue: Vec<String>,
    #[arg(long, value_enum, default_value = "forward")]
    pub direction: DirectionArg,
    /// Simulation results; enables the delta_mu profile
    #[arg(long)]
    pub results: Option<PathBuf>,
    /// Slot of --results used for the profile
    #[arg(long, default_value_t = 0)]
    pub slot: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &DistanceArgs) -> Result<()> {
    let loaded = load_graph(&args.graph)?;
    let graph = &loaded.graph;
    let manifest = match &args.results {
        Some(dir) => {
            let m = RunManifest::load(dir)?;
            if m.graph.sha256 != loaded.sha256 {
                bail!("{} was produced on a different graph", dir.display());
            }
            Some(m)
        }
        None => None,
    };

    let (red, blue) = match (&manifest, args.red.is_empty() && args.blue.is_empty()) {
        (Some(m), true) => (m.config.red_nodes.clone(), m.config.blue_nodes.clone()),
        _ => (
            resolve_nodes(graph, &split_list(&args.red), "red")?,
            resolve_nodes(graph, &split_list(&args.blue), "blue")?,
        ),
    };
    if red.is_empty() || blue.is_empty() {
        bail!("distance fields need non-empty red and blue groups");
    }

    let field = DistanceField::compute(graph, &red, &blue, args.direction.into())?;
    let counts = joint_distance_counts(&field.d_r, &field.d_b);
    ensure_dir(&args.out)?;
    write_atomic(&args.out.join("distances.csv"), |w| Ok(field.write_csv(w)?))?;
    write_atomic(&args.out.join("joint_counts.csv"), |w| Ok(write_joint_counts(&counts, w)?))?;
    eprintln!("mass within one step of the diagonal: {}", diagonal_fraction(&counts));

    match (&args.results, &manifest) {
        (Some(dir), Some(m)) => {
            let files = m
                .slots
                .iter()
                .find(|s| s.slot_index == args.slot)
                .with_context(|| format!("slot {} not in {}", args.slot, dir.display()))?;
            let summary: SlotSummary<f64> = read_json(&dir.join(&files.summary))?;
            let path = dir.join(&files.nodes);
            let rows = read_node_csv(fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?)?;
            let stats = NodeStats {
                mu: rows.iter().map(|r| r.mu).collect(),
                white_freq: rows.iter().map(|r| r.white_freq).collect(),
                delta_mu: rows.iter().map(|r| r.delta_mu).collect(),
                mu_0: summary.mu_0,
            };
            let profile = delta_mu_by_distance(&field.d_r, &field.d_b, &stats)?;
            write_atomic(&args.out.join("profile.csv"), |w| Ok(write_profile(&profile, w)?))?;
        }
        _ => eprintln!("no --results given: profile.csv skipped"),
    }
    eprintln!("wrote {}", args.out.display());
    Ok(())
}
