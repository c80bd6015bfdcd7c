use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Edge list: one `src dst` pair of 0-based ids per line
    #[arg(long)]
    pub edges: PathBuf,
    /// Titles file: line i is the title of node i
    #[arg(long)]
    pub titles: Option<PathBuf>,
    /// Binary graph cache to write
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &IngestArgs) -> Result<()> {
    let (graph, report) = inof::graph::ingest_edge_list(&args.edges, args.titles.as_deref())
        .with_context(|| format!("ingesting {}", args.edges.display()))?;
    crate::common::write_atomic(&args.out, |w| Ok(graph.write_binary(w)?))?;
    println!("{report}");
    eprintln!("wrote {}", args.out.display());
    Ok(())
}
