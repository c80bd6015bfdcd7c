//! Multi-slot driver on a dedicated thread pool.

use crate::engine::{ExperimentConfig, Simulator};
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::scalar::Real;
use crate::stats::{BinWidths, NodeStats, RealizationRecord, SlotSummary};

#[derive(Debug, Clone, PartialEq)]
pub struct SlotOutcome<T> {
    pub stats: NodeStats<T>,
    pub summary: SlotSummary<T>,
    pub records: Vec<RealizationRecord>,
}

/// Runs every slot of `config` on a pool of `threads` workers. Output does
/// not depend on `threads`.
pub fn run_experiment<T: Real>(
    graph: &DirectedGraph,
    config: &ExperimentConfig,
    threads: usize,
    widths: BinWidths<T>,
) -> Result<Vec<SlotOutcome<T>>> {
    let sim = Simulator::<f64>::new(graph, config.clone())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..config.n_slots as u64)
            .map(|slot| {
                let acc = sim.aggregate_slot(slot);
                let (stats, summary) = acc.finish(widths)?;
                Ok(SlotOutcome {
                    stats,
                    summary,
                    records: acc.records(),
                })
            })
            .collect()
    })
}
