//! Aggregation of realizations and the statistics built on top of it.

mod aggregate;
mod correlation;
mod fluctuation;
mod histogram;
mod ks;
mod report;

pub use aggregate::{
    aggregate_nodes, BinWidths, NodeStats, RealizationRecord, SlotAccumulator, SlotSummary,
};
pub use correlation::{average_ranks, correlate, CorrelationMethod};
pub use fluctuation::{
    fit_power_law, fluctuations, pair_dispersion, sigma_0, sigma_mu, FluctuationReport,
    PowerLawFit,
};
pub use histogram::{histogram, Histogram, FR_BIN_WIDTH, MU_BIN_WIDTH, MU_BIN_WIDTH_LONG};
pub use ks::{ks_two_sample, KsResult};
pub use report::{
    covariate_correlation, read_covariates, read_node_csv, report_nodes, slot_correlators,
    write_node_csv, CovariateReport, MeanStd, NodeRow, Selection, SlotCorrelators,
    SlotPairCorrelation,
};
