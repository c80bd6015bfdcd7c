//! Reduction of realizations into per-node polarization and slot summaries.
//!
//! A white final spin counts as `0` in a node's mean, so a node that ends
//! white in some realizations and red in others gets a fractional `mu`.
//! Nodes white in every realization of the slot (persistently white) are
//! left out of the global polarization `mu_0` and counted by
//! `isolated_fraction`.

use serde::{Deserialize, Serialize};

use crate::engine::{RealizationResult, WHITE};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stats::histogram::{histogram, Histogram, FR_BIN_WIDTH, MU_BIN_WIDTH};

#[derive(Debug, Clone, PartialEq)]
pub struct NodeStats<T> {
    /// Mean final spin per node, white as zero.
    pub mu: Vec<T>,
    /// Fraction of realizations in which the node ended white.
    pub white_freq: Vec<T>,
    /// `mu - mu_0`.
    pub delta_mu: Vec<T>,
    pub mu_0: T,
}

impl<T: Real> NodeStats<T> {
    pub fn n_nodes(&self) -> usize {
        self.mu.len()
    }

    pub fn is_persistently_white(&self, node: usize) -> bool {
        self.white_freq[node] == T::one()
    }
}

/// Per-realization bookkeeping kept after the spin vector is reduced away.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub slot_index: u64,
    pub realization_index: u64,
    pub seed: u64,
    pub f_r: f64,
    pub n_red: usize,
    pub n_blue: usize,
    pub n_white: usize,
    pub sweeps_run: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotSummary<T> {
    pub slot_index: u64,
    pub n_realizations: usize,
    /// Node-averaged polarization over non-persistently-white nodes.
    pub mu_0: T,
    /// Mean of `2 f_r - 1` over realizations.
    pub mu_0_realization: T,
    pub isolated_fraction: T,
    #[serde(skip)]
    pub fr_samples: Vec<T>,
    pub fr_histogram: Histogram<T>,
    pub mu_histogram: Histogram<T>,
}

/// Bin widths for [`SlotAccumulator::finish`].
#[derive(Debug, Clone, Copy)]
pub struct BinWidths<T> {
    pub fr: T,
    pub mu: T,
}

impl<T: Real> Default for BinWidths<T> {
    fn default() -> Self {
        BinWidths {
            fr: T::from_f64_lossy(FR_BIN_WIDTH),
            mu: T::from_f64_lossy(MU_BIN_WIDTH),
        }
    }
}

/// Commutative accumulator over realizations of one slot. All sums are
/// integer, so merge order never changes the result.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotAccumulator {
    sum_sigma: Vec<i64>,
    white_count: Vec<u64>,
    records: Vec<RealizationRecord>,
}

impl SlotAccumulator {
    pub fn new(n_nodes: usize) -> Self {
        SlotAccumulator {
            sum_sigma: vec![0; n_nodes],
            white_count: vec![0; n_nodes],
            records: Vec::new(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.sum_sigma.len()
    }

    pub fn n_realizations(&self) -> usize {
        self.records.len()
    }

    pub fn push(&mut self, result: &RealizationResult) {
        assert_eq!(
            result.final_sigma.len(),
            self.sum_sigma.len(),
            "realization from a different graph"
        );
        for ((sum, white), &s) in self
            .sum_sigma
            .iter_mut()
            .zip(self.white_count.iter_mut())
            .zip(&result.final_sigma)
        {
            *sum += i64::from(s);
            *white += u64::from(s == WHITE);
        }
        self.records.push(RealizationRecord {
            slot_index: result.slot_index,
            realization_index: result.realization_index,
            seed: result.seed,
            f_r: result.f_r,
            n_red: result.n_red,
            n_blue: result.n_blue,
            n_white: result.n_white,
            sweeps_run: result.sweeps_run,
        });
    }

    pub fn merge(mut self, other: SlotAccumulator) -> SlotAccumulator {
        if self.records.is_empty() {
            return other;
        }
        if other.records.is_empty() {
            return self;
        }
        assert_eq!(self.n_nodes(), other.n_nodes());
        for (a, b) in self.sum_sigma.iter_mut().zip(other.sum_sigma) {
            *a += b;
        }
        for (a, b) in self.white_count.iter_mut().zip(other.white_count) {
            *a += b;
        }
        self.records.extend(other.records);
        self
    }

    /// Records sorted by realization index.
    pub fn records(&self) -> Vec<RealizationRecord> {
        let mut records = self.records.clone();
        records.sort_by_key(|r| (r.slot_index, r.realization_index));
        records
    }

    pub fn finish<T: Real>(&self, widths: BinWidths<T>) -> Result<(NodeStats<T>, SlotSummary<T>)> {
        let n_r = self.records.len();
        if n_r == 0 {
            return Err(Error::EmptyStream);
        }
        let n = self.n_nodes();
        let n_r_t = T::from_usize_lossy(n_r);
        let mu: Vec<T> = self
            .sum_sigma
            .iter()
            .map(|&s| T::from_f64_lossy(s as f64) / n_r_t)
            .collect();
        let white_freq: Vec<T> = self
            .white_count
            .iter()
            .map(|&w| T::from_f64_lossy(w as f64) / n_r_t)
            .collect();

        let colored: Vec<T> = (0..n)
            .filter(|&i| self.white_count[i] < n_r as u64)
            .map(|i| mu[i])
            .collect();
        let n_isolated = n - colored.len();
        let mu_0 = if colored.is_empty() {
            T::zero()
        } else {
            colored.iter().copied().sum::<T>() / T::from_usize_lossy(colored.len())
        };
        let delta_mu = mu.iter().map(|&m| m - mu_0).collect();

        let records = self.records();
        let fr_samples: Vec<T> = records.iter().map(|r| T::from_f64_lossy(r.f_r)).collect();
        let two = T::one() + T::one();
        let mu_0_realization =
            fr_samples.iter().map(|&f| two * f - T::one()).sum::<T>() / n_r_t;

        let fr_histogram = histogram(&fr_samples, widths.fr, (T::zero(), T::one()))?;
        let mu_samples = if colored.is_empty() { vec![T::zero()] } else { colored };
        let mu_histogram = histogram(&mu_samples, widths.mu, (-T::one(), T::one()))?;

        let stats = NodeStats {
            mu,
            white_freq,
            delta_mu,
            mu_0,
        };
        let summary = SlotSummary {
            slot_index: records[0].slot_index,
            n_realizations: n_r,
            mu_0,
            mu_0_realization,
            isolated_fraction: T::from_usize_lossy(n_isolated) / T::from_usize_lossy(n.max(1)),
            fr_samples,
            fr_histogram,
            mu_histogram,
        };
        Ok((stats, summary))
    }
}

/// Aggregates a stream of realizations from one slot.
pub fn aggregate_nodes<'a, T: Real>(
    results: impl IntoIterator<Item = &'a RealizationResult>,
) -> Result<(NodeStats<T>, SlotSummary<T>)> {
    let mut results = results.into_iter().peekable();
    let first = results.peek().ok_or(Error::EmptyStream)?;
    let mut acc = SlotAccumulator::new(first.final_sigma.len());
    for r in results {
        acc.push(r);
    }
    acc.finish(BinWidths::default())
}
