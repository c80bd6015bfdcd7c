//! Tri-state opinion dynamics with pinned seed groups.
//!
//! Every non-fixed node starts white (`0`). One sweep visits all non-fixed
//! nodes once, in a uniformly random order, and updates each in place from
//! the influence score of its in-neighbors: `+1` if the score is positive,
//! `-1` if negative, unchanged on an exact zero. A realization runs
//! `tau_max` sweeps with a fresh permutation per sweep.
//!
//! The permutation stream of realization `r` in slot `s` is a function of
//! `(master_seed, s, r)` only, see [`realization_seed`].

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::scalar::Weight;
use crate::stats::SlotAccumulator;

pub type Spin = i8;

pub const RED: Spin = 1;
pub const BLUE: Spin = -1;
pub const WHITE: Spin = 0;

/// Which matrix weighs in-neighbor spins in the influence score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixMode {
    /// `Z_i = sum_j sigma_j A_ij`: each in-neighbor counts once.
    #[default]
    Adjacency,
    /// `Z_i = sum_j sigma_j / k_j`: in-neighbors weighted by inverse out-degree.
    Stochastic,
}

/// Score above which a node turns red.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipThreshold {
    /// `Z > 0`.
    #[default]
    Positive,
    /// `Z > 1`; scores in `(0, 1]` leave the node unchanged.
    AboveOne,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub red_nodes: Vec<NodeId>,
    pub blue_nodes: Vec<NodeId>,
    #[serde(default)]
    pub matrix_mode: MatrixMode,
    #[serde(default = "default_tau_max")]
    pub tau_max: usize,
    pub n_realizations: usize,
    #[serde(default = "default_slots")]
    pub n_slots: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub early_stop: bool,
    #[serde(default)]
    pub flip_threshold: FlipThreshold,
}

fn default_tau_max() -> usize {
    20
}

fn default_slots() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(red_nodes: Vec<NodeId>, blue_nodes: Vec<NodeId>) -> Self {
        ExperimentConfig {
            red_nodes,
            blue_nodes,
            matrix_mode: MatrixMode::Adjacency,
            tau_max: default_tau_max(),
            n_realizations: 1000,
            n_slots: 1,
            master_seed: 0,
            early_stop: false,
            flip_threshold: FlipThreshold::Positive,
        }
    }

    /// Fixed groups must be disjoint, in range, and not both empty. A single
    /// empty side is allowed (one-sided seeding).
    pub fn validate(&self, n_nodes: usize) -> Result<()> {
        if self.red_nodes.is_empty() && self.blue_nodes.is_empty() {
            return Err(Error::Config("no fixed nodes".into()));
        }
        let mut mark = vec![0u8; n_nodes];
        for (group, bit) in [(&self.red_nodes, 1u8), (&self.blue_nodes, 2u8)] {
            for &v in group {
                let slot = mark.get_mut(v as usize).ok_or_else(|| {
                    Error::Config(format!("fixed node {v} out of range for {n_nodes} nodes"))
                })?;
                if *slot & !bit != 0 {
                    return Err(Error::Config(format!("node {v} is both red and blue")));
                }
                *slot |= bit;
            }
        }
        if self.n_realizations == 0 {
            return Err(Error::Config("n_realizations must be positive".into()));
        }
        if self.n_slots == 0 {
            return Err(Error::Config("n_slots must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinState {
    pub sigma: Vec<Spin>,
    pub fixed_mask: Vec<bool>,
}

impl SpinState {
    /// Fixed nodes pinned, everything else white.
    pub fn white_option(n_nodes: usize, red: &[NodeId], blue: &[NodeId]) -> Self {
        let mut sigma = vec![WHITE; n_nodes];
        let mut fixed_mask = vec![false; n_nodes];
        for &v in red {
            sigma[v as usize] = RED;
            fixed_mask[v as usize] = true;
        }
        for &v in blue {
            sigma[v as usize] = BLUE;
            fixed_mask[v as usize] = true;
        }
        SpinState { sigma, fixed_mask }
    }

    pub fn free_nodes(&self) -> Vec<NodeId> {
        self.fixed_mask
            .iter()
            .enumerate()
            .filter(|(_, &f)| !f)
            .map(|(i, _)| i as NodeId)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationResult {
    pub slot_index: u64,
    pub realization_index: u64,
    pub seed: u64,
    pub final_sigma: Vec<Spin>,
    pub n_red: usize,
    pub n_blue: usize,
    pub n_white: usize,
    /// Red fraction among colored nodes.
    pub f_r: f64,
    pub f_b: f64,
    pub sweeps_run: usize,
}

impl RealizationResult {
    /// Global polarization `2 f_r - 1` of the colored nodes.
    pub fn polarization(&self) -> f64 {
        2.0 * self.f_r - 1.0
    }

    pub fn n_colored(&self) -> usize {
        self.n_red + self.n_blue
    }
}

/// SplitMix64 output function.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(splitmix64(splitmix64(master) ^ slot) ^ realization)`; the
/// result seeds a ChaCha8 stream that drives Fisher-Yates shuffles.
pub fn realization_seed(master_seed: u64, slot: u64, realization: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ slot) ^ realization)
}

#[inline]
fn sign_of<W: Weight>(z: W, magnitude: W, threshold: FlipThreshold) -> Option<Spin> {
    if W::is_tie(z, magnitude) {
        return None;
    }
    let up = match threshold {
        FlipThreshold::Positive => z > W::zero(),
        FlipThreshold::AboveOne => z > W::one(),
    };
    if up {
        Some(RED)
    } else if z < W::zero() {
        Some(BLUE)
    } else {
        None
    }
}

#[inline]
fn sign_of_count(z: i64, threshold: FlipThreshold) -> Option<Spin> {
    let limit = match threshold {
        FlipThreshold::Positive => 0,
        FlipThreshold::AboveOne => 1,
    };
    if z > limit {
        Some(RED)
    } else if z < 0 {
        Some(BLUE)
    } else {
        None
    }
}

#[inline]
fn adjacency_score(graph: &DirectedGraph, sigma: &[Spin], i: NodeId) -> i64 {
    graph
        .in_neighbors(i)
        .iter()
        .map(|&j| i64::from(sigma[j as usize]))
        .sum()
}

#[inline]
fn weighted_score<W: Weight>(
    graph: &DirectedGraph,
    sigma: &[Spin],
    i: NodeId,
    weight: impl Fn(NodeId) -> W,
) -> (W, W) {
    let mut z = W::zero();
    let mut magnitude = W::zero();
    for &j in graph.in_neighbors(i) {
        let s = sigma[j as usize];
        if s != WHITE {
            let w = weight(j);
            magnitude = magnitude + w;
            if s > 0 {
                z = z + w;
            } else {
                z = z - w;
            }
        }
    }
    (z, magnitude)
}

fn stochastic_weight<W: Weight>(graph: &DirectedGraph, j: NodeId) -> W {
    match graph.out_degree(j) {
        0 => W::zero(),
        k => W::reciprocal_degree(k),
    }
}

/// Influence score of node `i` from its in-neighbors.
pub fn influence_score<W: Weight>(
    graph: &DirectedGraph,
    sigma: &[Spin],
    i: NodeId,
    mode: MatrixMode,
) -> W {
    match mode {
        MatrixMode::Adjacency => W::from_i64_exact(adjacency_score(graph, sigma, i)),
        MatrixMode::Stochastic => {
            weighted_score(graph, sigma, i, |j| stochastic_weight::<W>(graph, j)).0
        }
    }
}

/// One asynchronous pass over `permutation`, which must list every non-fixed
/// node exactly once. Returns the number of nodes whose spin changed.
pub fn sweep<W: Weight>(
    graph: &DirectedGraph,
    state: &mut SpinState,
    permutation: &[NodeId],
    mode: MatrixMode,
    threshold: FlipThreshold,
) -> Result<usize> {
    let n = graph.n_nodes();
    if state.sigma.len() != n || state.fixed_mask.len() != n {
        return Err(Error::Contract("state size differs from graph".into()));
    }
    let mut seen = vec![false; n];
    for &v in permutation {
        let i = v as usize;
        if i >= n {
            return Err(Error::Contract(format!("node {v} out of range")));
        }
        if state.fixed_mask[i] {
            return Err(Error::Contract(format!("permutation contains fixed node {v}")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::Contract(format!("node {v} repeated in permutation")));
        }
    }
    let n_free = state.fixed_mask.iter().filter(|&&f| !f).count();
    if permutation.len() != n_free {
        return Err(Error::Contract(format!(
            "permutation has {} nodes, expected {n_free} non-fixed",
            permutation.len()
        )));
    }
    let flips = match mode {
        MatrixMode::Adjacency => sweep_adjacency(graph, &mut state.sigma, permutation, threshold),
        MatrixMode::Stochastic => sweep_weighted(
            graph,
            &mut state.sigma,
            permutation,
            threshold,
            |j| stochastic_weight::<W>(graph, j),
        ),
    };
    Ok(flips)
}

#[inline]
fn apply(sigma: &mut [Spin], i: NodeId, new: Option<Spin>) -> bool {
    match new {
        Some(s) if sigma[i as usize] != s => {
            sigma[i as usize] = s;
            true
        }
        _ => false,
    }
}

fn sweep_adjacency(
    graph: &DirectedGraph,
    sigma: &mut [Spin],
    permutation: &[NodeId],
    threshold: FlipThreshold,
) -> usize {
    let mut flips = 0;
    for &i in permutation {
        let z = adjacency_score(graph, sigma, i);
        flips += usize::from(apply(sigma, i, sign_of_count(z, threshold)));
    }
    flips
}

fn sweep_weighted<W: Weight>(
    graph: &DirectedGraph,
    sigma: &mut [Spin],
    permutation: &[NodeId],
    threshold: FlipThreshold,
    weight: impl Fn(NodeId) -> W + Copy,
) -> usize {
    let mut flips = 0;
    for &i in permutation {
        let (z, magnitude) = weighted_score(graph, sigma, i, weight);
        flips += usize::from(apply(sigma, i, sign_of(z, magnitude, threshold)));
    }
    flips
}

/// A validated configuration bound to a graph, with precomputed weights.
///
/// `W` is the arithmetic used for stochastic-mode scores; adjacency mode
/// always sums integers.
pub struct Simulator<'g, W: Weight = f64> {
    graph: &'g DirectedGraph,
    config: ExperimentConfig,
    weights: Vec<W>,
    initial: SpinState,
    free: Vec<NodeId>,
}

impl<'g, W: Weight> Simulator<'g, W> {
    pub fn new(graph: &'g DirectedGraph, config: ExperimentConfig) -> Result<Self> {
        config.validate(graph.n_nodes())?;
        let weights = match config.matrix_mode {
            MatrixMode::Adjacency => Vec::new(),
            MatrixMode::Stochastic => graph
                .nodes()
                .map(|j| stochastic_weight::<W>(graph, j))
                .collect(),
        };
        let initial = SpinState::white_option(graph.n_nodes(), &config.red_nodes, &config.blue_nodes);
        let free = initial.free_nodes();
        Ok(Simulator {
            graph,
            config,
            weights,
            initial,
            free,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn graph(&self) -> &'g DirectedGraph {
        self.graph
    }

    fn sweep_in_place(&self, sigma: &mut [Spin], permutation: &[NodeId]) -> usize {
        let threshold = self.config.flip_threshold;
        match self.config.matrix_mode {
            MatrixMode::Adjacency => sweep_adjacency(self.graph, sigma, permutation, threshold),
            MatrixMode::Stochastic => {
                let weights = &self.weights;
                sweep_weighted(self.graph, sigma, permutation, threshold, |j| {
                    weights[j as usize]
                })
            }
        }
    }

    pub fn run_realization(&self, slot_index: u64, realization_index: u64) -> RealizationResult {
        let seed = realization_seed(self.config.master_seed, slot_index, realization_index);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sigma = self.initial.sigma.clone();
        let mut order = self.free.clone();
        let mut sweeps_run = 0;
        for _ in 0..self.config.tau_max {
            order.shuffle(&mut rng);
            let flips = self.sweep_in_place(&mut sigma, &order);
            sweeps_run += 1;
            debug_assert!(self
                .config
                .red_nodes
                .iter()
                .all(|&v| sigma[v as usize] == RED));
            debug_assert!(self
                .config
                .blue_nodes
                .iter()
                .all(|&v| sigma[v as usize] == BLUE));
            if self.config.early_stop && flips == 0 {
                break;
            }
        }

        let (mut n_red, mut n_blue) = (0usize, 0usize);
        for &s in &sigma {
            match s {
                RED => n_red += 1,
                BLUE => n_blue += 1,
                _ => {}
            }
        }
        let n_colored = n_red + n_blue;
        // Fixed nodes are always colored, so n_colored > 0 for a valid config.
        let f_r = n_red as f64 / n_colored as f64;
        let f_b = n_blue as f64 / n_colored as f64;
        RealizationResult {
            slot_index,
            realization_index,
            seed,
            n_white: sigma.len() - n_colored,
            final_sigma: sigma,
            n_red,
            n_blue,
            f_r,
            f_b,
            sweeps_run,
        }
    }

    /// Realizations of one slot, in index order, computed lazily.
    pub fn run_slot(&self, slot_index: u64) -> impl Iterator<Item = RealizationResult> + '_ {
        (0..self.config.n_realizations as u64).map(move |r| self.run_realization(slot_index, r))
    }

    /// Runs one slot on the current rayon pool and reduces it without
    /// keeping the per-realization spin vectors. The reduction is exact, so
    /// the outcome does not depend on scheduling.
    pub fn aggregate_slot(&self, slot_index: u64) -> SlotAccumulator {
        let n = self.graph.n_nodes();
        let n_r = self.config.n_realizations;
        let min_len = (n_r / (4 * rayon::current_num_threads()).max(1)).max(1);
        (0..n_r as u64)
            .collect::<Vec<_>>()
            .into_par_iter()
            .with_min_len(min_len)
            .fold(
                || SlotAccumulator::new(n),
                |mut acc, r| {
                    acc.push(&self.run_realization(slot_index, r));
                    acc
                },
            )
            .reduce(|| SlotAccumulator::new(n), SlotAccumulator::merge)
    }
}

/// One realization with `f64` stochastic weights.
pub fn run_realization(
    graph: &DirectedGraph,
    config: &ExperimentConfig,
    slot_index: u64,
    realization_index: u64,
) -> Result<RealizationResult> {
    let sim = Simulator::<f64>::new(graph, config.clone())?;
    Ok(sim.run_realization(slot_index, realization_index))
}

/// All realizations of one slot, tagged with their indices.
pub fn run_slot(
    graph: &DirectedGraph,
    config: &ExperimentConfig,
    slot_index: u64,
) -> Result<Vec<RealizationResult>> {
    let sim = Simulator::<f64>::new(graph, config.clone())?;
    Ok(sim.run_slot(slot_index).collect())
}
