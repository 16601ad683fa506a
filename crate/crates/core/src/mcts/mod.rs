//! Monte Carlo Tree Search over the learned model.
//!
//! The search plans entirely inside the model: the root state comes from
//! the representation function and every transition below it from the
//! dynamics function. The real environment is never queried below the
//! root — the [`PlanningModel`] trait gives the search no way to reach it.

use rand::Rng;
use rand_distr::{Dirichlet, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nn::ModelWeights;

/// Search hyperparameters.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub simulations: usize,
    pub discount: f64,
    pub puct_c1: f64,
    pub puct_c2: f64,
    pub dirichlet_alpha: f64,
    pub exploration_fraction: f64,
    /// Mix Dirichlet noise into the root priors (training-time exploration).
    pub root_noise: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            simulations: 64,
            discount: 0.99,
            puct_c1: 1.25,
            puct_c2: 19_652.0,
            dirichlet_alpha: 0.3,
            exploration_fraction: 0.25,
            root_noise: true,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.simulations < 1 {
            return Err(Error::Config("simulations must be >= 1".into()));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::Config("discount must be in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Root inference: hidden state plus policy/value read-out.
#[derive(Debug, Clone)]
pub struct ModelOutput {
    pub state: Vec<f64>,
    pub policy: Vec<f64>,
    pub value: f64,
}

/// Recurrent inference: next hidden state, transition reward and the
/// read-out at the new state.
#[derive(Debug, Clone)]
pub struct ModelStep {
    pub state: Vec<f64>,
    pub reward: f64,
    pub policy: Vec<f64>,
    pub value: f64,
}

/// The learned functions as the search sees them.
pub trait PlanningModel {
    fn action_count(&self) -> usize;
    fn encode(&self, observation: &[f64]) -> Result<ModelOutput>;
    fn step(&self, state: &[f64], action: usize) -> Result<ModelStep>;
}

impl PlanningModel for ModelWeights {
    fn action_count(&self) -> usize {
        self.dims.action_count
    }

    fn encode(&self, observation: &[f64]) -> Result<ModelOutput> {
        let state = self.represent(observation)?;
        let (policy, value) = self.predict(&state)?;
        Ok(ModelOutput { state, policy, value })
    }

    fn step(&self, state: &[f64], action: usize) -> Result<ModelStep> {
        let (next, reward) = self.dynamics(state, action)?;
        let (policy, value) = self.predict(&next)?;
        Ok(ModelStep {
            state: next,
            reward,
            policy,
            value,
        })
    }
}

/// Running value bounds of the tree, used to normalize Q terms into
/// [0, 1] for the selection rule.
#[derive(Debug, Clone, Copy)]
pub struct MinMaxStats {
    min: f64,
    max: f64,
}

impl Default for MinMaxStats {
    fn default() -> Self {
        Self {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl MinMaxStats {
    pub fn update(&mut self, value: f64) {
        self.min = self.min.min(value);
        self.max = self.max.max(value);
    }

    /// Maps a Q value into [0, 1] under the observed bounds. Until the
    /// tree has seen two distinct values there is no scale yet; scoring
    /// the lone visited edge as 0 keeps it comparable with unvisited
    /// edges, whose Q term is also 0, so selection stays prior-driven.
    pub fn normalize(&self, value: f64) -> f64 {
        if self.max > self.min {
            (value - self.min) / (self.max - self.min)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub prior: f64,
    pub visits: u32,
    pub value_sum: f64,
    pub reward: f64,
    pub child: Option<usize>,
}

impl Edge {
    fn new(prior: f64) -> Self {
        Self {
            prior,
            visits: 0,
            value_sum: 0.0,
            reward: 0.0,
            child: None,
        }
    }

    /// Mean of the backed-up return samples through this edge.
    pub fn q(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.value_sum / self.visits as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchNode {
    pub state: Vec<f64>,
    pub edges: Vec<Edge>,
}

impl SearchNode {
    fn new(state: Vec<f64>, priors: &[f64]) -> Self {
        Self {
            state,
            edges: priors.iter().map(|&p| Edge::new(p)).collect(),
        }
    }
}

/// What one search produced: the visit-count policy, the root value and
/// the raw visit counts.
#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub policy: Vec<f64>,
    pub root_value: f64,
    pub visit_counts: Vec<u32>,
}

/// The pUCT selection rule over one node's edges; ties break to the
/// lowest action index.
pub fn puct_select(node: &SearchNode, minmax: &MinMaxStats, cfg: &SearchConfig) -> usize {
    let total_visits: u32 = node.edges.iter().map(|e| e.visits).sum();
    let sqrt_total = (total_visits as f64).sqrt();
    let growth = cfg.puct_c1
        + ((total_visits as f64 + cfg.puct_c2 + 1.0) / cfg.puct_c2).ln();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (a, edge) in node.edges.iter().enumerate() {
        let q = if edge.visits > 0 {
            minmax.normalize(edge.q())
        } else {
            0.0
        };
        let exploration = edge.prior * sqrt_total / (1.0 + edge.visits as f64) * growth;
        let score = q + exploration;
        if score > best_score {
            best_score = score;
            best = a;
        }
    }
    best
}

/// Backs one simulation up the path: the return accumulates bottom-up
/// as `G <- r + gamma * G` starting from the leaf value, each visited
/// edge's Q becomes the running mean of its samples and the tree value
/// bounds absorb every updated Q.
pub fn backup(
    nodes: &mut [SearchNode],
    path: &[(usize, usize)],
    leaf_value: f64,
    cfg: &SearchConfig,
    minmax: &mut MinMaxStats,
) -> f64 {
    let mut g = leaf_value;
    for &(node_idx, action) in path.iter().rev() {
        let edge = &mut nodes[node_idx].edges[action];
        g = edge.reward + cfg.discount * g;
        edge.value_sum += g;
        edge.visits += 1;
        let q = edge.q();
        minmax.update(q);
    }
    g
}

/// Runs a full search from an observation and returns the visit-count
/// policy plus the visit-weighted root value.
pub fn run_search<M: PlanningModel, R: Rng>(
    model: &M,
    observation: &[f64],
    cfg: &SearchConfig,
    rng: &mut R,
) -> Result<SearchResult> {
    cfg.validate()?;
    let n = model.action_count();
    let root_out = model.encode(observation)?;
    let mut priors = root_out.policy.clone();
    if cfg.root_noise && n >= 2 {
        let dirichlet = Dirichlet::new(&vec![cfg.dirichlet_alpha; n])
            .map_err(|e| Error::Config(format!("dirichlet: {e}")))?;
        let noise = dirichlet.sample(rng);
        for (p, eta) in priors.iter_mut().zip(noise) {
            *p = *p * (1.0 - cfg.exploration_fraction) + cfg.exploration_fraction * eta;
        }
    }

    let mut nodes = vec![SearchNode::new(root_out.state, &priors)];
    let mut minmax = MinMaxStats::default();
    let mut root_value_sum = 0.0;

    for _ in 0..cfg.simulations {
        let mut path: Vec<(usize, usize)> = Vec::new();
        let mut current = 0usize;
        let leaf_value = loop {
            let action = puct_select(&nodes[current], &minmax, cfg);
            match nodes[current].edges[action].child {
                Some(child) => {
                    path.push((current, action));
                    current = child;
                }
                None => {
                    let step = model.step(&nodes[current].state, action)?;
                    let child_idx = nodes.len();
                    nodes.push(SearchNode::new(step.state, &step.policy));
                    let edge = &mut nodes[current].edges[action];
                    edge.child = Some(child_idx);
                    edge.reward = step.reward;
                    path.push((current, action));
                    break step.value;
                }
            }
        };
        root_value_sum += backup(&mut nodes, &path, leaf_value, cfg, &mut minmax);
    }

    let visit_counts: Vec<u32> = nodes[0].edges.iter().map(|e| e.visits).collect();
    let total: u32 = visit_counts.iter().sum();
    debug_assert_eq!(total as usize, cfg.simulations);
    let policy = visit_counts
        .iter()
        .map(|&v| v as f64 / total as f64)
        .collect();
    Ok(SearchResult {
        policy,
        root_value: root_value_sum / cfg.simulations as f64,
        visit_counts,
    })
}

/// Draws an action from `policy ^ (1/temperature)`; zero temperature
/// means the argmax (ties to the lowest index).
pub fn sample_action<R: Rng>(policy: &[f64], temperature: f64, rng: &mut R) -> usize {
    if temperature <= 0.0 {
        let mut best = 0;
        for (i, &p) in policy.iter().enumerate() {
            if p > policy[best] {
                best = i;
            }
        }
        return best;
    }
    let weights: Vec<f64> = policy.iter().map(|&p| p.powf(1.0 / temperature)).collect();
    let total: f64 = weights.iter().sum();
    let mut draw = rng.gen_range(0.0..total);
    for (i, &w) in weights.iter().enumerate() {
        if draw < w {
            return i;
        }
        draw -= w;
    }
    weights.len() - 1
}
