//! Exact planner over the true environment.
//!
//! Exhaustive search over the action tree with memoization on reachable
//! simulator states: two action prefixes that land in the same buffers
//! at the same subframe share their optimal suffix, which collapses the
//! `N^horizon` tree to the reachable state graph. The optimum is exact;
//! a node budget guards against pathological state growth.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::radio::{action_space, apply_arrivals, schedule_subframe, Action, NetworkState};
use crate::scenario::ScenarioConfig;

/// Planner limits.
#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    /// Maximum number of expanded states.
    pub node_budget: usize,
    /// Maximum number of optimal sequences [`oracle_optimal_sequences`]
    /// may enumerate before giving up.
    pub max_sequences: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            node_budget: 4_000_000,
            max_sequences: 100_000,
        }
    }
}

/// Best action sequence and its episode score.
#[derive(Debug, Clone)]
pub struct OraclePlan {
    pub actions: Vec<usize>,
    pub score: f64,
}

type StateKey = (usize, Vec<Vec<(u32, u64)>>);

fn state_key(state: &NetworkState) -> StateKey {
    let queues = state
        .queues
        .iter()
        .map(|q| {
            q.packets()
                .map(|p| (p.arrival_subframe as u32, p.remaining_bits.to_bits()))
                .collect()
        })
        .collect();
    (state.subframe, queues)
}

struct Planner<'a> {
    cfg: &'a ScenarioConfig,
    actions: Vec<Action>,
    fading: Vec<f64>,
    horizon: usize,
    memo: HashMap<StateKey, f64>,
    expansions: usize,
    options: OracleOptions,
}

impl<'a> Planner<'a> {
    fn new(cfg: &'a ScenarioConfig, horizon: usize, options: OracleOptions) -> Result<Self> {
        if cfg.rayleigh_fading {
            return Err(Error::Usage(
                "the oracle requires a deterministic scenario; disable fading".into(),
            ));
        }
        Ok(Self {
            cfg,
            actions: action_space(cfg.action_count, cfg.radio.total_prbs)?,
            fading: vec![1.0; cfg.users.len()],
            horizon,
            memo: HashMap::new(),
            expansions: 0,
            options,
        })
    }

    fn step(&self, state: &mut NetworkState, action: usize) -> Result<f64> {
        apply_arrivals(self.cfg, state);
        let reward = schedule_subframe(self.cfg, state, &self.fading, &self.actions[action])?.reward;
        state.subframe += 1;
        Ok(reward)
    }

    /// Optimal total reward from `state` to the horizon.
    fn value(&mut self, state: &NetworkState) -> Result<f64> {
        if state.subframe >= self.horizon {
            return Ok(0.0);
        }
        let key = state_key(state);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        self.expansions += 1;
        if self.expansions > self.options.node_budget {
            return Err(Error::BudgetExceeded(format!(
                "oracle expanded more than {} states at horizon {}",
                self.options.node_budget, self.horizon
            )));
        }
        let mut best = f64::NEG_INFINITY;
        for a in 0..self.actions.len() {
            let mut child = state.clone();
            let reward = self.step(&mut child, a)?;
            best = best.max(reward + self.value(&child)?);
        }
        self.memo.insert(key, best);
        Ok(best)
    }

    /// Greedy argmax walk over the memoized values; ties take the lowest
    /// action index.
    fn extract_plan(&mut self, mut state: NetworkState) -> Result<OraclePlan> {
        let score = self.value(&state)?;
        let mut actions = Vec::with_capacity(self.horizon);
        while state.subframe < self.horizon {
            let mut best_action = 0;
            let mut best_value = f64::NEG_INFINITY;
            for a in 0..self.actions.len() {
                let mut child = state.clone();
                let reward = self.step(&mut child, a)?;
                let v = reward + self.value(&child)?;
                if v > best_value {
                    best_value = v;
                    best_action = a;
                }
            }
            actions.push(best_action);
            self.step(&mut state, best_action)?;
        }
        Ok(OraclePlan { actions, score })
    }

    fn enumerate(
        &mut self,
        state: &NetworkState,
        remaining_value: f64,
        prefix: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        if state.subframe >= self.horizon {
            if out.len() >= self.options.max_sequences {
                return Err(Error::BudgetExceeded(format!(
                    "more than {} optimal sequences",
                    self.options.max_sequences
                )));
            }
            out.push(prefix.clone());
            return Ok(());
        }
        for a in 0..self.actions.len() {
            let mut child = state.clone();
            let reward = self.step(&mut child, a)?;
            let child_value = self.value(&child)?;
            // Optimal branches match the memoized optimum exactly: both
            // sides are sums of the same f64 rewards in the same order.
            // Recursing with the child's own memoized value keeps the
            // comparison exact at every depth.
            if reward + child_value == remaining_value {
                prefix.push(a);
                self.enumerate(&child, child_value, prefix, out)?;
                prefix.pop();
            }
        }
        Ok(())
    }
}

fn initial_state(cfg: &ScenarioConfig) -> NetworkState {
    NetworkState::new(cfg.users.len(), 0)
}

fn pinned(cfg: &ScenarioConfig) -> ScenarioConfig {
    let mut c = cfg.clone();
    c.randomization = None;
    c
}

/// Exact maximizer of the summed reward over `horizon` subframes.
pub fn oracle_plan(
    cfg: &ScenarioConfig,
    horizon: usize,
    options: &OracleOptions,
) -> Result<OraclePlan> {
    let cfg = pinned(cfg);
    let mut planner = Planner::new(&cfg, horizon, *options)?;
    planner.extract_plan(initial_state(&cfg))
}

/// Best achievable episode score over `horizon` subframes.
pub fn oracle_best_score(cfg: &ScenarioConfig, horizon: usize) -> Result<f64> {
    let cfg = pinned(cfg);
    let mut planner = Planner::new(&cfg, horizon, OracleOptions::default())?;
    planner.value(&initial_state(&cfg))
}

/// Every optimal action sequence over `horizon` subframes, plus the
/// optimal score. Fails fast when the count exceeds the budget.
pub fn oracle_optimal_sequences(
    cfg: &ScenarioConfig,
    horizon: usize,
    options: &OracleOptions,
) -> Result<(f64, Vec<Vec<usize>>)> {
    let cfg = pinned(cfg);
    let mut planner = Planner::new(&cfg, horizon, *options)?;
    let root = initial_state(&cfg);
    let best = planner.value(&root)?;
    let mut out = Vec::new();
    planner.enumerate(&root, best, &mut Vec::new(), &mut out)?;
    Ok((best, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::RadioEnv;
    use crate::scenario::build_scenario;

    #[test]
    fn empty_traffic_scores_the_horizon() {
        let mut cfg = build_scenario(1).unwrap();
        for u in &mut cfg.users {
            u.packet_bits = 0.0;
        }
        cfg.randomization = None;
        let plan = oracle_plan(&cfg, 8, &OracleOptions::default()).unwrap();
        assert_eq!(plan.score, 8.0);
        assert_eq!(plan.actions.len(), 8);
    }

    #[test]
    fn plan_replays_to_its_claimed_score() {
        for id in 1..=4 {
            let cfg = build_scenario(id).unwrap();
            let plan = oracle_plan(&cfg, cfg.episode_length, &OracleOptions::default()).unwrap();
            let mut env = RadioEnv::new(&cfg, 0).unwrap();
            let total: f64 = env.rollout(&plan.actions).unwrap().iter().sum();
            assert_eq!(
                total, plan.score,
                "scenario {id}: replayed score differs from planned"
            );
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let cfg = build_scenario(1).unwrap();
        let options = OracleOptions {
            node_budget: 3,
            ..OracleOptions::default()
        };
        let err = oracle_plan(&cfg, 16, &options).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded(_)));
    }

    #[test]
    fn fading_scenarios_are_rejected() {
        let mut cfg = build_scenario(1).unwrap();
        cfg.rayleigh_fading = true;
        assert!(matches!(
            oracle_plan(&cfg, 4, &OracleOptions::default()),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn scenario1_short_horizon_optima_protect_the_lte_deadline() {
        // Over two full MBSFN cycles every optimal sequence empties the
        // LTE buffer before the MBSFN pair blocks it.
        let cfg = build_scenario(1).unwrap();
        let (best, seqs) = oracle_optimal_sequences(&cfg, 8, &OracleOptions::default()).unwrap();
        assert!(!seqs.is_empty());
        assert!(best > 8.0 - 1e-3, "best {best}");
        for seq in &seqs {
            let mut env = RadioEnv::new(&cfg, 0).unwrap();
            for (p, &a) in seq.iter().enumerate() {
                if p % 4 == 2 {
                    // Entering the MBSFN pair the LTE buffer must be empty.
                    assert_eq!(
                        env.state().queues[1].total_bits(),
                        0.0,
                        "sequence {seq:?} enters MBSFN with LTE backlog"
                    );
                }
                env.step(a).unwrap();
            }
        }
    }
}
