//! Controllers: the trained execution-phase agent, scripted baselines
//! and the common evaluation harness.

mod oracle;

pub use oracle::{
    oracle_best_score, oracle_optimal_sequences, oracle_plan, OracleOptions, OraclePlan,
};

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::mcts::{ModelOutput, ModelStep, PlanningModel};
use crate::nn::ModelWeights;
use crate::radio::{bits_per_prb, LinkConditions, RadioEnv, Rat, SubframeContext};
use crate::scenario::ScenarioConfig;

/// What an agent sees when it picks the split for the upcoming subframe.
pub struct DecisionContext<'a> {
    pub env: &'a RadioEnv,
    /// Flattened observation for the upcoming subframe.
    pub observation: &'a [f64],
}

/// Uniform decision interface over trained and scripted controllers.
pub trait Agent {
    fn name(&self) -> String;
    fn act(&mut self, ctx: &DecisionContext<'_>) -> Result<usize>;
    /// Called once per episode before the first decision.
    fn reset(&mut self, _env: &RadioEnv) -> Result<()> {
        Ok(())
    }
}

/// Call counters of the instrumented model. The execution-phase
/// contract is that evaluation performs zero dynamics calls and zero
/// tree searches; these counters are the proof.
#[derive(Debug, Default)]
pub struct CallCounters {
    pub represent: Cell<u64>,
    pub dynamics: Cell<u64>,
    pub predict: Cell<u64>,
    pub searches: Cell<u64>,
}

/// Model weights behind a counting boundary: every route to the three
/// networks ticks a counter, including the planning route used by MCTS.
pub struct InstrumentedModel {
    weights: ModelWeights,
    pub counters: CallCounters,
}

impl InstrumentedModel {
    pub fn new(weights: ModelWeights) -> Self {
        Self {
            weights,
            counters: CallCounters::default(),
        }
    }

    pub fn weights(&self) -> &ModelWeights {
        &self.weights
    }

    pub fn represent(&self, observation: &[f64]) -> Result<Vec<f64>> {
        self.counters.represent.set(self.counters.represent.get() + 1);
        self.weights.represent(observation)
    }

    pub fn dynamics(&self, state: &[f64], action: usize) -> Result<(Vec<f64>, f64)> {
        self.counters.dynamics.set(self.counters.dynamics.get() + 1);
        self.weights.dynamics(state, action)
    }

    pub fn predict(&self, state: &[f64]) -> Result<(Vec<f64>, f64)> {
        self.counters.predict.set(self.counters.predict.get() + 1);
        self.weights.predict(state)
    }
}

impl PlanningModel for InstrumentedModel {
    fn action_count(&self) -> usize {
        self.weights.dims.action_count
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

/// Execution-phase controller: encodes the observation, reads the policy
/// head and takes its argmax. No search, no dynamics calls.
pub struct MuZeroAgent {
    pub model: InstrumentedModel,
}

impl MuZeroAgent {
    pub fn new(weights: ModelWeights) -> Self {
        Self {
            model: InstrumentedModel::new(weights),
        }
    }

    pub fn counters(&self) -> &CallCounters {
        &self.model.counters
    }
}

impl Agent for MuZeroAgent {
    fn name(&self) -> String {
        "muzero".into()
    }

    fn act(&mut self, ctx: &DecisionContext<'_>) -> Result<usize> {
        let state = self.model.represent(ctx.observation)?;
        let (policy, _value) = self.model.predict(&state)?;
        Ok(argmax(&policy))
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// PRBs each RAT would need to clear its pending demand this subframe.
/// Users who cannot be served (interference, MBSFN) need none.
fn needed_prbs(env: &RadioEnv) -> (f64, f64) {
    let cfg = env.config();
    let p = env.subframe();
    let ctx = SubframeContext::at(cfg, p);
    let mut lte = 0.0;
    let mut nr = 0.0;
    for (i, user) in cfg.users.iter().enumerate() {
        let demand = env.pending_demand_bits(i);
        if demand <= 0.0 {
            continue;
        }
        let link = LinkConditions {
            mbsfn: ctx.is_mbsfn,
            interfered: ctx.interfered[i],
            lte_active: true,
            fading_gain: 1.0,
        };
        let rate = bits_per_prb(user, &cfg.radio, &link).unwrap_or(0.0);
        if rate <= 0.0 {
            continue;
        }
        let need = (demand / rate).ceil();
        match user.rat {
            Rat::Lte => lte += need,
            Rat::Nr => nr += need,
        }
    }
    (lte, nr)
}

fn nearest_action(env: &RadioEnv, target_lte_prbs: f64) -> usize {
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for action in env.actions() {
        let dist = (action.lte_prbs as f64 - target_lte_prbs).abs();
        // Ties go to the action with more LTE; the grid is LTE-ascending.
        if dist <= best_dist {
            best_dist = dist;
            best = action.index;
        }
    }
    best
}

/// Scripted baseline: weighs the users, counts the PRBs each RAT needs
/// for its pending demand and picks the split closest to proportional.
/// Reads true environment state rather than the normalized observation.
pub struct ProportionalAgent;

impl Agent for ProportionalAgent {
    fn name(&self) -> String {
        "proportional".into()
    }

    fn act(&mut self, ctx: &DecisionContext<'_>) -> Result<usize> {
        let (lte, nr) = needed_prbs(ctx.env);
        let total = lte + nr;
        if total <= 0.0 {
            return Ok(0);
        }
        let c = ctx.env.config().radio.total_prbs as f64;
        Ok(nearest_action(ctx.env, c * lte / total))
    }
}

/// Scripted baseline: the action nearest an even split of the band.
pub struct EqualSplitAgent;

impl Agent for EqualSplitAgent {
    fn name(&self) -> String {
        "equal".into()
    }

    fn act(&mut self, ctx: &DecisionContext<'_>) -> Result<usize> {
        let c = ctx.env.config().radio.total_prbs as f64;
        Ok(nearest_action(ctx.env, c / 2.0))
    }
}

/// Scripted baseline: the full band alternates between the RATs each
/// subframe. Phase 0 gives NR the even subframes.
pub struct AlternatingAgent {
    pub nr_first: bool,
}

impl Default for AlternatingAgent {
    fn default() -> Self {
        Self { nr_first: true }
    }
}

impl Agent for AlternatingAgent {
    fn name(&self) -> String {
        if self.nr_first {
            "alternating".into()
        } else {
            "alternating-lte-first".into()
        }
    }

    fn act(&mut self, ctx: &DecisionContext<'_>) -> Result<usize> {
        let lte_turn = (ctx.env.subframe() % 2 == 1) == self.nr_first;
        if lte_turn {
            Ok(ctx.env.action_count() - 1)
        } else {
            Ok(0)
        }
    }
}

/// Replays the exact optimizer's action sequence for the scenario.
pub struct OracleAgent {
    plan: OraclePlan,
}

impl OracleAgent {
    pub fn for_scenario(cfg: &ScenarioConfig) -> Result<Self> {
        Ok(Self {
            plan: oracle_plan(cfg, cfg.episode_length, &OracleOptions::default())?,
        })
    }

    pub fn score(&self) -> f64 {
        self.plan.score
    }

    pub fn actions(&self) -> &[usize] {
        &self.plan.actions
    }
}

impl Agent for OracleAgent {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn act(&mut self, ctx: &DecisionContext<'_>) -> Result<usize> {
        self.plan
            .actions
            .get(ctx.env.subframe())
            .copied()
            .ok_or_else(|| Error::Usage("oracle plan shorter than the episode".into()))
    }
}

/// Per-seed episode scores of one agent on one scenario.
#[derive(Debug, Clone)]
pub struct EvalStats {
    pub scores: Vec<(u64, f64)>,
    pub median: f64,
    pub min: f64,
}

/// Runs one full episode and returns the summed reward.
pub fn run_episode(agent: &mut dyn Agent, env: &mut RadioEnv) -> Result<f64> {
    agent.reset(env)?;
    let mut score = 0.0;
    while !env.is_finished() {
        let obs = env.observation()?.flatten();
        let ctx = DecisionContext {
            env,
            observation: &obs,
        };
        let action = agent.act(&ctx)?;
        score += env.step(action)?.reward;
    }
    Ok(score)
}

/// Evaluates an agent over fresh episodes, one per seed.
pub fn evaluate_agent(
    agent: &mut dyn Agent,
    cfg: &ScenarioConfig,
    seeds: &[u64],
) -> Result<EvalStats> {
    if seeds.is_empty() {
        return Err(Error::Usage("evaluate_agent needs at least one seed".into()));
    }
    let mut scores = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut env = RadioEnv::new(cfg, seed)?;
        scores.push((seed, run_episode(agent, &mut env)?));
    }
    let mut sorted: Vec<f64> = scores.iter().map(|&(_, s)| s).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    Ok(EvalStats {
        median,
        min: sorted[0],
        scores,
    })
}
