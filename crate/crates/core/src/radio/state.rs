//! Dynamic simulator state and traffic arrivals.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::scenario::ScenarioConfig;

use super::queue::PacketQueue;

/// Per-subframe simulator truth: the subframe counter and one packet
/// queue per user. Replayable from the seed: advancing consumes RNG
/// draws in a fixed order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkState {
    pub subframe: usize,
    pub queues: Vec<PacketQueue>,
    pub seed: u64,
    #[serde(skip, default = "zero_rng")]
    rng: ChaCha8Rng,
}

fn zero_rng() -> ChaCha8Rng {
    rng_from_seed(0)
}

impl NetworkState {
    pub fn new(user_count: usize, seed: u64) -> Self {
        Self {
            subframe: 0,
            queues: vec![PacketQueue::new(); user_count],
            seed,
            rng: rng_from_seed(derive_seed(seed, &[stream::ENV_STATE])),
        }
    }

    /// Exponentially distributed power gain of a Rayleigh channel.
    pub fn draw_fading_gain(&mut self) -> f64 {
        let u: f64 = self.rng.gen_range(f64::MIN_POSITIVE..1.0);
        -u.ln()
    }

    pub fn buffered_bits(&self, user_id: usize) -> f64 {
        self.queues[user_id].total_bits()
    }
}

/// Enqueues the subframe's periodic arrivals: every user whose pattern
/// fires at `state.subframe` receives one packet stamped with it.
pub fn apply_arrivals(cfg: &ScenarioConfig, state: &mut NetworkState) {
    let p = state.subframe;
    for (user, queue) in cfg.users.iter().zip(state.queues.iter_mut()) {
        if cfg.is_arrival(user, p) {
            queue.push_arrival(p, user.packet_bits);
        }
    }
}
