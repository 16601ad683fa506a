//! Subframe-level simulator for LTE/NR dynamic spectrum sharing plus a
//! learned-model planner that decides the per-subframe bandwidth split.
//!
//! The crate is organised around the data flow of the controller loop:
//!
//! * [`radio`] — the radio environment: traffic arrivals, link capacity,
//!   per-RAT scheduling under a bandwidth-split action, delay weights,
//!   rewards and observation construction.
//! * [`scenario`] — canonical configurations for the four reproduction
//!   studies plus the randomized sampler used for training data.
//! * [`nn`] — a small dense-network engine (representation, dynamics and
//!   prediction functions) trained jointly by backpropagation through time.
//! * [`mcts`] — Monte Carlo Tree Search over the learned model.
//! * [`training`] — the iteration loop: episode generation, replay buffer,
//!   target computation and network updates.
//! * [`agents`] — the execution-phase agent, scripted baselines, the
//!   enumeration oracle and the evaluation harness.

pub mod agents;
pub mod error;
pub mod mcts;
pub mod nn;
pub mod radio;
pub mod rng;
pub mod scenario;
pub mod training;

pub use error::{Error, Result};
pub use radio::{Action, NetworkState, Observation, RadioEnv, RadioParams, Rat, UserConfig};
pub use scenario::{build_scenario, RandomizationSpec, ScenarioConfig};
