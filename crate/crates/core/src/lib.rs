//! Selective data augmentation for pixel-based actor-critic agents.
//!
//! The crate is organised around the pieces of a visual soft actor-critic
//! training run:
//!
//! * [`augment`] image operators (weak shift, strong geometric and
//!   photometric transforms) and the stochastic sampler used by every recipe.
//! * [`envs`] a procedurally rendered point-goal reaching task together with
//!   the twelve perturbed test distributions.
//! * [`networks`] the shared encoder, squashed-Gaussian actor, twin critics,
//!   EMA target critics, learned temperature and Adam.
//! * [`recipes`] where augmentation enters the actor and critic updates
//!   (DrQ, DrQ+Aug, SVEA, SADA and the ablations).
//! * [`replay`], [`trainer`], [`evalmetrics`] and [`stats`] for the rest of
//!   the experiment loop.
//! * [`oracles`] slow reference implementations the test suite checks the
//!   fast paths against.

pub mod augment;
pub mod checkpoint;
pub mod config;
pub mod envs;
mod error;
pub mod evalmetrics;
pub mod networks;
pub mod oracles;
pub mod recipes;
pub mod replay;
pub mod rng;
pub mod stats;
pub mod trainer;

pub use augment::{AugKind, AugParams, AugPool, AugmentationSpec, DistractorBank, Observation, RawObservation};
pub use config::TrainConfig;
pub use envs::{DistributionSpec, EnvConfig, PointGoalEnv};
pub use error::{Error, Result};
pub use evalmetrics::{DistributionStats, EvalReport, VarianceReport};
pub use networks::{Agent, NetConfig};
pub use recipes::{Recipe, RecipeConfig, TargetForm};
pub use replay::{ReplayBuffer, Transition};
pub use trainer::{MetricRow, RunSummary, Trainer};
