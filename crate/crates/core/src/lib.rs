//! Real-time remote monitoring of a two-state Markov source over an
//! unreliable channel, with semantics-aware sampling.
//!
//! A sensor watches a binary Markov chain and decides each slot whether to
//! transmit; transmissions cross an erasure channel with instant feedback,
//! and the receiver holds the last delivered value as its estimate. The
//! crate evaluates how well the estimate tracks the source under three
//! freshness/accuracy metrics — Version Innovation Age (slots since the
//! last delivered version became stale), Age of Incorrect Version (version
//! distance while in error), and Age of Incorrect Information (time in
//! error) — and at what sampling cost.
//!
//! Layers, each checkable against the next:
//!
//! * [`analytic`] — exact stationary distributions and averages for the
//!   four sampling policies (random, two-probability change/sync-gated,
//!   change-aware, semantics-aware).
//! * [`oracle`] — an independent finite-chain solver that rebuilds the
//!   same quantities numerically from one-step transition structure.
//! * [`sim`] — a slot-level Monte Carlo engine sharing its single-slot
//!   update with both layers above.
//! * [`optimizer`] — budget-constrained policy selection: best random
//!   sampler, error-capped random sampler, and the two-probability search
//!   with its closed-form diagonal special case.
//!
//! The `semvia` binary exposes all of it: `analytic`, `simulate`,
//! `validate`, `optimize`, `sweep`, and `trace` subcommands over a JSON
//! config.

pub mod analytic;
pub mod cli;
pub mod config;
pub mod error;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod optimizer;
pub mod output;
pub mod policy;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use metrics::{SlotOutcome, SystemState};
pub use model::{ChannelParams, SlotDraws, SourceParams};
pub use policy::{DecisionContext, Policy};
