//! Per-slot evolution of the reconstruction and the three freshness metrics.
//!
//! A slot unfolds in fixed order: the source moves to `X(t)`; the policy
//! decides from `X(t)`, `X(t−1)`, `X̂(t−1)`; the channel resolves; the
//! reconstruction `X̂(t)` updates; the metrics update from the fresh values.
//!
//! The three metrics answer different questions about the receiver's view:
//!
//! * **VIA** (version innovation age): how many source *versions* (state
//!   changes) have occurred since the last successful delivery. It is reset
//!   only by a delivery — a source change that happens to land back on the
//!   reconstructed value still increments it, because the receiver has missed
//!   a version even though its content is momentarily right.
//! * **AoIV** (age of incorrect version): how many versions have accumulated
//!   *while the receiver is wrong*. Any content sync (`X(t) = X̂(t)`) resets
//!   it. For a two-state source it can never exceed 1: a second change while
//!   erroneous necessarily lands on the reconstructed value. The recursion is
//!   implemented in its general unbounded form and the binary cap is asserted
//!   in tests, not hard-coded.
//! * **AoII** (age of incorrect information): how many consecutive slots the
//!   receiver has been wrong; zero exactly when `X(t) = X̂(t)`.

use crate::model::{step_source, transmit, ChannelParams, SlotDraws, SourceParams};
use crate::policy::{decide_sample, DecisionContext, Policy};

/// Joint per-slot state: source, reconstruction, and the three ages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemState {
    pub x: u8,
    pub xhat: u8,
    pub via: u64,
    pub aoiv: u64,
    pub aoii: u64,
}

impl SystemState {
    /// Slot-1 initial condition: source and reconstruction both 0, ages 0.
    pub fn initial() -> Self {
        SystemState {
            x: 0,
            xhat: 0,
            via: 0,
            aoiv: 0,
            aoii: 0,
        }
    }
}

/// What happened in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotOutcome {
    pub sampled: bool,
    pub delivered: bool,
    pub source_changed: bool,
    pub synced: bool,
}

/// Reconstruction update: the receiver adopts `x_t` only on a delivery.
#[inline]
pub fn update_reconstruction(xhat_prev: u8, x_t: u8, sampled: bool, delivered: bool) -> u8 {
    if sampled && delivered {
        x_t
    } else {
        xhat_prev
    }
}

/// VIA recursion: reset on delivery, +1 on a missed version, hold otherwise.
#[inline]
pub fn update_via(via_prev: u64, x_t: u8, x_prev: u8, sampled: bool, delivered: bool) -> u64 {
    if sampled && delivered {
        0
    } else if x_t != x_prev {
        via_prev + 1
    } else {
        via_prev
    }
}

/// AoIV recursion: reset on content sync, +1 on a version change while
/// erroneous, hold while erroneous and unchanged.
#[inline]
pub fn update_aoiv(aoiv_prev: u64, x_t: u8, x_prev: u8, xhat_t: u8) -> u64 {
    if x_t == xhat_t {
        0
    } else if x_t == x_prev {
        aoiv_prev
    } else {
        aoiv_prev + 1
    }
}

/// AoII recursion: count consecutive erroneous slots.
#[inline]
pub fn update_aoii(aoii_prev: u64, x_t: u8, xhat_t: u8) -> u64 {
    if x_t != xhat_t {
        aoii_prev + 1
    } else {
        0
    }
}

/// Advance the joint state by one slot using the slot's three draws.
pub fn advance(
    params: SourceParams,
    channel: ChannelParams,
    policy: Policy,
    state: SystemState,
    draws: SlotDraws,
) -> (SystemState, SlotOutcome) {
    let x_prev = state.x;
    let x_t = step_source(params, x_prev, draws.u_source);
    let ctx = DecisionContext {
        x_t,
        x_prev,
        xhat_prev: state.xhat,
    };
    let sampled = decide_sample(policy, ctx, draws.u_sample);
    let delivered = sampled && transmit(channel, draws.u_channel);
    let xhat_t = update_reconstruction(state.xhat, x_t, sampled, delivered);
    let next = SystemState {
        x: x_t,
        xhat: xhat_t,
        via: update_via(state.via, x_t, x_prev, sampled, delivered),
        aoiv: update_aoiv(state.aoiv, x_t, x_prev, xhat_t),
        aoii: update_aoii(state.aoii, x_t, xhat_t),
    };
    debug_assert!(next.aoiv <= next.via, "AoIV must not exceed VIA");
    debug_assert!(next.aoiv <= next.aoii, "AoIV must not exceed AoII");
    debug_assert!(next.aoiv <= 1, "binary source caps AoIV at 1");
    debug_assert!((next.aoii == 0) == (next.x == next.xhat));
    let outcome = SlotOutcome {
        sampled,
        delivered,
        source_changed: x_t != x_prev,
        synced: x_t == xhat_t,
    };
    (next, outcome)
}

/// The six-slot reference trajectory: a change whose delivery fails at t=3,
/// a persisting mismatch at t=4, a change back to the reconstructed value at
/// t=5 (content sync, but the version is still undelivered, so VIA keeps
/// counting), and a successful delivery at t=6.
///
/// Rather than returning a literal table, the rows are produced by replaying
/// the per-slot events through the update functions above, so this function
/// also exercises the recursions.
pub fn reference_trace() -> Vec<(u32, u64, u64, u64)> {
    // (x_t, sampled, delivered) for slots t = 2..=6.
    let events: [(u8, bool, bool); 5] = [
        (0, false, false),
        (1, true, false),
        (1, true, false),
        (0, true, false),
        (0, true, true),
    ];
    let mut rows = vec![(1u32, 0u64, 0u64, 0u64)];
    let mut state = SystemState::initial();
    for (idx, &(x_t, sampled, delivered)) in events.iter().enumerate() {
        let t = idx as u32 + 2;
        let x_prev = state.x;
        let xhat_t = update_reconstruction(state.xhat, x_t, sampled, delivered);
        state = SystemState {
            x: x_t,
            xhat: xhat_t,
            via: update_via(state.via, x_t, x_prev, sampled, delivered),
            aoiv: update_aoiv(state.aoiv, x_t, x_prev, xhat_t),
            aoii: update_aoii(state.aoii, x_t, xhat_t),
        };
        rows.push((t, state.via, state.aoiv, state.aoii));
    }
    rows
}
