//! The monitored source and the delivery channel.
//!
//! The source is a two-state discrete-time Markov chain observed once per
//! slot: from state 0 it flips to 1 with probability `p`, from state 1 it
//! flips to 0 with probability `q`. Its stationary occupancy is
//! `(q/(p+q), p/(p+q))`. A transmitted sample is decoded at the receiver with
//! probability `p_s`, independently across slots, and the outcome is known to
//! the transmitter immediately (error-free instantaneous feedback).
//!
//! Boundary transition probabilities are rejected: with `p` or `q` in {0, 1}
//! the source is absorbing or periodic and every stationary expression used
//! downstream divides by quantities that vanish. `p_s = 0` is rejected for the
//! same reason (no delivery ever happens; ages diverge).
//!
//! Each simulated slot consumes exactly three uniform draws in fixed order —
//! source, sampling, channel — whether or not the sampling and channel draws
//! are logically needed. Keeping the draw budget constant means two runs with
//! the same seed but different policies see the identical source trajectory
//! (common random numbers).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Transition probabilities of the two-state source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    /// Probability of a 0 → 1 transition per slot.
    pub p: f64,
    /// Probability of a 1 → 0 transition per slot.
    pub q: f64,
}

impl SourceParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain {
                name: "p",
                value: p,
                domain: "(0, 1)",
            });
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain {
                name: "q",
                value: q,
                domain: "(0, 1)",
            });
        }
        Ok(Self { p, q })
    }
}

/// Erasure-channel success probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Probability that a transmitted sample is successfully decoded.
    pub p_s: f64,
}

impl ChannelParams {
    pub fn new(p_s: f64) -> Result<Self> {
        if !(p_s > 0.0 && p_s <= 1.0) {
            return Err(Error::Domain {
                name: "p_s",
                value: p_s,
                domain: "(0, 1]",
            });
        }
        Ok(Self { p_s })
    }
}

/// The three uniforms a slot consumes, in consumption order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotDraws {
    pub u_source: f64,
    pub u_sample: f64,
    pub u_channel: f64,
}

impl SlotDraws {
    /// Draw the fixed per-slot budget from the stream (always three).
    #[inline]
    pub fn draw(rng: &mut SplitMix64) -> Self {
        Self {
            u_source: rng.uniform(),
            u_sample: rng.uniform(),
            u_channel: rng.uniform(),
        }
    }
}

/// Advance the source by one slot.
#[inline]
pub fn step_source(params: SourceParams, x_prev: u8, u: f64) -> u8 {
    match x_prev {
        0 => {
            if u < params.p {
                1
            } else {
                0
            }
        }
        _ => {
            if u < params.q {
                0
            } else {
                1
            }
        }
    }
}

/// Resolve one channel use: `true` means the sample was decoded.
#[inline]
pub fn transmit(channel: ChannelParams, u: f64) -> bool {
    u < channel.p_s
}

/// Stationary occupancy (π0, π1) of the source.
#[inline]
pub fn source_stationary(params: SourceParams) -> (f64, f64) {
    let s = params.p + params.q;
    (params.q / s, params.p / s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_parameters_are_rejected() {
        assert!(SourceParams::new(0.0, 0.5).is_err());
        assert!(SourceParams::new(1.0, 0.5).is_err());
        assert!(SourceParams::new(0.5, 0.0).is_err());
        assert!(SourceParams::new(0.5, 1.0).is_err());
        assert!(SourceParams::new(f64::NAN, 0.5).is_err());
        assert!(SourceParams::new(0.5, 0.5).is_ok());
        assert!(ChannelParams::new(0.0).is_err());
        assert!(ChannelParams::new(1.0).is_ok());
        assert!(ChannelParams::new(1.1).is_err());
    }

    #[test]
    fn step_source_threshold_semantics() {
        let sp = SourceParams::new(0.5, 0.5).unwrap();
        assert_eq!(step_source(sp, 0, 0.0), 1);
        assert_eq!(step_source(sp, 0, 0.99), 0);
        assert_eq!(step_source(sp, 1, 0.0), 0);
        assert_eq!(step_source(sp, 1, 0.99), 1);
    }

    #[test]
    fn transmit_threshold_semantics() {
        assert!(transmit(ChannelParams::new(1.0).unwrap(), 0.999999));
        assert!(!transmit(ChannelParams::new(0.5).unwrap(), 0.7));
        assert!(transmit(ChannelParams::new(0.5).unwrap(), 0.3));
    }

    #[test]
    fn stationary_matches_hand_solve() {
        let sp = SourceParams::new(0.2, 0.8).unwrap();
        let (pi0, pi1) = source_stationary(sp);
        assert!((pi0 - 0.8).abs() < 1e-15);
        assert!((pi1 - 0.2).abs() < 1e-15);

        let sp = SourceParams::new(0.9, 0.1).unwrap();
        let (pi0, pi1) = source_stationary(sp);
        assert!((pi0 - 0.1).abs() < 1e-15);
        assert!((pi1 - 0.9).abs() < 1e-15);

        let sp = SourceParams::new(0.37, 0.37).unwrap();
        let (pi0, pi1) = source_stationary(sp);
        assert!((pi0 - 0.5).abs() < 1e-15);
        assert!((pi1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empirical_occupancy_converges_to_stationary() {
        let sp = SourceParams::new(0.3, 0.7).unwrap();
        let mut rng = SplitMix64::new(99);
        let mut x = 0u8;
        let mut ones = 0u64;
        let n = 1_000_000u64;
        for _ in 0..n {
            let d = SlotDraws::draw(&mut rng);
            x = step_source(sp, x, d.u_source);
            ones += u64::from(x);
        }
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.3).abs() < 2e-3, "occupancy {freq}");
    }
}
