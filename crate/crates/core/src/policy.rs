//! The four sampling policies.
//!
//! Sampling is decided once per slot, after the source has moved to `X(t)`,
//! using only `X(t)`, `X(t−1)` and the acknowledged reconstruction
//! `X̂(t−1)`:
//!
//! * **RS** (random sampling): sample with probability `p_a`, independent of
//!   the state.
//! * **MRS** (modified random sampling): never sample when `X(t) = X̂(t−1)`
//!   (the receiver is already right); otherwise sample with probability `q1`
//!   if the system was in sync a slot ago (`X(t−1) = X̂(t−1)`, so the
//!   mismatch is fresh) and with probability `q2` if it was already erroneous.
//! * **Change-aware**: sample exactly when the source changed,
//!   `X(t) ≠ X(t−1)`.
//! * **Semantics-aware**: sample exactly when the receiver is wrong,
//!   `X(t) ≠ X̂(t−1)`.
//!
//! `MRS(1, 1)` takes the same decision as the semantics-aware policy on every
//! context, which the analytic layer exploits as an identity check.
//!
//! Every decision consumes exactly one uniform, even for the two deterministic
//! policies, so that the per-slot draw budget is constant (see `model`).

use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A sampling policy together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    Rs { p_a: f64 },
    Mrs { q1: f64, q2: f64 },
    ChangeAware,
    SemanticsAware,
}

/// What the sampler can see when it decides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecisionContext {
    /// Source state this slot, `X(t)`.
    pub x_t: u8,
    /// Source state last slot, `X(t−1)`.
    pub x_prev: u8,
    /// Reconstruction at the end of last slot, `X̂(t−1)` (known via feedback).
    pub xhat_prev: u8,
}

impl Policy {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, v: f64| -> Result<()> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Domain {
                    name,
                    value: v,
                    domain: "[0, 1]",
                })
            }
        };
        match *self {
            Policy::Rs { p_a } => check("p_a", p_a),
            Policy::Mrs { q1, q2 } => {
                check("q1", q1)?;
                check("q2", q2)
            }
            Policy::ChangeAware | Policy::SemanticsAware => Ok(()),
        }
    }

    /// Machine name used in configs and CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            Policy::Rs { .. } => "rs",
            Policy::Mrs { .. } => "mrs",
            Policy::ChangeAware => "change_aware",
            Policy::SemanticsAware => "semantics_aware",
        }
    }

    /// Human-readable label including parameters.
    pub fn describe(&self) -> String {
        match *self {
            Policy::Rs { p_a } => format!("rs(p_a={p_a})"),
            Policy::Mrs { q1, q2 } => format!("mrs(q1={q1},q2={q2})"),
            Policy::ChangeAware => "change_aware".to_string(),
            Policy::SemanticsAware => "semantics_aware".to_string(),
        }
    }
}

/// Probability that the policy samples in the given context.
///
/// This *is* the policy definition in probability form; both the simulator
/// (thresholding one uniform against it) and the chain-building oracle (using
/// it as a transition weight) share it, so the two layers cannot drift apart.
#[inline]
pub fn sample_probability(policy: Policy, ctx: DecisionContext) -> f64 {
    match policy {
        Policy::Rs { p_a } => p_a,
        Policy::Mrs { q1, q2 } => {
            if ctx.x_t == ctx.xhat_prev {
                0.0
            } else if ctx.x_prev == ctx.xhat_prev {
                q1
            } else {
                q2
            }
        }
        Policy::ChangeAware => {
            if ctx.x_t != ctx.x_prev {
                1.0
            } else {
                0.0
            }
        }
        Policy::SemanticsAware => {
            if ctx.x_t != ctx.xhat_prev {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Decide whether to sample, consuming the slot's sampling uniform.
#[inline]
pub fn decide_sample(policy: Policy, ctx: DecisionContext, u: f64) -> bool {
    u < sample_probability(policy, ctx)
}

// Config shape: {"policy":"rs","p_a":0.5} | {"policy":"mrs","q1":0.7,"q2":1.0}
// | {"policy":"change_aware"} | {"policy":"semantics_aware"}. The tag plus
// flat parameter keys cannot be expressed as a strict (unknown-key-rejecting)
// derive on an internally tagged enum, so (de)serialization goes through a raw
// struct that pins the exact key set.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyRaw {
    policy: String,
    #[serde(default)]
    p_a: Option<f64>,
    #[serde(default)]
    q1: Option<f64>,
    #[serde(default)]
    q2: Option<f64>,
}

impl TryFrom<PolicyRaw> for Policy {
    type Error = String;

    fn try_from(raw: PolicyRaw) -> std::result::Result<Self, String> {
        let no_extras = |raw: &PolicyRaw, allowed: &[&str]| -> std::result::Result<(), String> {
            for (key, present) in [
                ("p_a", raw.p_a.is_some()),
                ("q1", raw.q1.is_some()),
                ("q2", raw.q2.is_some()),
            ] {
                if present && !allowed.contains(&key) {
                    return Err(format!("field `{key}` is not valid for policy `{}`", raw.policy));
                }
            }
            Ok(())
        };
        let policy = match raw.policy.as_str() {
            "rs" => {
                no_extras(&raw, &["p_a"])?;
                let p_a = raw.p_a.ok_or("policy `rs` requires field `p_a`")?;
                Policy::Rs { p_a }
            }
            "mrs" => {
                no_extras(&raw, &["q1", "q2"])?;
                let q1 = raw.q1.ok_or("policy `mrs` requires field `q1`")?;
                let q2 = raw.q2.ok_or("policy `mrs` requires field `q2`")?;
                Policy::Mrs { q1, q2 }
            }
            "change_aware" => {
                no_extras(&raw, &[])?;
                Policy::ChangeAware
            }
            "semantics_aware" => {
                no_extras(&raw, &[])?;
                Policy::SemanticsAware
            }
            other => return Err(format!("unknown policy `{other}`")),
        };
        policy.validate().map_err(|e| e.to_string())?;
        Ok(policy)
    }
}

impl<'de> Deserialize<'de> for Policy {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = PolicyRaw::deserialize(deserializer)?;
        Policy::try_from(raw).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Policy {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("policy", self.name())?;
        match *self {
            Policy::Rs { p_a } => map.serialize_entry("p_a", &p_a)?,
            Policy::Mrs { q1, q2 } => {
                map.serialize_entry("q1", &q1)?;
                map.serialize_entry("q2", &q2)?;
            }
            Policy::ChangeAware | Policy::SemanticsAware => {}
        }
        map.end()
    }
}
