//! Closed-form stationary metrics for all four policies.
//!
//! Everything here is an explicit formula in the source parameters `(p, q)`,
//! the channel success probability `p_s`, and the policy parameters. The
//! recurring building blocks:
//!
//! * effective per-slot delivery probability under random sampling
//!   `a = p_a·p_s`;
//! * `Φ(x) = x + (1−x)·a` — probability that a run of the opposite source
//!   state ends (by a flip with rate `x` or by a delivery);
//! * `Ψ(x) = x + (1−x)·p_s` — the same with sampling always on;
//! * `D = p + q + (1−p−q)·a` — normalizer of the joint (X, X̂) occupancy;
//! * `F(q1, q2) = (1−p)(1−q)p_s·q2² + (p+q−2pq)·q2 + pq(2−p_s·q1)·q1` — the
//!   corresponding normalizer for the state-dependent two-probability policy.
//!
//! The semantics-aware policy is the `a := p_s` specialization of every
//! random-sampling formula (sampling with probability 1 exactly when the
//! receiver is wrong makes the delivery odds per erroneous slot `p_s`); the
//! code shares the implementations to make that substitution structural.
//!
//! All results are doubles; the tightest tolerance any consumer asserts is
//! 1e−12, far above double rounding at these scales.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChannelParams, SourceParams};
use crate::policy::Policy;

/// Φ(x) with delivery probability `a`.
#[inline]
fn phi(x: f64, a: f64) -> f64 {
    x + (1.0 - x) * a
}

/// Joint-occupancy normalizer `p + q + (1−p−q)·a`.
#[inline]
fn d_norm(p: f64, q: f64, a: f64) -> f64 {
    p + q + (1.0 - p - q) * a
}

/// F(q1, q2), the occupancy normalizer of the two-probability policy.
#[inline]
fn f_norm(p: f64, q: f64, p_s: f64, q1: f64, q2: f64) -> f64 {
    (1.0 - p) * (1.0 - q) * p_s * q2 * q2
        + (p + q - 2.0 * p * q) * q2
        + p * q * (2.0 - p_s * q1) * q1
}

fn effective_delivery(policy: Policy, channel: ChannelParams) -> Option<f64> {
    match policy {
        Policy::Rs { p_a } => Some(p_a * channel.p_s),
        Policy::SemanticsAware => Some(channel.p_s),
        _ => None,
    }
}

fn unsupported(op: &'static str, policy: Policy) -> Error {
    Error::Unsupported {
        op,
        policy: policy.name(),
    }
}

fn mrs_degenerate(q1: f64, q2: f64) -> Result<()> {
    if q1 == 0.0 && q2 == 0.0 {
        Err(Error::Domain {
            name: "q1,q2",
            value: 0.0,
            domain: "q1 + q2 > 0 (all-zero sampling never syncs)",
        })
    } else {
        Ok(())
    }
}

/// Geometric decay ratio of the version-innovation-age distribution under
/// random sampling with delivery probability `a = p_a·p_s`. Successive pmf
/// levels shrink by this factor (per two levels, squared); it is < 1 on the
/// whole open parameter domain and is used to size chain truncations and tail
/// bounds.
pub fn via_decay_ratio(params: SourceParams, channel: ChannelParams, p_a: f64) -> f64 {
    let (p, q) = (params.p, params.q);
    let a = p_a * channel.p_s;
    (1.0 - a) * (p * q / (phi(p, a) * phi(q, a))).sqrt()
}

/// Stationary probability that the source sits at `x0 = 0`/`x1 = 1` with the
/// version innovation age equal to `i`, plus their sum `Pr[VIA = i]`.
///
/// Random sampling: with `k = ⌊i/2⌋` rounded per parity and `w = i + 1 − k`,
///
/// ```text
/// π_{0,i} = p^k q^w a(1−a)^i / ((p+q) Φ(p)^w Φ(q)^k)
/// π_{1,i} = p^w q^k a(1−a)^i / ((p+q) Φ(p)^k Φ(q)^w)
/// ```
///
/// Change-aware: the age is geometric, `π_{x,i}` ∝ `p_s(1−p_s)^i` weighted by
/// the source occupancy.
pub fn via_pmf(
    policy: Policy,
    params: SourceParams,
    channel: ChannelParams,
    i: usize,
) -> Result<(f64, f64, f64)> {
    let (p, q) = (params.p, params.q);
    match policy {
        Policy::Rs { p_a } => {
            let a = p_a * channel.p_s;
            if a <= 0.0 {
                return Err(Error::Domain {
                    name: "p_a*p_s",
                    value: a,
                    domain: "(0, 1] (age distribution diverges without deliveries)",
                });
            }
            let ratio = via_decay_ratio(params, channel, p_a);
            if ratio >= 1.0 {
                return Err(Error::DivergentSeries { ratio });
            }
            let (phi_p, phi_q) = (phi(p, a), phi(q, a));
            // Group the k-th/w-th powers pairwise into the squared decay
            // ratio, which lives in [0, 1): the naive p^k·q^w / (Φ^w·Φ^k)
            // evaluation underflows numerator and denominator separately
            // for large i and returns NaN.
            let b = ratio * ratio;
            let (pi0, pi1) = if i.is_multiple_of(2) {
                let scale = a / (p + q) * b.powi((i / 2) as i32);
                (scale * q / phi_p, scale * p / phi_q)
            } else {
                // Odd ages have k = w, so the two components coincide.
                let both = a * p * q * (1.0 - a) / ((p + q) * phi_p * phi_q)
                    * b.powi(((i - 1) / 2) as i32);
                (both, both)
            };
            Ok((pi0, pi1, pi0 + pi1))
        }
        Policy::ChangeAware => {
            let p_s = channel.p_s;
            let geo = p_s * (1.0 - p_s).powi(i as i32) / (p + q);
            Ok((q * geo, p * geo, (p + q) * geo))
        }
        other => Err(unsupported("via_pmf", other)),
    }
}

/// Average version innovation age.
///
/// Random sampling: `2pq(1−a)/((p+q)·a)`. Change-aware: `(1−p_s)/p_s`.
pub fn via_average(policy: Policy, params: SourceParams, channel: ChannelParams) -> Result<f64> {
    let (p, q) = (params.p, params.q);
    match policy {
        Policy::Rs { p_a } => {
            let a = p_a * channel.p_s;
            if a <= 0.0 {
                return Err(Error::Domain {
                    name: "p_a*p_s",
                    value: a,
                    domain: "(0, 1] (average age diverges without deliveries)",
                });
            }
            Ok(2.0 * p * q * (1.0 - a) / ((p + q) * a))
        }
        Policy::ChangeAware => Ok((1.0 - channel.p_s) / channel.p_s),
        other => Err(unsupported("via_average", other)),
    }
}

/// Average version innovation age expressed through the reconstruction error.
///
/// Random sampling: `[p+q+(1−p−q)a]·p_e/a`. Change-aware: `(2/p_s − 1)·p_e`.
/// Composing with [`reconstruction_error`] reproduces [`via_average`].
pub fn via_from_pe(
    policy: Policy,
    params: SourceParams,
    channel: ChannelParams,
    p_e: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_e) {
        return Err(Error::Domain {
            name: "p_e",
            value: p_e,
            domain: "[0, 1]",
        });
    }
    let (p, q) = (params.p, params.q);
    match policy {
        Policy::Rs { p_a } => {
            let a = p_a * channel.p_s;
            if a <= 0.0 {
                return Err(Error::Domain {
                    name: "p_a*p_s",
                    value: a,
                    domain: "(0, 1]",
                });
            }
            Ok(d_norm(p, q, a) * p_e / a)
        }
        Policy::ChangeAware => Ok((2.0 / channel.p_s - 1.0) * p_e),
        other => Err(unsupported("via_from_pe", other)),
    }
}

/// Break-even random-sampling probability against the change-aware policy:
/// for `p_a` at or above `2pq/(p+q+(2pq−p−q)p_s)` random sampling attains an
/// average version innovation age no worse than change-aware sampling.
pub fn via_break_even_p_a(params: SourceParams, channel: ChannelParams) -> f64 {
    let (p, q) = (params.p, params.q);
    2.0 * p * q / (p + q + (2.0 * p * q - p - q) * channel.p_s)
}

/// Stationary occupancy of the joint (X, X̂) chain, indexed `[x][xhat]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyncStationary(pub [[f64; 2]; 2]);

impl SyncStationary {
    pub fn get(&self, x: usize, xhat: usize) -> f64 {
        self.0[x][xhat]
    }

    /// Mass on the erroneous states `x ≠ xhat`.
    pub fn error_mass(&self) -> f64 {
        self.0[0][1] + self.0[1][0]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().flatten().sum()
    }
}

fn sync_rs_shape(p: f64, q: f64, a: f64) -> SyncStationary {
    let d = d_norm(p, q, a);
    let denom = (p + q) * d;
    let off = p * q * (1.0 - a) / denom;
    SyncStationary([
        [q * phi(q, a) / denom, off],
        [off, p * phi(p, a) / denom],
    ])
}

fn sync_mrs(p: f64, q: f64, p_s: f64, q1: f64, q2: f64) -> Result<SyncStationary> {
    mrs_degenerate(q1, q2)?;
    let f = f_norm(p, q, p_s, q1, q2);
    let denom = (p + q) * f;
    // Mixing weights of the two sampling probabilities, and the per-slot exit
    // rates from the two erroneous states.
    let m1 = q2 + p * (q1 - q2);
    let m2 = q2 + q * (q1 - q2);
    let exit_q = q + (1.0 - q) * q2 * p_s;
    let exit_p = p + (1.0 - p) * q2 * p_s;
    let err = p * q * (1.0 - q1 * p_s);
    Ok(SyncStationary([
        [q * m1 * exit_q / denom, err * m2 / denom],
        [err * m1 / denom, p * m2 * exit_p / denom],
    ]))
}

/// Stationary occupancy of the joint (source, reconstruction) chain.
pub fn sync_stationary(
    policy: Policy,
    params: SourceParams,
    channel: ChannelParams,
) -> Result<SyncStationary> {
    let (p, q) = (params.p, params.q);
    let p_s = channel.p_s;
    match policy {
        Policy::Rs { p_a } => Ok(sync_rs_shape(p, q, p_a * p_s)),
        Policy::SemanticsAware => Ok(sync_rs_shape(p, q, p_s)),
        Policy::Mrs { q1, q2 } => sync_mrs(p, q, p_s, q1, q2),
        Policy::ChangeAware => {
            let denom = (p + q) * (2.0 - p_s);
            Ok(SyncStationary([
                [q / denom, q * (1.0 - p_s) / denom],
                [p * (1.0 - p_s) / denom, p / denom],
            ]))
        }
    }
}

/// Stationary probability of the erroneous state `X ≠ X̂`.
///
/// Random sampling: `2pq(1−a)/((p+q)[p+q+(1−p−q)a])`. Change-aware:
/// `(1−p_s)/(2−p_s)`. For the other policies it is the erroneous mass of
/// their joint occupancy.
pub fn reconstruction_error(
    policy: Policy,
    params: SourceParams,
    channel: ChannelParams,
) -> Result<f64> {
    Ok(sync_stationary(policy, params, channel)?.error_mass())
}

/// Stationary distribution over (X, X̂, AoIV), indexed `[x][xhat][k]`.
///
/// For a two-state source the age of incorrect version is the indicator of
/// the erroneous state, so the four entries with `k = 1 ⇎ x ≠ xhat` are
/// structural zeros and the remaining four coincide with the joint (X, X̂)
/// occupancy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AoivStationary(pub [[[f64; 2]; 2]; 2]);

impl AoivStationary {
    pub fn get(&self, x: usize, xhat: usize, k: usize) -> f64 {
        self.0[x][xhat][k]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().flatten().flatten().sum()
    }
}

pub fn aoiv_stationary(
    policy: Policy,
    params: SourceParams,
    channel: ChannelParams,
) -> Result<AoivStationary> {
    let sync = sync_stationary(policy, params, channel)?;
    let mut out = [[[0.0; 2]; 2]; 2];
    out[0][0][0] = sync.get(0, 0);
    out[0][1][1] = sync.get(0, 1);
    out[1][0][1] = sync.get(1, 0);
    out[1][1][0] = sync.get(1, 1);
    Ok(AoivStationary(out))
}

/// Average age of incorrect version: `Pr[AoIV = 1]`, the erroneous mass.
///
/// Random sampling: `2pq(1−a)/((p+q)D)`. Two-probability policy:
/// `pq(1−q1·p_s)[(p+q)q1+(2−p−q)q2]/((p+q)F)`. Change-aware:
/// `(1−p_s)/(2−p_s)`. Semantics-aware: `2pq(1−p_s)/((p+q)[p+q+(1−p−q)p_s])`.
pub fn aoiv_average(policy: Policy, params: SourceParams, channel: ChannelParams) -> Result<f64> {
    Ok(sync_stationary(policy, params, channel)?.error_mass())
}

fn aoii_pmf_rs_shape(p: f64, q: f64, a: f64, i: usize) -> f64 {
    let d = d_norm(p, q, a);
    let denom = (p + q) * d;
    if i == 0 {
        (p * p + q * q + (p + q - p * p - q * q) * a) / denom
    } else {
        let im1 = (i - 1) as i32;
        p * q
            * (1.0 - a).powi(i as i32)
            * ((1.0 - q).powi(im1) * phi(q, a) + (1.0 - p).powi(im1) * phi(p, a))
            / denom
    }
}

fn aoii_avg_rs_shape(p: f64, q: f64, a: f64) -> f64 {
    p * q * (1.0 - a) * (p + q + (2.0 - p - q) * a)
        / ((p + q) * phi(p, a) * phi(q, a) * d_norm(p, q, a))
}

/// Stationary probability `Pr[AoII = i]`.
///
/// Every policy yields a mixture of two geometric run-length laws, one per
/// erroneous state, entered from the corresponding sync state:
///
/// * random sampling (and semantics-aware with `a := p_s`):
///   `Pr[0] = [p²+q²+(p+q−p²−q²)a]/((p+q)D)` and for `i ≥ 1`
///   `pq(1−a)^i[(1−q)^{i−1}Φ(q)+(1−p)^{i−1}Φ(p)]/((p+q)D)`;
/// * two-probability policy: `Pr[0] = G/((p+q)F)` with
///   `G = q·m1·(q+(1−q)q2 p_s) + p·m2·(p+(1−p)q2 p_s)`,
///   `m1 = q2+p(q1−q2)`, `m2 = q2+q(q1−q2)`, and for `i ≥ 1`
///   `pq(1−q1 p_s)(1−q2 p_s)^{i−1}[m1(q+(1−q)q2 p_s)(1−q)^{i−1}
///    + m2(p+(1−p)q2 p_s)(1−p)^{i−1}]/((p+q)F)`;
/// * change-aware: `Pr[0] = 1/(2−p_s)` and for `i ≥ 1`
///   `pq(1−p_s)[(1−q)^{i−1}+(1−p)^{i−1}]/((p+q)(2−p_s))` — the sum of the two
///   single-flip geometric runs (a change while erroneous lands on the
///   reconstructed value, so each erroneous state can only be *held*, with
///   rates `1−q` and `1−p`; first-step analysis from the sync occupancies
///   gives the two terms, and the mixture integrates back to the policy's
///   average `(p²+q²)(1−p_s)/(pq(p+q)(2−p_s))`).
pub fn aoii_pmf(
    policy: Policy,
    params: SourceParams,
    channel: ChannelParams,
    i: usize,
) -> Result<f64> {
    let (p, q) = (params.p, params.q);
    let p_s = channel.p_s;
    if let Some(a) = effective_delivery(policy, channel) {
        return Ok(aoii_pmf_rs_shape(p, q, a, i));
    }
    match policy {
        Policy::ChangeAware => Ok(if i == 0 {
            1.0 / (2.0 - p_s)
        } else {
            let im1 = (i - 1) as i32;
            p * q * (1.0 - p_s) * ((1.0 - q).powi(im1) + (1.0 - p).powi(im1))
                / ((p + q) * (2.0 - p_s))
        }),
        Policy::Mrs { q1, q2 } => {
            mrs_degenerate(q1, q2)?;
            let f = f_norm(p, q, p_s, q1, q2);
            let denom = (p + q) * f;
            let m1 = q2 + p * (q1 - q2);
            let m2 = q2 + q * (q1 - q2);
            let exit_q = q + (1.0 - q) * q2 * p_s;
            let exit_p = p + (1.0 - p) * q2 * p_s;
            Ok(if i == 0 {
                (q * m1 * exit_q + p * m2 * exit_p) / denom
            } else {
                let im1 = (i - 1) as i32;
                p * q
                    * (1.0 - q1 * p_s)
                    * (1.0 - q2 * p_s).powi(im1)
                    * (m1 * exit_q * (1.0 - q).powi(im1) + m2 * exit_p * (1.0 - p).powi(im1))
                    / denom
            })
        }
        _ => unreachable!("all policies handled"),
    }
}

/// Average age of incorrect information.
pub fn aoii_average(policy: Policy, params: SourceParams, channel: ChannelParams) -> Result<f64> {
    let (p, q) = (params.p, params.q);
    let p_s = channel.p_s;
    if let Some(a) = effective_delivery(policy, channel) {
        return Ok(aoii_avg_rs_shape(p, q, a));
    }
    match policy {
        Policy::ChangeAware => {
            Ok((p * p + q * q) * (1.0 - p_s) / (p * q * (p + q) * (2.0 - p_s)))
        }
        Policy::Mrs { q1, q2 } => {
            mrs_degenerate(q1, q2)?;
            let f = f_norm(p, q, p_s, q1, q2);
            let exit_q = q + (1.0 - q) * q2 * p_s;
            let exit_p = p + (1.0 - p) * q2 * p_s;
            let k = p * q
                * (1.0 - q1 * p_s)
                * (p * p * (q1 - q2) * (1.0 - q2 * p_s)
                    + p * q2 * (1.0 + q1 * p_s - 2.0 * q2 * p_s)
                    + q * q * q1
                    + q * (1.0 - q) * q2 * (1.0 + q1 * p_s)
                    + (2.0 - 2.0 * q + q * q) * p_s * q2 * q2);
            Ok(k / ((p + q) * exit_q * exit_p * f))
        }
        _ => unreachable!("all policies handled"),
    }
}

/// Time-averaged sampling cost rate, in units of the per-sample cost `delta`.
///
/// Random sampling: `δ·p_a`. Two-probability policy:
/// `2pqδ·m1·m2/((p+q)F)`. Change-aware: `2pqδ/(p+q)`. Semantics-aware:
/// `2pqδ/((p+q)[p+q+(1−p−q)p_s])`.
pub fn sampling_cost_rate(
    policy: Policy,
    params: SourceParams,
    channel: ChannelParams,
    delta: f64,
) -> Result<f64> {
    let (p, q) = (params.p, params.q);
    let p_s = channel.p_s;
    match policy {
        Policy::Rs { p_a } => Ok(delta * p_a),
        Policy::ChangeAware => Ok(2.0 * p * q * delta / (p + q)),
        Policy::SemanticsAware => Ok(2.0 * p * q * delta / ((p + q) * d_norm(p, q, p_s))),
        Policy::Mrs { q1, q2 } => {
            mrs_degenerate(q1, q2)?;
            let f = f_norm(p, q, p_s, q1, q2);
            let m1 = q2 + p * (q1 - q2);
            let m2 = q2 + q * (q1 - q2);
            Ok(2.0 * p * q * delta * m1 * m2 / ((p + q) * f))
        }
    }
}

/// Cost rate of the two-probability policy on its diagonal `q1 = q2 = q_a`,
/// in the simplified form `2pqδ·q_a/((p+q)[p+q+(1−p−q)q_a·p_s])`; equals the
/// general form evaluated at `(q_a, q_a)`.
pub fn mrs_equal_cost_rate(
    params: SourceParams,
    channel: ChannelParams,
    q_a: f64,
    delta: f64,
) -> f64 {
    let (p, q) = (params.p, params.q);
    2.0 * p * q * delta * q_a / ((p + q) * d_norm(p, q, q_a * channel.p_s))
}

/// The closed-form metric bundle for one policy. `None` marks a quantity with
/// no closed form for that policy (or one that diverges, like the average
/// version innovation age when `p_a·p_s = 0`); the simulator still measures
/// those.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticReport {
    pub avg_via: Option<f64>,
    pub avg_aoiv: Option<f64>,
    pub avg_aoii: Option<f64>,
    pub p_e: Option<f64>,
    pub cost_rate: Option<f64>,
}

/// Evaluate every available closed form for the policy.
pub fn analytic_report(
    policy: Policy,
    params: SourceParams,
    channel: ChannelParams,
    delta: f64,
) -> Result<AnalyticReport> {
    policy.validate()?;
    if let Policy::Mrs { q1, q2 } = policy {
        mrs_degenerate(q1, q2)?;
    }
    Ok(AnalyticReport {
        avg_via: via_average(policy, params, channel).ok(),
        avg_aoiv: Some(aoiv_average(policy, params, channel)?),
        avg_aoii: Some(aoii_average(policy, params, channel)?),
        p_e: Some(reconstruction_error(policy, params, channel)?),
        cost_rate: Some(sampling_cost_rate(policy, params, channel, delta)?),
    })
}
