//! Independent numerical oracle: explicit Markov chains over the joint
//! system state, solved for their stationary distributions.
//!
//! Everything in this module is derived from first principles — the source
//! transition rule, the channel success probability, and
//! [`sample_probability`] — never from the closed-form expressions in
//! [`crate::analytic`]. The closed forms and these chain solves are compared
//! against each other in tests; sharing formulas between them would make that
//! comparison circular. The single exception is chain *sizing*: the geometric
//! decay ratio of the age distribution is used to pick a truncation depth,
//! which affects accuracy but never injects a closed-form value.
//!
//! Three chain families:
//!
//! * the (X, VIA) chain, truncated at a configurable age `n` (ages fold into
//!   the top level, biasing the folded average by less than the retained tail
//!   mass times the truncation depth);
//! * the 4-state joint (X, X̂) chain;
//! * the 8-state (X, X̂, AoIV) chain, whose four inconsistent states are
//!   structural zeros.
//!
//! The age-of-incorrect-information distribution needs no truncated chain:
//! conditional on entering an erroneous state, the age run is geometric, so a
//! first-step decomposition over the solved 4-state chain gives the exact
//! pmf and mean.

use crate::analytic::via_decay_ratio;
use crate::error::{Error, Result};
use crate::model::{ChannelParams, SourceParams};
use crate::policy::{sample_probability, DecisionContext, Policy};

/// Convergence tolerance used by [`stationary_solve`] callers by default.
pub const DEFAULT_SOLVE_TOL: f64 = 1e-13;

/// Tail-mass budget a truncated age chain must meet.
pub const TRUNCATION_TAIL_BUDGET: f64 = 1e-9;

const POWER_ITERATION_MAX: usize = 2_000_000;

/// A finite Markov chain with labelled states and sparse rows.
#[derive(Debug, Clone)]
pub struct ExplicitChain<S> {
    pub states: Vec<S>,
    rows: Vec<Vec<(usize, f64)>>,
    /// Age cap for truncated chains, `None` for exact ones.
    pub truncation: Option<usize>,
}

impl<S> ExplicitChain<S> {
    fn new(states: Vec<S>, truncation: Option<usize>) -> Self {
        let n = states.len();
        ExplicitChain {
            states,
            rows: Vec::with_capacity(n),
            truncation,
        }
    }

    fn add_row(&mut self, entries: Vec<(usize, f64)>) -> Result<()> {
        let sum: f64 = entries.iter().map(|&(_, w)| w).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "chain row {} sums to {sum}, expected 1",
                self.rows.len()
            )));
        }
        let n = self.states.len();
        if entries.iter().any(|&(j, w)| j >= n || w < 0.0) {
            return Err(Error::Config(format!(
                "chain row {} has an out-of-range target or negative weight",
                self.rows.len()
            )));
        }
        self.rows.push(entries);
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Indices reachable from `start` along positive-probability edges.
    fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n_states()];
        let mut queue = vec![start];
        seen[start] = true;
        while let Some(i) = queue.pop() {
            for &(j, w) in &self.rows[i] {
                if w > 0.0 && !seen[j] {
                    seen[j] = true;
                    queue.push(j);
                }
            }
        }
        seen
    }
}

/// Accumulates transition weight into a sparse row, merging duplicates.
fn bump(row: &mut Vec<(usize, f64)>, j: usize, w: f64) {
    if w == 0.0 {
        return;
    }
    if let Some(entry) = row.iter_mut().find(|(k, _)| *k == j) {
        entry.1 += w;
    } else {
        row.push((j, w));
    }
}

fn source_row(params: SourceParams, x: u8) -> [(u8, f64); 2] {
    let (p, q) = (params.p, params.q);
    if x == 0 {
        [(0, 1.0 - p), (1, p)]
    } else {
        [(1, 1.0 - q), (0, q)]
    }
}

fn require_min_truncation(n: usize) -> Result<()> {
    if n < 10 {
        return Err(Error::Domain {
            name: "n",
            value: n as f64,
            domain: "n >= 10 (age truncation)",
        });
    }
    Ok(())
}

fn check_tail(n: usize, ratio: f64) -> Result<()> {
    let tail = ratio.powi(n as i32);
    if tail > TRUNCATION_TAIL_BUDGET {
        return Err(Error::TruncationTooSmall {
            n,
            tail,
            budget: TRUNCATION_TAIL_BUDGET,
        });
    }
    Ok(())
}

fn truncation_for_ratio(ratio: f64) -> usize {
    if ratio <= 0.0 || ratio.is_nan() {
        return 50;
    }
    let raw = (1e-12f64.ln() / ratio.ln()).ceil();
    (raw as usize).clamp(50, 5000)
}

/// Truncation depth for the random-sampling age chain: the smallest `n` with
/// decay-ratio tail below 1e−12, clamped to [50, 5000].
pub fn default_truncation(params: SourceParams, channel: ChannelParams, p_a: f64) -> usize {
    truncation_for_ratio(via_decay_ratio(params, channel, p_a))
}

/// Truncation depth for the change-aware age chain, whose pmf decays like
/// `(1−p_s)^i`.
pub fn default_truncation_change_aware(channel: ChannelParams) -> usize {
    truncation_for_ratio(1.0 - channel.p_s)
}

/// Age-chain state layout: `index = x·(n+1) + v` for `x ∈ {0,1}`, `v ∈ 0..=n`.
fn via_state_index(n: usize, x: u8, v: usize) -> usize {
    x as usize * (n + 1) + v
}

/// Builds the (X, VIA) chain for a context-free sampler. Both supported
/// policies decide from the source trajectory alone, so the chain never needs
/// to carry the reconstruction.
fn build_via_chain_for(
    policy: Policy,
    params: SourceParams,
    channel: ChannelParams,
    n: usize,
    ratio: f64,
) -> Result<ExplicitChain<(u8, usize)>> {
    require_min_truncation(n)?;
    check_tail(n, ratio)?;
    let mut states = Vec::with_capacity(2 * (n + 1));
    for x in 0..2u8 {
        for v in 0..=n {
            states.push((x, v));
        }
    }
    let mut chain = ExplicitChain::new(states, Some(n));
    for x in 0..2u8 {
        for v in 0..=n {
            let mut row = Vec::with_capacity(4);
            for (x_next, w_src) in source_row(params, x) {
                // The age resets on a delivered sample and otherwise grows
                // with source changes; the sampling decision may depend on
                // the transition (x → x_next) but not on the reconstruction.
                let s = sample_probability(
                    policy,
                    DecisionContext {
                        x_t: x_next,
                        x_prev: x,
                        xhat_prev: 0,
                    },
                );
                let deliver = s * channel.p_s;
                let grown = if x_next == x { v } else { (v + 1).min(n) };
                bump(&mut row, via_state_index(n, x_next, 0), w_src * deliver);
                bump(
                    &mut row,
                    via_state_index(n, x_next, grown),
                    w_src * (1.0 - deliver),
                );
            }
            chain.add_row(row)?;
        }
    }
    Ok(chain)
}

/// (X, VIA) chain under random sampling with probability `p_a`.
pub fn build_via_chain(
    params: SourceParams,
    channel: ChannelParams,
    p_a: f64,
    n: usize,
) -> Result<ExplicitChain<(u8, usize)>> {
    if !(0.0..=1.0).contains(&p_a) || p_a * channel.p_s <= 0.0 {
        return Err(Error::Domain {
            name: "p_a",
            value: p_a,
            domain: "(0, 1] with p_a*p_s > 0",
        });
    }
    let ratio = via_decay_ratio(params, channel, p_a);
    build_via_chain_for(Policy::Rs { p_a }, params, channel, n, ratio)
}

/// (X, VIA) chain under change-aware sampling.
pub fn build_via_chain_change_aware(
    params: SourceParams,
    channel: ChannelParams,
    n: usize,
) -> Result<ExplicitChain<(u8, usize)>> {
    build_via_chain_for(
        Policy::ChangeAware,
        params,
        channel,
        n,
        1.0 - channel.p_s,
    )
}

/// Per-level age occupancy `(π_{0,i}, π_{1,i}, Pr[VIA=i])` from a solved
/// truncated chain.
pub fn via_pmf_from_stationary(
    chain: &ExplicitChain<(u8, usize)>,
    stationary: &[f64],
    i: usize,
) -> (f64, f64, f64) {
    let mut out = [0.0; 2];
    for (&(x, v), &mass) in chain.states.iter().zip(stationary) {
        if v == i {
            out[x as usize] += mass;
        }
    }
    (out[0], out[1], out[0] + out[1])
}

/// Mean age from a solved truncated chain (folded mass counts at the cap).
pub fn via_average_from_stationary(
    chain: &ExplicitChain<(u8, usize)>,
    stationary: &[f64],
) -> f64 {
    chain
        .states
        .iter()
        .zip(stationary)
        .map(|(&(_, v), &mass)| v as f64 * mass)
        .sum()
}

/// Sync-chain state layout: `index = 2x + xhat`.
fn sync_state_index(x: u8, xhat: u8) -> usize {
    (2 * x + xhat) as usize
}

/// The 4-state joint (X, X̂) chain under any policy.
///
/// Fails with `NotIrreducible` when some joint state cannot be reached from
/// the initial sync state (0, 0) — e.g. an all-zero sampler never delivers,
/// so the reconstruction stays frozen.
pub fn build_joint_sync_chain(
    policy: Policy,
    params: SourceParams,
    channel: ChannelParams,
) -> Result<ExplicitChain<(u8, u8)>> {
    policy.validate()?;
    let states = vec![(0u8, 0u8), (0, 1), (1, 0), (1, 1)];
    let mut chain = ExplicitChain::new(states, None);
    for x in 0..2u8 {
        for xhat in 0..2u8 {
            let mut row = Vec::with_capacity(4);
            for (x_next, w_src) in source_row(params, x) {
                let s = sample_probability(
                    policy,
                    DecisionContext {
                        x_t: x_next,
                        x_prev: x,
                        xhat_prev: xhat,
                    },
                );
                let deliver = s * channel.p_s;
                bump(&mut row, sync_state_index(x_next, x_next), w_src * deliver);
                bump(&mut row, sync_state_index(x_next, xhat), w_src * (1.0 - deliver));
            }
            chain.add_row(row)?;
        }
    }
    let seen = chain.reachable_from(sync_state_index(0, 0));
    if let Some(missing) = seen.iter().position(|&r| !r) {
        return Err(Error::NotIrreducible {
            reason: format!(
                "joint state {:?} unreachable from (0, 0) under {}",
                chain.states[missing],
                policy.name()
            ),
        });
    }
    Ok(chain)
}

/// AoIV-chain state layout: `index = 4x + 2·xhat + k`.
fn aoiv_state_index(x: u8, xhat: u8, k: u8) -> usize {
    (4 * x + 2 * xhat + k) as usize
}

/// The 8-state (X, X̂, AoIV) chain. The four states with `k ≠ [x ≠ x̂]` are
/// unreachable from consistent ones and carry zero stationary mass.
pub fn build_aoiv_chain(
    policy: Policy,
    params: SourceParams,
    channel: ChannelParams,
) -> Result<ExplicitChain<(u8, u8, u8)>> {
    policy.validate()?;
    let mut states = Vec::with_capacity(8);
    for x in 0..2u8 {
        for xhat in 0..2u8 {
            for k in 0..2u8 {
                states.push((x, xhat, k));
            }
        }
    }
    let mut chain = ExplicitChain::new(states, None);
    for x in 0..2u8 {
        for xhat in 0..2u8 {
            for k in 0..2u8 {
                let mut row = Vec::with_capacity(6);
                for (x_next, w_src) in source_row(params, x) {
                    let s = sample_probability(
                        policy,
                        DecisionContext {
                            x_t: x_next,
                            x_prev: x,
                            xhat_prev: xhat,
                        },
                    );
                    let deliver = s * channel.p_s;
                    for (xhat_next, w_ch) in [(x_next, deliver), (xhat, 1.0 - deliver)] {
                        let k_next =
                            crate::metrics::update_aoiv(k as u64, x_next, x, xhat_next).min(1)
                                as u8;
                        bump(
                            &mut row,
                            aoiv_state_index(x_next, xhat_next, k_next),
                            w_src * w_ch,
                        );
                    }
                }
                chain.add_row(row)?;
            }
        }
    }
    let seen = chain.reachable_from(aoiv_state_index(0, 0, 0));
    for x in 0..2u8 {
        for xhat in 0..2u8 {
            let k = u8::from(x != xhat);
            if !seen[aoiv_state_index(x, xhat, k)] {
                return Err(Error::NotIrreducible {
                    reason: format!(
                        "joint state ({x}, {xhat}, {k}) unreachable from (0, 0, 0) under {}",
                        policy.name()
                    ),
                });
            }
        }
    }
    Ok(chain)
}

fn stationary_dense<S>(chain: &ExplicitChain<S>) -> Result<Vec<f64>> {
    use nalgebra::{DMatrix, DVector};
    let n = chain.n_states();
    // (Pᵀ − I)π = 0 with the last equation replaced by Σπ = 1.
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for &(j, w) in chain.row(i) {
            a[(j, i)] += w;
        }
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let solved = a.lu().solve(&b).ok_or_else(|| Error::NotIrreducible {
        reason: "singular stationary system".to_string(),
    })?;
    let mut pi: Vec<f64> = solved.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::NotIrreducible {
            reason: format!("stationary solve produced total mass {total}"),
        });
    }
    for v in &mut pi {
        *v /= total;
    }
    Ok(pi)
}

fn stationary_power<S>(chain: &ExplicitChain<S>, tol: f64) -> Result<Vec<f64>> {
    let n = chain.n_states();
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..POWER_ITERATION_MAX {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (i, mass) in pi.iter().enumerate() {
            if *mass == 0.0 {
                continue;
            }
            for &(j, w) in chain.row(i) {
                next[j] += mass * w;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        let residual = pi
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        std::mem::swap(&mut pi, &mut next);
        if residual < tol {
            return Ok(pi);
        }
    }
    Err(Error::NoConvergence {
        tol,
        iterations: POWER_ITERATION_MAX,
    })
}

/// Stationary distribution of a chain: dense LU for small chains, power
/// iteration (L∞ residual below `tol`) for truncated age chains.
pub fn stationary_solve<S>(chain: &ExplicitChain<S>, tol: f64) -> Result<Vec<f64>> {
    if chain.n_states() <= 16 {
        stationary_dense(chain)
    } else {
        stationary_power(chain, tol)
    }
}

/// Per-erroneous-state run parameters from first principles: entry
/// probability from each sync state and per-slot survival once erroneous.
struct AoiiRuns {
    pi_00: f64,
    pi_11: f64,
    enter_from_00: f64,
    stay_10: f64,
    enter_from_11: f64,
    stay_01: f64,
}

fn aoii_runs(policy: Policy, params: SourceParams, channel: ChannelParams) -> Result<AoiiRuns> {
    let chain = build_joint_sync_chain(policy, params, channel)?;
    let pi = stationary_solve(&chain, DEFAULT_SOLVE_TOL)?;
    let (p, q) = (params.p, params.q);
    let p_s = channel.p_s;
    let miss = |x_t: u8, x_prev: u8, xhat_prev: u8| {
        1.0 - p_s
            * sample_probability(
                policy,
                DecisionContext {
                    x_t,
                    x_prev,
                    xhat_prev,
                },
            )
    };
    Ok(AoiiRuns {
        pi_00: pi[sync_state_index(0, 0)],
        pi_11: pi[sync_state_index(1, 1)],
        // From (0,0): flip to 1 and fail to deliver → erroneous state (1,0).
        enter_from_00: p * miss(1, 0, 0),
        // Held there while the source stays at 1 and deliveries keep failing;
        // a flip back lands on the reconstruction and ends the run.
        stay_10: (1.0 - q) * miss(1, 1, 0),
        enter_from_11: q * miss(0, 1, 1),
        stay_01: (1.0 - p) * miss(0, 0, 1),
    })
}

/// `Pr[AoII = i]` for `i ∈ 0..=i_max` by first-step decomposition over the
/// solved joint chain: an age run entered from a sync state survives
/// geometrically until a delivery or a source flip.
pub fn aoii_pmf_oracle(
    policy: Policy,
    params: SourceParams,
    channel: ChannelParams,
    i_max: usize,
) -> Result<Vec<f64>> {
    let runs = aoii_runs(policy, params, channel)?;
    let mut pmf = Vec::with_capacity(i_max + 1);
    pmf.push(runs.pi_00 + runs.pi_11);
    let mut w10 = runs.pi_00 * runs.enter_from_00;
    let mut w01 = runs.pi_11 * runs.enter_from_11;
    for _ in 1..=i_max {
        pmf.push(w10 + w01);
        w10 *= runs.stay_10;
        w01 *= runs.stay_01;
    }
    Ok(pmf)
}

/// Exact mean age of incorrect information via the geometric run sums
/// `Σ_{i≥1} i·e·s^{i−1} = e/(1−s)²`.
pub fn aoii_average_oracle(
    policy: Policy,
    params: SourceParams,
    channel: ChannelParams,
) -> Result<f64> {
    let runs = aoii_runs(policy, params, channel)?;
    Ok(runs.pi_00 * runs.enter_from_00 / ((1.0 - runs.stay_10) * (1.0 - runs.stay_10))
        + runs.pi_11 * runs.enter_from_11 / ((1.0 - runs.stay_01) * (1.0 - runs.stay_01)))
}

/// Long-run fraction of slots that draw a sample: the stationary occupancy
/// weighted by each state's expected sampling probability over the next
/// source move.
pub fn sampling_rate_oracle(
    policy: Policy,
    params: SourceParams,
    channel: ChannelParams,
) -> Result<f64> {
    let chain = build_joint_sync_chain(policy, params, channel)?;
    let pi = stationary_solve(&chain, DEFAULT_SOLVE_TOL)?;
    let mut rate = 0.0;
    for (&(x, xhat), &mass) in chain.states.iter().zip(&pi) {
        for (x_next, w_src) in source_row(params, x) {
            rate += mass
                * w_src
                * sample_probability(
                    policy,
                    DecisionContext {
                        x_t: x_next,
                        x_prev: x,
                        xhat_prev: xhat,
                    },
                );
        }
    }
    Ok(rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;

    fn src(p: f64, q: f64) -> SourceParams {
        SourceParams::new(p, q).unwrap()
    }

    fn ch(p_s: f64) -> ChannelParams {
        ChannelParams::new(p_s).unwrap()
    }

    fn all_policies() -> [Policy; 4] {
        [
            Policy::Rs { p_a: 0.55 },
            Policy::Mrs { q1: 0.35, q2: 0.85 },
            Policy::ChangeAware,
            Policy::SemanticsAware,
        ]
    }

    #[test]
    fn bare_source_chain_solves_to_source_stationary() {
        let (p, q) = (0.3, 0.6);
        let mut chain = ExplicitChain::new(vec![0u8, 1u8], None);
        chain.add_row(vec![(0, 1.0 - p), (1, p)]).unwrap();
        chain.add_row(vec![(1, 1.0 - q), (0, q)]).unwrap();
        let pi = stationary_solve(&chain, DEFAULT_SOLVE_TOL).unwrap();
        assert!((pi[0] - q / (p + q)).abs() < 1e-14);
        assert!((pi[1] - p / (p + q)).abs() < 1e-14);
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let mut chain = ExplicitChain::new(vec![0u8, 1u8], None);
        assert!(chain.add_row(vec![(0, 0.5), (1, 0.4)]).is_err());
        assert!(chain.add_row(vec![(0, 0.5), (2, 0.5)]).is_err());
    }

    #[test]
    fn via_chain_matches_closed_form_random_sampling() {
        let (s, c) = (src(0.3, 0.6), ch(0.7));
        let p_a = 0.5;
        let n = default_truncation(s, c, p_a);
        let chain = build_via_chain(s, c, p_a, n).unwrap();
        assert_eq!(chain.n_states(), 2 * (n + 1));
        let pi = stationary_solve(&chain, DEFAULT_SOLVE_TOL).unwrap();
        let rs = Policy::Rs { p_a };
        for i in 0..10 {
            let (o0, o1, _) = via_pmf_from_stationary(&chain, &pi, i);
            let (a0, a1, _) = analytic::via_pmf(rs, s, c, i).unwrap();
            assert!((o0 - a0).abs() < 1e-10, "level {i}: {o0} vs {a0}");
            assert!((o1 - a1).abs() < 1e-10, "level {i}: {o1} vs {a1}");
        }
        let avg_oracle = via_average_from_stationary(&chain, &pi);
        let avg_formula = analytic::via_average(rs, s, c).unwrap();
        assert!((avg_oracle - avg_formula).abs() < 1e-9);
    }

    #[test]
    fn via_chain_matches_closed_form_change_aware() {
        let (s, c) = (src(0.2, 0.7), ch(0.4));
        let n = default_truncation_change_aware(c);
        let chain = build_via_chain_change_aware(s, c, n).unwrap();
        let pi = stationary_solve(&chain, DEFAULT_SOLVE_TOL).unwrap();
        for i in 0..10 {
            let (o0, o1, _) = via_pmf_from_stationary(&chain, &pi, i);
            let (a0, a1, _) = analytic::via_pmf(Policy::ChangeAware, s, c, i).unwrap();
            assert!((o0 - a0).abs() < 1e-10);
            assert!((o1 - a1).abs() < 1e-10);
        }
        let avg_oracle = via_average_from_stationary(&chain, &pi);
        let avg_formula = analytic::via_average(Policy::ChangeAware, s, c).unwrap();
        assert!((avg_oracle - avg_formula).abs() < 1e-9);
    }

    #[test]
    fn doubling_truncation_barely_moves_the_average() {
        let (s, c) = (src(0.5, 0.5), ch(0.5));
        let p_a = 0.4;
        let n = default_truncation(s, c, p_a);
        let solve = |n: usize| {
            let chain = build_via_chain(s, c, p_a, n).unwrap();
            let pi = stationary_solve(&chain, DEFAULT_SOLVE_TOL).unwrap();
            via_average_from_stationary(&chain, &pi)
        };
        assert!((solve(n) - solve(2 * n)).abs() < 1e-10);
    }

    #[test]
    fn truncation_preconditions() {
        let (s, c) = (src(0.5, 0.5), ch(0.1));
        assert!(matches!(
            build_via_chain(s, c, 0.3, 9),
            Err(Error::Domain { .. })
        ));
        // r ≈ 0.94 at this point, so r^12 is nowhere near the 1e−9 budget.
        assert!(matches!(
            build_via_chain(s, c, 0.3, 12),
            Err(Error::TruncationTooSmall { .. })
        ));
        assert!(build_via_chain(s, c, 0.0, 50).is_err());
    }

    #[test]
    fn sync_chain_matches_closed_form_for_every_policy() {
        let (s, c) = (src(0.3, 0.6), ch(0.7));
        for policy in all_policies() {
            let chain = build_joint_sync_chain(policy, s, c).unwrap();
            let pi = stationary_solve(&chain, DEFAULT_SOLVE_TOL).unwrap();
            let formula = analytic::sync_stationary(policy, s, c).unwrap();
            for (idx, &(x, xhat)) in chain.states.iter().enumerate() {
                assert!(
                    (pi[idx] - formula.get(x as usize, xhat as usize)).abs() < 1e-12,
                    "{policy:?} state ({x},{xhat}): {} vs {}",
                    pi[idx],
                    formula.get(x as usize, xhat as usize)
                );
            }
        }
    }

    #[test]
    fn aoiv_chain_matches_closed_form_and_has_structural_zeros() {
        let (s, c) = (src(0.2, 0.7), ch(0.5));
        for policy in all_policies() {
            let chain = build_aoiv_chain(policy, s, c).unwrap();
            let pi = stationary_solve(&chain, DEFAULT_SOLVE_TOL).unwrap();
            let formula = analytic::aoiv_stationary(policy, s, c).unwrap();
            for (idx, &(x, xhat, k)) in chain.states.iter().enumerate() {
                let expected = formula.get(x as usize, xhat as usize, k as usize);
                assert!(
                    (pi[idx] - expected).abs() < 1e-12,
                    "{policy:?} state ({x},{xhat},{k})"
                );
                if k != u8::from(x != xhat) {
                    assert!(pi[idx].abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn aoii_oracle_matches_closed_forms() {
        let (s, c) = (src(0.3, 0.6), ch(0.7));
        for policy in all_policies() {
            let pmf = aoii_pmf_oracle(policy, s, c, 30).unwrap();
            for (i, &pr) in pmf.iter().enumerate() {
                let formula = analytic::aoii_pmf(policy, s, c, i).unwrap();
                assert!((pr - formula).abs() < 1e-10, "{policy:?} level {i}");
            }
            let avg = aoii_average_oracle(policy, s, c).unwrap();
            let formula = analytic::aoii_average(policy, s, c).unwrap();
            assert!((avg - formula).abs() < 1e-10, "{policy:?}: {avg} vs {formula}");
        }
    }

    #[test]
    fn change_aware_aoii_first_level_from_first_principles() {
        let (s, c) = (src(0.5, 0.5), ch(0.5));
        let pmf = aoii_pmf_oracle(Policy::ChangeAware, s, c, 2).unwrap();
        assert!((pmf[1] - 1.0 / 6.0).abs() < 1e-12, "got {}", pmf[1]);
    }

    #[test]
    fn sampling_rate_matches_cost_closed_forms() {
        let (s, c) = (src(0.3, 0.6), ch(0.7));
        for policy in all_policies() {
            let rate = sampling_rate_oracle(policy, s, c).unwrap();
            let formula = analytic::sampling_cost_rate(policy, s, c, 1.0).unwrap();
            assert!((rate - formula).abs() < 1e-12, "{policy:?}: {rate} vs {formula}");
        }
    }

    #[test]
    fn frozen_reconstruction_is_not_irreducible() {
        let (s, c) = (src(0.5, 0.5), ch(0.5));
        assert!(matches!(
            build_joint_sync_chain(Policy::Rs { p_a: 0.0 }, s, c),
            Err(Error::NotIrreducible { .. })
        ));
        assert!(matches!(
            build_joint_sync_chain(Policy::Mrs { q1: 0.0, q2: 0.0 }, s, c),
            Err(Error::NotIrreducible { .. })
        ));
        assert!(matches!(
            build_aoiv_chain(Policy::Rs { p_a: 0.0 }, s, c),
            Err(Error::NotIrreducible { .. })
        ));
    }

    #[test]
    fn default_truncation_tracks_decay_speed() {
        let fast = default_truncation(src(0.1, 0.1), ch(0.9), 1.0);
        let slow = default_truncation(src(0.5, 0.5), ch(0.1), 0.3);
        assert_eq!(fast, 50);
        assert!(slow > 300, "slow decay got n = {slow}");
        assert!(slow <= 5000);
    }
}
