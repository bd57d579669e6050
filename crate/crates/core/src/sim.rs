//! Monte Carlo engine for the remote-monitoring loop.
//!
//! One run replays the slot recurrence exactly as the metric definitions
//! state it: the source moves, the policy decides from `(x_t, x_prev,
//! x̂_prev)`, the channel either delivers or not, and the three age processes
//! update. Every slot consumes exactly three uniforms (source, sampling,
//! channel) whether or not they end up being used, so two configurations
//! sharing a seed see identical randomness slot by slot — common random
//! numbers across policies.
//!
//! Uncertainty is estimated with non-overlapping batch means: the measured
//! window is split into 100 equal batches (the remainder tail still counts
//! toward the averages, just not toward the error bars), and the standard
//! error of the overall mean is the batch-mean standard deviation divided by
//! √100. Replicated runs ([`run_many`]) instead use the across-replication
//! spread, with each replication reseeded through [`replication_seed`].

use serde::Serialize;

use crate::analytic::AnalyticReport;
use crate::error::{Error, Result};
use crate::metrics::{advance, SlotOutcome, SystemState};
use crate::model::{ChannelParams, SlotDraws, SourceParams};
use crate::policy::Policy;
use crate::rng::{replication_seed, SplitMix64};

/// Number of batches used for batch-means error bars.
const BATCHES: usize = 100;

/// One simulation setup. `horizon` counts slots including the deterministic
/// initial slot `t = 1`; `burn_in` discards that many measured slots (from
/// `t = 2` on) before accumulation starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub params: SourceParams,
    pub channel: ChannelParams,
    pub policy: Policy,
    pub horizon: u64,
    pub seed: u64,
    pub burn_in: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        if self.horizon < 1_000 {
            return Err(Error::Domain {
                name: "horizon",
                value: self.horizon as f64,
                domain: "[1000, inf) slots",
            });
        }
        if self.burn_in > self.horizon - 2 {
            return Err(Error::Domain {
                name: "burn_in",
                value: self.burn_in as f64,
                domain: "[0, horizon - 2] (at least one measured slot)",
            });
        }
        Ok(())
    }
}

/// Standard errors for the measured averages, when enough measured slots
/// exist to form batches (or replications to spread over).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Stderrs {
    pub avg_via: Option<f64>,
    pub avg_aoiv: Option<f64>,
    pub avg_aoii: Option<f64>,
    pub p_e_hat: Option<f64>,
    pub cost_rate_hat: Option<f64>,
}

/// Measured long-run averages. `cost_rate_hat` is expressed in units of the
/// per-sample cost, so it coincides with `sample_rate`; consumers scale by
/// their `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsSummary {
    pub avg_via: f64,
    pub avg_aoiv: f64,
    pub avg_aoii: f64,
    pub p_e_hat: f64,
    pub cost_rate_hat: f64,
    pub sample_rate: f64,
    /// Measured slots contributing to the averages (summed across
    /// replications).
    pub slots: u64,
    pub stderr: Stderrs,
}

const METRIC_COUNT: usize = 5;

#[derive(Default, Clone, Copy)]
struct Accumulator {
    sums: [f64; METRIC_COUNT],
    n: u64,
}

impl Accumulator {
    #[inline]
    fn push(&mut self, values: [f64; METRIC_COUNT]) {
        for (s, v) in self.sums.iter_mut().zip(values) {
            *s += v;
        }
        self.n += 1;
    }

    fn means(&self) -> [f64; METRIC_COUNT] {
        self.sums.map(|s| s / self.n as f64)
    }
}

fn slot_values(state: &SystemState, outcome: &SlotOutcome) -> [f64; METRIC_COUNT] {
    [
        state.via as f64,
        state.aoiv as f64,
        state.aoii as f64,
        (!outcome.synced) as u8 as f64,
        outcome.sampled as u8 as f64,
    ]
}

/// Standard error of the mean from iid-ish summaries: `sd/√m`.
fn spread(values: &[f64]) -> Option<f64> {
    let m = values.len();
    if m < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64;
    Some((var / m as f64).sqrt())
}

fn run_internal(
    config: &SimConfig,
    mut on_slot: impl FnMut(u64, &SystemState, &SlotOutcome),
) -> Result<MetricsSummary> {
    config.validate()?;
    let mut rng = SplitMix64::new(config.seed);
    let mut state = SystemState::initial();
    let measured = config.horizon - 1 - config.burn_in;
    let batch_len = measured / BATCHES as u64;
    let batched = batch_len * BATCHES as u64;

    let mut total = Accumulator::default();
    let mut batch = Accumulator::default();
    let mut batch_means: Vec<[f64; METRIC_COUNT]> = Vec::with_capacity(BATCHES);

    for t in 2..=config.horizon {
        let draws = SlotDraws::draw(&mut rng);
        let (next, outcome) = advance(config.params, config.channel, config.policy, state, draws);
        state = next;
        on_slot(t, &state, &outcome);
        let measured_idx = t - 2;
        if measured_idx < config.burn_in {
            continue;
        }
        let values = slot_values(&state, &outcome);
        total.push(values);
        let k = measured_idx - config.burn_in;
        if k < batched {
            batch.push(values);
            if batch.n == batch_len {
                batch_means.push(batch.means());
                batch = Accumulator::default();
            }
        }
    }

    let means = total.means();
    let stderr = if batch_means.len() == BATCHES {
        let per_metric = |i: usize| spread(&batch_means.iter().map(|b| b[i]).collect::<Vec<_>>());
        Stderrs {
            avg_via: per_metric(0),
            avg_aoiv: per_metric(1),
            avg_aoii: per_metric(2),
            p_e_hat: per_metric(3),
            cost_rate_hat: per_metric(4),
        }
    } else {
        Stderrs::default()
    };
    Ok(MetricsSummary {
        avg_via: means[0],
        avg_aoiv: means[1],
        avg_aoii: means[2],
        p_e_hat: means[3],
        cost_rate_hat: means[4],
        sample_rate: means[4],
        slots: total.n,
        stderr,
    })
}

/// Runs one trajectory and returns the measured averages.
pub fn run(config: &SimConfig) -> Result<MetricsSummary> {
    run_internal(config, |_, _, _| {})
}

/// Runs one trajectory, invoking `on_slot(t, state, outcome)` after every
/// slot update (the state passed is the post-update state of slot `t`).
pub fn run_with(
    config: &SimConfig,
    on_slot: impl FnMut(u64, &SystemState, &SlotOutcome),
) -> Result<MetricsSummary> {
    run_internal(config, on_slot)
}

/// Runs `n_reps` independent replications (seeds derived from the base seed)
/// and pools them: the point estimates average the per-replication means and
/// the error bars come from the across-replication spread. Replications run
/// in parallel but reduce in replication order, so the result is independent
/// of scheduling.
pub fn run_many(config: &SimConfig, n_reps: u32) -> Result<MetricsSummary> {
    if n_reps == 0 {
        return Err(Error::Domain {
            name: "n_reps",
            value: 0.0,
            domain: "[1, inf)",
        });
    }
    if n_reps == 1 {
        return run(config);
    }
    use rayon::prelude::*;
    let summaries: Vec<MetricsSummary> = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let rep = SimConfig {
                seed: replication_seed(config.seed, r as u64),
                ..*config
            };
            run(&rep)
        })
        .collect::<Result<_>>()?;
    let m = summaries.len() as f64;
    let mean = |f: fn(&MetricsSummary) -> f64| summaries.iter().map(f).sum::<f64>() / m;
    let err = |f: fn(&MetricsSummary) -> f64| {
        spread(&summaries.iter().map(f).collect::<Vec<_>>())
    };
    Ok(MetricsSummary {
        avg_via: mean(|s| s.avg_via),
        avg_aoiv: mean(|s| s.avg_aoiv),
        avg_aoii: mean(|s| s.avg_aoii),
        p_e_hat: mean(|s| s.p_e_hat),
        cost_rate_hat: mean(|s| s.cost_rate_hat),
        sample_rate: mean(|s| s.sample_rate),
        slots: summaries.iter().map(|s| s.slots).sum(),
        stderr: Stderrs {
            avg_via: err(|s| s.avg_via),
            avg_aoiv: err(|s| s.avg_aoiv),
            avg_aoii: err(|s| s.avg_aoii),
            p_e_hat: err(|s| s.p_e_hat),
            cost_rate_hat: err(|s| s.cost_rate_hat),
        },
    })
}

/// One metric line of a simulation/closed-form comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricComparison {
    pub metric: &'static str,
    pub analytic: Option<f64>,
    pub simulated: f64,
    pub stderr: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl MetricComparison {
    pub fn simulation_only(&self) -> bool {
        self.analytic.is_none()
    }
}

/// Result of checking a simulation against the closed forms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub rows: Vec<MetricComparison>,
    pub all_pass: bool,
}

/// Compares measured averages against a closed-form report built with
/// `delta = 1` (so the cost rows share units). A metric passes when the gap
/// is within `z` standard errors; without a usable error bar the fallback is
/// 2% relative with a 1e−12 absolute floor. Metrics with no closed form are
/// marked simulation-only and never fail.
pub fn compare(sim: &MetricsSummary, analytic: &AnalyticReport, z: f64) -> ComparisonReport {
    let row = |metric: &'static str,
               reference: Option<f64>,
               simulated: f64,
               stderr: Option<f64>| {
        let tolerance = match (reference, stderr) {
            (Some(_), Some(se)) if se > 0.0 => z * se,
            (Some(a), _) => (0.02 * a.abs()).max(1e-12),
            (None, _) => 0.0,
        };
        let pass = match reference {
            Some(a) => (simulated - a).abs() <= tolerance,
            None => true,
        };
        MetricComparison {
            metric,
            analytic: reference,
            simulated,
            stderr,
            tolerance,
            pass,
        }
    };
    let rows = vec![
        row("avg_via", analytic.avg_via, sim.avg_via, sim.stderr.avg_via),
        row("avg_aoiv", analytic.avg_aoiv, sim.avg_aoiv, sim.stderr.avg_aoiv),
        row("avg_aoii", analytic.avg_aoii, sim.avg_aoii, sim.stderr.avg_aoii),
        row("p_e", analytic.p_e, sim.p_e_hat, sim.stderr.p_e_hat),
        row(
            "cost_rate",
            analytic.cost_rate,
            sim.cost_rate_hat,
            sim.stderr.cost_rate_hat,
        ),
    ];
    let all_pass = rows.iter().all(|r| r.pass);
    ComparisonReport { rows, all_pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::analytic_report;

    fn base_config() -> SimConfig {
        SimConfig {
            params: SourceParams::new(0.3, 0.6).unwrap(),
            channel: ChannelParams::new(0.7).unwrap(),
            policy: Policy::Rs { p_a: 0.5 },
            horizon: 1_000_000,
            seed: 42,
            burn_in: 0,
        }
    }

    #[test]
    fn validation_rejects_bad_setups() {
        let mut cfg = base_config();
        cfg.horizon = 999;
        assert!(cfg.validate().is_err());
        let mut cfg = base_config();
        cfg.burn_in = cfg.horizon - 1;
        assert!(cfg.validate().is_err());
        let mut cfg = base_config();
        cfg.policy = Policy::Rs { p_a: 1.5 };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn same_seed_same_summary() {
        let cfg = SimConfig {
            horizon: 20_000,
            ..base_config()
        };
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn perfect_link_and_always_sampling_pins_everything_to_zero() {
        let cfg = SimConfig {
            params: SourceParams::new(0.4, 0.2).unwrap(),
            channel: ChannelParams::new(1.0).unwrap(),
            policy: Policy::Rs { p_a: 1.0 },
            horizon: 10_000,
            seed: 7,
            burn_in: 0,
        };
        let s = run(&cfg).unwrap();
        assert_eq!(s.avg_via, 0.0);
        assert_eq!(s.avg_aoiv, 0.0);
        assert_eq!(s.avg_aoii, 0.0);
        assert_eq!(s.p_e_hat, 0.0);
        assert_eq!(s.sample_rate, 1.0);
        assert_eq!(s.cost_rate_hat, 1.0);
        assert_eq!(s.slots, cfg.horizon - 1);
    }

    #[test]
    fn long_run_matches_closed_forms_within_error_bars() {
        let cfg = base_config();
        let s = run(&cfg).unwrap();
        let report = analytic_report(cfg.policy, cfg.params, cfg.channel, 1.0).unwrap();
        let cmp = compare(&s, &report, 4.0);
        assert!(cmp.all_pass, "{:#?}", cmp.rows);
        assert!(cmp.rows.iter().all(|r| !r.simulation_only()));
    }

    #[test]
    fn semantics_aware_long_run_with_replications() {
        let cfg = SimConfig {
            policy: Policy::SemanticsAware,
            horizon: 200_000,
            ..base_config()
        };
        let s = run_many(&cfg, 5).unwrap();
        assert_eq!(s.slots, 5 * (cfg.horizon - 1));
        let report = analytic_report(cfg.policy, cfg.params, cfg.channel, 1.0).unwrap();
        let cmp = compare(&s, &report, 4.0);
        assert!(cmp.all_pass, "{:#?}", cmp.rows);
        // The version age has no closed form here, so it is marked
        // simulation-only but still must have been measured.
        let via_row = &cmp.rows[0];
        assert!(via_row.simulation_only());
        assert!(via_row.simulated > 0.0);
    }

    #[test]
    fn single_replication_is_the_plain_run() {
        let cfg = SimConfig {
            horizon: 50_000,
            ..base_config()
        };
        assert_eq!(run_many(&cfg, 1).unwrap(), run(&cfg).unwrap());
    }

    #[test]
    fn replicated_runs_are_reproducible() {
        let cfg = SimConfig {
            horizon: 20_000,
            ..base_config()
        };
        let a = run_many(&cfg, 4).unwrap();
        let b = run_many(&cfg, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn common_random_numbers_keep_identical_policies_in_lockstep() {
        // The all-ones two-probability policy is the semantics-aware policy;
        // with shared draws the trajectories must agree slot for slot.
        let mk = |policy| SimConfig {
            policy,
            horizon: 30_000,
            ..base_config()
        };
        let a = run(&mk(Policy::Mrs { q1: 1.0, q2: 1.0 })).unwrap();
        let b = run(&mk(Policy::SemanticsAware)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn burn_in_drops_exactly_the_leading_slots() {
        let cfg = SimConfig {
            horizon: 5_000,
            burn_in: 1_000,
            ..base_config()
        };
        let s = run(&cfg).unwrap();
        assert_eq!(s.slots, 5_000 - 1 - 1_000);
        // Burn-in shifts the measured window, not the trajectory.
        let full = run(&SimConfig { burn_in: 0, ..cfg }).unwrap();
        assert_ne!(s.avg_aoii, full.avg_aoii);
    }

    #[test]
    fn comparison_fallback_applies_without_error_bars() {
        let cfg = SimConfig {
            horizon: 1_000,
            burn_in: 950,
            ..base_config()
        };
        let s = run(&cfg).unwrap();
        assert!(s.stderr.avg_via.is_none());
        let report = analytic_report(cfg.policy, cfg.params, cfg.channel, 1.0).unwrap();
        let cmp = compare(&s, &report, 4.0);
        for row in &cmp.rows {
            assert!(row.tolerance >= 1e-12);
        }
    }

    #[test]
    fn callback_sees_every_slot_in_order() {
        let cfg = SimConfig {
            horizon: 1_000,
            ..base_config()
        };
        let mut expected = 2;
        let mut count = 0u64;
        run_with(&cfg, |t, state, outcome| {
            assert_eq!(t, expected);
            expected += 1;
            count += 1;
            assert!(state.aoiv <= state.via);
            assert!(state.aoiv <= state.aoii);
            assert!(state.aoiv <= 1);
            assert_eq!(state.aoii == 0, outcome.synced);
        })
        .unwrap();
        assert_eq!(count, cfg.horizon - 1);
    }
}
