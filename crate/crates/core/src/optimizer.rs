//! Budget-constrained policy optimization.
//!
//! All three problems minimize a stationary age metric subject to a sampling
//! budget: the per-sample cost is `delta` and the admissible time-average
//! spend is `delta_max`, so policies must keep their sampling rate at or
//! below `η = delta_max/delta ∈ (0, 1]`.
//!
//! * Random sampling: every metric is strictly decreasing in `p_a` while the
//!   cost is linear, so the optimum sits on the budget, `p_a* = η`. The
//!   variant with a reconstruction-error cap adds a lower bound on `p_a` and
//!   is the one problem that can be infeasible.
//! * Two-probability policy, equal probabilities (`q1 = q2 = q_a`): cost is
//!   increasing and the metrics decreasing along the diagonal, so the optimum
//!   is the largest feasible `q_a`, available in closed form.
//! * Two-probability policy, free `(q1, q2)`: solved by a coarse grid sweep
//!   plus one tenfold refinement around the incumbent, with a deterministic
//!   tie-break (prefer the lexicographically smaller pair among candidates
//!   whose objectives differ by ≤ 1e−12) and a 1e−9 relative slack on the
//!   cost feasibility test to keep boundary points like the closed-form
//!   diagonal optimum inside the feasible set.

use serde::Serialize;

use crate::analytic::{
    aoii_average, aoiv_average, mrs_equal_cost_rate, reconstruction_error, sampling_cost_rate,
    via_average,
};
use crate::error::{Error, Result};
use crate::model::{ChannelParams, SourceParams};
use crate::policy::Policy;

/// Relative slack applied to the sampling-rate constraint in grid searches.
pub const COST_SLACK: f64 = 1e-9;

/// Default coarse grid step for [`solve_mrsc`]; the refinement pass divides
/// it by ten, so defaults resolve three decimals (0.005 coarse, 0.0005 fine).
pub const DEFAULT_GRID_STEP: f64 = 0.005;

/// Sampling budget: per-sample cost and admissible average spend per slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostBudget {
    pub delta: f64,
    pub delta_max: f64,
}

impl CostBudget {
    pub fn new(delta: f64, delta_max: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Domain {
                name: "delta",
                value: delta,
                domain: "(0, inf)",
            });
        }
        if !(delta_max > 0.0 && delta_max <= delta) {
            return Err(Error::Domain {
                name: "delta_max",
                value: delta_max,
                domain: "(0, delta]",
            });
        }
        Ok(CostBudget { delta, delta_max })
    }

    /// Admissible sampling rate `η = delta_max/delta`.
    pub fn eta(&self) -> f64 {
        self.delta_max / self.delta
    }
}

/// Which stationary average the optimizer minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Objective {
    Via,
    Aoiv,
    Aoii,
}

impl Objective {
    pub fn name(&self) -> &'static str {
        match self {
            Objective::Via => "via",
            Objective::Aoiv => "aoiv",
            Objective::Aoii => "aoii",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "via" => Ok(Objective::Via),
            "aoiv" => Ok(Objective::Aoiv),
            "aoii" => Ok(Objective::Aoii),
            other => Err(Error::Config(format!(
                "unknown objective {other:?} (expected via, aoiv, or aoii)"
            ))),
        }
    }
}

/// Problem family a result came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    Rsc,
    ViaRsc,
    Mrsc,
    MrscEqual,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Rsc => "rsc",
            Family::ViaRsc => "via-rsc",
            Family::Mrsc => "mrsc",
            Family::MrscEqual => "mrsc-equal",
        }
    }
}

/// Outcome of one constrained problem. Infeasibility is a result, not an
/// error: `feasible = false` leaves the policy fields empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptResult {
    pub family: Family,
    pub objective: Objective,
    pub feasible: bool,
    pub policy: Option<Policy>,
    pub objective_value: Option<f64>,
    /// Absolute cost rate (`delta` units already applied).
    pub cost_rate: Option<f64>,
    pub budget_binding: bool,
    /// Lower bound on `p_a` forced by a reconstruction-error cap, when one
    /// applies.
    pub p_a_lower_bound: Option<f64>,
    /// Guard flag for an optimum on a degenerate boundary (never produced by
    /// the current problems; kept so consumers can rely on the field).
    pub degenerate: bool,
}

impl OptResult {
    fn infeasible(family: Family, objective: Objective, bound: Option<f64>) -> Self {
        OptResult {
            family,
            objective,
            feasible: false,
            policy: None,
            objective_value: None,
            cost_rate: None,
            budget_binding: false,
            p_a_lower_bound: bound,
            degenerate: false,
        }
    }
}

fn objective_value(
    objective: Objective,
    policy: Policy,
    params: SourceParams,
    channel: ChannelParams,
) -> Result<f64> {
    match objective {
        Objective::Via => via_average(policy, params, channel),
        Objective::Aoiv => aoiv_average(policy, params, channel),
        Objective::Aoii => aoii_average(policy, params, channel),
    }
}

fn binding(cost_rate: f64, budget: CostBudget) -> bool {
    (cost_rate - budget.delta_max).abs() <= 1e-12 * budget.delta
}

/// Budget-constrained random sampling: `p_a* = η` for every objective.
pub fn solve_rsc(
    params: SourceParams,
    channel: ChannelParams,
    budget: CostBudget,
    objective: Objective,
) -> Result<OptResult> {
    let p_a = budget.eta();
    let policy = Policy::Rs { p_a };
    let value = objective_value(objective, policy, params, channel)?;
    let cost = sampling_cost_rate(policy, params, channel, budget.delta)?;
    Ok(OptResult {
        family: Family::Rsc,
        objective,
        feasible: true,
        policy: Some(policy),
        objective_value: Some(value),
        cost_rate: Some(cost),
        budget_binding: binding(cost, budget),
        p_a_lower_bound: None,
        degenerate: false,
    })
}

/// Smallest `p_a` whose stationary reconstruction error stays at or below
/// `e_max` (zero when even unsampled operation satisfies the cap).
pub fn min_p_a_for_error(params: SourceParams, channel: ChannelParams, e_max: f64) -> Result<f64> {
    if !(e_max > 0.0 && e_max <= 1.0) {
        return Err(Error::Domain {
            name: "e_max",
            value: e_max,
            domain: "(0, 1]",
        });
    }
    let (p, q) = (params.p, params.q);
    let s = p + q;
    let numer = 2.0 * p * q - e_max * s * s;
    // Denominator = p_s·[2pq + e_max·s·(1−s)] > 0 because
    // 2pq − s² + s = p(1−p) + q(1−q) > 0 on the open domain.
    let denom = channel.p_s * (2.0 * p * q + e_max * s * (1.0 - s));
    Ok((numer / denom).max(0.0))
}

/// Random sampling, minimizing the average version innovation age under both
/// the budget and a reconstruction-error cap. Infeasible when the error cap
/// demands more sampling than the budget allows.
pub fn solve_via_rsc(
    params: SourceParams,
    channel: ChannelParams,
    budget: CostBudget,
    e_max: f64,
) -> Result<OptResult> {
    let lower = min_p_a_for_error(params, channel, e_max)?;
    let eta = budget.eta();
    if lower > eta {
        return Ok(OptResult::infeasible(
            Family::ViaRsc,
            Objective::Via,
            Some(lower),
        ));
    }
    let policy = Policy::Rs { p_a: eta };
    let value = via_average(policy, params, channel)?;
    let cost = sampling_cost_rate(policy, params, channel, budget.delta)?;
    Ok(OptResult {
        family: Family::ViaRsc,
        objective: Objective::Via,
        feasible: true,
        policy: Some(policy),
        objective_value: Some(value),
        cost_rate: Some(cost),
        budget_binding: binding(cost, budget),
        p_a_lower_bound: Some(lower),
        degenerate: false,
    })
}

/// Largest diagonal sampling probability `q1 = q2 = q_a` whose cost rate
/// stays within the budget rate `η`:
///
/// `q* = 1` when `η(p+q)(1−p−q)p_s ≥ 2pq`, otherwise
/// `q* = min{1, η(p+q)²/(2pq − η(p+q)(1−p−q)p_s)}`.
pub fn q_star_equal(params: SourceParams, channel: ChannelParams, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain {
            name: "eta",
            value: eta,
            domain: "(0, 1]",
        });
    }
    let (p, q) = (params.p, params.q);
    let s = p + q;
    let denom = 2.0 * p * q - eta * s * (1.0 - s) * channel.p_s;
    if denom <= 0.0 {
        return Ok(1.0);
    }
    Ok((eta * s * s / denom).min(1.0))
}

/// Two-probability policy restricted to its diagonal: closed-form optimum at
/// the budget boundary (or at 1 when the whole diagonal is affordable).
pub fn solve_mrsc_equal(
    params: SourceParams,
    channel: ChannelParams,
    budget: CostBudget,
    objective: Objective,
) -> Result<OptResult> {
    if objective == Objective::Via {
        return Err(Error::Unsupported {
            op: "solve_mrsc_equal",
            policy: "mrs",
        });
    }
    let q_a = q_star_equal(params, channel, budget.eta())?;
    let policy = Policy::Mrs { q1: q_a, q2: q_a };
    let value = objective_value(objective, policy, params, channel)?;
    let cost = mrs_equal_cost_rate(params, channel, q_a, budget.delta);
    Ok(OptResult {
        family: Family::MrscEqual,
        objective,
        feasible: true,
        policy: Some(policy),
        objective_value: Some(value),
        cost_rate: Some(cost),
        budget_binding: binding(cost, budget),
        p_a_lower_bound: None,
        degenerate: false,
    })
}

struct GridBest {
    q1: f64,
    q2: f64,
    value: f64,
}

/// Scans candidates in index order, keeping the incumbent unless a candidate
/// improves the objective by more than 1e−12, or ties within 1e−12 with a
/// lexicographically smaller `(q1, q2)`.
fn consider(best: &mut Option<GridBest>, q1: f64, q2: f64, value: f64) {
    match best {
        None => *best = Some(GridBest { q1, q2, value }),
        Some(b) => {
            let improves = value < b.value - 1e-12;
            let wins_tie = (value - b.value).abs() <= 1e-12 && (q1, q2) < (b.q1, b.q2);
            if improves || wins_tie {
                *best = Some(GridBest { q1, q2, value });
            }
        }
    }
}

fn grid_values(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step).round() as usize;
    let mut values: Vec<f64> = (0..=count)
        .map(|i| (lo + i as f64 * step).clamp(0.0, 1.0))
        .collect();
    if let Some(last) = values.last_mut() {
        if (*last - hi).abs() < step / 2.0 {
            *last = hi;
        }
    }
    values.dedup();
    values
}

fn scan_grid(
    params: SourceParams,
    channel: ChannelParams,
    budget: CostBudget,
    objective: Objective,
    q1_values: &[f64],
    q2_values: &[f64],
    best: &mut Option<GridBest>,
) -> Result<()> {
    let limit = budget.eta() * (1.0 + COST_SLACK);
    for &q1 in q1_values {
        for &q2 in q2_values {
            if q1 == 0.0 && q2 == 0.0 {
                continue;
            }
            let policy = Policy::Mrs { q1, q2 };
            let rate = sampling_cost_rate(policy, params, channel, 1.0)?;
            if rate > limit {
                continue;
            }
            let value = objective_value(objective, policy, params, channel)?;
            consider(best, q1, q2, value);
        }
    }
    Ok(())
}

/// Two-probability policy over the full `(q1, q2)` square: coarse grid sweep
/// at `grid_step`, then one refinement at a tenth of the step around the
/// incumbent. The all-zero corner is excluded (it never synchronizes).
pub fn solve_mrsc(
    params: SourceParams,
    channel: ChannelParams,
    budget: CostBudget,
    objective: Objective,
    grid_step: f64,
) -> Result<OptResult> {
    if objective == Objective::Via {
        return Err(Error::Unsupported {
            op: "solve_mrsc",
            policy: "mrs",
        });
    }
    if !(grid_step > 0.0 && grid_step <= 0.5) {
        return Err(Error::Domain {
            name: "grid_step",
            value: grid_step,
            domain: "(0, 0.5]",
        });
    }
    let coarse = grid_values(0.0, 1.0, grid_step);
    let mut best = None;
    scan_grid(params, channel, budget, objective, &coarse, &coarse, &mut best)?;
    if let Some(b) = &best {
        let fine_step = grid_step / 10.0;
        let q1_fine = grid_values(
            (b.q1 - grid_step).max(0.0),
            (b.q1 + grid_step).min(1.0),
            fine_step,
        );
        let q2_fine = grid_values(
            (b.q2 - grid_step).max(0.0),
            (b.q2 + grid_step).min(1.0),
            fine_step,
        );
        scan_grid(params, channel, budget, objective, &q1_fine, &q2_fine, &mut best)?;
    }
    let Some(b) = best else {
        return Ok(OptResult::infeasible(Family::Mrsc, objective, None));
    };
    let policy = Policy::Mrs { q1: b.q1, q2: b.q2 };
    let cost = sampling_cost_rate(policy, params, channel, budget.delta)?;
    Ok(OptResult {
        family: Family::Mrsc,
        objective,
        feasible: true,
        policy: Some(policy),
        objective_value: Some(b.value),
        cost_rate: Some(cost),
        budget_binding: binding(cost, budget),
        p_a_lower_bound: None,
        degenerate: false,
    })
}

/// Feasibility report for a parameter-free policy under the budget.
/// `objective_value` is absent when the metric has no closed form for the
/// policy (the semantics-aware version age).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPolicyClass {
    pub policy: Policy,
    pub cost_rate: f64,
    pub feasible: bool,
    pub objective_value: Option<f64>,
    pub p_e: f64,
}

/// Classifies the change-aware and semantics-aware policies against the
/// budget; their cost rates are fixed by the model, so this is a pure
/// feasibility check.
pub fn classify_fixed_policies(
    params: SourceParams,
    channel: ChannelParams,
    budget: CostBudget,
    objective: Objective,
) -> Result<Vec<FixedPolicyClass>> {
    let mut out = Vec::with_capacity(2);
    for policy in [Policy::ChangeAware, Policy::SemanticsAware] {
        let cost_rate = sampling_cost_rate(policy, params, channel, budget.delta)?;
        out.push(FixedPolicyClass {
            policy,
            cost_rate,
            feasible: cost_rate <= budget.delta_max * (1.0 + COST_SLACK),
            objective_value: objective_value(objective, policy, params, channel).ok(),
            p_e: reconstruction_error(policy, params, channel)?,
        });
    }
    Ok(out)
}
