//! JSON run configuration shared by every subcommand.
//!
//! The file is strict: unknown keys anywhere are rejected, and every
//! probability is validated against its model domain at load time so that a
//! bad config fails before any work starts. Only `source` and `channel` are
//! mandatory; the other sections exist when the subcommand needs them
//! (`policy` for evaluation and simulation, `budget` for optimization and
//! sweeps, `constraints` for the error-capped problem, `sweep` for curve
//! generation).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelParams, SourceParams};
use crate::optimizer::CostBudget;
use crate::policy::Policy;
use crate::sim::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub p_s: f64,
}

fn default_horizon() -> u64 {
    1_000_000
}

fn default_seed() -> u64 {
    1
}

fn default_reps() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_reps")]
    pub reps: u32,
    #[serde(default)]
    pub burn_in: u64,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            horizon: default_horizon(),
            seed: default_seed(),
            reps: default_reps(),
            burn_in: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub delta: f64,
    pub delta_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsSection {
    pub e_max: f64,
}

/// Scalar a sweep varies while everything else stays fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
pub enum SweepVariable {
    #[serde(rename = "p")]
    P,
    #[serde(rename = "q")]
    Q,
    #[serde(rename = "p_s")]
    Ps,
    #[serde(rename = "eta")]
    Eta,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::P => "p",
            SweepVariable::Q => "q",
            SweepVariable::Ps => "p_s",
            SweepVariable::Eta => "eta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl SweepSection {
    /// The swept values `from, from+step, …` up to `to` (endpoint included
    /// when the range is a whole number of steps, within rounding).
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.to - self.from) / self.step + 1e-9).floor() as usize;
        (0..=count).map(|i| self.from + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub source: SourceSection,
    pub channel: ChannelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<Policy>,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<BudgetSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<ConstraintsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn validate(&self) -> Result<()> {
        self.source_params()?;
        self.channel_params()?;
        if let Some(policy) = self.policy {
            policy.validate()?;
        }
        if self.sim.horizon < 1_000 {
            return Err(Error::Config(format!(
                "sim.horizon must be at least 1000 slots, got {}",
                self.sim.horizon
            )));
        }
        if self.sim.burn_in > self.sim.horizon - 2 {
            return Err(Error::Config(format!(
                "sim.burn_in must leave at least one measured slot (horizon {}), got {}",
                self.sim.horizon, self.sim.burn_in
            )));
        }
        if self.sim.reps < 1 {
            return Err(Error::Config("sim.reps must be at least 1".to_string()));
        }
        if let Some(budget) = self.budget {
            CostBudget::new(budget.delta, budget.delta_max)?;
        }
        if let Some(c) = self.constraints {
            if !(c.e_max > 0.0 && c.e_max <= 1.0) {
                return Err(Error::Config(format!(
                    "constraints.e_max must lie in (0, 1], got {}",
                    c.e_max
                )));
            }
        }
        if let Some(sweep) = self.sweep {
            self.validate_sweep(sweep)?;
        }
        Ok(())
    }

    fn validate_sweep(&self, sweep: SweepSection) -> Result<()> {
        if !(sweep.step > 0.0 && sweep.step.is_finite()) {
            return Err(Error::Config(format!(
                "sweep.step must be positive, got {}",
                sweep.step
            )));
        }
        if sweep.from > sweep.to {
            return Err(Error::Config(format!(
                "sweep range is empty: from {} to {}",
                sweep.from, sweep.to
            )));
        }
        let (lo_ok, hi_ok, domain) = match sweep.variable {
            SweepVariable::P | SweepVariable::Q => {
                (sweep.from > 0.0, sweep.to < 1.0, "(0, 1)")
            }
            SweepVariable::Ps | SweepVariable::Eta => {
                (sweep.from > 0.0, sweep.to <= 1.0, "(0, 1]")
            }
        };
        if !(lo_ok && hi_ok) {
            return Err(Error::Config(format!(
                "sweep range [{}, {}] leaves the {} domain {domain}",
                sweep.from,
                sweep.to,
                sweep.variable.name()
            )));
        }
        if self.budget.is_none() {
            return Err(Error::Config(
                "sweep requires a budget section (the curves compare budget-constrained policies)"
                    .to_string(),
            ));
        }
        Ok(())
    }

    pub fn source_params(&self) -> Result<SourceParams> {
        SourceParams::new(self.source.p, self.source.q)
    }

    pub fn channel_params(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.channel.p_s)
    }

    pub fn cost_budget(&self) -> Result<Option<CostBudget>> {
        self.budget
            .map(|b| CostBudget::new(b.delta, b.delta_max))
            .transpose()
    }

    /// Per-sample cost used for reporting; 1 when no budget is configured.
    pub fn delta(&self) -> f64 {
        self.budget.map_or(1.0, |b| b.delta)
    }

    pub fn require_policy(&self) -> Result<Policy> {
        self.policy.ok_or_else(|| {
            Error::Config("this subcommand needs a policy section in the config".to_string())
        })
    }

    pub fn require_budget(&self) -> Result<CostBudget> {
        match self.cost_budget()? {
            Some(budget) => Ok(budget),
            None => Err(Error::Config(
                "this subcommand needs a budget section in the config".to_string(),
            )),
        }
    }

    pub fn sim_config(&self, policy: Policy) -> Result<SimConfig> {
        let config = SimConfig {
            params: self.source_params()?,
            channel: self.channel_params()?,
            policy,
            horizon: self.sim.horizon,
            seed: self.sim.seed,
            burn_in: self.sim.burn_in,
        };
        config.validate()?;
        Ok(config)
    }
}
