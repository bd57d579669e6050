//! Command-line front end.
//!
//! Subcommands: `analytic` (closed forms as JSON/CSV), `simulate` (Monte
//! Carlo with an optional per-slot trace), `validate` (three-way agreement:
//! simulation ↔ closed forms ↔ chain-solver oracle), `optimize`
//! (budget-constrained policies plus fixed-policy feasibility), `sweep`
//! (metric curves over a swept scalar, one CSV per metric), and `trace`
//! (per-slot CSV of one run).
//!
//! Exit codes: 0 success, 1 validation failure, 2 invalid input. Malformed
//! configs are reported, never panicked on. `SEMVIA_THREADS` caps worker
//! parallelism for replicated simulations and sweeps.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analytic::{
    analytic_report, aoii_average, aoii_pmf, aoiv_average, aoiv_stationary, sampling_cost_rate,
    sync_stationary, via_average, via_decay_ratio, via_pmf, AnalyticReport,
};
use crate::config::{RunConfig, SweepVariable};
use crate::error::{Error, Result};
use crate::model::{ChannelParams, SourceParams};
use crate::optimizer::{
    classify_fixed_policies, q_star_equal, solve_mrsc, solve_mrsc_equal, solve_rsc, solve_via_rsc,
    CostBudget, Objective, OptResult, DEFAULT_GRID_STEP,
};
use crate::oracle::{
    aoii_average_oracle, aoii_pmf_oracle, build_aoiv_chain, build_joint_sync_chain,
    build_via_chain, build_via_chain_change_aware, default_truncation,
    default_truncation_change_aware, sampling_rate_oracle, stationary_solve,
    via_average_from_stationary, via_pmf_from_stationary, DEFAULT_SOLVE_TOL,
};
use crate::output::{format_opt, format_sig, CsvTable, JsonObject};
use crate::policy::Policy;
use crate::sim::{compare, run_many, run_with, MetricsSummary, SimConfig};

const SIGMA_Z: f64 = 4.0;
const ORACLE_TOL: f64 = 1e-8;
const PMF_LEVELS: usize = 20;

#[derive(Parser)]
#[command(
    name = "semvia",
    version,
    about = "Remote monitoring of a two-state Markov source: closed-form metrics, \
             simulation, cross-validation, and budget-constrained policy optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every closed-form metric for the configured policy.
    Analytic(AnalyticArgs),
    /// Run seeded Monte Carlo replications and compare against closed forms.
    Simulate(SimulateArgs),
    /// Cross-check closed forms against the chain oracle and simulation.
    Validate(ValidateArgs),
    /// Solve the budget-constrained sampling problems.
    Optimize(OptimizeArgs),
    /// Emit metric curves over a swept scalar, one CSV file per metric.
    Sweep(SweepArgs),
    /// Write a per-slot CSV trace of one simulated run.
    Trace(TraceArgs),
}

#[derive(Args)]
struct ConfigArg {
    /// JSON run configuration.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Print the effective configuration as JSON and exit.
    #[arg(long)]
    dump_config: bool,
}

impl ConfigArg {
    /// Loads the config; when `--dump-config` is set, prints it and reports
    /// that the command should stop.
    fn load(&self) -> Result<(RunConfig, bool)> {
        let config = RunConfig::load(&self.config)?;
        if self.dump_config {
            println!("{}", config.to_json());
        }
        Ok((config, self.dump_config))
    }
}

#[derive(Args)]
struct AnalyticArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Also write the metrics as CSV rows (metric,value).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Override sim.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override sim.horizon (slots).
    #[arg(long)]
    horizon: Option<u64>,
    /// Override sim.reps (independent replications).
    #[arg(long)]
    reps: Option<u32>,
    /// Write a per-slot CSV trace of a single run alongside the summary.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
    /// Also write the summary JSON to a file.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// JSON run configuration restricting validation to one point; without
    /// it the built-in parameter grid is checked.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    dump_config: bool,
    /// Override the simulation horizon used for the statistical checks.
    #[arg(long)]
    horizon: Option<u64>,
    /// Override the simulation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Shift every closed-form value by this amount before comparing
    /// (self-test fixture: any nonzero shift must be detected).
    #[arg(long, default_value_t = 0.0)]
    perturb: f64,
    /// Write every check as a CSV row.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// JSON run configuration with a budget section (not needed with
    /// --preset).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    dump_config: bool,
    /// Metric to minimize.
    #[arg(long, default_value = "aoii")]
    objective: Objective,
    /// Coarse grid step for the two-probability search.
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    grid_step: f64,
    /// Built-in study: `paper-tables` regenerates the reference
    /// optimal-sampling tables (q ∈ {0.2, 0.8} × p_s ∈ {0.1, 0.9},
    /// p ∈ {0.1..0.9}, η = 0.5).
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Also write the CSV to a file.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Fill the simulated/stderr columns by running the simulator at every
    /// point (uses the config's sim section).
    #[arg(long)]
    simulate: bool,
    /// Coarse grid step for the two-probability search.
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    grid_step: f64,
    /// Output stem: files <stem>_via.csv, <stem>_aoiv.csv, <stem>_aoii.csv.
    #[arg(long, value_name = "STEM", default_value = "sweep")]
    out: PathBuf,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Override sim.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override sim.horizon (slots).
    #[arg(long)]
    horizon: Option<u64>,
    /// Trace CSV destination.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

/// Entry point for the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    configure_threads();
    let outcome = match cli.command {
        Command::Analytic(args) => cmd_analytic(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Trace(args) => cmd_trace(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("semvia: error: {e}");
            2
        }
    }
}

fn configure_threads() {
    if let Ok(raw) = std::env::var("SEMVIA_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                // Ignore failure: the global pool can only be set once.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("semvia: warning: ignoring invalid SEMVIA_THREADS={raw:?}"),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn policy_json(policy: Policy) -> JsonObject {
    let mut obj = JsonObject::new();
    obj.string("policy", policy.name());
    match policy {
        Policy::Rs { p_a } => {
            obj.number("p_a", p_a);
        }
        Policy::Mrs { q1, q2 } => {
            obj.number("q1", q1).number("q2", q2);
        }
        Policy::ChangeAware | Policy::SemanticsAware => {}
    }
    obj
}

fn point_json(params: SourceParams, channel: ChannelParams) -> JsonObject {
    let mut obj = JsonObject::new();
    obj.number("p", params.p)
        .number("q", params.q)
        .number("p_s", channel.p_s);
    obj
}

fn report_json(report: &AnalyticReport) -> JsonObject {
    let mut obj = JsonObject::new();
    obj.maybe_number("avg_via", report.avg_via)
        .maybe_number("avg_aoiv", report.avg_aoiv)
        .maybe_number("avg_aoii", report.avg_aoii)
        .maybe_number("p_e", report.p_e)
        .maybe_number("cost_rate", report.cost_rate);
    obj
}

fn absent_metric_notes(policy: Policy, report: &AnalyticReport) -> Vec<String> {
    let mut notes = Vec::new();
    if report.avg_via.is_none() {
        let why = match policy {
            Policy::Rs { .. } => "the average diverges without deliveries (p_a*p_s = 0)",
            _ => "no closed form for this policy",
        };
        notes.push(format!("avg_via: {why}; simulation-only"));
    }
    notes
}

fn cmd_analytic(args: AnalyticArgs) -> Result<i32> {
    let (config, stop) = args.config.load()?;
    if stop {
        return Ok(0);
    }
    let policy = config.require_policy()?;
    let params = config.source_params()?;
    let channel = config.channel_params()?;
    let delta = config.delta();
    let report = analytic_report(policy, params, channel, delta)?;
    let mut obj = JsonObject::new();
    obj.object("policy", policy_json(policy))
        .object("point", point_json(params, channel))
        .number("delta", delta)
        .object("metrics", report_json(&report))
        .array_of_strings("notes", &absent_metric_notes(policy, &report));
    println!("{}", obj.finish());
    if let Some(path) = args.out {
        let mut table = CsvTable::new(&["metric", "value"]);
        for (name, value) in [
            ("avg_via", report.avg_via),
            ("avg_aoiv", report.avg_aoiv),
            ("avg_aoii", report.avg_aoii),
            ("p_e", report.p_e),
            ("cost_rate", report.cost_rate),
        ] {
            if let Some(v) = value {
                table.row([name.to_string(), format_sig(v)]);
            }
        }
        write_file(&path, &table.finish())?;
    }
    Ok(0)
}

fn summary_json(summary: &MetricsSummary) -> JsonObject {
    let mut stderr = JsonObject::new();
    stderr
        .maybe_number("avg_via", summary.stderr.avg_via)
        .maybe_number("avg_aoiv", summary.stderr.avg_aoiv)
        .maybe_number("avg_aoii", summary.stderr.avg_aoii)
        .maybe_number("p_e_hat", summary.stderr.p_e_hat)
        .maybe_number("cost_rate_hat", summary.stderr.cost_rate_hat);
    let mut obj = JsonObject::new();
    obj.number("avg_via", summary.avg_via)
        .number("avg_aoiv", summary.avg_aoiv)
        .number("avg_aoii", summary.avg_aoii)
        .number("p_e_hat", summary.p_e_hat)
        .number("cost_rate_hat", summary.cost_rate_hat)
        .number("sample_rate", summary.sample_rate)
        .integer("slots", summary.slots)
        .object("stderr", stderr);
    obj
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let (mut config, stop) = args.config.load()?;
    if let Some(seed) = args.seed {
        config.sim.seed = seed;
    }
    if let Some(horizon) = args.horizon {
        config.sim.horizon = horizon;
    }
    if let Some(reps) = args.reps {
        config.sim.reps = reps;
    }
    config.validate()?;
    if stop {
        return Ok(0);
    }
    let policy = config.require_policy()?;
    let sim_config = config.sim_config(policy)?;
    let summary = run_many(&sim_config, config.sim.reps)?;
    let report = analytic_report(policy, sim_config.params, sim_config.channel, 1.0).ok();
    let mut obj = JsonObject::new();
    obj.object("policy", policy_json(policy))
        .object("point", point_json(sim_config.params, sim_config.channel))
        .integer("horizon", sim_config.horizon)
        .integer("seed", sim_config.seed)
        .integer("reps", config.sim.reps as u64)
        .integer("burn_in", sim_config.burn_in)
        .object("summary", summary_json(&summary));
    match report {
        Some(report) => {
            let comparison = compare(&summary, &report, SIGMA_Z);
            let rows = comparison
                .rows
                .iter()
                .map(|row| {
                    let mut r = JsonObject::new();
                    r.string("metric", row.metric)
                        .maybe_number("analytic", row.analytic)
                        .number("simulated", row.simulated)
                        .maybe_number("stderr", row.stderr)
                        .number("tolerance", row.tolerance)
                        .boolean("simulation_only", row.simulation_only())
                        .boolean("pass", row.pass);
                    r
                })
                .collect();
            obj.object("analytic", report_json(&report))
                .array_of_objects("comparison", rows)
                .boolean("all_pass", comparison.all_pass);
        }
        None => {
            obj.array_of_objects("comparison", Vec::new());
        }
    }
    let text = obj.finish();
    println!("{text}");
    if let Some(path) = args.out {
        write_file(&path, &text)?;
    }
    if let Some(path) = args.trace {
        write_trace(&path, &sim_config)?;
    }
    Ok(0)
}

fn write_trace(path: &Path, config: &SimConfig) -> Result<()> {
    let mut out = String::from("t,x,xhat,sampled,delivered,via,aoiv,aoii\n");
    out.push_str("1,0,0,0,0,0,0,0\n");
    run_with(config, |t, state, outcome| {
        out.push_str(&format!(
            "{t},{},{},{},{},{},{},{}\n",
            state.x,
            state.xhat,
            outcome.sampled as u8,
            outcome.delivered as u8,
            state.via,
            state.aoiv,
            state.aoii
        ));
    })?;
    write_file(path, &out)
}

fn cmd_trace(args: TraceArgs) -> Result<i32> {
    let (mut config, stop) = args.config.load()?;
    if let Some(seed) = args.seed {
        config.sim.seed = seed;
    }
    if let Some(horizon) = args.horizon {
        config.sim.horizon = horizon;
    }
    config.validate()?;
    if stop {
        return Ok(0);
    }
    let policy = config.require_policy()?;
    let sim_config = config.sim_config(policy)?;
    write_trace(&args.out, &sim_config)?;
    println!(
        "wrote {} ({} slots)",
        args.out.display(),
        sim_config.horizon
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// validate

struct CheckRow {
    p: f64,
    q: f64,
    p_s: f64,
    policy: String,
    check: String,
    expected: f64,
    actual: f64,
    tolerance: f64,
    tail: Option<f64>,
    pass: bool,
}

struct ValidateStats {
    rows: Vec<CheckRow>,
}

impl ValidateStats {
    fn push(
        &mut self,
        point: (SourceParams, ChannelParams, Policy),
        check: String,
        expected: f64,
        actual: f64,
        tolerance: f64,
        tail: Option<f64>,
    ) {
        let pass = (expected - actual).abs() <= tolerance;
        self.rows.push(CheckRow {
            p: point.0.p,
            q: point.0.q,
            p_s: point.1.p_s,
            policy: point.2.describe(),
            check,
            expected,
            actual,
            tolerance,
            tail,
            pass,
        });
    }
}

/// Closed form vs chain oracle at one point; `perturb` shifts the closed
/// forms (self-test knob).
fn oracle_checks(
    stats: &mut ValidateStats,
    params: SourceParams,
    channel: ChannelParams,
    policy: Policy,
    perturb: f64,
) -> Result<()> {
    let point = (params, channel, policy);
    let sync_chain = build_joint_sync_chain(policy, params, channel)?;
    let sync_pi = stationary_solve(&sync_chain, DEFAULT_SOLVE_TOL)?;
    let sync_closed = sync_stationary(policy, params, channel)?;
    for (idx, &(x, xhat)) in sync_chain.states.iter().enumerate() {
        stats.push(
            point,
            format!("sync[{x}{xhat}]"),
            sync_closed.get(x as usize, xhat as usize) + perturb,
            sync_pi[idx],
            ORACLE_TOL,
            None,
        );
    }
    let aoiv_chain = build_aoiv_chain(policy, params, channel)?;
    let aoiv_pi = stationary_solve(&aoiv_chain, DEFAULT_SOLVE_TOL)?;
    let aoiv_closed = aoiv_stationary(policy, params, channel)?;
    for (idx, &(x, xhat, k)) in aoiv_chain.states.iter().enumerate() {
        stats.push(
            point,
            format!("aoiv[{x}{xhat}{k}]"),
            aoiv_closed.get(x as usize, xhat as usize, k as usize) + perturb,
            aoiv_pi[idx],
            ORACLE_TOL,
            None,
        );
    }
    stats.push(
        point,
        "avg_aoiv".to_string(),
        aoiv_average(policy, params, channel)? + perturb,
        sync_pi[1] + sync_pi[2],
        ORACLE_TOL,
        None,
    );
    let aoii_oracle = aoii_pmf_oracle(policy, params, channel, PMF_LEVELS)?;
    for (i, &oracle_value) in aoii_oracle.iter().enumerate() {
        stats.push(
            point,
            format!("aoii_pmf[{i}]"),
            aoii_pmf(policy, params, channel, i)? + perturb,
            oracle_value,
            ORACLE_TOL,
            None,
        );
    }
    stats.push(
        point,
        "avg_aoii".to_string(),
        aoii_average(policy, params, channel)? + perturb,
        aoii_average_oracle(policy, params, channel)?,
        ORACLE_TOL,
        None,
    );
    stats.push(
        point,
        "cost_rate".to_string(),
        sampling_cost_rate(policy, params, channel, 1.0)? + perturb,
        sampling_rate_oracle(policy, params, channel)?,
        ORACLE_TOL,
        None,
    );
    // The version age has a chain only for trajectory-driven samplers.
    let via_chain = match policy {
        Policy::Rs { p_a } => {
            let n = default_truncation(params, channel, p_a);
            Some((
                build_via_chain(params, channel, p_a, n)?,
                via_decay_ratio(params, channel, p_a).powi(n as i32),
            ))
        }
        Policy::ChangeAware => {
            let n = default_truncation_change_aware(channel);
            Some((
                build_via_chain_change_aware(params, channel, n)?,
                (1.0 - channel.p_s).powi(n as i32),
            ))
        }
        _ => None,
    };
    if let Some((chain, tail)) = via_chain {
        let pi = stationary_solve(&chain, DEFAULT_SOLVE_TOL)?;
        for i in 0..=PMF_LEVELS {
            let (_, _, closed) = via_pmf(policy, params, channel, i)?;
            let (_, _, oracle_value) = via_pmf_from_stationary(&chain, &pi, i);
            stats.push(
                point,
                format!("via_pmf[{i}]"),
                closed + perturb,
                oracle_value,
                ORACLE_TOL,
                Some(tail),
            );
        }
        stats.push(
            point,
            "avg_via".to_string(),
            via_average(policy, params, channel)? + perturb,
            via_average_from_stationary(&chain, &pi),
            ORACLE_TOL,
            Some(tail),
        );
    }
    Ok(())
}

/// Simulation vs (possibly perturbed) closed forms at one point.
fn sim_checks(
    stats: &mut ValidateStats,
    params: SourceParams,
    channel: ChannelParams,
    policy: Policy,
    horizon: u64,
    seed: u64,
    perturb: f64,
) -> Result<()> {
    let point = (params, channel, policy);
    let sim_config = SimConfig {
        params,
        channel,
        policy,
        horizon,
        seed,
        burn_in: 0,
    };
    let summary = run_many(&sim_config, 1)?;
    let mut report = analytic_report(policy, params, channel, 1.0)?;
    for field in [
        &mut report.avg_via,
        &mut report.avg_aoiv,
        &mut report.avg_aoii,
        &mut report.p_e,
        &mut report.cost_rate,
    ] {
        *field = field.map(|v| v + perturb);
    }
    let comparison = compare(&summary, &report, SIGMA_Z);
    for row in comparison.rows {
        if let Some(analytic) = row.analytic {
            stats.push(
                point,
                format!("sim_{}", row.metric),
                analytic,
                row.simulated,
                row.tolerance,
                None,
            );
        }
    }
    Ok(())
}

/// The policy roster used when no single policy is pinned by a config.
fn default_policies() -> Vec<Policy> {
    let mut policies: Vec<Policy> = vec![Policy::ChangeAware, Policy::SemanticsAware];
    for p_a in [0.3, 0.7, 1.0] {
        policies.push(Policy::Rs { p_a });
    }
    for q1 in [0.2, 0.6, 1.0] {
        for q2 in [0.2, 0.6, 1.0] {
            policies.push(Policy::Mrs { q1, q2 });
        }
    }
    policies
}

/// The built-in validation grid: every policy family over the source/channel
/// lattice.
fn default_grid() -> Vec<(SourceParams, ChannelParams, Policy)> {
    let probs = [0.1, 0.3, 0.5, 0.7, 0.9];
    let channels = [0.1, 0.5, 0.9];
    let policies = default_policies();
    let mut grid = Vec::new();
    for p in probs {
        for q in probs {
            for p_s in channels {
                for &policy in &policies {
                    grid.push((
                        SourceParams::new(p, q).expect("grid in domain"),
                        ChannelParams::new(p_s).expect("grid in domain"),
                        policy,
                    ));
                }
            }
        }
    }
    grid
}

fn cmd_validate(args: ValidateArgs) -> Result<i32> {
    let config = match &args.config {
        Some(path) => Some(RunConfig::load(path)?),
        None => None,
    };
    if args.dump_config {
        match &config {
            Some(config) => {
                println!("{}", config.to_json());
                return Ok(0);
            }
            None => {
                return Err(Error::Config(
                    "--dump-config requires --config".to_string(),
                ))
            }
        }
    }
    let cases: Vec<(SourceParams, ChannelParams, Policy)> = match &config {
        Some(config) => {
            let params = config.source_params()?;
            let channel = config.channel_params()?;
            match config.policy {
                Some(policy) => vec![(params, channel, policy)],
                None => default_policies()
                    .into_iter()
                    .map(|policy| (params, channel, policy))
                    .collect(),
            }
        }
        None => default_grid(),
    };
    let horizon = args
        .horizon
        .or_else(|| config.as_ref().map(|c| c.sim.horizon))
        .unwrap_or(1_000_000);
    let seed = args
        .seed
        .or_else(|| config.as_ref().map(|c| c.sim.seed))
        .unwrap_or(1);
    let mut stats = ValidateStats { rows: Vec::new() };
    for &(params, channel, policy) in &cases {
        oracle_checks(&mut stats, params, channel, policy, args.perturb)?;
        sim_checks(&mut stats, params, channel, policy, horizon, seed, args.perturb)?;
    }
    let failures: Vec<&CheckRow> = stats.rows.iter().filter(|r| !r.pass).collect();
    for row in &failures {
        println!(
            "FAIL p={} q={} p_s={} {} {}: expected {} got {} (tol {})",
            row.p,
            row.q,
            row.p_s,
            row.policy,
            row.check,
            format_sig(row.expected),
            format_sig(row.actual),
            format_sig(row.tolerance)
        );
    }
    println!(
        "validate: {} ({} cases, {} checks, {} failed)",
        if failures.is_empty() { "PASS" } else { "FAIL" },
        cases.len(),
        stats.rows.len(),
        failures.len()
    );
    if let Some(path) = &args.out {
        let mut table = CsvTable::new(&[
            "p", "q", "p_s", "policy", "check", "expected", "actual", "tolerance", "tail", "pass",
        ]);
        for row in &stats.rows {
            table.row([
                format_sig(row.p),
                format_sig(row.q),
                format_sig(row.p_s),
                row.policy.clone(),
                row.check.clone(),
                format_sig(row.expected),
                format_sig(row.actual),
                format_sig(row.tolerance),
                format_opt(row.tail),
                row.pass.to_string(),
            ]);
        }
        write_file(path, &table.finish())?;
    }
    Ok(if failures.is_empty() { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// optimize

const OPTIMIZE_HEADER: [&str; 10] = [
    "family",
    "feasible",
    "p_a",
    "q1",
    "q2",
    "objective",
    "objective_value",
    "cost_rate",
    "budget_binding",
    "p_a_lower_bound",
];

fn opt_row(table: &mut CsvTable, result: &OptResult) {
    let (p_a, q1, q2) = match result.policy {
        Some(Policy::Rs { p_a }) => (Some(p_a), None, None),
        Some(Policy::Mrs { q1, q2 }) => (None, Some(q1), Some(q2)),
        _ => (None, None, None),
    };
    table.row([
        result.family.name().to_string(),
        result.feasible.to_string(),
        format_opt(p_a),
        format_opt(q1),
        format_opt(q2),
        result.objective.name().to_string(),
        format_opt(result.objective_value),
        format_opt(result.cost_rate),
        result.budget_binding.to_string(),
        format_opt(result.p_a_lower_bound),
    ]);
}

fn cmd_optimize(args: OptimizeArgs) -> Result<i32> {
    if let Some(preset) = &args.preset {
        if preset != "paper-tables" {
            return Err(Error::Config(format!(
                "unknown preset {preset:?} (available: paper-tables)"
            )));
        }
        let csv = preset_tables(args.grid_step)?;
        print!("{csv}");
        if let Some(path) = &args.out {
            write_file(path, &csv)?;
        }
        return Ok(0);
    }
    let Some(path) = &args.config else {
        return Err(Error::Config(
            "optimize needs --config (or --preset paper-tables)".to_string(),
        ));
    };
    let config = RunConfig::load(path)?;
    if args.dump_config {
        println!("{}", config.to_json());
        return Ok(0);
    }
    let params = config.source_params()?;
    let channel = config.channel_params()?;
    let budget = config.require_budget()?;
    let objective = args.objective;
    let mut table = CsvTable::new(&OPTIMIZE_HEADER);
    opt_row(&mut table, &solve_rsc(params, channel, budget, objective)?);
    if let Some(constraints) = config.constraints {
        opt_row(
            &mut table,
            &solve_via_rsc(params, channel, budget, constraints.e_max)?,
        );
    }
    if objective != Objective::Via {
        opt_row(
            &mut table,
            &solve_mrsc(params, channel, budget, objective, args.grid_step)?,
        );
        opt_row(&mut table, &solve_mrsc_equal(params, channel, budget, objective)?);
    }
    for class in classify_fixed_policies(params, channel, budget, objective)? {
        table.row([
            class.policy.name().to_string(),
            class.feasible.to_string(),
            String::new(),
            String::new(),
            String::new(),
            objective.name().to_string(),
            format_opt(class.objective_value),
            format_sig(class.cost_rate),
            String::new(),
            String::new(),
        ]);
    }
    let csv = table.finish();
    print!("{csv}");
    if let Some(path) = &args.out {
        write_file(path, &csv)?;
    }
    Ok(0)
}

/// The reference optimal-sampling tables: free and diagonal optima under the
/// age-of-incorrect-information objective at η = 0.5, plus the fixed-policy
/// feasibility classification at each point.
fn preset_tables(grid_step: f64) -> Result<String> {
    let budget = CostBudget::new(1.0, 0.5)?;
    let mut table = CsvTable::new(&[
        "p",
        "q",
        "p_s",
        "eta",
        "objective",
        "q1_star",
        "q2_star",
        "q_star_equal",
        "change_aware_feasible",
        "semantics_aware_feasible",
    ]);
    for q in [0.2, 0.8] {
        for p_s in [0.1, 0.9] {
            for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
                let params = SourceParams::new(p, q)?;
                let channel = ChannelParams::new(p_s)?;
                let free = solve_mrsc(params, channel, budget, Objective::Aoii, grid_step)?;
                let (q1, q2) = match free.policy {
                    Some(Policy::Mrs { q1, q2 }) => (Some(q1), Some(q2)),
                    _ => (None, None),
                };
                let diag = q_star_equal(params, channel, budget.eta())?;
                let fixed = classify_fixed_policies(params, channel, budget, Objective::Aoii)?;
                table.row([
                    format_sig(p),
                    format_sig(q),
                    format_sig(p_s),
                    format_sig(budget.eta()),
                    "aoii".to_string(),
                    format_opt(q1),
                    format_opt(q2),
                    format_sig(diag),
                    fixed[0].feasible.to_string(),
                    fixed[1].feasible.to_string(),
                ]);
            }
        }
    }
    Ok(table.finish())
}

// ---------------------------------------------------------------------------
// sweep

const SWEEP_HEADER: [&str; 9] = [
    "sweep_var",
    "value",
    "policy",
    "metric",
    "analytic",
    "simulated",
    "stderr",
    "cost",
    "feasible",
];

struct SweepPoint {
    params: SourceParams,
    channel: ChannelParams,
    budget: CostBudget,
}

fn sweep_point(config: &RunConfig, variable: SweepVariable, value: f64) -> Result<SweepPoint> {
    let base_budget = config.require_budget()?;
    Ok(SweepPoint {
        params: match variable {
            SweepVariable::P => SourceParams::new(value, config.source.q)?,
            SweepVariable::Q => SourceParams::new(config.source.p, value)?,
            _ => config.source_params()?,
        },
        channel: match variable {
            SweepVariable::Ps => ChannelParams::new(value)?,
            _ => config.channel_params()?,
        },
        budget: match variable {
            SweepVariable::Eta => CostBudget::new(base_budget.delta, value * base_budget.delta)?,
            _ => base_budget,
        },
    })
}

fn metric_average(
    objective: Objective,
    policy: Policy,
    params: SourceParams,
    channel: ChannelParams,
) -> Option<f64> {
    match objective {
        Objective::Via => via_average(policy, params, channel).ok(),
        Objective::Aoiv => aoiv_average(policy, params, channel).ok(),
        Objective::Aoii => aoii_average(policy, params, channel).ok(),
    }
}

fn sim_metric(summary: &MetricsSummary, objective: Objective) -> (f64, Option<f64>) {
    match objective {
        Objective::Via => (summary.avg_via, summary.stderr.avg_via),
        Objective::Aoiv => (summary.avg_aoiv, summary.stderr.avg_aoiv),
        Objective::Aoii => (summary.avg_aoii, summary.stderr.avg_aoii),
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<i32> {
    let (config, stop) = args.config.load()?;
    if stop {
        return Ok(0);
    }
    let Some(sweep) = config.sweep else {
        return Err(Error::Config(
            "sweep needs a sweep section in the config".to_string(),
        ));
    };
    let points = sweep.points();
    for objective in [Objective::Via, Objective::Aoiv, Objective::Aoii] {
        let mut table = CsvTable::new(&SWEEP_HEADER);
        for &value in &points {
            let point = sweep_point(&config, sweep.variable, value)?;
            let eta = point.budget.eta();
            // Policy roster: budget-tied random sampling, the optimized
            // two-probability policy (age objectives only), and the two
            // fixed policies.
            let mut roster: Vec<(&str, Option<Policy>, bool)> = Vec::with_capacity(4);
            roster.push(("rsc", Some(Policy::Rs { p_a: eta }), true));
            if objective != Objective::Via {
                let solved = solve_mrsc(
                    point.params,
                    point.channel,
                    point.budget,
                    objective,
                    args.grid_step,
                )?;
                roster.push(("mrsc", solved.policy, solved.feasible));
            }
            for class in
                classify_fixed_policies(point.params, point.channel, point.budget, objective)?
            {
                roster.push((class.policy.name(), Some(class.policy), class.feasible));
            }
            for (label, policy, feasible) in roster {
                let analytic = policy
                    .and_then(|p| metric_average(objective, p, point.params, point.channel));
                let cost = policy.and_then(|p| {
                    sampling_cost_rate(p, point.params, point.channel, point.budget.delta).ok()
                });
                let (simulated, stderr) = match (args.simulate, policy, feasible) {
                    (true, Some(policy), true) => {
                        let sim_config = SimConfig {
                            params: point.params,
                            channel: point.channel,
                            policy,
                            horizon: config.sim.horizon,
                            seed: config.sim.seed,
                            burn_in: config.sim.burn_in,
                        };
                        let summary = run_many(&sim_config, config.sim.reps)?;
                        let (value, stderr) = sim_metric(&summary, objective);
                        (Some(value), stderr)
                    }
                    _ => (None, None),
                };
                table.row([
                    sweep.variable.name().to_string(),
                    format_sig(value),
                    label.to_string(),
                    objective.name().to_string(),
                    format_opt(analytic),
                    format_opt(simulated),
                    format_opt(stderr),
                    format_opt(cost),
                    feasible.to_string(),
                ]);
            }
        }
        let path = args
            .out
            .with_file_name(format!(
                "{}_{}.csv",
                args.out
                    .file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "sweep".to_string()),
                objective.name()
            ));
        let rows = table.rows();
        write_file(&path, &table.finish())?;
        println!("wrote {} ({rows} rows)", path.display());
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimize_row_matches_header_arity() {
        let budget = CostBudget::new(1.0, 0.5).unwrap();
        let params = SourceParams::new(0.5, 0.5).unwrap();
        let channel = ChannelParams::new(0.8).unwrap();
        let mut table = CsvTable::new(&OPTIMIZE_HEADER);
        opt_row(
            &mut table,
            &solve_rsc(params, channel, budget, Objective::Aoii).unwrap(),
        );
        let csv = table.finish();
        let mut lines = csv.lines();
        let header_cols = lines.next().unwrap().split(',').count();
        assert_eq!(header_cols, OPTIMIZE_HEADER.len());
        assert_eq!(lines.next().unwrap().split(',').count(), header_cols);
    }

    #[test]
    fn sweep_header_is_the_documented_schema() {
        assert_eq!(
            SWEEP_HEADER.join(","),
            "sweep_var,value,policy,metric,analytic,simulated,stderr,cost,feasible"
        );
    }

    #[test]
    fn unknown_preset_is_rejected() {
        let code = run([
            "semvia".to_string(),
            "optimize".to_string(),
            "--preset".to_string(),
            "nope".to_string(),
        ]);
        assert_eq!(code, 2);
    }
}
