//! Python bindings over the core monitoring model.
//!
//! Policies are passed as the same JSON objects the CLI config uses
//! (`{"policy":"rs","p_a":0.5}`, `{"policy":"mrs","q1":0.7,"q2":1.0}`,
//! `{"policy":"change_aware"}`, `{"policy":"semantics_aware"}`), so one
//! schema and one validator cover both entry points. All domain errors
//! surface as `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use semvia_core::{analytic, metrics, optimizer, sim};
use semvia_core::{ChannelParams, Policy, SourceParams};

fn value_err(e: semvia_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_policy(policy_json: &str) -> PyResult<Policy> {
    serde_json::from_str(policy_json)
        .map_err(|e| PyValueError::new_err(format!("invalid policy JSON: {e}")))
}

fn parse_point(p: f64, q: f64, p_s: f64) -> PyResult<(SourceParams, ChannelParams)> {
    Ok((
        SourceParams::new(p, q).map_err(value_err)?,
        ChannelParams::new(p_s).map_err(value_err)?,
    ))
}

fn parse_objective(objective: &str) -> PyResult<optimizer::Objective> {
    objective.parse().map_err(value_err)
}

fn opt_result_dict<'py>(
    py: Python<'py>,
    result: &optimizer::OptResult,
) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    dict.set_item("family", result.family.name())?;
    dict.set_item("feasible", result.feasible)?;
    match result.policy {
        Some(Policy::Rs { p_a }) => dict.set_item("p_a", p_a)?,
        Some(Policy::Mrs { q1, q2 }) => {
            dict.set_item("q1", q1)?;
            dict.set_item("q2", q2)?;
        }
        _ => {}
    }
    dict.set_item("objective", result.objective.name())?;
    dict.set_item("objective_value", result.objective_value)?;
    dict.set_item("cost_rate", result.cost_rate)?;
    dict.set_item("budget_binding", result.budget_binding)?;
    dict.set_item("p_a_lower_bound", result.p_a_lower_bound)?;
    Ok(dict)
}

/// Closed-form metric report for one policy at one operating point.
/// Metrics without a closed form (e.g. MRS average VIA) come back as None.
#[pyfunction]
#[pyo3(signature = (policy, p, q, p_s, delta=1.0))]
fn analytic_report<'py>(
    py: Python<'py>,
    policy: &str,
    p: f64,
    q: f64,
    p_s: f64,
    delta: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let policy = parse_policy(policy)?;
    let (params, channel) = parse_point(p, q, p_s)?;
    let report = analytic::analytic_report(policy, params, channel, delta).map_err(value_err)?;
    let dict = PyDict::new(py);
    dict.set_item("avg_via", report.avg_via)?;
    dict.set_item("avg_aoiv", report.avg_aoiv)?;
    dict.set_item("avg_aoii", report.avg_aoii)?;
    dict.set_item("p_e", report.p_e)?;
    dict.set_item("cost_rate", report.cost_rate)?;
    Ok(dict)
}

/// Monte Carlo time averages over `reps` seeded replications.
#[pyfunction]
#[pyo3(signature = (policy, p, q, p_s, horizon=100_000, seed=1, reps=1, burn_in=0))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    policy: &str,
    p: f64,
    q: f64,
    p_s: f64,
    horizon: u64,
    seed: u64,
    reps: u32,
    burn_in: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let policy = parse_policy(policy)?;
    let (params, channel) = parse_point(p, q, p_s)?;
    let config = sim::SimConfig {
        params,
        channel,
        policy,
        horizon,
        seed,
        burn_in,
    };
    let summary = sim::run_many(&config, reps).map_err(value_err)?;
    let stderr = PyDict::new(py);
    stderr.set_item("avg_via", summary.stderr.avg_via)?;
    stderr.set_item("avg_aoiv", summary.stderr.avg_aoiv)?;
    stderr.set_item("avg_aoii", summary.stderr.avg_aoii)?;
    stderr.set_item("p_e_hat", summary.stderr.p_e_hat)?;
    stderr.set_item("cost_rate_hat", summary.stderr.cost_rate_hat)?;
    let dict = PyDict::new(py);
    dict.set_item("avg_via", summary.avg_via)?;
    dict.set_item("avg_aoiv", summary.avg_aoiv)?;
    dict.set_item("avg_aoii", summary.avg_aoii)?;
    dict.set_item("p_e_hat", summary.p_e_hat)?;
    dict.set_item("cost_rate_hat", summary.cost_rate_hat)?;
    dict.set_item("sample_rate", summary.sample_rate)?;
    dict.set_item("slots", summary.slots)?;
    dict.set_item("stderr", stderr)?;
    Ok(dict)
}

/// Closed-form optimal equal sampling probability on the budget diagonal.
#[pyfunction]
fn q_star_equal(p: f64, q: f64, p_s: f64, eta: f64) -> PyResult<f64> {
    let (params, channel) = parse_point(p, q, p_s)?;
    optimizer::q_star_equal(params, channel, eta).map_err(value_err)
}

/// Best budget-feasible random sampler.
#[pyfunction]
#[pyo3(signature = (p, q, p_s, delta, delta_max, objective="aoii"))]
fn solve_rsc<'py>(
    py: Python<'py>,
    p: f64,
    q: f64,
    p_s: f64,
    delta: f64,
    delta_max: f64,
    objective: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let (params, channel) = parse_point(p, q, p_s)?;
    let budget = optimizer::CostBudget::new(delta, delta_max).map_err(value_err)?;
    let objective = parse_objective(objective)?;
    let result = optimizer::solve_rsc(params, channel, budget, objective).map_err(value_err)?;
    opt_result_dict(py, &result)
}

/// Best random sampler under both the budget and a reconstruction-error cap.
#[pyfunction]
fn solve_via_rsc<'py>(
    py: Python<'py>,
    p: f64,
    q: f64,
    p_s: f64,
    delta: f64,
    delta_max: f64,
    e_max: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let (params, channel) = parse_point(p, q, p_s)?;
    let budget = optimizer::CostBudget::new(delta, delta_max).map_err(value_err)?;
    let result = optimizer::solve_via_rsc(params, channel, budget, e_max).map_err(value_err)?;
    opt_result_dict(py, &result)
}

/// Grid search over the two-probability policy under the budget.
#[pyfunction]
#[pyo3(signature = (p, q, p_s, delta, delta_max, objective="aoii", grid_step=optimizer::DEFAULT_GRID_STEP))]
#[allow(clippy::too_many_arguments)]
fn solve_mrsc<'py>(
    py: Python<'py>,
    p: f64,
    q: f64,
    p_s: f64,
    delta: f64,
    delta_max: f64,
    objective: &str,
    grid_step: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let (params, channel) = parse_point(p, q, p_s)?;
    let budget = optimizer::CostBudget::new(delta, delta_max).map_err(value_err)?;
    let objective = parse_objective(objective)?;
    let result =
        optimizer::solve_mrsc(params, channel, budget, objective, grid_step).map_err(value_err)?;
    opt_result_dict(py, &result)
}

/// The hand-checkable five-slot example trace as (t, via, aoiv, aoii) rows.
#[pyfunction]
fn reference_trace(py: Python<'_>) -> PyResult<Bound<'_, PyList>> {
    let rows: Vec<(u32, u64, u64, u64)> = metrics::reference_trace();
    PyList::new(py, rows)
}

#[pymodule]
fn semvia_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(analytic_report, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(q_star_equal, m)?)?;
    m.add_function(wrap_pyfunction!(solve_rsc, m)?)?;
    m.add_function(wrap_pyfunction!(solve_via_rsc, m)?)?;
    m.add_function(wrap_pyfunction!(solve_mrsc, m)?)?;
    m.add_function(wrap_pyfunction!(reference_trace, m)?)?;
    Ok(())
}
