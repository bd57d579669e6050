#!/usr/bin/env python3
"""Smoke test for the semvia_py extension module.

Builds are not triggered here; run `cargo build -p semvia-py` (or
`--release`) first. The script locates the produced cdylib, imports it
under the proper module name, and checks a few hand-computable anchors.
"""

import importlib.util
import math
import pathlib
import shutil
import sys
import tempfile


def load_module():
    root = pathlib.Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libsemvia_py.so", "semvia_py.so", "libsemvia_py.dylib")
    ]
    built = next((c for c in candidates if c.exists()), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p semvia-py")
    workdir = pathlib.Path(tempfile.mkdtemp(prefix="semvia_py_"))
    target = workdir / "semvia_py.so"
    shutil.copy2(built, target)
    spec = importlib.util.spec_from_file_location("semvia_py", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def check(label, got, want, tol):
    if not math.isclose(got, want, rel_tol=0.0, abs_tol=tol):
        sys.exit(f"FAIL {label}: got {got!r}, want {want!r} (tol {tol})")
    print(f"ok {label}: {got}")


def main():
    sv = load_module()

    # Closed forms at the balanced baseline point.
    report = sv.analytic_report('{"policy":"rs","p_a":0.5}', 0.5, 0.5, 0.8)
    check("rs avg_via", report["avg_via"], 0.75, 1e-12)
    check("rs p_e", report["p_e"], 0.30, 1e-12)
    check("rs cost_rate", report["cost_rate"], 0.50, 1e-12)

    # No closed-form average VIA for the semantics-aware policy.
    sa = sv.analytic_report('{"policy":"semantics_aware"}', 0.5, 0.5, 0.8)
    assert sa["avg_via"] is None, sa
    print("ok semantics_aware avg_via is None")

    # Diagonal optimum, budget half, fast source, good channel.
    check("q_star_equal", sv.q_star_equal(0.9, 0.8, 0.9, 0.5), 0.7314603898, 1e-9)

    # Grid search agrees with the diagonal closed form within one fine cell.
    mrsc = sv.solve_mrsc(0.9, 0.8, 0.9, 1.0, 0.5)
    assert mrsc["feasible"], mrsc
    check("mrsc q1", mrsc["q1"], 0.7175, 5e-3)
    check("mrsc q2", mrsc["q2"], 1.0, 5e-3)

    rsc = sv.solve_rsc(0.9, 0.8, 0.9, 1.0, 0.5)
    check("rsc p_a", rsc["p_a"], 0.5, 1e-12)
    assert mrsc["objective_value"] <= rsc["objective_value"] + 1e-9

    capped = sv.solve_via_rsc(0.9, 0.9, 0.1, 1.0, 0.05, 0.01)
    assert not capped["feasible"], capped
    print("ok error-capped problem infeasible at tight cap")

    # Simulation agrees with the report at 4 sigma.
    summary = sv.simulate('{"policy":"rs","p_a":0.5}', 0.5, 0.5, 0.8,
                          horizon=200_000, seed=11)
    dev = abs(summary["avg_via"] - 0.75)
    bound = 4 * summary["stderr"]["avg_via"]
    assert dev <= bound, (dev, bound)
    print(f"ok simulate avg_via within 4 stderr ({dev:.5f} <= {bound:.5f})")

    # The worked example trace.
    trace = sv.reference_trace()
    assert trace == [(1, 0, 0, 0), (2, 0, 0, 0), (3, 1, 1, 1),
                     (4, 1, 1, 2), (5, 2, 0, 0), (6, 0, 0, 0)], trace
    print("ok reference trace")

    # Domain errors surface as ValueError.
    for bad in (lambda: sv.q_star_equal(1.5, 0.5, 0.5, 0.5),
                lambda: sv.analytic_report('{"policy":"rs"}', 0.5, 0.5, 0.8)):
        try:
            bad()
        except ValueError:
            pass
        else:
            sys.exit("FAIL: expected ValueError")
    print("ok domain errors raise ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
