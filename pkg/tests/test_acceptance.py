"""Acceptance suite: one test per criterion, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
Every tolerance is pinned here; nothing is deferred to calibration.
"""

import json

import numpy as np
import pytest

from dptradeoff import (
    GroundMetric,
    analyze,
    breakpoint_estimators,
    closed_form_curve,
    curve_by_sweep,
    curve_by_vertices,
    estimator_at,
    grid_oracle,
    make_problem,
    reduced_dual_optimum,
    solve_dp_at,
    tv_distance,
    wasserstein1,
)
from dptradeoff.cli import main as cli_main
from dptradeoff.problemio import serialize_instance, generate_instance

from conftest import random_distribution, random_problem


def _report(num, desc, fn):
    try:
        fn()
    except BaseException:
        print(f"[FAIL] criterion {num}: {desc}")
        raise
    print(f"[PASS] criterion {num}: {desc}")


def _binary_pool():
    """200 seeded binary instances with random nonnegative distortion."""
    out = []
    for seed in range(200):
        n_y = 2 + seed % 7  # covers 2..8
        out.append(random_problem(seed, 2, n_y, random_distortion=True))
    return out


_BINARY_POOL = None


def binary_pool():
    global _BINARY_POOL
    if _BINARY_POOL is None:
        _BINARY_POOL = _binary_pool()
    return _BINARY_POOL


def small_pool():
    """50 seeded instances with n_x <= 3, n_y <= 5 for curve structure."""
    out = []
    for seed in range(50):
        rng = np.random.default_rng(10_000 + seed)
        n_x = int(rng.integers(2, 4))
        n_y = int(rng.integers(2, 6))
        out.append(
            random_problem(
                10_000 + seed,
                n_x,
                n_y,
                random_distortion=True,
                random_metric=(seed % 3 == 0),
            )
        )
    return out


def test_criterion_1_closed_form_vs_lp():
    grid = np.linspace(0.0, 1.0, 21)

    def run():
        worst = 0.0
        for prob in binary_pool():
            curve = closed_form_curve(prob)
            for p in grid:
                worst = max(
                    worst, abs(curve.value(float(p)) - solve_dp_at(prob, float(p)).value)
                )
        assert worst <= 1e-8, f"max closed-form vs LP gap {worst:.3e}"

    _report(1, "binary closed form matches the LP on 200 seeded instances", run)


def test_criterion_2_reduced_dual_oracle():
    grid = np.linspace(0.0, 1.0, 21)

    def run():
        worst = 0.0
        for prob in binary_pool():
            an = analyze(prob)
            curve = closed_form_curve(prob, an)
            for p in grid:
                worst = max(
                    worst,
                    abs(reduced_dual_optimum(prob, float(p), an) - curve.value(float(p))),
                )
        assert worst <= 1e-10, f"max reduced-dual vs closed-form gap {worst:.3e}"

    _report(2, "reduced dual oracle equals the closed form within 1e-10", run)


def test_criterion_3_curve_structure():
    def run():
        grid = np.linspace(0.0, 1.0, 101)
        for prob in small_pool():
            report = curve_by_vertices(prob)
            curve = report.curve
            slopes = curve.slopes
            assert np.all(slopes <= 1e-10)
            assert np.all(np.diff(slopes) >= -1e-9)
            for i, bp in enumerate(curve.breakpoints):
                left = curve.segments[i, 0] + curve.segments[i, 1] * bp
                right = curve.segments[i + 1, 0] + curve.segments[i + 1, 1] * bp
                assert abs(left - right) <= 1e-9
            assert curve.value(1.0) == prob.distortion_floor
            assert curve.p_star <= 1.0
            for p in grid:
                assert (
                    abs(curve.value(float(p)) - solve_dp_at(prob, float(p)).value)
                    <= 1e-8
                )

    _report(3, "vertex curves are convex piecewise linear and match pointwise", run)


def test_criterion_4_hull_extremality_and_scatter(tmp_path):
    def run():
        prob = random_problem(7, 3, 5, random_distortion=True)
        report = curve_by_vertices(prob)
        extremes = report.s2_points[report.hull_extreme_indices]
        for intercept, slope in report.curve.segments:
            dist = np.hypot(extremes[:, 0] - intercept, extremes[:, 1] - slope)
            assert dist.min() <= 1e-9

        instance = tmp_path / "inst.json"
        instance.write_text(
            serialize_instance(generate_instance(7, 3, 5, random_distortion=True))
        )
        out_svg = tmp_path / "inst.svg"
        code = cli_main(
            [
                "curve",
                "--input",
                str(instance),
                "--method",
                "vertex",
                "--out-svg",
                str(out_svg),
            ]
        )
        assert code == 0
        scatter = tmp_path / "inst.s2.svg"
        assert scatter.exists()
        text = scatter.read_text()
        assert text.startswith("<svg") and "circle" in text

    _report(4, "active segments sit on hull extremes; CLI emits the scatter", run)


def test_criterion_5_plateau_and_floor():
    def run():
        pool = [
            make_problem([[0.54, 0.06], [0.04, 0.36]]),
            make_problem(np.outer([0.6, 0.4], [0.5, 0.5])),
            make_problem([[0.5, 0.0], [0.0, 0.5]]),
        ] + [random_problem(3000 + s, 2 + s % 2, 3 + s % 3, random_distortion=True) for s in range(12)]
        for prob in pool:
            floor = prob.distortion_floor
            by_sweep = curve_by_sweep(prob)
            assert by_sweep.curve.value(1.0) == floor  # bitwise
            report = curve_by_vertices(prob)
            assert report.curve.value(1.0) == floor  # bitwise
            if prob.is_binary:
                assert closed_form_curve(prob).value(1.0) == floor
            for p in np.linspace(0.0, 1.0, 9):
                assert solve_dp_at(prob, float(p)).value >= floor - 1e-10

    _report(5, "curves plateau at the exact floor; no value dips below it", run)


def test_criterion_6_strong_duality():
    def run():
        worst = 0.0
        rng = np.random.default_rng(99)
        for s in range(40):
            n_x = int(rng.integers(2, 5))
            n_y = int(rng.integers(2, 7))
            prob = random_problem(
                4000 + s, n_x, n_y, random_distortion=True, random_metric=(s % 4 == 0)
            )
            forms = ["ot"] if not prob.metric.is_hamming else ["ot", "tv"]
            for p in rng.uniform(0.0, 1.0, 5):
                for form in forms:
                    worst = max(worst, solve_dp_at(prob, float(p), form=form).gap)
        assert worst <= 1e-8, f"max duality gap {worst:.3e}"

    _report(6, "every solve closes its duality gap within 1e-8", run)


def test_criterion_7_tv_wasserstein_coincide():
    def run():
        rng = np.random.default_rng(123)
        worst = 0.0
        for _ in range(1000):
            n = int(rng.integers(2, 7))
            p = random_distribution(rng, n)
            q = random_distribution(rng, n)
            w1, _ = wasserstein1(p, q, GroundMetric.hamming(n))
            worst = max(worst, abs(w1 - tv_distance(p, q)))
        assert worst <= 1e-10, f"max |W1 - TV| = {worst:.3e}"

    _report(7, "transport distance equals total variation under Hamming", run)


def test_criterion_8_form_equivalence():
    def run():
        rng = np.random.default_rng(321)
        worst = 0.0
        for s in range(100):
            n_x = int(rng.integers(2, 5))
            n_y = int(rng.integers(2, 6))
            prob = random_problem(5000 + s, n_x, n_y, random_distortion=True)
            for p in rng.uniform(0.0, 1.0, 3):
                a = solve_dp_at(prob, float(p), form="ot").value
                b = solve_dp_at(prob, float(p), form="tv").value
                worst = max(worst, abs(a - b))
        assert worst <= 1e-8, f"max form disagreement {worst:.3e}"

    _report(8, "sign form and transport form agree on 100 instances", run)


def test_criterion_9_grid_oracle_bracketing():
    def run():
        steps = 200
        cases = [
            # marginals grid-aligned at every level, including zero
            (make_problem([[0.4, 0.1], [0.1, 0.4]]), np.linspace(0.0, 1.0, 11)),
            (make_problem(np.outer([0.6, 0.4], [0.5, 0.5])), np.linspace(0.0, 1.0, 11)),
            # tightest level excluded: its exact marginal is off-grid
            (make_problem([[0.54, 0.06], [0.04, 0.36]]), np.linspace(0.01, 1.0, 11)),
        ]
        for prob, levels in cases:
            spread = float(prob.distortion.d.max() - prob.distortion.d.min())
            band = prob.n_y * spread / steps
            for p in levels:
                exact = solve_dp_at(prob, float(p)).value
                val = grid_oracle(prob, float(p), steps)
                assert exact - 1e-9 <= val <= exact + band + 1e-9, (
                    f"bracket failed at P={p}: exact {exact}, grid {val}, band {band}"
                )

    _report(9, "grid oracle brackets the exact value within its band", run)


def test_criterion_10_hand_checked_instances():
    def run():
        indep = make_problem(np.outer([0.6, 0.4], [0.5, 0.5]))
        for curve in (
            closed_form_curve(indep),
            curve_by_vertices(indep).curve,
            curve_by_sweep(indep).curve,
        ):
            assert curve.breakpoints.shape == (1,)
            assert abs(curve.breakpoints[0] - 0.4) <= 1e-9
            assert abs(curve.value(0.0) - 0.48) <= 1e-9
            assert abs(curve.slopes[0] + 0.2) <= 1e-9

        bsc = make_problem([[0.54, 0.06], [0.04, 0.36]])
        for curve in (
            closed_form_curve(bsc),
            curve_by_vertices(bsc).curve,
            curve_by_sweep(bsc).curve,
        ):
            assert abs(curve.p_star - 0.02) <= 1e-6
            assert curve.value(1.0) == pytest.approx(0.10, abs=1e-12)
            assert abs(curve.slopes[0] + 0.714286) <= 1e-6

    _report(10, "hand-checkable instances reproduce their known curves", run)


def test_criterion_11_breakpoint_estimators():
    def run():
        for seed in range(25):
            prob = random_problem(6000 + seed, 2, 2 + seed % 7, random_distortion=True)
            an = analyze(prob)
            curve = closed_form_curve(prob, an)
            scale = prob.metric.h[0, 1]
            pairs = breakpoint_estimators(prob, an)
            for bp, est in pairs:
                assert np.all((est.q <= 1e-12) | (np.abs(est.q - 1.0) <= 1e-12))
            # mid-segment mixtures: feasible and exactly on the segment
            supports = [0.0] + [bp for bp, _ in sorted(pairs)]
            probes = [0.5 * (a + b) for a, b in zip(supports[:-1], supports[1:])]
            for p in probes:
                est = estimator_at(prob, an, p)
                out = est.q @ prob.p_y
                assert scale * tv_distance(prob.p_x, out / out.sum()) <= p + 1e-9
                assert abs(prob.expected_distortion(est) - curve.value(p)) <= 1e-9

    _report(11, "breakpoint estimators are deterministic; mixtures stay on-curve", run)
