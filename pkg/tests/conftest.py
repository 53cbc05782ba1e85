"""Shared fixtures and independent test oracles.

The oracles here deliberately avoid the package's solver paths: direct
double sums, exhaustive enumeration over deterministic rules, and a
greedy mass-allocation argument for binary sources.  Tests compare the
package against these, never against itself.
"""

import itertools

import numpy as np
import pytest
from hypothesis import settings

from dptradeoff import make_problem
from dptradeoff.problemio import generate_instance, instance_to_problem

settings.register_profile("suite", deadline=None, derandomize=True, max_examples=60)
settings.load_profile("suite")


@pytest.fixture
def bsc_problem():
    """Asymmetric binary channel with Hamming cost and metric."""
    return make_problem([[0.54, 0.06], [0.04, 0.36]])


@pytest.fixture
def indep_problem():
    """Observation independent of the source, p_x = (0.6, 0.4)."""
    return make_problem(np.outer([0.6, 0.4], [0.5, 0.5]))


@pytest.fixture
def noiseless_problem():
    return make_problem([[0.5, 0.0], [0.0, 0.5]])


def random_problem(seed, n_x, n_y, *, random_distortion=False, random_metric=False):
    spec = generate_instance(
        seed, n_x, n_y, random_distortion=random_distortion, use_random_metric=random_metric
    )
    return instance_to_problem(spec)


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------

def cost_matrix_oracle(p_xy, d):
    """Direct double sum for the output-weighted cost matrix."""
    p_xy = np.asarray(p_xy, float)
    d = np.asarray(d, float)
    n_x, n_y = p_xy.shape
    out = np.zeros((n_x, n_y))
    for xhat in range(n_x):
        for y in range(n_y):
            out[xhat, y] = sum(d[x, xhat] * p_xy[x, y] for x in range(n_x))
    return out


def deterministic_minimum_oracle(p_xy, d):
    """Exhaustive search over every deterministic reconstruction rule."""
    p_xy = np.asarray(p_xy, float)
    d = np.asarray(d, float)
    n_x, n_y = p_xy.shape
    cost = cost_matrix_oracle(p_xy, d)
    best = np.inf
    best_map = None
    for assignment in itertools.product(range(n_x), repeat=n_y):
        val = sum(cost[assignment[y], y] for y in range(n_y))
        if val < best - 1e-15:
            best = val
            best_map = assignment
    return best, best_map


def binary_dp_oracle(problem, p_level):
    """Curve value for binary sources by greedy mass allocation.

    The distortion is affine in the per-symbol first-reconstruction
    probabilities, so for a fixed total output mass the cheapest
    allocation fills symbols in ascending cost-rate order; the result is
    convex piecewise linear in the mass, minimized at an interval
    endpoint or an allocation kink.  Uses no linear programming and no
    breakpoint formulas.
    """
    assert problem.n_x == 2
    cost = cost_matrix_oracle(problem.channel.p_xy, problem.distortion.d)
    p_y = problem.p_y
    p1 = float(problem.p_x[0])
    base = float(cost[1].sum())
    rate = (cost[0] - cost[1]) / p_y  # marginal cost per unit of allocated mass
    order = np.argsort(rate, kind="stable")
    scale = float(problem.metric.h[0, 1])
    lo = max(0.0, p1 - p_level / scale)
    hi = min(1.0, p1 + p_level / scale)

    def allocated_cost(mass):
        total = base
        remaining = mass
        for y in order:
            take = min(float(p_y[y]), remaining)
            total += rate[y] * take
            remaining -= take
            if remaining <= 1e-15:
                break
        return total

    kinks = np.cumsum(p_y[order])
    candidates = [lo, hi] + [float(c) for c in kinks if lo < c < hi]
    return min(allocated_cost(m) for m in candidates)


def random_distribution(rng, n):
    p = rng.uniform(0.0, 1.0, n) + 1e-9
    return p / p.sum()
