"""Core model: validation, elementary quantities, transport distances."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dptradeoff import (
    Coupling,
    DistortionMatrix,
    Distribution,
    Estimator,
    GroundMetric,
    JointChannel,
    ProblemError,
    expected_distortion,
    make_problem,
    minimum_distortion,
    output_distribution,
    posterior_sampling,
    tv_distance,
    validate_problem,
    wasserstein1,
)

from conftest import (
    cost_matrix_oracle,
    deterministic_minimum_oracle,
    random_distribution,
    random_problem,
)


def _pmf_pairs(n_max=6):
    return st.integers(2, n_max).flatmap(
        lambda n: st.tuples(
            st.lists(st.floats(1e-3, 1.0), min_size=n, max_size=n),
            st.lists(st.floats(1e-3, 1.0), min_size=n, max_size=n),
        )
    )


def _normalize(vals):
    arr = np.asarray(vals, float)
    return arr / arr.sum()


class TestValidation:
    def test_noiseless_symmetric_accepted(self):
        prob = make_problem([[0.5, 0.0], [0.0, 0.5]])
        assert np.allclose(prob.p_x, [0.5, 0.5])
        assert np.allclose(prob.p_y, [0.5, 0.5])

    def test_zero_source_row_accepted(self):
        prob = make_problem([[0.5, 0.5], [0.0, 0.0]])
        assert np.allclose(prob.p_y, [0.5, 0.5])

    def test_zero_output_column_rejected(self):
        with pytest.raises(ProblemError, match="column 1"):
            make_problem([[1.0, 0.0], [0.0, 0.0]])

    def test_negative_entry_rejected(self):
        with pytest.raises(ProblemError, match="negative"):
            make_problem([[1.1, 0.0], [-0.1, 0.0]])

    def test_bad_total_rejected(self):
        with pytest.raises(ProblemError, match="sums to"):
            make_problem([[0.5, 0.4], [0.0, 0.0]])

    def test_asymmetric_metric_rejected(self):
        with pytest.raises(ProblemError, match="symmetric"):
            make_problem([[0.5, 0.0], [0.0, 0.5]], metric=[[0, 0.2], [0.9, 0]])

    def test_triangle_violation_rejected(self):
        h = [[0, 1.0, 0.1], [1.0, 0, 0.1], [0.1, 0.1, 0]]
        with pytest.raises(ProblemError, match="triangle"):
            GroundMetric(h)

    def test_metric_outside_unit_range_rejected(self):
        with pytest.raises(ProblemError, match="rescale"):
            GroundMetric([[0, 1.5], [1.5, 0]])

    def test_nonzero_diagonal_rejected(self):
        with pytest.raises(ProblemError, match="diagonal"):
            GroundMetric([[0.1, 1.0], [1.0, 0.0]])

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ProblemError, match="expected 2x2"):
            validate_problem(
                JointChannel([[0.5, 0.0], [0.0, 0.5]]),
                DistortionMatrix(np.zeros((3, 3))),
                GroundMetric.hamming(2),
            )

    def test_estimator_column_sums_checked(self):
        with pytest.raises(ProblemError, match="column 1"):
            Estimator([[1.0, 0.4], [0.0, 0.4]])

    def test_coupling_marginals_checked(self):
        with pytest.raises(ProblemError, match="row sums"):
            Coupling([[0.5, 0.0], [0.0, 0.5]], [0.7, 0.3], [0.5, 0.5])


class TestImmutability:
    def test_arrays_are_read_only(self, bsc_problem):
        import dataclasses

        for arr in (
            bsc_problem.channel.p_xy,
            bsc_problem.distortion.d,
            bsc_problem.metric.h,
            bsc_problem.cost,
            bsc_problem.p_x,
        ):
            with pytest.raises(ValueError):
                arr[0] = 0.0
        with pytest.raises(dataclasses.FrozenInstanceError):
            bsc_problem.channel.p_xy = np.eye(2)

    def test_estimator_and_coupling_frozen(self):
        est = Estimator(np.eye(2))
        with pytest.raises(ValueError):
            est.q[0, 0] = 0.5
        _, coupling = wasserstein1([0.5, 0.5], [0.5, 0.5], GroundMetric.hamming(2))
        with pytest.raises(ValueError):
            coupling.pi[0, 0] = 1.0


class TestCostMatrices:
    def test_bsc_cost_matches_double_sum(self, bsc_problem):
        oracle = cost_matrix_oracle(bsc_problem.channel.p_xy, bsc_problem.distortion.d)
        assert np.allclose(bsc_problem.cost, oracle, atol=1e-15)
        assert np.allclose(bsc_problem.cost, [[0.04, 0.36], [0.54, 0.06]], atol=1e-15)

    def test_zero_distortion_gives_zero_cost(self, bsc_problem):
        prob = make_problem(bsc_problem.channel.p_xy, distortion=np.zeros((2, 2)))
        assert np.all(prob.cost == 0.0)

    def test_noiseless_cost(self, noiseless_problem):
        oracle = cost_matrix_oracle(
            noiseless_problem.channel.p_xy, noiseless_problem.distortion.d
        )
        assert np.allclose(noiseless_problem.cost, [[0.0, 0.5], [0.5, 0.0]], atol=1e-15)
        assert np.allclose(noiseless_problem.cost, oracle)

    def test_conditional_cost_is_cost_over_marginal(self, bsc_problem):
        expected = bsc_problem.cost / bsc_problem.p_y[None, :]
        assert np.allclose(bsc_problem.conditional, expected, atol=1e-15)
        assert np.allclose(
            bsc_problem.conditional,
            [[0.04 / 0.58, 0.36 / 0.42], [0.54 / 0.58, 0.06 / 0.42]],
        )

    def test_noiseless_conditional_is_permutation(self, noiseless_problem):
        assert np.allclose(noiseless_problem.conditional, [[0, 1], [1, 0]])

    def test_independent_observation_conditional_columns_equal(self, indep_problem):
        cond = indep_problem.conditional
        assert np.allclose(cond[:, 0], cond[:, 1])
        assert np.allclose(cond[:, 0], [0.4, 0.6])


class TestExpectedDistortion:
    def test_identity_on_noiseless_is_zero(self, noiseless_problem):
        ident = Estimator(np.eye(2))
        assert noiseless_problem.expected_distortion(ident) == 0.0

    def test_constant_cost(self, bsc_problem):
        prob = make_problem(
            bsc_problem.channel.p_xy, distortion=np.full((2, 2), 0.7)
        )
        est = Estimator([[0.3, 0.9], [0.7, 0.1]])
        assert abs(prob.expected_distortion(est) - 0.7) < 1e-12

    def test_bsc_greedy_matches_brute_force(self, bsc_problem):
        best, best_map = deterministic_minimum_oracle(
            bsc_problem.channel.p_xy, bsc_problem.distortion.d
        )
        assert abs(best - 0.10) < 1e-12
        value, greedy = bsc_problem.minimum
        assert abs(value - best) < 1e-12
        assert bsc_problem.expected_distortion(greedy) == pytest.approx(best, abs=1e-12)

    def test_shape_mismatch(self, bsc_problem):
        with pytest.raises(ProblemError):
            bsc_problem.expected_distortion(Estimator(np.eye(3)))

    @pytest.mark.parametrize("seed", range(20))
    def test_bounds_for_random_estimators(self, seed):
        rng = np.random.default_rng(seed)
        prob = random_problem(seed, 3, 4, random_distortion=True)
        q = rng.uniform(0, 1, (3, 4))
        est = Estimator(q / q.sum(axis=0))
        val = prob.expected_distortion(est)
        assert prob.distortion.d.min() - 1e-12 <= val <= prob.distortion.d.max() + 1e-12


class TestPosteriorSampling:
    def test_noiseless_posterior_is_identity(self, noiseless_problem):
        assert np.allclose(posterior_sampling(noiseless_problem.channel).q, np.eye(2))

    def test_independent_posterior_is_prior(self, indep_problem):
        post = posterior_sampling(indep_problem.channel)
        assert np.allclose(post.q, [[0.6, 0.6], [0.4, 0.4]])

    def test_bsc_posterior_bayes(self, bsc_problem):
        post = posterior_sampling(bsc_problem.channel)
        expected = [[0.54 / 0.58, 0.06 / 0.42], [0.04 / 0.58, 0.36 / 0.42]]
        assert np.allclose(post.q, expected)

    @pytest.mark.parametrize("seed", range(10))
    def test_output_marginal_reproduces_source(self, seed):
        prob = random_problem(seed, 3, 5)
        out = output_distribution(posterior_sampling(prob.channel), prob.p_y)
        assert np.allclose(out.p, prob.p_x, atol=1e-14)


class TestMinimumDistortion:
    def test_noiseless(self, noiseless_problem):
        value, greedy = minimum_distortion(
            noiseless_problem.channel, noiseless_problem.distortion
        )
        assert value == 0.0
        assert np.allclose(greedy.q, np.eye(2))

    def test_bsc(self, bsc_problem):
        value, greedy = bsc_problem.minimum
        assert abs(value - 0.10) < 1e-15
        assert np.allclose(greedy.q, np.eye(2))

    def test_independent(self, indep_problem):
        value, greedy = indep_problem.minimum
        oracle, _ = deterministic_minimum_oracle(
            indep_problem.channel.p_xy, indep_problem.distortion.d
        )
        assert abs(value - 0.4) < 1e-15
        assert abs(value - oracle) < 1e-15
        assert np.allclose(greedy.q, [[1.0, 1.0], [0.0, 0.0]])

    def test_tie_breaks_to_lowest_index(self):
        prob = make_problem(
            [[0.25, 0.25], [0.25, 0.25]], distortion=np.full((2, 2), 0.3)
        )
        _, greedy = prob.minimum
        assert np.allclose(greedy.q, [[1.0, 1.0], [0.0, 0.0]])

    @pytest.mark.parametrize("seed", range(12))
    def test_greedy_beats_every_deterministic_rule(self, seed):
        rng = np.random.default_rng(100 + seed)
        n_x = int(rng.integers(2, 5))
        n_y = int(rng.integers(2, 5))
        if n_x**n_y > 4096:
            pytest.skip("enumeration guard")
        prob = random_problem(200 + seed, n_x, n_y, random_distortion=True)
        best, _ = deterministic_minimum_oracle(prob.channel.p_xy, prob.distortion.d)
        value, greedy = prob.minimum
        assert value == pytest.approx(best, abs=1e-12)
        assert prob.expected_distortion(greedy) == pytest.approx(value, abs=1e-12)


class TestOutputDistribution:
    def test_identity(self):
        est = Estimator(np.eye(3))
        out = output_distribution(est, [0.2, 0.3, 0.5])
        assert np.allclose(out.p, [0.2, 0.3, 0.5])

    def test_constant_column(self):
        est = Estimator([[0.3, 0.3], [0.7, 0.7]])
        out = output_distribution(est, [0.9, 0.1])
        assert np.allclose(out.p, [0.3, 0.7])

    def test_length_mismatch(self):
        with pytest.raises(ProblemError):
            output_distribution(Estimator(np.eye(2)), [1.0])


class TestTotalVariation:
    def test_disjoint_support(self):
        assert tv_distance([1.0, 0.0], [0.0, 1.0]) == 1.0

    def test_identical(self):
        assert tv_distance([0.3, 0.7], [0.3, 0.7]) == 0.0

    def test_half_l1(self):
        assert tv_distance([0.6, 0.4], [1.0, 0.0]) == pytest.approx(0.4, abs=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(ProblemError):
            tv_distance([1.0], [0.5, 0.5])

    @given(_pmf_pairs())
    def test_metric_axioms(self, pair):
        p, q = _normalize(pair[0]), _normalize(pair[1])
        d_pq = tv_distance(p, q)
        assert d_pq == pytest.approx(tv_distance(q, p), abs=1e-15)
        assert 0.0 <= d_pq <= 1.0
        assert tv_distance(p, p) == 0.0
        if d_pq == 0.0:
            assert np.array_equal(p, q)  # zero only for identical pmfs
        r = _normalize(np.asarray(pair[0]) + np.asarray(pair[1]))
        assert d_pq <= tv_distance(p, r) + tv_distance(r, q) + 1e-12


class TestWasserstein:
    def test_equal_marginals_zero_cost_diagonal_support(self):
        p = [0.2, 0.3, 0.5]
        h = GroundMetric.hamming(3)
        value, coupling = wasserstein1(p, p, h)
        assert value == pytest.approx(0.0, abs=1e-14)
        off_diag = coupling.pi[~np.eye(3, dtype=bool)]
        assert np.all(np.abs(off_diag) < 1e-12)

    def test_binary_hamming_is_gap(self):
        value, _ = wasserstein1([0.6, 0.4], [1.0, 0.0], GroundMetric.hamming(2))
        assert value == pytest.approx(0.4, abs=1e-14)

    def test_scaled_binary_metric(self):
        # the only coupling of these marginals moves 0.4 at cost 0.5
        value, coupling = wasserstein1(
            [0.6, 0.4], [1.0, 0.0], GroundMetric([[0, 0.5], [0.5, 0]])
        )
        assert value == pytest.approx(0.2, abs=1e-14)
        assert np.allclose(coupling.pi, [[0.6, 0.0], [0.4, 0.0]], atol=1e-12)

    @pytest.mark.parametrize("seed", range(30))
    def test_matches_total_variation_under_hamming(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        p = random_distribution(rng, n)
        q = random_distribution(rng, n)
        value, coupling = wasserstein1(p, q, GroundMetric.hamming(n))
        assert abs(value - tv_distance(p, q)) <= 1e-10
        assert np.allclose(coupling.pi.sum(axis=1), p, atol=1e-10)
        assert np.allclose(coupling.pi.sum(axis=0), q, atol=1e-10)

    def test_general_metric_between_tv_bounds(self):
        rng = np.random.default_rng(5)
        from dptradeoff.problemio import random_metric

        for _ in range(10):
            n = int(rng.integers(2, 6))
            h = GroundMetric(random_metric(rng, n))
            p = random_distribution(rng, n)
            q = random_distribution(rng, n)
            value, _ = wasserstein1(p, q, h)
            t = tv_distance(p, q)
            off = h.h[~np.eye(n, dtype=bool)]
            assert off.min() * t - 1e-10 <= value <= off.max() * t + 1e-10
