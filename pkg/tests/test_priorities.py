"""Priority derivation: power iteration, geometric means, eigenvalue estimate.

The 3x3 benchmark numbers below were computed before the engine existed,
from the characteristic polynomial and a dense eigensolve, and are frozen
here as literals. The oracle module recomputes them live as a second check.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from stepwise_ahp.errors import DomainError, NumericalError
from stepwise_ahp.matrix import SAATY_VALUES, ComparisonMatrix
from stepwise_ahp.priorities import (
    POWER_MAX_ITER,
    POWER_TOL,
    derive_priorities,
    geometric_mean_weights,
    lambda_max,
    power_iteration,
)

from fractions import Fraction

F = Fraction

# frozen ahead of the build: principal eigenpair of [[1,3,5],[1/3,1,3],[1/5,1/3,1]]
M1_UPPER = [3, 5, 3]
M1_LAMBDA = 3.038511090558170
M1_WEIGHTS = (0.6369855717447571, 0.2582849943744950, 0.1047294338807479)

grid_value = st.sampled_from(SAATY_VALUES)


def grid_matrix(n):
    return st.lists(grid_value, min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2).map(
        ComparisonMatrix.from_upper
    )


any_grid_matrix = st.integers(min_value=2, max_value=6).flatmap(grid_matrix)


class TestBenchmark:
    def test_eigenvector_matches_frozen_oracle(self):
        m = ComparisonMatrix.from_upper(M1_UPPER)
        r = derive_priorities(m)
        assert abs(r.lambda_max - M1_LAMBDA) < 1e-9
        for got, want in zip(r.weights, M1_WEIGHTS):
            assert abs(got - want) < 1e-6
        assert r.iterations > 0
        assert r.method == "eigenvector"

    def test_geometric_matches_frozen_oracle(self):
        m = ComparisonMatrix.from_upper(M1_UPPER)
        r = derive_priorities(m, method="geometric-mean")
        for got, want in zip(r.weights, M1_WEIGHTS):
            assert abs(got - want) < 1e-6

    def test_live_oracle_agrees(self, m1):
        lam_poly = oracles.lambda3_charpoly(m1.as_array())
        lam_eig, w_eig = oracles.principal_eigen(m1.as_array())
        assert abs(lam_poly - M1_LAMBDA) < 1e-9
        assert abs(lam_eig - M1_LAMBDA) < 1e-9
        r = derive_priorities(m1)
        for got, want in zip(r.weights, w_eig):
            assert abs(got - want) < 1e-9


class TestConsistentRecovery:
    def test_exact_ratio_matrix_returns_the_weights(self):
        m = ComparisonMatrix.from_weights([F(3, 5), F(3, 10), F(1, 10)])
        for method in ("eigenvector", "geometric-mean"):
            r = derive_priorities(m, method=method)
            assert abs(r.weights[0] - 0.6) < 1e-9
            assert abs(r.weights[1] - 0.3) < 1e-9
            assert abs(r.weights[2] - 0.1) < 1e-9
            assert abs(r.lambda_max - 3.0) < 1e-9

    def test_all_ones_gives_uniform(self):
        m = ComparisonMatrix.from_upper([1] * 6)  # order 4
        r = derive_priorities(m)
        assert r.lambda_max == 4.0
        for w in r.weights:
            assert abs(w - 0.25) < 1e-12

    @given(
        st.lists(
            st.floats(min_value=0.05, max_value=20.0),
            min_size=3,
            max_size=6,
        )
    )
    def test_consistent_matrices_reproduce_weights(self, raw):
        m = ComparisonMatrix.from_weights([F(x).limit_denominator(10**6) for x in raw])
        total = float(sum(F(x).limit_denominator(10**6) for x in raw))
        want = [float(F(x).limit_denominator(10**6)) / total for x in raw]
        for method in ("eigenvector", "geometric-mean"):
            r = derive_priorities(m, method=method)
            for got, w in zip(r.weights, want):
                assert abs(got - w) < 1e-9
            assert abs(r.lambda_max - m.n) < 1e-9


class TestProperties:
    @given(any_grid_matrix)
    def test_weights_positive_and_normalized(self, m):
        for method in ("eigenvector", "geometric-mean"):
            r = derive_priorities(m, method=method)
            assert all(w > 0 for w in r.weights)
            assert abs(sum(r.weights) - 1.0) < 1e-9

    @given(any_grid_matrix)
    def test_lambda_never_below_order(self, m):
        r = derive_priorities(m)
        assert r.lambda_max >= m.n - 1e-9

    @given(any_grid_matrix)
    def test_eigenvector_matches_dense_solver(self, m):
        r = derive_priorities(m)
        lam, w = oracles.principal_eigen(m.as_array())
        # the estimate clamps at n, the dense solver does not; allow that gap
        assert abs(r.lambda_max - max(lam, float(m.n))) < 1e-8
        for got, want in zip(r.weights, w):
            assert abs(got - want) < 1e-8

    @given(st.integers(min_value=3, max_value=6).flatmap(lambda n: st.tuples(grid_matrix(n), st.permutations(list(range(n))))))
    def test_permutation_equivariance(self, data):
        m, perm = data
        r = derive_priorities(m)
        rp = derive_priorities(m.permuted(perm))
        assert abs(r.lambda_max - rp.lambda_max) < 1e-9
        for i, p in enumerate(perm):
            assert abs(rp.weights[i] - r.weights[p]) < 1e-9

    @given(any_grid_matrix)
    def test_geometric_weights_match_row_means(self, m):
        a = m.as_array()
        w = geometric_mean_weights(a)
        raw = np.prod(a, axis=1) ** (1.0 / m.n)
        want = raw / raw.sum()
        assert np.allclose(w, want, atol=1e-12)


class TestFailureModes:
    def test_unknown_method(self, m1):
        with pytest.raises(DomainError):
            derive_priorities(m1, method="magic")

    def test_nonconvergence_reports_iterations(self, m1):
        with pytest.raises(NumericalError) as exc:
            derive_priorities(m1, max_iter=2)
        assert exc.value.iterations == 2

    def test_power_iteration_defaults(self):
        assert POWER_TOL == 1e-12
        assert POWER_MAX_ITER == 10_000

    def test_lambda_max_rejects_bad_weights(self, m1):
        with pytest.raises(DomainError):
            lambda_max(m1, (0.5, 0.5))
        with pytest.raises(DomainError):
            lambda_max(m1, (0.5, 0.5, -0.1))

    def test_lambda_max_at_derived_weights(self, m1):
        r = derive_priorities(m1)
        assert abs(lambda_max(m1, r.weights) - r.lambda_max) < 1e-12

    def test_power_iteration_returns_triple(self, m1):
        lam, w, its = power_iteration(m1.as_array())
        assert lam > 3.0
        assert len(w) == 3
        assert 0 < its <= POWER_MAX_ITER
