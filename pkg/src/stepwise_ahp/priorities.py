"""Priority vectors from pairwise-comparison matrices.

Two derivation methods: the principal right eigenvector via power iteration
(the default) and the row geometric mean. Both return weights normalized to
sum 1. The principal-eigenvalue estimate lambda_max feeds the consistency
layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .matrix import ComparisonMatrix

POWER_TOL = 1e-12
POWER_MAX_ITER = 10_000

METHODS = ("eigenvector", "geometric-mean")


@dataclass(frozen=True)
class PriorityResult:
    """Weights plus the eigenvalue estimate they induce.

    `lambda_max` is A's principal eigenvalue under the eigenvector method; under
    the geometric method it is the same estimator applied to the geometric-mean
    weights, so consistency indices stay comparable across methods.
    """

    weights: tuple[float, ...]
    lambda_max: float
    method: str
    iterations: int = 0

    @property
    def n(self) -> int:
        return len(self.weights)


def lambda_max_estimate(A: np.ndarray, w: np.ndarray) -> float:
    """mean_i (Aw)_i / w_i, clamped below at n.

    For a positive reciprocal matrix the true principal eigenvalue is >= n;
    the clamp stops rounding from producing a (meaningless) negative
    consistency index on near-consistent matrices.
    """
    est = float(np.mean((A @ w) / w))
    return max(est, float(A.shape[0]))


def power_iteration(A: np.ndarray, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER):
    """Principal eigenpair of a positive matrix.

    Returns (lambda_max, weights, iterations) with weights normalized to sum 1.
    Raises NumericalError if successive iterates fail to agree within `tol`
    (infinity norm) after `max_iter` steps. Perron-Frobenius guarantees
    convergence for positive A, so failure signals a numerics problem, not a
    modelling one.
    """
    n = A.shape[0]
    w = np.full(n, 1.0 / n)
    for it in range(1, max_iter + 1):
        nxt = A @ w
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - w)) < tol:
            return lambda_max_estimate(A, nxt), nxt, it
        w = nxt
    raise NumericalError(
        f"power iteration did not converge within {max_iter} iterations (tol={tol:g})",
        iterations=max_iter,
    )


def geometric_mean_weights(A: np.ndarray) -> np.ndarray:
    """Row geometric means, normalized to sum 1."""
    logs = np.log(A)
    w = np.exp(logs.mean(axis=1))
    return w / w.sum()


def lambda_max(matrix: ComparisonMatrix, weights) -> float:
    """Principal-eigenvalue estimate of `matrix` at the given weights.

    `weights` must be the priority vector derived from the matrix; every
    component must be strictly positive or the estimator divides by zero.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (matrix.n,):
        raise DomainError(f"weight vector of length {w.size} for a {matrix.n}-item matrix")
    if np.any(w <= 0):
        raise DomainError("all weights must be strictly positive")
    return lambda_max_estimate(matrix.as_array(), w)


def derive_priorities(
    matrix: ComparisonMatrix,
    method: str = "eigenvector",
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
) -> PriorityResult:
    """Priority vector of `matrix` by the chosen method."""
    if method not in METHODS:
        raise DomainError(f"unknown priority method {method!r}, expected one of {METHODS}")
    A = matrix.as_array()
    if method == "eigenvector":
        lam, w, its = power_iteration(A, tol=tol, max_iter=max_iter)
        return PriorityResult(tuple(float(x) for x in w), lam, method, iterations=its)
    w = geometric_mean_weights(A)
    return PriorityResult(tuple(float(x) for x in w), lambda_max_estimate(A, w), method)
