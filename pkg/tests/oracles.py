"""Reference computations the test suite trusts.

Everything in this module is deliberately independent of the engine: where
the engine uses power iteration, the oracle calls a dense eigensolver; where
the engine detects exact roots by Newton iteration, the oracle bisects;
where the engine short-circuits loops, the oracle enumerates. Agreement is
evidence, disagreement is a bug in one of the two.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from stepwise_ahp.hierarchy import FullEvaluation, Hierarchy, evaluation_consistency
from stepwise_ahp.matrix import SAATY_VALUES, ComparisonMatrix

#: The 17 admissible ratios as floats, ascending.
SAATY_F = np.array([float(v) for v in SAATY_VALUES])


# ---------------------------------------------------------------------------
# eigen oracle


def principal_eigen(rows) -> tuple[float, np.ndarray]:
    """Principal eigenpair via the dense LAPACK eigensolver.

    Returns (lambda_max, weights) with weights normalized to sum 1. No power
    iteration anywhere near this function.
    """
    a = np.asarray(rows, dtype=float)
    vals, vecs = np.linalg.eig(a)
    k = int(np.argmax(vals.real))
    lam = float(vals[k].real)
    v = np.abs(vecs[:, k].real)
    return lam, v / v.sum()


def lambda3_charpoly(rows) -> float:
    """Largest real root of the characteristic polynomial of a 3x3 matrix.

    lambda^3 - tr*lambda^2 + m2*lambda - det with m2 the sum of principal
    2-minors; solved by numpy.roots. A second, eigensolver-free path to the
    same number.
    """
    a = np.asarray(rows, dtype=float)
    if a.shape != (3, 3):
        raise ValueError("charpoly shortcut is for 3x3 only")
    tr = a[0, 0] + a[1, 1] + a[2, 2]
    m2 = (
        a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        + a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
        + a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
    )
    det = float(np.linalg.det(a))
    roots = np.roots([1.0, -tr, m2, -det])
    real = roots[np.abs(roots.imag) < 1e-9].real
    return float(real.max())


# ---------------------------------------------------------------------------
# random-index oracle


def mc_random_index(n: int, samples: int = 100_000, seed: int = 246001) -> float:
    """Monte Carlo mean consistency index of random order-n scale matrices.

    Upper-triangle cells drawn uniformly from the 17 scale values, lower
    triangle mirrored, lambda_max by direct eigensolve, batched. The rng
    stream is keyed [seed, n] so per-order estimates are independent.
    """
    rng = np.random.default_rng([seed, n])
    iu = np.triu_indices(n, 1)
    m = len(iu[0])
    total = 0.0
    done = 0
    while done < samples:
        b = min(20_000, samples - done)
        picks = rng.integers(0, 17, size=(b, m))
        vals = SAATY_F[picks]
        mats = np.zeros((b, n, n))
        mats[:, np.arange(n), np.arange(n)] = 1.0
        mats[:, iu[0], iu[1]] = vals
        mats[:, iu[1], iu[0]] = 1.0 / vals
        lam = np.linalg.eigvals(mats).real.max(axis=1)
        total += float(((lam - n) / (n - 1)).sum())
        done += b
    return total / samples


# ---------------------------------------------------------------------------
# ordinal oracles


def brute_weight_triples(weights, tol: float = 1e-12):
    """All ordered triples (i, j, k) with w_i > w_j > w_k but not w_i > w_k.

    Strict comparison beyond `tol`; plain permutation enumeration.
    """
    out = []
    for i, j, k in itertools.permutations(range(len(weights)), 3):
        if (
            weights[i] - weights[j] > tol
            and weights[j] - weights[k] > tol
            and not weights[i] - weights[k] > tol
        ):
            out.append((i, j, k))
    return tuple(out)


def brute_judgment_triples(rows):
    """All ordered triples (i, j, k) with a_ij > 1 and a_jk > 1 but a_ik <= 1."""
    n = len(rows)
    out = []
    for i, j, k in itertools.permutations(range(n), 3):
        if rows[i][j] > 1 and rows[j][k] > 1 and not rows[i][k] > 1:
            out.append((i, j, k))
    return tuple(out)


# ---------------------------------------------------------------------------
# aggregation oracle


def alt_nth_root(x: int, k: int) -> int:
    """Floor k-th root of a nonnegative integer by bisection, not Newton."""
    if x < 0 or k < 1:
        raise ValueError(f"nth root undefined for x={x}, k={k}")
    if x in (0, 1) or k == 1:
        return x
    lo, hi = 0, 1
    while hi ** k <= x:
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid ** k <= x:
            lo = mid
        else:
            hi = mid
    return lo


def alt_geometric_mean(values) -> Fraction:
    """Geometric mean of positive rationals, exact when the roots are exact.

    The inexact branch must evaluate the same float expression as the engine,
    exp((log num - log den) / k), or bit-level comparisons would be vacuous;
    everything else here (root detection, flow) is written independently.
    """
    vals = [Fraction(v) for v in values]
    k = len(vals)
    prod = Fraction(1)
    for v in vals:
        prod *= v
    rn = alt_nth_root(prod.numerator, k)
    rd = alt_nth_root(prod.denominator, k)
    if rn ** k == prod.numerator and rd ** k == prod.denominator:
        return Fraction(rn, rd)
    return Fraction(math.exp((math.log(prod.numerator) - math.log(prod.denominator)) / k))


def alt_aggregate_matrix(matrices) -> ComparisonMatrix:
    """Cell-wise geometric mean over the upper triangle, reciprocals mirrored."""
    n = matrices[0].n
    rows = [[Fraction(1)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            g = alt_geometric_mean([m.entries[i][j] for m in matrices])
            rows[i][j] = g
            rows[j][i] = Fraction(g.denominator, g.numerator)
    return ComparisonMatrix(rows, matrices[0].labels)


def alt_aggregate_sets(sets) -> FullEvaluation:
    """From-scratch aggregation of a list of judgment sets."""
    crit = alt_aggregate_matrix([s.evaluation.criteria_matrix for s in sets])
    alts = tuple(
        alt_aggregate_matrix([s.evaluation.alternative_matrices[c] for s in sets])
        for c in range(len(sets[0].evaluation.alternative_matrices))
    )
    return FullEvaluation(criteria_matrix=crit, alternative_matrices=alts)


def worst_ratio_of(evaluation: FullEvaluation, method: str = "eigenvector") -> float:
    """Worst consistency ratio across an evaluation's matrices.

    Undefined ratios (orders 1 and 2) count as 0. The per-matrix numbers come
    from the engine's kernel on purpose: this oracle exists to recheck the
    aggregation and the max, not the eigensolver (that has its own oracle).
    """
    ec = evaluation_consistency(evaluation, method=method)
    worst = 0.0
    for d in ec.diagnoses:
        r = d.report.consistency_ratio if d.report.ratio_defined else 0.0
        worst = max(worst, r)
    return worst


def alt_influence(sets, hierarchy=None, method: str = "eigenvector"):
    """From-scratch leave-one-out influence table.

    Returns (group_ratio, {member: (own, loo, influence)}, most_influential)
    with most_influential picked by largest influence, ties to the smallest
    member id.
    """
    group = worst_ratio_of(alt_aggregate_sets(sets), method)
    table = {}
    for s in sets:
        rest = [t for t in sets if t.owner != s.owner]
        own = worst_ratio_of(s.evaluation, method)
        loo = worst_ratio_of(alt_aggregate_sets(rest), method)
        table[s.owner] = (own, loo, group - loo)
    best_val = max(v[2] for v in table.values())
    most = min(mid for mid, v in table.items() if v[2] == best_val)
    return group, table, most


# ---------------------------------------------------------------------------
# scale oracle


def snap_oracle(x: float) -> Fraction:
    """Nearest scale value in log distance, ties to the smaller value.

    Linear scan with explicit tie handling, independent of the vectorized
    argmin in the engine.
    """
    if x <= 0:
        raise ValueError("non-positive ratio")
    lx = math.log(x)
    best = None
    best_d = None
    for v in SAATY_VALUES:  # ascending, so ties keep the first (smaller) hit
        d = abs(lx - math.log(float(v)))
        if best_d is None or d < best_d:
            best, best_d = v, d
    return best


# ---------------------------------------------------------------------------
# random generators for fuzz tests


def random_grid_matrix(rng: np.random.Generator, n: int, labels=None) -> ComparisonMatrix:
    """Uniformly random scale matrix of order n."""
    m = n * (n - 1) // 2
    picks = rng.integers(0, 17, size=m)
    return ComparisonMatrix.from_upper([SAATY_VALUES[int(p)] for p in picks], labels)


def random_evaluation(rng: np.random.Generator, hierarchy: Hierarchy) -> FullEvaluation:
    """Uniformly random full evaluation over a hierarchy."""
    crit = random_grid_matrix(rng, hierarchy.n_criteria, hierarchy.criteria)
    alts = tuple(
        random_grid_matrix(rng, hierarchy.n_alternatives, hierarchy.alternatives)
        for _ in hierarchy.criteria
    )
    return FullEvaluation(criteria_matrix=crit, alternative_matrices=alts)
