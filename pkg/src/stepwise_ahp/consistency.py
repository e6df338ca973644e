"""Cardinal and ordinal consistency diagnostics for judgment matrices.

Cardinal consistency follows the classic eigenvalue construction: the index
CI = (lambda_max - n) / (n - 1) is scaled by the random index RI(n) of
same-order matrices with uniformly random scale judgments, giving the ratio
CR = CI / RI. CR below 0.1 is conventionally acceptable.

Ordinal consistency checks transitivity of strict preference: if i beats j
and j beats k then i must beat k. The check runs both on derived weights and
directly on raw judgments.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError
from .matrix import ComparisonMatrix
from .priorities import POWER_MAX_ITER, POWER_TOL, derive_priorities

#: Mean consistency index of uniformly random reciprocal scale matrices, by
#: order. Monte Carlo estimate: 100000 samples per order, upper-triangle cells
#: drawn uniformly from the 17 scale values, lambda_max by direct eigensolve,
#: seeded rng streams [170904, n]. Recomputable via
#: scripts/calibrate_random_index.py. Orders 1 and 2 are always consistent.
RANDOM_INDEX: dict[int, float] = {
    1: 0.0,
    2: 0.0,
    3: 0.5227,
    4: 0.8822,
    5: 1.1083,
    6: 1.2463,
    7: 1.3428,
    8: 1.4039,
    9: 1.4512,
    10: 1.4865,
}

#: Conventional acceptability threshold for the consistency ratio.
CR_THRESHOLD = 0.1

#: Weights closer than this are treated as tied in ordinal checks; ties never
#: count as strict preference.
ORDINAL_TIE_TOL = 1e-12


@dataclass(frozen=True)
class ConsistencyReport:
    """Full consistency diagnosis of one matrix.

    `weight_violations` lists triples (i, j, k) breaking transitivity in the
    derived weights; `judgment_violations` lists triples breaking it in the
    raw judgments. `ratio_defined` is False for orders 1 and 2, whose random
    index is zero; such matrices count as acceptable.
    """

    n: int
    lambda_max: float
    consistency_index: float
    random_index: float
    consistency_ratio: float
    acceptable: bool
    ratio_defined: bool
    weights: tuple[float, ...]
    weight_violations: tuple[tuple[int, int, int], ...]
    judgment_violations: tuple[tuple[int, int, int], ...]

    @property
    def ordinally_consistent(self) -> bool:
        return not self.weight_violations and not self.judgment_violations


def consistency_index(lambda_max: float, n: int) -> float:
    if n < 1:
        raise DomainError(f"matrix order {n} out of range")
    if n <= 2:
        return 0.0
    return (lambda_max - n) / (n - 1)


def random_index(n: int) -> float:
    """Tabulated mean consistency index of random order-n scale matrices."""
    if n not in RANDOM_INDEX:
        raise DomainError(f"no random index for order {n}; supported orders are 1..10")
    return RANDOM_INDEX[n]


def consistency_ratio(ci: float, n: int) -> tuple[float, bool]:
    """(ratio, defined) for order n.

    Orders 1 and 2 cannot be inconsistent; their random index is 0 and the
    ratio is reported as 0.0 with defined=False instead of dividing by zero.
    """
    ri = random_index(n)
    if ri == 0.0:
        return 0.0, False
    return ci / ri, True


def weight_ordinal_violations(
    weights, tol: float = ORDINAL_TIE_TOL
) -> tuple[tuple[int, int, int], ...]:
    """Intransitive triples (i, j, k) in the strict order induced by weights.

    A triple is flagged when w_i > w_j and w_j > w_k (both beyond the tie
    tolerance) yet w_i is not beyond w_k. Genuine weight vectors induce a
    transitive order, so on them this scan is empty; it exists to certify
    ranked output and to vet externally supplied weight vectors.
    """
    n = len(weights)
    gt = [[weights[i] - weights[j] > tol for j in range(n)] for i in range(n)]
    out = []
    for i in range(n):
        for j in range(n):
            if i == j or not gt[i][j]:
                continue
            for k in range(n):
                if k == i or k == j:
                    continue
                if gt[j][k] and not gt[i][k]:
                    out.append((i, j, k))
    return tuple(out)


def judgment_ordinal_violations(matrix: ComparisonMatrix) -> tuple[tuple[int, int, int], ...]:
    """Intransitive triples in the raw judgments.

    Flags (i, j, k) when a_ij > 1 and a_jk > 1 but a_ik <= 1: the judgments
    say i beats j beats k yet deny that i beats k. Entries are exact
    rationals, so no tolerance is involved.
    """
    e = matrix.entries
    n = matrix.n
    out = []
    for i in range(n):
        for j in range(n):
            if i == j or not e[i][j] > 1:
                continue
            for k in range(n):
                if k == i or k == j:
                    continue
                if e[j][k] > 1 and not e[i][k] > 1:
                    out.append((i, j, k))
    return tuple(out)


def consistency_report(
    matrix: ComparisonMatrix,
    method: str = "eigenvector",
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
) -> ConsistencyReport:
    """Derive priorities and assemble the full consistency report."""
    pr = derive_priorities(matrix, method=method, tol=tol, max_iter=max_iter)
    ci = consistency_index(pr.lambda_max, matrix.n)
    cr, defined = consistency_ratio(ci, matrix.n)
    return ConsistencyReport(
        n=matrix.n,
        lambda_max=pr.lambda_max,
        consistency_index=ci,
        random_index=RANDOM_INDEX[matrix.n],
        consistency_ratio=cr,
        acceptable=cr < CR_THRESHOLD,
        ratio_defined=defined,
        weights=pr.weights,
        weight_violations=weight_ordinal_violations(pr.weights),
        judgment_violations=judgment_ordinal_violations(matrix),
    )
