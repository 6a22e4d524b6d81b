"""Spectral node ranking on link matrices.

Three solvers share one contract: score every node by the dominant
eigenvector of a matrix derived from the weighted directly-follows
network.

* ``grad_dominant_eigvec`` — Rayleigh-quotient ascent on the unit sphere
  with an exact closed-form step (no tunable parameter), applied to the
  authority matrix ``L.T @ L`` or hub matrix ``L @ L.T``.
* ``hits_pm_norm`` — power method on the primitivity-adjusted symmetric
  matrix ``alpha * L.T @ L + (1 - alpha) / n * ones``.
* ``pagerank_norm`` — power method on the teleport-adjusted
  column-stochastic matrix built from ``L``.

Scores are reported as components of the converged unit vector, either
raw (squares sum to 1) or squared (sum to 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DataError
from .procnet import LinkMatrix, NodeLabel, ProcessNetwork, link_matrix

MAX_ITERATIONS = 100_000
SYMMETRY_TOL = 1e-12


@dataclass
class SymmetricMatrix:
    """Authority (L.T L) or hub (L L.T) matrix; symmetric PSD."""

    values: np.ndarray
    kind: str = "authority"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise DataError("symmetric matrix must be square")
        scale = max(1.0, float(np.abs(self.values).max(initial=0.0)))
        if np.abs(self.values - self.values.T).max(initial=0.0) > SYMMETRY_TOL * scale:
            raise DataError("matrix is not symmetric")

    @property
    def dimension(self) -> int:
        return self.values.shape[0]


@dataclass
class DispersionStats:
    shannon_entropy: float
    participation_ratio: float
    max_score: float


@dataclass
class RankingResult:
    algorithm: str  # gradient | hits_pm_norm | pagerank_norm
    matrix_kind: str  # authority | hub | stochastic
    alpha: float | None
    convention: str  # squared | raw | l1
    scores: dict[NodeLabel, float]
    iterations: int
    residual: float


def authority_matrix(lm: LinkMatrix) -> SymmetricMatrix:
    L = lm.values
    M = L.T @ L
    return SymmetricMatrix(values=(M + M.T) / 2.0, kind="authority")


def hub_matrix(lm: LinkMatrix) -> SymmetricMatrix:
    L = lm.values
    M = L @ L.T
    return SymmetricMatrix(values=(M + M.T) / 2.0, kind="hub")


def _fix_sign(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def grad_dominant_eigvec(
    S: SymmetricMatrix | np.ndarray, tol: float = 1e-10
) -> tuple[np.ndarray, float, int]:
    """Dominant eigenpair of a symmetric PSD matrix by Rayleigh-quotient
    ascent with exact line search.

    Each step maximizes the Rayleigh quotient over span{x, gradient},
    which reduces to a closed-form 2x2 symmetric eigenproblem; no step
    size or damping parameter is involved.  Returns (unit vector,
    eigenvalue, iterations) with ``||S v - lam v|| <= tol``; the
    largest-magnitude component of v is positive.
    """
    if tol <= 0:
        raise DataError("tol must be > 0")
    if not isinstance(S, SymmetricMatrix):
        S = SymmetricMatrix(values=S)
    A = S.values
    n = S.dimension
    if n == 1:
        return np.array([1.0]), float(A[0, 0]), 0

    x = _start_vector(n)
    for it in range(1, MAX_ITERATIONS + 1):
        y = A @ x
        rho = float(x @ y)
        r = y - rho * x  # sphere gradient of the Rayleigh quotient
        rnorm = float(np.linalg.norm(r))
        if rnorm <= tol:
            return _fix_sign(x), rho, it
        r -= (x @ r) * x  # re-orthogonalize; rounding in r leaks along x
        rn2 = float(np.linalg.norm(r))
        if rn2 == 0.0:
            return _fix_sign(x), rho, it
        u = r / rn2
        # exact step: dominant eigenvector of A restricted to span{x, u}
        a = rho
        b = float(u @ y)
        d = float(u @ (A @ u))
        theta = 0.5 * math.atan2(2.0 * b, a - d)
        c, s = math.cos(theta), math.sin(theta)
        if c * c * a + 2 * c * s * b + s * s * d < s * s * a - 2 * c * s * b + c * c * d:
            c, s = -s, c
        x = c * x + s * u
        x /= np.linalg.norm(x)
    raise ConvergenceError(
        f"gradient eigensolver did not reach tol={tol} in {MAX_ITERATIONS} iterations "
        f"(residual {rnorm:.3e})",
        residual=rnorm,
        iterations=MAX_ITERATIONS,
    )


def _start_vector(n: int) -> np.ndarray:
    # near-uniform with a deterministic ramp so the start is never exactly
    # orthogonal to a structured dominant eigenvector
    x = 1.0 + 1e-6 * np.arange(1, n + 1)
    return x / np.linalg.norm(x)


def _power_iteration(M: np.ndarray, tol: float) -> tuple[np.ndarray, float, int]:
    """Power method with L2 renormalization each step."""
    n = M.shape[0]
    x = _start_vector(n)
    for it in range(1, MAX_ITERATIONS + 1):
        y = M @ x
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            raise ConvergenceError("power iteration collapsed to zero", residual=math.inf)
        x_new = y / norm
        if float(np.linalg.norm(x_new - x)) <= 1e-12:
            x = x_new
            break
        lam = float(x_new @ (M @ x_new))
        res = float(np.linalg.norm(M @ x_new - lam * x_new))
        x = x_new
        if res <= tol:
            break
    else:
        raise ConvergenceError(
            f"power iteration did not converge in {MAX_ITERATIONS} iterations",
            residual=res,
            iterations=MAX_ITERATIONS,
        )
    lam = float(x @ (M @ x))
    res = float(np.linalg.norm(M @ x - lam * x))
    return _fix_sign(x), lam, it


def _as_result(
    lm: LinkMatrix, algorithm, matrix_kind, alpha, convention, vec, it, res
) -> RankingResult:
    if convention == "squared":
        values = vec**2
    elif convention == "raw":
        values = vec
    elif convention == "l1":
        values = vec**2  # squared components of a unit vector sum to 1
    else:
        raise DataError(f"unknown convention {convention!r}")
    return RankingResult(
        algorithm=algorithm,
        matrix_kind=matrix_kind,
        alpha=alpha,
        convention=convention,
        scores={lbl: float(values[i]) for i, lbl in enumerate(lm.labels)},
        iterations=it,
        residual=res,
    )


def hits_pm_norm(
    lm: LinkMatrix,
    alpha: float = 0.8,
    kind: str = "authority",
    tol: float = 1e-10,
    convention: str = "squared",
) -> RankingResult:
    """Power method on the primitivity-adjusted authority or hub matrix."""
    if not 0.0 < alpha <= 1.0:
        raise DataError(f"alpha must be in (0, 1], got {alpha}")
    base = authority_matrix(lm) if kind == "authority" else hub_matrix(lm)
    if kind not in ("authority", "hub"):
        raise DataError(f"kind must be 'authority' or 'hub', got {kind!r}")
    n = base.dimension
    M = alpha * base.values + (1.0 - alpha) / n * np.ones((n, n))
    vec, _, it = _power_iteration(M, tol)
    lam = float(vec @ (M @ vec))
    res = float(np.linalg.norm(M @ vec - lam * vec))
    return _as_result(lm, "hits_pm_norm", kind, alpha, convention, vec, it, res)


def stochastic_matrix(lm: LinkMatrix, alpha: float) -> np.ndarray:
    """Teleport-adjusted column-stochastic matrix of L; zero columns
    become uniform."""
    L = lm.values
    n = L.shape[0]
    col_sums = L.sum(axis=0)
    S = np.empty_like(L, dtype=float)
    for j in range(n):
        S[:, j] = 1.0 / n if col_sums[j] == 0 else L[:, j] / col_sums[j]
    return alpha * S + (1.0 - alpha) / n * np.ones((n, n))


def pagerank_norm(
    lm: LinkMatrix, alpha: float = 0.8, tol: float = 1e-10, convention: str = "l1"
) -> RankingResult:
    """Power method with L2 renormalization on the teleport-adjusted
    column-stochastic matrix; reported scores are the squared components
    of the converged unit vector, a probability distribution."""
    if not 0.0 < alpha < 1.0:
        raise DataError(f"alpha must be in (0, 1), got {alpha}")
    G = stochastic_matrix(lm, alpha)
    vec, _, it = _power_iteration(G, tol)
    vec = np.abs(vec)  # Perron vector of a positive matrix
    lam = float(vec @ (G @ vec))
    res = float(np.linalg.norm(G @ vec - lam * vec))
    return _as_result(lm, "pagerank_norm", "stochastic", alpha, convention, vec, it, res)


def gradient_ranking(
    lm: LinkMatrix, kind: str = "authority", tol: float = 1e-10, convention: str = "squared"
) -> RankingResult:
    if kind not in ("authority", "hub"):
        raise DataError(f"kind must be 'authority' or 'hub', got {kind!r}")
    base = authority_matrix(lm) if kind == "authority" else hub_matrix(lm)
    vec, lam, it = grad_dominant_eigvec(base, tol)
    res = float(np.linalg.norm(base.values @ vec - lam * vec))
    return _as_result(lm, "gradient", kind, None, convention, vec, it, res)


def rank_nodes(
    net: ProcessNetwork | LinkMatrix,
    algorithm: str = "gradient",
    kind: str = "authority",
    alpha: float = 0.8,
    convention: str = "squared",
    k: int = 10,
    tol: float = 1e-10,
) -> tuple[list[tuple[NodeLabel, float]], RankingResult, DispersionStats]:
    """Top-k nodes under one algorithm; descending score, ties by label."""
    if k < 1:
        raise DataError("k must be >= 1")
    lm = net if isinstance(net, LinkMatrix) else link_matrix(net)
    if algorithm == "gradient":
        result = gradient_ranking(lm, kind=kind, tol=tol, convention=convention)
    elif algorithm == "hits_pm_norm":
        result = hits_pm_norm(lm, alpha=alpha, kind=kind, tol=tol, convention=convention)
    elif algorithm == "pagerank_norm":
        result = pagerank_norm(lm, alpha=alpha, tol=tol, convention=convention)
    else:
        raise DataError(f"unknown algorithm {algorithm!r}")
    ranked = sorted(result.scores.items(), key=lambda kv: (-kv[1], kv[0].render()))
    return ranked[:k], result, dispersion(result)


def dispersion(result: RankingResult) -> DispersionStats:
    """Entropy and participation ratio of the squared-component
    distribution behind a ranking."""
    values = np.array([result.scores[lbl] for lbl in sorted(result.scores, key=NodeLabel.render)])
    if result.convention == "raw":
        p = values**2
    else:
        p = values.copy()
    total = p.sum()
    if total <= 0:
        raise DataError("ranking scores sum to zero; no distribution to analyze")
    p = p / total
    nz = p[p > 0]
    entropy = float(-(nz * np.log(nz)).sum())
    pr = float(1.0 / (p @ p))
    return DispersionStats(
        shannon_entropy=entropy,
        participation_ratio=pr,
        max_score=float(values.max()),
    )


def compare_topk(a, b, k: int) -> dict:
    """Set algebra on two ranked label lists truncated to k."""
    def labels(seq):
        out = []
        for item in seq:
            lbl = item[0] if isinstance(item, tuple) else item
            out.append(lbl.render() if isinstance(lbl, NodeLabel) else str(lbl))
        return out

    la, lb = labels(a), labels(b)
    if k > len(la) or k > len(lb):
        raise DataError(f"k={k} exceeds a list length ({len(la)}, {len(lb)})")
    sa, sb = set(la[:k]), set(lb[:k])
    union = sa | sb
    return {
        "common": sa & sb,
        "only_a": sa - sb,
        "only_b": sb - sa,
        "jaccard": len(sa & sb) / len(union) if union else 1.0,
    }
