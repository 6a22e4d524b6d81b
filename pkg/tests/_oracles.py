"""Independent brute-force oracles used by the test suite.

These deliberately avoid the library's own code paths.
"""

import numpy as np


def power_iteration_oracle(A, iters=200_000, tol=1e-14):
    """Plain power method; reference dominant eigenpair of a symmetric
    PSD matrix."""
    n = A.shape[0]
    x = 1.0 + 1e-6 * np.arange(1, n + 1)
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(iters):
        y = A @ x
        norm = np.linalg.norm(y)
        if norm == 0:
            break
        x = y / norm
        lam = float(x @ (A @ x))
        if np.linalg.norm(A @ x - lam * x) <= tol:
            break
    i = int(np.argmax(np.abs(x)))
    if x[i] < 0:
        x = -x
    return x, lam


def brute_force_dfg(labels):
    """Count adjacent pairs and occurrences by direct enumeration."""
    edges = {}
    for a, b in zip(labels, labels[1:]):
        edges[(a, b)] = edges.get((a, b), 0) + 1
    counts = {}
    for lbl in labels:
        counts[lbl] = counts.get(lbl, 0) + 1
    return edges, counts


def random_psd(rng, n, gap_max=0.999):
    """Random symmetric PSD matrix with spectral-gap ratio <= gap_max."""
    while True:
        eigs = np.sort(rng.uniform(0.0, 1.0, size=n))
        if eigs[-1] <= 0:
            continue
        if n >= 2 and eigs[-2] / eigs[-1] > gap_max:
            continue
        break
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return Q @ np.diag(eigs) @ Q.T
