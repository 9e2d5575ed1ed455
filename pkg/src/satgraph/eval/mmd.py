"""Maximum mean discrepancy with an RBF kernel and median-heuristic bandwidth."""

import numpy as np
from scipy.spatial.distance import cdist, pdist


def median_bandwidth(pooled) -> float:
    d = pdist(np.asarray(pooled, dtype=np.float64))
    med = float(np.median(d)) if len(d) else 0.0
    return med if med > 0 else 1.0


def mmd(sample_a, sample_b, bandwidth=None, clamp: bool = True) -> float:
    """Unbiased squared MMD between two samples (rows are points).

    ``k(x, y) = exp(-|x - y|^2 / (2 s^2))`` with ``s`` the median pairwise
    distance of the pooled sample unless given. Negative estimates are
    clamped to zero when ``clamp`` is set.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValueError("samples must be 2-D with matching column counts")
    n, m = len(a), len(b)
    if n < 2 or m < 2:
        raise ValueError("each sample needs at least two points")
    s = median_bandwidth(np.vstack([a, b])) if bandwidth is None else float(bandwidth)
    gamma = 1.0 / (2.0 * s * s)
    k_aa = np.exp(-gamma * cdist(a, a, "sqeuclidean"))
    k_bb = np.exp(-gamma * cdist(b, b, "sqeuclidean"))
    k_ab = np.exp(-gamma * cdist(a, b, "sqeuclidean"))
    est = ((k_aa.sum() - np.trace(k_aa)) / (n * (n - 1))
           + (k_bb.sum() - np.trace(k_bb)) / (m * (m - 1))
           - 2.0 * k_ab.mean())
    return float(max(est, 0.0)) if clamp else float(est)
