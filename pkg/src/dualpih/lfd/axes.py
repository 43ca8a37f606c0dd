"""Compliant-axis detection: residual motion, PCA and BIC model selection.

Motion that does not follow the desired direction is attributed to the
environment. The principal axes of that residual motion are candidates for
compliance, and the Bayesian information criterion decides how many of
them carry more motion than sensor noise explains.
"""

from __future__ import annotations

import math

import numpy as np

from ..frames import UnitDir, rotation_log


def residual_increments(demo, v_d) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample pose increments with the desired motion removed.

    Both blocks are expressed in the tool frame of the earlier sample. The
    translation increment loses its component along ``v_d`` (given in the
    tool frame); the rotation increment is the full log of the relative
    rotation.
    """
    v = (v_d if isinstance(v_d, UnitDir) else UnitDir(v_d)).dir
    R = demo.rotations()
    dp = np.diff(demo.position, axis=0)
    local = np.einsum("nji,nj->ni", R[:-1], dp)
    trans = local - np.outer(local @ v, v)
    rot = np.array([rotation_log(R[k].T @ R[k + 1]) for k in range(len(R) - 1)])
    return trans, rot


def pca_axes(residuals) -> tuple[np.ndarray, np.ndarray]:
    """Principal axes (rows) and variances, largest first.

    The second moment is taken about zero rather than about the mean: a
    compliant axis often shows a steady drift, which is exactly the motion to
    detect and which centring would remove. Each axis is signed so that its
    largest-magnitude component is positive.
    """
    X = np.asarray(residuals, dtype=float)
    if X.ndim != 2 or len(X) < 10:
        raise ValueError("PCA needs at least 10 residual vectors")
    M = X.T @ X / len(X)
    lam, V = np.linalg.eigh(M)
    order = np.argsort(lam)[::-1]
    lam = np.clip(lam[order], 0.0, None)
    V = V[:, order].T.copy()
    for i, a in enumerate(V):
        if a[np.argmax(np.abs(a))] < 0:
            V[i] = -a
    return V, lam


def noise_floor_estimate(variances) -> float:
    """Self-calibrated noise level: spread along the weakest principal axis."""
    return math.sqrt(max(float(np.min(variances)), 0.0))


def bic_scores(residuals, axes, variances, sigma0: float) -> np.ndarray:
    """``BIC(k)`` for ``k = 0 .. len(axes)``.

    Model ``k`` is a zero-mean Gaussian with variance ``variances[i]`` along
    the first ``k`` axes and ``sigma0**2`` along the remaining ones;
    ``BIC(k) = -2 ln L + k ln n``. A zero variance is floored at
    ``1e-12 sigma0**2`` to keep the likelihood finite.
    """
    if not sigma0 > 0:
        raise ValueError("noise floor must be positive")
    X = np.asarray(residuals, dtype=float)
    A = np.atleast_2d(np.asarray(axes, dtype=float))
    lam = np.asarray(variances, dtype=float)[: len(A)]
    n = len(X)
    Y = X @ A.T
    s2 = sigma0 * sigma0
    ss = (Y * Y).sum(axis=0)

    def nll2(var, sq):
        return n * math.log(2.0 * math.pi * var) + sq / var

    noise = np.array([nll2(s2, q) for q in ss])
    fit = np.array([nll2(max(v, 1e-12 * s2), q) for v, q in zip(lam, ss)])
    out = np.empty(len(A) + 1)
    for k in range(len(A) + 1):
        out[k] = fit[:k].sum() + noise[k:].sum() + k * math.log(n)
    return out


def bic_select(residuals, axes, variances, sigma0: float | None = None) -> int:
    """Number of compliant axes: the BIC argmin, ties going to fewer axes."""
    if sigma0 is None:
        sigma0 = noise_floor_estimate(variances[: len(np.atleast_2d(axes))])
        if sigma0 == 0.0:
            # a noiseless axis exists, so nothing can be told from noise
            return 0
    scores = bic_scores(residuals, axes, variances, sigma0)
    best = float(scores.min())
    return int(np.flatnonzero(scores <= best)[0])
