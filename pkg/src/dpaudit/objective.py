"""Discrimination scores and the penalized objective maximized by the solver.

Everything here is a pure function of numpy arrays. ``X`` is the encoded
``n x d`` matrix, ``theta`` a length-``d`` weight vector and ``fav`` the
boolean favorable-prediction vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ObjectiveConfig:
    """Hyper-parameters of the penalized objective.

    ``mu`` weighs the quadratic penalty on leaving ``[alpha, beta]`` and is
    escalated by the solver; ``eps_denom`` guards the two ratio denominators.
    """

    lam: float = 1.0
    k: int = 5
    alpha: float = 0.45
    beta: float = 0.55
    mu: float = 0.0
    eps_denom: float = 1e-12

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.k < 1:
            raise ValueError("k must be a positive integer")
        if not (0.0 <= self.alpha <= self.beta <= 1.0):
            raise ValueError("need 0 <= alpha <= beta <= 1")
        if self.mu < 0:
            raise ValueError("mu must be >= 0")
        if self.eps_denom <= 0:
            raise ValueError("eps_denom must be > 0")


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def dscore_hard(fav, members) -> float:
    """Favorable rate outside the group minus favorable rate inside it."""
    fav = np.asarray(fav, dtype=bool)
    members = np.asarray(members, dtype=bool)
    if fav.shape != members.shape:
        raise ValueError("fav and members must have the same length")
    s = members.sum()
    n = members.size
    if s == 0 or s == n:
        raise ValueError("degenerate partition")
    # same operation order as expected_dscore so 0/1 memberships agree bitwise
    A = float(np.sum(fav * members.astype(float)))
    B = float(s)
    Y = float(fav.sum())
    return (Y - A) / (n - B) - A / B


def membership(X, theta) -> np.ndarray:
    """Soft membership ``p_i = sigmoid(theta . x_i)`` for every row."""
    return sigmoid(np.asarray(X) @ np.asarray(theta, dtype=float))


def expected_dscore(fav, p, eps_denom: float = 1e-12) -> float:
    fav = np.asarray(fav, dtype=bool)
    p = np.asarray(p, dtype=float)
    A = float(np.sum(fav * p))
    B = float(np.sum(p))
    Y = float(fav.sum())
    N = float(p.size)
    return (Y - A) / max(N - B, eps_denom) - A / max(B, eps_denom)


def _smallest_columns(theta, k: int, penalizable) -> np.ndarray:
    """Indices of the ``m - k`` penalizable columns with smallest ``|theta|``.

    Ties go to the lower column index.
    """
    cols = np.flatnonzero(penalizable)
    m = cols.size
    if k > m:
        raise ValueError("k exceeds attribute count")
    order = np.argsort(np.abs(theta[cols]), kind="stable")
    return cols[order[: m - k]]


def _mask(theta, penalizable):
    if penalizable is None:
        return np.ones(len(theta), dtype=bool)
    return np.asarray(penalizable, dtype=bool)


def penalty_topk(theta, k: int, penalizable=None) -> float:
    """Mean of the ``m - k`` smallest absolute penalizable weights (0 if ``k == m``)."""
    theta = np.asarray(theta, dtype=float)
    idx = _smallest_columns(theta, k, _mask(theta, penalizable))
    if idx.size == 0:
        return 0.0
    return float(np.sum(np.abs(theta[idx])) / idx.size)


def size_ratio(p) -> float:
    p = np.asarray(p, dtype=float)
    return float(np.sum(p) / p.size)


def _violation(r: float, alpha: float, beta: float) -> tuple[float, float]:
    return max(0.0, alpha - r), max(0.0, r - beta)


def penalized_objective(fav, X, theta, cfg: ObjectiveConfig, penalizable=None) -> float:
    """Expected score minus sparsity and size-constraint penalties (higher is better)."""
    theta = np.asarray(theta, dtype=float)
    p = membership(X, theta)
    low, high = _violation(size_ratio(p), cfg.alpha, cfg.beta)
    return (
        expected_dscore(fav, p, cfg.eps_denom)
        - cfg.lam * penalty_topk(theta, cfg.k, _mask(theta, penalizable))
        - cfg.mu * (low**2 + high**2)
    )


def objective_and_gradient(fav, X, theta, cfg: ObjectiveConfig, penalizable=None):
    """Return ``(value, grad)`` of :func:`penalized_objective` in one pass.

    Gradient of the top-k penalty is the subgradient ``sign(theta_j)/(m-k)`` on
    the currently smallest columns, with ``sign(0) = 0``.
    """
    X = np.asarray(X, dtype=float)
    theta = np.asarray(theta, dtype=float)
    fav = np.asarray(fav, dtype=bool)
    eps = cfg.eps_denom
    n = X.shape[0]

    p = membership(X, theta)
    favf = fav.astype(float)
    A = float(np.sum(fav * p))
    B = float(np.sum(p))
    Y = float(fav.sum())
    N = float(n)
    d_out = max(N - B, eps)
    d_in = max(B, eps)
    score = (Y - A) / d_out - A / d_in

    s = p * (1.0 - p)
    dB = X.T @ s
    dA = X.T @ (s * favf)
    if N - B > eps:
        g_out = (-dA * d_out + (Y - A) * dB) / d_out**2
    else:
        g_out = -dA / d_out
    if B > eps:
        g_in = (dA * d_in - A * dB) / d_in**2
    else:
        g_in = dA / d_in
    grad = g_out - g_in

    mask = _mask(theta, penalizable)
    small = _smallest_columns(theta, cfg.k, mask)
    pen = 0.0
    if small.size:
        pen = float(np.sum(np.abs(theta[small])) / small.size)
        grad[small] -= cfg.lam * np.sign(theta[small]) / small.size

    r = B / N
    low, high = _violation(r, cfg.alpha, cfg.beta)
    if cfg.mu and (low or high):
        grad -= cfg.mu * 2.0 * (high - low) * (dB / N)
    value = score - cfg.lam * pen - cfg.mu * (low**2 + high**2)
    return value, grad


def gradient(fav, X, theta, cfg: ObjectiveConfig, penalizable=None) -> np.ndarray:
    return objective_and_gradient(fav, X, theta, cfg, penalizable)[1]
