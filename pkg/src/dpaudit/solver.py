"""Finding the key attributes and the discriminated group.

:func:`optimize` runs clipped full-batch gradient ascent on the penalized
objective, escalating the size-constraint penalty between rounds.
:func:`truncate_topk` keeps the weights of the ``k`` strongest attributes and
:func:`derive_evidence` thresholds the resulting membership at 0.5.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import ColumnInfo, FeatureMatrix
from .objective import ObjectiveConfig, dscore_hard, membership, objective_and_gradient

log = logging.getLogger(__name__)


class NonFiniteObjectiveError(FloatingPointError):
    def __init__(self, iteration: int, theta: np.ndarray):
        self.iteration = iteration
        self.theta = np.array(theta, copy=True)
        super().__init__(f"non-finite objective at iteration {iteration}")


@dataclass(frozen=True)
class SolverConfig:
    learning_rate: float = 0.1
    iterations: int = 2500
    clip_norm: float = 5.0
    penalty_rounds: int = 5
    mu_init: float = 1.0
    mu_growth: float = 10.0
    seed: int = 0
    init_scale: float = 0.001

    def __post_init__(self):
        for name in ("learning_rate", "iterations", "clip_norm", "penalty_rounds",
                     "mu_init", "mu_growth", "init_scale"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.iterations % self.penalty_rounds:
            raise ValueError("iterations must be divisible by penalty_rounds")


@dataclass
class Evidence:
    """Outcome of the search: the group, its key attributes and the weights behind it.

    ``dscore`` is ``None`` when the group or its complement is empty.
    ``theta_raw`` holds the weights before top-k truncation.
    """

    members: np.ndarray
    key_attributes: list[str]
    theta_star: np.ndarray
    dscore: float | None
    size_ratio: float
    constraint_ok: bool
    trace: list[float] = field(default_factory=list)
    theta_raw: np.ndarray | None = None

    @property
    def member_indices(self) -> list[int]:
        return np.flatnonzero(self.members).tolist()


def clip_gradient(grad: np.ndarray, clip_norm: float) -> np.ndarray:
    norm = float(np.linalg.norm(grad))
    if norm > clip_norm:
        return grad * (clip_norm / norm)
    return grad


def optimize(fav, fm: FeatureMatrix, obj_cfg: ObjectiveConfig, solver_cfg: SolverConfig,
             return_trace: bool = False):
    """Maximize the penalized objective by the penalty method.

    Runs ``penalty_rounds`` rounds of ``iterations / penalty_rounds`` ascent
    steps. The size penalty starts at ``mu_init`` and is multiplied by
    ``mu_growth`` after each round. Returns the final weights, plus the
    per-iteration objective values when ``return_trace`` is set.
    """
    rng = np.random.default_rng(solver_cfg.seed)
    theta = rng.normal(0.0, solver_cfg.init_scale, size=fm.d)
    fav = np.asarray(fav, dtype=bool)
    X = fm.X
    mask = fm.penalizable
    steps = solver_cfg.iterations // solver_cfg.penalty_rounds
    lr = solver_cfg.learning_rate
    trace = []
    it = 0
    mu = solver_cfg.mu_init
    for _ in range(solver_cfg.penalty_rounds):
        cfg = replace(obj_cfg, mu=mu)
        for _ in range(steps):
            value, grad = objective_and_gradient(fav, X, theta, cfg, mask)
            if not (np.isfinite(value) and np.all(np.isfinite(grad))):
                raise NonFiniteObjectiveError(it, theta)
            trace.append(value)
            theta = theta + lr * clip_gradient(grad, solver_cfg.clip_norm)
            it += 1
        mu *= solver_cfg.mu_growth
    log.debug("optimize: seed=%d final objective %.6f", solver_cfg.seed, trace[-1])
    if return_trace:
        return theta, trace
    return theta


def truncate_topk(theta, k: int, columns: tuple[ColumnInfo, ...], by_attribute: bool = True):
    """Zero every weight outside the ``k`` strongest attributes.

    Penalizable columns are ranked by ``|theta|`` (ties: lower index first)
    and the ranking is walked until ``k`` distinct source attributes are seen;
    all columns of those attributes are kept. With ``by_attribute=False`` the
    ``k`` strongest columns are kept instead. The intercept is never touched.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    theta = np.asarray(theta, dtype=float)
    out = theta.copy()
    cols = [j for j, c in enumerate(columns) if c.kind != "intercept"]
    if not np.any(theta[cols]):
        return out
    ranked = sorted(cols, key=lambda j: (-abs(theta[j]), j))
    if not by_attribute:
        keep = set(ranked[:k])
        for j in cols:
            if j not in keep:
                out[j] = 0.0
        return out
    chosen: list[str] = []
    for j in ranked:
        attr = columns[j].attribute
        if attr not in chosen:
            if len(chosen) == k:
                break
            chosen.append(attr)
    for j in cols:
        if columns[j].attribute not in chosen:
            out[j] = 0.0
    return out


def key_attributes(theta, columns: tuple[ColumnInfo, ...]) -> list[str]:
    """Attributes owning a non-zero weight, strongest first."""
    strength: dict[str, float] = {}
    for j, c in enumerate(columns):
        if c.kind == "intercept" or theta[j] == 0:
            continue
        strength[c.attribute] = max(strength.get(c.attribute, 0.0), abs(theta[j]))
    order = {a: i for i, a in enumerate(dict.fromkeys(c.attribute for c in columns))}
    return sorted(strength, key=lambda a: (-strength[a], order[a]))


def derive_evidence(fav, fm: FeatureMatrix, theta, obj_cfg: ObjectiveConfig) -> Evidence:
    fav = np.asarray(fav, dtype=bool)
    theta = np.asarray(theta, dtype=float)
    members = membership(fm.X, theta) >= 0.5
    s = int(members.sum())
    ratio = s / fm.n
    degenerate = s == 0 or s == fm.n
    dscore = None if degenerate else dscore_hard(fav, members)
    ok = (not degenerate) and obj_cfg.alpha <= ratio <= obj_cfg.beta
    return Evidence(
        members=members,
        key_attributes=key_attributes(theta, fm.columns),
        theta_star=theta,
        dscore=dscore,
        size_ratio=ratio,
        constraint_ok=ok,
    )


def find_evidence(fav, fm: FeatureMatrix, obj_cfg: ObjectiveConfig, solver_cfg: SolverConfig,
                  by_attribute: bool = True) -> Evidence:
    """Optimize, truncate to the top ``k`` attributes and threshold."""
    theta, trace = optimize(fav, fm, obj_cfg, solver_cfg, return_trace=True)
    theta_star = truncate_topk(theta, obj_cfg.k, fm.columns, by_attribute)
    ev = derive_evidence(fav, fm, theta_star, obj_cfg)
    ev.trace = trace
    ev.theta_raw = theta
    return ev
