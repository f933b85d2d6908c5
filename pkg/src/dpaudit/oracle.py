"""Brute-force subgroup search and a planted-bias data generator.

:func:`enum_search` scores every conjunction of at most ``k`` predicates over
distinct sensitive attributes. Categorical attributes contribute one equality
predicate per value; continuous attributes contribute ``<= t`` and ``> t`` for
every observed value ``t``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import CATEGORICAL, CONTINUOUS, AttributeSpec, Dataset

OPS = ("=", "<=", ">")


@dataclass(frozen=True, order=True)
class Predicate:
    attribute: str
    op: str
    value: object

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"unknown predicate operator {self.op!r}")

    def evaluate(self, data: Dataset) -> np.ndarray:
        col = data.column(self.attribute)
        if self.op == "=":
            return col == self.value
        if self.op == "<=":
            return col <= self.value
        return col > self.value

    def __str__(self):
        return f"{self.attribute} {self.op} {self.value}"


@dataclass
class EnumResult:
    predicates: list[Predicate]
    members: np.ndarray | None
    dscore: float | None
    explored: int
    exhausted_budget: bool


def candidate_predicates(data: Dataset, spec: AttributeSpec) -> list[Predicate]:
    if spec.kind == CATEGORICAL:
        return [Predicate(spec.name, "=", v) for v in spec.values]
    thresholds = np.unique(data.column(spec.name))
    return [Predicate(spec.name, op, float(t)) for t in thresholds for op in ("<=", ">")]


def enum_search(data: Dataset, k: int, alpha: float, beta: float,
                time_budget_secs: float | None = None) -> EnumResult:
    """Return the conjunction with the highest discrimination score.

    Only groups with ``alpha <= |S|/n <= beta`` and a non-empty complement are
    scored. Ties keep the lexicographically smallest predicate list. When the
    budget runs out the best conjunction found so far is returned with
    ``exhausted_budget`` set; the clock is only checked between candidates.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    attrs = data.sensitive
    if not attrs:
        raise ValueError("no sensitive attributes to enumerate")
    fav = data.fav
    n = data.n
    Y = float(fav.sum())
    lo, hi = alpha * n, beta * n
    atoms = []
    for spec in attrs:
        preds = candidate_predicates(data, spec)
        atoms.append([(p, p.evaluate(data)) for p in preds])

    deadline = None if time_budget_secs is None else time.perf_counter() + time_budget_secs
    best_key = None
    best_score = -np.inf
    best_mask = None
    explored = 0
    exhausted = False

    def visit(start: int, depth: int, mask, preds):
        nonlocal best_key, best_score, best_mask, explored, exhausted
        for a in range(start, len(atoms)):
            for pred, pmask in atoms[a]:
                if deadline is not None and time.perf_counter() > deadline:
                    exhausted = True
                    return
                m = pmask if mask is None else mask & pmask
                conj = preds + (pred,)
                explored += 1
                s = int(np.count_nonzero(m))
                if 0 < s < n and lo <= s <= hi:
                    A = float(np.count_nonzero(m & fav))
                    score = (Y - A) / (n - float(s)) - A / float(s)
                    if score > best_score or (score == best_score and conj < best_key):
                        best_score, best_key, best_mask = score, conj, m
                if depth + 1 < k:
                    visit(a + 1, depth + 1, m, conj)
                    if exhausted:
                        return

    visit(0, 0, None, ())
    if best_key is None:
        return EnumResult([], None, None, explored, exhausted)
    return EnumResult(list(best_key), best_mask.copy(), best_score, explored, exhausted)


def plant_synthetic(n: int, n_binary: int, n_continuous: int, planted: Sequence[Predicate],
                    rate_in: float, rate_out: float, seed: int = 0):
    """Draw a dataset whose favorable rate drops inside a planted conjunction.

    Binary attributes ``b0, b1, ...`` are fair coins over ``{"0", "1"}`` and
    continuous attributes ``c0, c1, ...`` are uniform on ``[0, 1]``. Rows
    satisfying every predicate in ``planted`` are favorable with probability
    ``rate_in``, all others with ``rate_out``. If the planted group comes out
    empty the draw is repeated with the next seed (at most 100 times).

    Returns ``(dataset, planted_mask)``.
    """
    if not 0.0 <= rate_in < rate_out <= 1.0:
        raise ValueError("need 0 <= rate_in < rate_out <= 1")
    schema = tuple(
        [AttributeSpec(f"b{j}", CATEGORICAL, ("0", "1")) for j in range(n_binary)]
        + [AttributeSpec(f"c{j}", CONTINUOUS) for j in range(n_continuous)]
    )
    if n < 2:
        raise ValueError("n must be >= 2")
    names = {a.name for a in schema}
    for p in planted:
        if p.attribute not in names:
            raise ValueError(f"planted predicate on unknown attribute {p.attribute!r}")

    for attempt in range(100):
        rng = np.random.default_rng(seed + attempt)
        bits = rng.integers(0, 2, size=(n, n_binary))
        conts = rng.random((n, n_continuous))
        rows = tuple(
            tuple(str(b) for b in bits[i]) + tuple(float(c) for c in conts[i]) for i in range(n)
        )
        draw = rng.random(n)
        data = Dataset(schema, rows, np.zeros(n, dtype=bool))
        mask = np.ones(n, dtype=bool)
        for p in planted:
            mask &= p.evaluate(data)
        if not mask.any():
            continue
        fav = np.where(mask, draw < rate_in, draw < rate_out)
        return Dataset(schema, rows, fav), mask
    raise RuntimeError("planted group empty in 100 consecutive draws")
