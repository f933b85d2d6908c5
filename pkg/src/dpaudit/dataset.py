"""Tabular input and the encoded feature projection.

A :class:`Dataset` holds typed rows plus the favorable-prediction flag of the
audited model for every row. :func:`encode` turns the sensitive attributes
into a numeric matrix: one-hot blocks for categorical attributes and z-scored
columns for continuous ones, with an optional trailing intercept column.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

CATEGORICAL = "categorical"
CONTINUOUS = "continuous"


class DatasetError(ValueError):
    """Raised for malformed input data or schemas."""


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    kind: str
    values: tuple[str, ...] = ()
    sensitive: bool = True

    def __post_init__(self):
        if self.kind not in (CATEGORICAL, CONTINUOUS):
            raise DatasetError(f"unknown attribute kind {self.kind!r} for {self.name!r}")
        if self.kind == CATEGORICAL:
            if not self.values:
                raise DatasetError(f"categorical attribute {self.name!r} has no values")
            if len(set(self.values)) != len(self.values):
                raise DatasetError(f"categorical attribute {self.name!r} has duplicate values")

    @property
    def is_categorical(self) -> bool:
        return self.kind == CATEGORICAL


@dataclass(frozen=True)
class Dataset:
    """Typed rows plus the audited model's favorable-prediction flags.

    Rows store categorical cells as ``str`` and continuous cells as ``float``.
    """

    schema: tuple[AttributeSpec, ...]
    rows: tuple[tuple, ...]
    fav: np.ndarray

    def __post_init__(self):
        names = [a.name for a in self.schema]
        if len(set(names)) != len(names):
            raise DatasetError("attribute names must be unique")
        fav = np.asarray(self.fav, dtype=bool)
        fav.setflags(write=False)
        object.__setattr__(self, "fav", fav)
        object.__setattr__(self, "schema", tuple(self.schema))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        if len(self.rows) < 2:
            raise DatasetError("dataset needs at least 2 rows")
        if fav.shape != (len(self.rows),):
            raise DatasetError(f"fav has {fav.size} entries for {len(self.rows)} rows")
        for i, row in enumerate(self.rows):
            if len(row) != len(self.schema):
                raise DatasetError(f"row {i} has {len(row)} values, expected {len(self.schema)}")
            for spec, value in zip(self.schema, row):
                if spec.is_categorical:
                    if value not in spec.values:
                        raise DatasetError(
                            f"value {value!r} at row {i}, column {spec.name!r} not in declared values"
                        )
                elif not isinstance(value, (int, float)) or not math.isfinite(value):
                    raise DatasetError(f"non-finite value at row {i}, column {spec.name!r}")

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def sensitive(self) -> list[AttributeSpec]:
        return [a for a in self.schema if a.sensitive]

    def index_of(self, name: str) -> int:
        for j, spec in enumerate(self.schema):
            if spec.name == name:
                return j
        raise KeyError(name)

    def attribute(self, name: str) -> AttributeSpec:
        return self.schema[self.index_of(name)]

    def column(self, name: str) -> np.ndarray:
        """Raw values of one attribute (object array for categoricals, float otherwise)."""
        j = self.index_of(name)
        values = [row[j] for row in self.rows]
        if self.schema[j].is_categorical:
            return np.array(values, dtype=object)
        return np.array(values, dtype=float)

    def with_sensitive(self, names: Sequence[str]) -> "Dataset":
        """Copy with exactly ``names`` flagged as sensitive."""
        wanted = set(names)
        unknown = wanted - {a.name for a in self.schema}
        if unknown:
            raise DatasetError(f"unknown sensitive attributes: {sorted(unknown)}")
        schema = tuple(
            AttributeSpec(a.name, a.kind, a.values, a.name in wanted) for a in self.schema
        )
        return Dataset(schema, self.rows, self.fav)


def load_csv(
    path,
    fav_column: str,
    fav_value: str,
    schema_hints: Mapping[str, str] | None = None,
    sensitive: Sequence[str] | None = None,
) -> Dataset:
    """Read a headed CSV file into a :class:`Dataset`.

    ``fav[i]`` is true when row ``i``'s ``fav_column`` cell equals ``fav_value``;
    that column is dropped from the schema. Column kinds are inferred (all cells
    numeric means continuous) unless overridden by ``schema_hints``, a mapping
    from column name to ``"categorical"`` or ``"continuous"``. All attributes
    are sensitive unless ``sensitive`` names a subset.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"missing file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        records = list(csv.reader(fh))
    records = [r for r in records if r]
    if not records:
        raise DatasetError(f"{path}: no header row")
    header = [h.strip() for h in records[0]]
    body = records[1:]
    if not body:
        raise DatasetError(f"{path}: empty dataset")
    if fav_column not in header:
        raise DatasetError(f"{path}: fav column {fav_column!r} not in header")
    for i, rec in enumerate(body, start=1):
        if len(rec) != len(header):
            raise DatasetError(f"{path}: ragged row {i} ({len(rec)} cells, header has {len(header)})")

    hints = dict(schema_hints or {})
    unknown = set(hints) - set(header)
    if unknown:
        raise DatasetError(f"{path}: schema hints for unknown columns {sorted(unknown)}")

    fav_idx = header.index(fav_column)
    fav = np.array([rec[fav_idx].strip() == fav_value for rec in body], dtype=bool)

    attr_idx = [j for j in range(len(header)) if j != fav_idx]
    if sensitive is not None:
        missing = set(sensitive) - {header[j] for j in attr_idx}
        if missing:
            raise DatasetError(f"{path}: unknown sensitive attributes {sorted(missing)}")
    columns: dict[int, list] = {}
    schema = []
    for j in attr_idx:
        name = header[j]
        cells = [rec[j].strip() for rec in body]
        for i, cell in enumerate(cells, start=1):
            if cell == "":
                raise DatasetError(f"{path}: missing value at row {i}, column {name!r}")
        kind = hints.get(name) or (CONTINUOUS if all(_is_number(c) for c in cells) else CATEGORICAL)
        if kind == CONTINUOUS:
            values = []
            for i, cell in enumerate(cells, start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetError(f"type mismatch at row {i}, column {name!r}") from None
                if not math.isfinite(v):
                    raise DatasetError(f"non-finite value at row {i}, column {name!r}")
                values.append(v)
            columns[j] = values
            levels: tuple[str, ...] = ()
        elif kind == CATEGORICAL:
            columns[j] = cells
            levels = tuple(sorted(set(cells)))
        else:
            raise DatasetError(f"{path}: unknown kind {kind!r} for column {name!r}")
        is_sensitive = sensitive is None or name in sensitive
        schema.append(AttributeSpec(name, kind, levels, is_sensitive))

    rows = list(zip(*(columns[j] for j in attr_idx)))
    return Dataset(tuple(schema), tuple(rows), fav)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


@dataclass(frozen=True)
class ColumnInfo:
    """Provenance of one encoded column.

    ``kind`` is ``"onehot"``, ``"continuous"`` or ``"intercept"``. For one-hot
    columns ``value`` is the encoded category; continuous columns carry the
    ``mean`` and ``std`` used for standardization.
    """

    attribute: str | None
    kind: str
    value: str | None = None
    mean: float = 0.0
    std: float = 1.0

    @property
    def label(self) -> str:
        if self.kind == "onehot":
            return f"{self.attribute}={self.value}"
        if self.kind == "intercept":
            return "(intercept)"
        return str(self.attribute)

    def to_original(self, z):
        return z * self.std + self.mean


@dataclass(frozen=True)
class FeatureMatrix:
    X: np.ndarray
    columns: tuple[ColumnInfo, ...]
    intercept: bool = False
    _attr_cols: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(self.columns):
            raise DatasetError("matrix shape does not match column map")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "columns", tuple(self.columns))
        groups: dict[str, list[int]] = {}
        for j, info in enumerate(self.columns):
            if info.kind != "intercept":
                groups.setdefault(info.attribute, []).append(j)
        object.__setattr__(self, "_attr_cols", {a: tuple(c) for a, c in groups.items()})

    @classmethod
    def from_array(cls, X, intercept: bool = False) -> "FeatureMatrix":
        """Wrap a raw matrix, one continuous pseudo-attribute per column.

        When ``intercept`` is true the last column is taken to be the constant
        column.
        """
        X = np.asarray(X, dtype=float)
        d = X.shape[1]
        cols = [ColumnInfo(f"x{j}", "continuous") for j in range(d - int(intercept))]
        if intercept:
            cols.append(ColumnInfo(None, "intercept"))
        return cls(X, tuple(cols), intercept)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def penalizable(self) -> np.ndarray:
        """Boolean mask of columns subject to the sparsity penalty."""
        return np.array([c.kind != "intercept" for c in self.columns], dtype=bool)

    @property
    def attributes(self) -> list[str]:
        """Source attributes in column order."""
        return list(self._attr_cols)

    def attribute_columns(self, name: str) -> tuple[int, ...]:
        return self._attr_cols[name]

    def restrict(self, attributes: Sequence[str]) -> "FeatureMatrix":
        """Sub-matrix holding only the columns of ``attributes`` (no intercept)."""
        idx = [j for a in self.attributes if a in set(attributes) for j in self._attr_cols[a]]
        return FeatureMatrix(self.X[:, idx], tuple(self.columns[j] for j in idx), False)


def encode(data: Dataset, intercept: bool = True) -> FeatureMatrix:
    """Project the sensitive attributes of ``data`` to a numeric matrix.

    Continuous columns are standardized with the population standard
    deviation; a constant column becomes all zeros with ``std`` recorded as 1.
    """
    blocks = []
    cols: list[ColumnInfo] = []
    for j, spec in enumerate(data.schema):
        if not spec.sensitive:
            continue
        raw = [row[j] for row in data.rows]
        if spec.is_categorical:
            lookup = {v: i for i, v in enumerate(spec.values)}
            block = np.zeros((data.n, len(spec.values)))
            block[np.arange(data.n), [lookup[v] for v in raw]] = 1.0
            blocks.append(block)
            cols.extend(ColumnInfo(spec.name, "onehot", v) for v in spec.values)
        else:
            x = np.array(raw, dtype=float)
            mean = float(x.mean())
            std = float(x.std())
            if std == 0.0:
                std = 1.0
                z = np.zeros_like(x)
            else:
                z = (x - mean) / std
            blocks.append(z[:, None])
            cols.append(ColumnInfo(spec.name, "continuous", None, mean, std))
    if not cols:
        raise DatasetError("no sensitive attributes to encode")
    if intercept:
        blocks.append(np.ones((data.n, 1)))
        cols.append(ColumnInfo(None, "intercept"))
    return FeatureMatrix(np.hstack(blocks), tuple(cols), intercept)


def project_row(fm: FeatureMatrix, row_index: int) -> np.ndarray:
    if not 0 <= row_index < fm.n:
        raise IndexError(f"row index {row_index} out of range for {fm.n} rows")
    return fm.X[row_index].copy()
