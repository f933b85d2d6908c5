import numpy as np
import pytest

from dpaudit.dataset import CATEGORICAL, CONTINUOUS, AttributeSpec, Dataset

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines):
        terminalreporter.write_line(line[1])


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion.

    The line is printed immediately and again in the terminal summary.
    """
    lines = request.config.stash[ACCEPTANCE_KEY]

    def record(number: int, ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        print(line)
        lines.append((number, line))
        return ok

    return record


def make_dataset(columns: dict, fav, sensitive=None) -> Dataset:
    """Dataset from a name -> list mapping; string lists become categorical."""
    schema, cols = [], []
    for name, values in columns.items():
        if all(isinstance(v, str) for v in values):
            schema.append(AttributeSpec(name, CATEGORICAL, tuple(sorted(set(values))),
                                        sensitive is None or name in sensitive))
            cols.append(list(values))
        else:
            schema.append(AttributeSpec(name, CONTINUOUS, (), sensitive is None or name in sensitive))
            cols.append([float(v) for v in values])
    rows = tuple(zip(*cols))
    return Dataset(tuple(schema), rows, np.asarray(fav, dtype=bool))


@pytest.fixture
def write_csv(tmp_path):
    def _write(text: str, name: str = "data.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write
