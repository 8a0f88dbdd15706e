"""Bundled regression fixtures.

``fix_a``
    1-D; group ``a`` = {0, 4, 10}, group ``b`` = {1, 7}; quotas a=2, b=1.
    Optimum 3, attained by {0, 4, 7}, {0, 7, 10} and {1, 4, 10};
    the lowest-index tie-break picks {0, 4, 7}.
``fix_b``
    1-D single group {0, 1, 5}; k=2; optimum 5.
``fix_tight``
    Four points under an explicit metric, p1 white and p2..p4 black,
    d(p1, p2) = 0.2 and every other pair at 1.0; quotas 1 white, 2 black.
    Optimum {p1, p3, p4} with diversity 1.  Greedy clustering at a guess of 1
    must put p1 and p2 together.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .core import Dataset, FairnessSpec
from .io import load_dataset

_FILES = {"fix_a": "fix_a.csv", "fix_b": "fix_b.csv", "fix_tight": "fix_tight.txt"}
_QUOTAS = {"fix_a": {"a": 2, "b": 1}, "fix_b": {"g": 2}, "fix_tight": {"white": 1, "black": 2}}

NAMES = tuple(_FILES)


def fixture_path(name: str) -> Path:
    try:
        fname = _FILES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(NAMES)}") from None
    return Path(str(resources.files("fairdiv") / "fixtures" / fname))


def fixture_quotas(name: str) -> dict[str, int]:
    return dict(_QUOTAS[name])


def load_fixture(name: str) -> tuple[Dataset, FairnessSpec]:
    ds = load_dataset(fixture_path(name))
    return ds, FairnessSpec.from_mapping(ds, _QUOTAS[name])


def fix_a() -> tuple[Dataset, FairnessSpec]:
    return load_fixture("fix_a")


def fix_b() -> tuple[Dataset, FairnessSpec]:
    return load_fixture("fix_b")


def fix_tight() -> tuple[Dataset, FairnessSpec]:
    return load_fixture("fix_tight")
