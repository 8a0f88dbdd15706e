from __future__ import annotations

import numpy as np
import pytest

from fairdiv.core import Dataset, FairnessSpec
from fairdiv.synthetic import generate_synthetic, random_quotas

# criterion number -> (name, passed, detail)
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record(num: int, name: str, passed: bool, detail: str) -> None:
    ACCEPTANCE[num] = (name, passed, detail)
    print(f"{'PASS' if passed else 'FAIL'} [{num:2d}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        name, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} [{num:2d}] {name}: {detail}")


def instance(
    seed: int, n: int, m: int, *, dim: int = 2, matrix: bool = False, max_quota: int = 3
) -> tuple[Dataset, FairnessSpec]:
    ds = generate_synthetic(n, m, dim, matrix=matrix, seed=seed)
    return ds, FairnessSpec(random_quotas(ds, np.random.default_rng(seed + 10_000), max_quota))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
