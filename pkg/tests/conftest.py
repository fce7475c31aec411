import json
import math
import pathlib
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import strategies as st

from oms.model import UnitMode, make_params, normalize_units
from oms.presets import PRESETS

DATA = pathlib.Path(__file__).parent / "data"

_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def oracles():
    return json.loads((DATA / "oracles.json").read_text(encoding="utf-8"))


@pytest.fixture
def record_criterion():
    """Acceptance tests report here; the lines are printed after the run."""

    def record(label: str, passed: bool, detail: str = ""):
        _CRITERIA.append((label, bool(passed), detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in sorted(_CRITERIA, key=lambda c: int(c[0].split()[1].rstrip(":"))):
        terminalreporter.write_line(f"{label} {'PASS' if passed else 'FAIL'}  {detail}")


def normalized(name: str):
    return normalize_units(PRESETS[name].params, UnitMode.OMEGA_M1_UNITS)


def random_params(rng: np.random.Generator, *, targets: bool | None = None):
    """A valid parameter set in units of omega_m1 (plain numpy RNG, for bulk draws)."""
    if targets is None:
        targets = rng.random() < 0.5
    kap = tuple(rng.uniform(1e-3, 0.1, 3))
    kw = dict(
        kappa=kap,
        omega_m=(1.0, rng.uniform(0.8, 1.2)),
        gamma=tuple(10 ** rng.uniform(-6, -2, 2)),
        o_m1=rng.uniform(0, 5e-3),
        o_m2=rng.uniform(0, 5e-3),
        o_m31=rng.uniform(0, 5e-3),
        o_m32=rng.uniform(0, 5e-3),
        omega_d=tuple(rng.uniform(0, 2, 2)),
        omega_p=tuple(rng.uniform(0.01, 0.4, 2)),
        phi_d=tuple(rng.uniform(-math.pi, math.pi, 2)),
        phi_p=tuple(rng.uniform(-math.pi, math.pi, 2)),
    )
    if targets:
        kw["targets"] = tuple(rng.uniform(0.5, 1.5, 3))
    else:
        kw["delta_a"] = tuple(rng.uniform(-2, 2, 3))
    return replace(make_params(**kw), unit_mode=UnitMode.OMEGA_M1_UNITS)


@st.composite
def param_sets(draw, targets=None):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return random_params(np.random.default_rng(seed), targets=targets)
