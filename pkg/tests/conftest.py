import functools
import warnings

import pytest

from susyspin.qmcore import FieldConfig, ModelSpec, Sector, TanhW
from susyspin.solver import BoxEdgeWarning, bound_spectrum, factorized_spectra, ring_spectra
from susyspin.qmcore import Grid

BOX_LENGTH = 40.0
BOX_N = 4000
RING_N = 2048
RING_PERIODS = 2


@functools.lru_cache(maxsize=None)
def ring_pair(b0, k=1.0, periods=RING_PERIODS, n=RING_N, count=20):
    return ring_spectra(ModelSpec(FieldConfig(b0, k)), periods, n, count)


@functools.lru_cache(maxsize=None)
def box_sector(alpha, sector, b0=2.0, k=1.0, count=4, vectors=False):
    spec = ModelSpec(FieldConfig(b0, k), TanhW(alpha), sector)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoxEdgeWarning)
        return bound_spectrum(spec, BOX_LENGTH, BOX_N, count, want_vectors=vectors)


@functools.lru_cache(maxsize=None)
def box_factorized(alpha, b0=2.0, k=1.0, count=8):
    spec = ModelSpec(FieldConfig(b0, k), TanhW(alpha))
    return factorized_spectra(spec, Grid.box(BOX_LENGTH, BOX_N), count)


@pytest.fixture
def minus():
    return Sector.MINUS


@pytest.fixture
def plus():
    return Sector.PLUS


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.LEDGER:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.LEDGER):
        terminalreporter.write_line(mod.LEDGER[key])
