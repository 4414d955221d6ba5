import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from building_blocks import builtin_block, builtin_lattice  # noqa: E402


@pytest.fixture
def laves():
    return builtin_block('laves')


@pytest.fixture
def diamond():
    return builtin_block('diamond')


@pytest.fixture
def cubic():
    return builtin_block('cubic')


@pytest.fixture
def honeycomb():
    return builtin_block('honeycomb')


@pytest.fixture
def l_dt():
    return builtin_lattice('L_DT')


@pytest.fixture
def l_d():
    return builtin_lattice('L_D')


@pytest.fixture
def rng():
    return np.random.default_rng(0)
