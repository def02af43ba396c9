import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sfgsim.config import load_config

# small, fast configuration for plumbing tests: short pump -> coarse
# analysis grids, thin crystals -> cheap kernels
FAST_OVERRIDES = [
    "grid.n_points=128",
    "grid.wavelength_min_nm=1250.0",
    "grid.wavelength_max_nm=2050.0",
    "pdc.pump_duration_fs=200.0",
    "pdc.crystal_length_mm=2.0",
    "pdc.gamma1=2.0",
    "pdc.truncation_max_modes=32",
    "sfg.length_mm=0.5",
    "propagation.gdd_fs2=100.0",
]


@pytest.fixture
def fast_cfg():
    return load_config(overrides=list(FAST_OVERRIDES))


@pytest.fixture
def make_cfg():
    def _make(*extra):
        return load_config(overrides=list(FAST_OVERRIDES) + list(extra))

    return _make
