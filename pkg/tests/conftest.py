import os
import time
from pathlib import Path

import pytest

from reslab.pipeline import load_config, parse_config, run_sweep
from reslab.potential import build_potential

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"
REFERENCE_CFG = CONFIG_DIR / "reference.cfg"
HARMONIC_CFG = CONFIG_DIR / "harmonic.cfg"
CONTROL_CFG = CONFIG_DIR / "control.cfg"

REF_POTENTIAL = (
    "core = gauss(-1, -2.8, 0.4) + gauss(1, -2.4, 0.4)\n"
    "tail.a = 0.5\n"
    "tail.coeff = 4.0\n"
    "glue_radius = 3.0\n"
)

CONTROL_POTENTIAL = "core = poly(0, 0, 0.5) + gauss(0.8, 0.4, 0.3)\n"

# short sweep used for the seed-tracking and contour-drift checks; quasimode
# diagnostics are switched off because only the resonance columns are read
DRIFT_CFG_TEXT = """\
[potential]
core = gauss(-1, -2.8, 0.4) + gauss(1, -2.4, 0.4)
tail.a = 0.5
tail.coeff = 4.0
glue_radius = 3.0

[sweep]
eps = 0.16, 0.14, 0.12
k = 2
quasimode = false

[contour]
beta = 0.3
mode = sharp

[symbol]
beta = 0.2

[output]
label = drift
"""


@pytest.fixture(scope="session", autouse=True)
def _scratch_cache(tmp_path_factory):
    # every session caches sweeps in a fresh scratch dir so stale records
    # from earlier runs can never satisfy an assertion
    cache = tmp_path_factory.mktemp("cache")
    old = os.environ.get("RESLAB_CACHE")
    os.environ["RESLAB_CACHE"] = str(cache)
    yield str(cache)
    if old is None:
        os.environ.pop("RESLAB_CACHE", None)
    else:
        os.environ["RESLAB_CACHE"] = old


@pytest.fixture(scope="session")
def ref_spec():
    return build_potential(REF_POTENTIAL)


@pytest.fixture(scope="session")
def harmonic_spec():
    return build_potential("core = poly(0, 0, 0.5)")


@pytest.fixture(scope="session")
def control_spec():
    return build_potential(CONTROL_POTENTIAL)


@pytest.fixture(scope="session")
def ref_sweep(_scratch_cache):
    """(record, wall seconds) for the double-well reference sweep."""
    cfg = load_config(str(REFERENCE_CFG))
    t0 = time.perf_counter()
    record = run_sweep(cfg)
    return record, time.perf_counter() - t0


@pytest.fixture(scope="session")
def drift_sweep(_scratch_cache):
    cfg = parse_config(DRIFT_CFG_TEXT)
    t0 = time.perf_counter()
    record = run_sweep(cfg)
    return record, time.perf_counter() - t0
