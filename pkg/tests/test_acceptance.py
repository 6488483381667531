"""End-to-end verification battery.

Runs the nine checks from hvortex.verify at their production settings
(r_max = 30, n = 6000 where applicable) and asserts each one passes,
printing the same one-line summary the ``vortexctl verify-all`` command
emits.  Expect a few minutes of wall time on first run; the profile
cache makes repeats much faster.
"""

import pytest

from hvortex.verify import ALL_CHECKS, VerifyParams, run_all


@pytest.fixture(scope="module")
def report():
    return run_all(VerifyParams())


_NAMES = [
    "profiles",
    "gap",
    "resonance",
    "fundamental_system",
    "round_trip",
    "formulation_equivalence",
    "stability",
    "conservation",
    "lemmas",
]


@pytest.mark.parametrize("idx,name", list(enumerate(_NAMES)))
def test_criterion(report, idx, name):
    r = report[idx]
    print(r.line())
    assert r.passed, r.line()


def test_report_is_complete(report):
    assert len(report) == len(ALL_CHECKS) == 9
