import cmath
import json
from functools import lru_cache
from pathlib import Path

import pytest

from tronquee.equations import Case, EquationSpec, normalize
from tronquee.series import compute_levels

TESTDATA = Path(__file__).resolve().parents[1] / "testdata"

PARAMS = {
    "PIII_i": (0.5, 0.5, 1.0),
    "PIII_ii": (0.0, 0.7, 1.0),
    "PIV_1": (0.3, 0.2, None),
    "PIV_2": (-0.75, 0.5, None),
    "PIV_3": (0.4, 0.6, cmath.sqrt(-0.3)),
}


def make_spec(case, alpha=None, beta=None, A=None):
    a, b, A0 = PARAMS[case]
    alpha = a if alpha is None else alpha
    beta = b if beta is None else beta
    if A is None:
        A = A0 if case != "PIV_3" else cmath.sqrt(-beta / 2)
    return EquationSpec(Case(case), alpha, beta, A)


@lru_cache(maxsize=None)
def nf_for(case, alpha=None, beta=None):
    return normalize(make_spec(case, alpha, beta))


@lru_cache(maxsize=None)
def levels_for(case, K=3, N=30, alpha=None, beta=None):
    return compute_levels(nf_for(case, alpha, beta), K, N)


def load(name):
    return json.loads((TESTDATA / name).read_text())


@pytest.fixture(params=list(PARAMS))
def case(request):
    return request.param


# one verdict line per acceptance criterion, repeated at the end of the run
VERDICTS = {}


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[k])
