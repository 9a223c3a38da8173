from __future__ import annotations

import pytest

from lfharmonic.field import FieldParams


BACKENDS = [
    FieldParams.laurent(2),
    FieldParams.qp(2),
    FieldParams.laurent(3),
    FieldParams.qp(3),
    FieldParams.laurent(2, 2),
]


@pytest.fixture(params=BACKENDS, ids=str)
def fld(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
