"""One test per release criterion; the slow ones drive the full parameter
optimizations at their stated budgets (several minutes total)."""

import pytest

from gkpcavity.acceptance import ALL_CRITERIA, _Shared

SLOW = {3, 4, 10}


@pytest.fixture(scope="module")
def shared():
    return _Shared(seed=11, budget=300)


@pytest.mark.parametrize(
    "cid",
    [
        pytest.param(cid, marks=pytest.mark.slow) if cid in SLOW else cid
        for cid in sorted(ALL_CRITERIA)
    ],
)
def test_criterion(cid, shared):
    result = ALL_CRITERIA[cid](shared)
    lines = "; ".join(
        f"{c.label}: {c.measured:.6g} (expect {c.expected})" for c in result.checks
    )
    print(f"[criterion {cid}] {result.name}: {lines}")
    failed = [c for c in result.checks if not c.passed]
    assert not failed, (
        f"criterion {cid} ({result.name}): "
        + "; ".join(f"{c.label}={c.measured:.6g}, expected {c.expected}" for c in failed)
    )
