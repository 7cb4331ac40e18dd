"""Acceptance criteria at their stated sizes and tolerances.

Every criterion runs once on a shared context (the desk profile unless
``SINAI_PROFILE`` says otherwise) and prints one PASS/FAIL line; the lines
are repeated in the terminal summary.
"""

from __future__ import annotations

import os

import pytest

from conftest import ACCEPTANCE_LINES
from sinairg import acceptance

PROFILE = os.environ.get("SINAI_PROFILE", "desk")


@pytest.fixture(scope="module")
def ctx():
    return acceptance.Context(PROFILE, acceptance.DEFAULT_SEED)


@pytest.mark.slow
@pytest.mark.parametrize("k", range(1, len(acceptance.CRITERIA) + 1))
def test_criterion(ctx, k):
    r = acceptance.run_criterion(ctx, k)
    line = f"{r.line()}  [{r.seconds:.1f}s]"
    if r.note:
        line += f"  ({r.note})"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert r.passed, line
