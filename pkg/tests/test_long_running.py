"""Full-scale asymptotic run (N_c = 100000, L = 10001).

Marked slow and skipped by default; run with ``pytest -m slow``.
"""

import pytest

from qcdma import verify


@pytest.mark.slow
def test_full_scale_trend():
    chk = verify.check_trend(n_cs=(100, 1000, 100000), pairs=5)
    rows = chk.detail["rows"]
    assert rows[-1]["L"] == 10001
    assert all(r1["d_cross"] < r0["d_cross"] for r0, r1 in zip(rows, rows[1:]))
    assert all(r["d"] >= 0.98 for r in rows)
    assert rows[-1]["d_cross"] <= 1e-3


def test_trend_family_shape():
    fp = verify.trend_family(1000)
    assert fp.n_taps == 101
    assert fp.q_delay == 50
